#include "autobayes/measure.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "autobayes/errors.hpp"

namespace autobayes {

namespace {

void check_weights(std::span<const double> w, const char* what) {
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument(std::string(what) + " weights must be finite and nonnegative");
    }
  }
}

void require_same_space(const FiniteSpace& a, const FiniteSpace& b, const char* op) {
  if (!(a == b)) {
    throw BoundaryMismatch(std::string(op) + ": space " + a.describe() + " does not match " +
                           b.describe());
  }
}

}  // namespace

Measure::Measure(FiniteSpace space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (weights_.size() != space_.size()) {
    throw InvalidArgument("measure on " + space_.describe() + " needs " +
                          std::to_string(space_.size()) + " weights, got " +
                          std::to_string(weights_.size()));
  }
  check_weights(weights_, "measure");
}

Measure Measure::dirac(FiniteSpace space, std::size_t point) {
  std::vector<double> w(space.size(), 0.0);
  w.at(point) = 1.0;
  return Measure(std::move(space), std::move(w));
}

Measure Measure::uniform(FiniteSpace space) {
  const auto n = space.size();
  return Measure(std::move(space), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Measure Measure::zero(FiniteSpace space) {
  const auto n = space.size();
  return Measure(std::move(space), std::vector<double>(n, 0.0));
}

double Measure::total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

bool Measure::is_markov(double tol) const { return std::abs(total() - 1.0) <= tol; }

Kernel Measure::as_kernel() const { return Kernel(FiniteSpace::unit(), space_, weights_); }

Kernel::Kernel(FiniteSpace domain, FiniteSpace codomain, std::vector<double> weights)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), w_(std::move(weights)) {
  if (w_.size() != domain_.size() * codomain_.size()) {
    throw InvalidArgument("kernel " + domain_.describe() + " ~> " + codomain_.describe() +
                          " needs " + std::to_string(domain_.size() * codomain_.size()) +
                          " weights, got " + std::to_string(w_.size()));
  }
  check_weights(w_, "kernel");
}

Kernel Kernel::identity(const FiniteSpace& space) {
  const auto n = space.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return Kernel(space, space, std::move(w));
}

Kernel Kernel::zero(FiniteSpace domain, FiniteSpace codomain) {
  const auto n = domain.size() * codomain.size();
  return Kernel(std::move(domain), std::move(codomain), std::vector<double>(n, 0.0));
}

Kernel Kernel::from_rows(FiniteSpace domain, FiniteSpace codomain,
                         const std::vector<std::vector<double>>& rows) {
  if (rows.size() != domain.size()) {
    throw InvalidArgument("kernel needs " + std::to_string(domain.size()) + " rows, got " +
                          std::to_string(rows.size()));
  }
  std::vector<double> w;
  w.reserve(domain.size() * codomain.size());
  for (const auto& r : rows) {
    if (r.size() != codomain.size()) {
      throw InvalidArgument("kernel row needs " + std::to_string(codomain.size()) +
                            " entries, got " + std::to_string(r.size()));
    }
    w.insert(w.end(), r.begin(), r.end());
  }
  return Kernel(std::move(domain), std::move(codomain), std::move(w));
}

Kernel Kernel::deterministic(FiniteSpace domain, FiniteSpace codomain,
                             std::span<const std::size_t> f) {
  if (f.size() != domain.size()) throw InvalidArgument("deterministic map has wrong arity");
  std::vector<double> w(domain.size() * codomain.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] >= codomain.size()) throw InvalidArgument("deterministic map out of range");
    w[x * codomain.size() + f[x]] = 1.0;
  }
  return Kernel(std::move(domain), std::move(codomain), std::move(w));
}

Measure Kernel::row_measure(std::size_t x) const {
  auto r = row(x);
  return Measure(codomain_, std::vector<double>(r.begin(), r.end()));
}

bool Kernel::is_markov(double tol) const {
  for (std::size_t x = 0; x < rows(); ++x) {
    auto r = row(x);
    if (std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0) > tol) return false;
  }
  return true;
}

Kernel Kernel::permute_codomain(std::span<const std::size_t> order) const {
  auto map = atom_permutation(codomain_, order);
  std::vector<double> w(w_.size());
  const auto n = cols();
  for (std::size_t x = 0; x < rows(); ++x) {
    for (std::size_t y = 0; y < n; ++y) w[x * n + map[y]] = w_[x * n + y];
  }
  return Kernel(domain_, codomain_.select(order), std::move(w));
}

Kernel Kernel::permute_domain(std::span<const std::size_t> order) const {
  auto map = atom_permutation(domain_, order);
  std::vector<double> w(w_.size());
  const auto n = cols();
  for (std::size_t x = 0; x < rows(); ++x) {
    std::copy_n(w_.begin() + static_cast<std::ptrdiff_t>(x * n), n,
                w.begin() + static_cast<std::ptrdiff_t>(map[x] * n));
  }
  return Kernel(domain_.select(order), codomain_, std::move(w));
}

Kernel compose_kernels(const Kernel& d, const Kernel& c) {
  require_same_space(c.codomain(), d.domain(), "compose_kernels");
  const auto nx = c.rows(), ny = c.cols(), nz = d.cols();
  std::vector<double> w(nx * nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double cy = c(x, y);
      if (cy == 0.0) continue;
      for (std::size_t z = 0; z < nz; ++z) w[x * nz + z] += d(y, z) * cy;
    }
  }
  return Kernel(c.domain(), d.codomain(), std::move(w));
}

Measure pushforward(const Kernel& c, const Measure& pi) {
  require_same_space(pi.space(), c.domain(), "pushforward");
  std::vector<double> w(c.cols(), 0.0);
  for (std::size_t x = 0; x < c.rows(); ++x) {
    if (pi[x] == 0.0) continue;
    for (std::size_t y = 0; y < c.cols(); ++y) w[y] += c(x, y) * pi[x];
  }
  return Measure(c.codomain(), std::move(w));
}

Kernel tensor_kernels(const Kernel& a, const Kernel& b) {
  const auto na = a.cols(), nb = b.cols();
  const auto cols = na * nb;
  std::vector<double> w(a.rows() * b.rows() * cols);
  for (std::size_t x = 0; x < a.rows(); ++x) {
    for (std::size_t x2 = 0; x2 < b.rows(); ++x2) {
      const std::size_t r = x * b.rows() + x2;
      for (std::size_t y = 0; y < na; ++y) {
        for (std::size_t y2 = 0; y2 < nb; ++y2) w[r * cols + y * nb + y2] = a(x, y) * b(x2, y2);
      }
    }
  }
  return Kernel(FiniteSpace::product(a.domain(), b.domain()),
                FiniteSpace::product(a.codomain(), b.codomain()), std::move(w));
}

Measure product_measure(const Measure& a, const Measure& b) {
  std::vector<double> w(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) w[i * b.size() + j] = a[i] * b[j];
  }
  return Measure(FiniteSpace::product(a.space(), b.space()), std::move(w));
}

Measure marginal(const Measure& joint, const FiniteSpace& first, const FiniteSpace& second,
                 Side side) {
  if (!(joint.space() == FiniteSpace::product(first, second))) {
    throw BoundaryMismatch("marginal: " + joint.space().describe() +
                           " is not the declared product " + first.describe() + " * " +
                           second.describe());
  }
  const auto n1 = first.size(), n2 = second.size();
  std::vector<double> w(side == Side::first ? n1 : n2, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) w[side == Side::first ? i : j] += joint[i * n2 + j];
  }
  return Measure(side == Side::first ? first : second, std::move(w));
}

Measure project(const Measure& m, std::span<const std::size_t> keep_atoms) {
  const auto& space = m.space();
  FiniteSpace target = space.select(keep_atoms);
  std::vector<double> w(target.size(), 0.0);
  std::vector<std::size_t> sub(keep_atoms.size());
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    if (m[idx] == 0.0) continue;
    auto coords = space.unravel(idx);
    for (std::size_t k = 0; k < keep_atoms.size(); ++k) sub[k] = coords[keep_atoms[k]];
    w[target.ravel(sub)] += m[idx];
  }
  return Measure(std::move(target), std::move(w));
}

Measure normalize(const Measure& m) {
  const double t = m.total();
  if (!(t > 0.0)) throw InvalidArgument("cannot normalize a measure of zero mass");
  std::vector<double> w(m.weights().begin(), m.weights().end());
  for (auto& v : w) v /= t;
  return Measure(m.space(), std::move(w));
}

double kl_divergence(const Measure& p, const Measure& q) {
  require_same_space(p.space(), q.space(), "kl_divergence");
  if (!p.is_markov()) throw NotNormalized("kl_divergence: first argument is not normalized");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can push a true zero slightly negative.
  return acc < 0.0 && acc > -kTolEq ? 0.0 : acc;
}

double shannon_entropy(const Measure& p) {
  if (!p.is_markov()) throw NotNormalized("shannon_entropy: measure is not normalized");
  double acc = 0.0;
  for (double v : p.weights()) {
    if (v > 0.0) acc -= v * std::log(v);
  }
  return acc < 0.0 ? 0.0 : acc;
}

double mutual_information(const Measure& joint, const FiniteSpace& first,
                          const FiniteSpace& second) {
  auto a = marginal(joint, first, second, Side::first);
  auto b = marginal(joint, first, second, Side::second);
  return kl_divergence(joint, product_measure(a, b));
}

double expect(std::span<const double> weights, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    acc += weights[i] * values[i];
  }
  return acc;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return kInf;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    const double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) return kInf;
    m = std::max(m, d);
  }
  return m;
}

}  // namespace autobayes
