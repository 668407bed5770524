#include "autobayes/open_model.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "autobayes/errors.hpp"

namespace autobayes {

namespace {

Kernel sum_out_latent(const Kernel& k, const FiniteSpace& latent, const FiniteSpace& observed) {
  const auto nl = latent.size(), ny = observed.size();
  std::vector<double> w(k.rows() * ny, 0.0);
  for (std::size_t x = 0; x < k.rows(); ++x) {
    for (std::size_t a = 0; a < nl; ++a) {
      for (std::size_t y = 0; y < ny; ++y) w[x * ny + y] += k(x, a * ny + y);
    }
  }
  return Kernel(k.domain(), observed, std::move(w));
}

std::vector<std::size_t> iota(std::size_t from, std::size_t to) {
  std::vector<std::size_t> v(to - from);
  std::iota(v.begin(), v.end(), from);
  return v;
}

void check_atom_selection(std::span<const std::size_t> atoms, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (auto a : atoms) {
    if (a >= n) throw InvalidArgument("latent factor index " + std::to_string(a) + " out of range");
    if (seen[a]) throw InvalidArgument("latent factor selected twice");
    seen[a] = true;
  }
}

}  // namespace

OpenModel::OpenModel(FiniteSpace unobserved, FiniteSpace latent, FiniteSpace observed,
                     Kernel kernel)
    : unobserved_(std::move(unobserved)),
      latent_(std::move(latent)),
      observed_(std::move(observed)),
      kernel_(std::move(kernel)),
      observed_marginal_(Kernel::zero(FiniteSpace::unit(), FiniteSpace::unit())) {
  if (!(kernel_.domain() == unobserved_)) {
    throw BoundaryMismatch("open model kernel domain " + kernel_.domain().describe() +
                           " does not match unobserved space " + unobserved_.describe());
  }
  if (!(kernel_.codomain() == FiniteSpace::product(latent_, observed_))) {
    throw BoundaryMismatch("open model kernel codomain " + kernel_.codomain().describe() +
                           " does not match latent*observed " +
                           FiniteSpace::product(latent_, observed_).describe());
  }
  observed_marginal_ = sum_out_latent(kernel_, latent_, observed_);
}

OpenModel OpenModel::pure(Kernel kernel) {
  auto x = kernel.domain();
  auto y = kernel.codomain();
  return OpenModel(std::move(x), FiniteSpace::unit(), std::move(y), std::move(kernel));
}

OpenModel OpenModel::distribution(const Measure& m) { return pure(m.as_kernel()); }

Measure OpenModel::pushforward(const Measure& prior) const {
  return autobayes::pushforward(observed_marginal_, prior);
}

Measure OpenModel::joint_pushforward(const Measure& prior) const {
  return autobayes::pushforward(kernel_, prior);
}

OpenModel seq_compose(const OpenModel& q, const OpenModel& p) {
  if (!(p.observed() == q.unobserved())) {
    throw BoundaryMismatch("seq_compose: observed space " + p.observed().describe() +
                           " does not match unobserved space " + q.unobserved().describe());
  }
  const auto nx = p.unobserved().size();
  const auto ns = p.latent().size();
  const auto ny = p.observed().size();
  const auto nt = q.latent().size();
  const auto nz = q.observed().size();
  const FiniteSpace latent = FiniteSpace::product(
      std::vector<FiniteSpace>{p.latent(), p.observed(), q.latent()});
  const auto cols = ns * ny * nt * nz;
  std::vector<double> w(nx * cols, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t y = 0; y < ny; ++y) {
        const double pw = p.weight(x, s, y);
        if (pw == 0.0) continue;
        const std::size_t base = x * cols + (s * ny + y) * nt * nz;
        for (std::size_t t = 0; t < nt; ++t) {
          for (std::size_t z = 0; z < nz; ++z) w[base + t * nz + z] = q.weight(y, t, z) * pw;
        }
      }
    }
  }
  Kernel k(p.unobserved(), FiniteSpace::product(latent, q.observed()), std::move(w));
  return OpenModel(p.unobserved(), latent, q.observed(), std::move(k));
}

OpenModel tensor(const OpenModel& q, const OpenModel& q2) {
  Kernel k = tensor_kernels(q.kernel(), q2.kernel());
  const auto lt = q.latent().atom_count(), zt = q.observed().atom_count();
  const auto lt2 = q2.latent().atom_count(), zt2 = q2.observed().atom_count();
  // codomain atoms are (Lq, Z, Lq2, Z2); reorder to (Lq, Lq2, Z, Z2)
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < lt; ++i) order.push_back(i);
  for (std::size_t i = 0; i < lt2; ++i) order.push_back(lt + zt + i);
  for (std::size_t i = 0; i < zt; ++i) order.push_back(lt + i);
  for (std::size_t i = 0; i < zt2; ++i) order.push_back(lt + zt + lt2 + i);
  k = k.permute_codomain(order);
  return OpenModel(FiniteSpace::product(q.unobserved(), q2.unobserved()),
                   FiniteSpace::product(q.latent(), q2.latent()),
                   FiniteSpace::product(q.observed(), q2.observed()), std::move(k));
}

OpenModel identity(const FiniteSpace& space) { return OpenModel::pure(Kernel::identity(space)); }

OpenModel copier(const FiniteSpace& space) {
  const auto n = space.size();
  std::vector<std::size_t> f(n);
  for (std::size_t a = 0; a < n; ++a) f[a] = a * n + a;
  return OpenModel::pure(
      Kernel::deterministic(space, FiniteSpace::product(space, space), f));
}

OpenModel cup(const FiniteSpace& space) {
  const auto n = space.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) w[a * n + a] = 1.0;
  return OpenModel::pure(
      Kernel(FiniteSpace::unit(), FiniteSpace::product(space, space), std::move(w)));
}

OpenModel cap(const FiniteSpace& space) {
  const auto n = space.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) w[a * n + a] = 1.0;
  return OpenModel::pure(
      Kernel(FiniteSpace::product(space, space), FiniteSpace::unit(), std::move(w)));
}

OpenModel swap(const FiniteSpace& first, const FiniteSpace& second) {
  const auto na = first.size(), nb = second.size();
  std::vector<std::size_t> f(na * nb);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) f[a * nb + b] = b * na + a;
  }
  return OpenModel::pure(Kernel::deterministic(FiniteSpace::product(first, second),
                                               FiniteSpace::product(second, first), f));
}

OpenModel discard(const FiniteSpace& space) {
  std::vector<std::size_t> f(space.size(), 0);
  return OpenModel::pure(Kernel::deterministic(space, FiniteSpace::unit(), f));
}

OpenModel reveal(const OpenModel& p, std::span<const std::size_t> latent_atoms) {
  if (p.is_pure()) throw InvalidArgument("reveal: model is pure, there is no latent factor");
  if (latent_atoms.empty()) throw InvalidArgument("reveal: no latent factor selected");
  const auto nl = p.latent().atom_count();
  const auto ny = p.observed().atom_count();
  check_atom_selection(latent_atoms, nl);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < nl; ++i) {
    if (std::find(latent_atoms.begin(), latent_atoms.end(), i) == latent_atoms.end()) {
      kept.push_back(i);
    }
  }
  std::vector<std::size_t> order = kept;
  order.insert(order.end(), latent_atoms.begin(), latent_atoms.end());
  for (std::size_t i = 0; i < ny; ++i) order.push_back(nl + i);
  Kernel k = p.kernel().permute_codomain(order);
  FiniteSpace latent = p.latent().select(kept);
  FiniteSpace observed = FiniteSpace::product(p.latent().select(latent_atoms), p.observed());
  return OpenModel(p.unobserved(), std::move(latent), std::move(observed), std::move(k));
}

OpenModel reveal(const OpenModel& p, std::string_view latent_label) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < p.latent().atom_count(); ++i) {
    if (p.latent().atom(i).label == latent_label) hits.push_back(i);
  }
  if (hits.empty()) {
    throw InvalidArgument("reveal: no latent factor labelled '" + std::string(latent_label) + "'");
  }
  if (hits.size() > 1) {
    throw InvalidArgument("reveal: latent factor label '" + std::string(latent_label) +
                          "' is ambiguous");
  }
  return reveal(p, hits);
}

OpenModel reveal_all(const OpenModel& p) {
  auto all = iota(0, p.latent().atom_count());
  return reveal(p, all);
}

OpenModel extend_dummy(const OpenModel& p, const FiniteSpace& space) {
  return tensor(identity(space), p);
}

OpenModel reveal_inputs(const OpenModel& p) {
  if (!p.is_pure()) throw InvalidArgument("reveal_inputs: model must be pure");
  const auto nx = p.unobserved().size(), ny = p.observed().size();
  std::vector<double> w(nx * nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) w[x * nx * ny + x * ny + y] = p.kernel()(x, y);
  }
  FiniteSpace out = FiniteSpace::product(p.unobserved(), p.observed());
  return OpenModel::pure(Kernel(p.unobserved(), std::move(out), std::move(w)));
}

OpenModel forget_latent(const OpenModel& p, std::span<const std::size_t> latent_atoms) {
  const auto nl = p.latent().atom_count();
  const auto ny = p.observed().atom_count();
  check_atom_selection(latent_atoms, nl);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < nl; ++i) {
    if (std::find(latent_atoms.begin(), latent_atoms.end(), i) == latent_atoms.end()) {
      keep.push_back(i);
    }
  }
  const std::size_t kept_latent = keep.size();
  for (std::size_t i = 0; i < ny; ++i) keep.push_back(nl + i);
  const auto& k = p.kernel();
  FiniteSpace cod = k.codomain().select(keep);
  std::vector<double> w;
  w.reserve(k.rows() * cod.size());
  for (std::size_t x = 0; x < k.rows(); ++x) {
    Measure r = project(k.row_measure(x), keep);
    w.insert(w.end(), r.weights().begin(), r.weights().end());
  }
  std::vector<std::size_t> latent_keep(keep.begin(), keep.begin() + kept_latent);
  return OpenModel(p.unobserved(), p.latent().select(latent_keep), p.observed(),
                   Kernel(p.unobserved(), std::move(cod), std::move(w)));
}

OpenModel permute_latent(const OpenModel& p, std::span<const std::size_t> order) {
  const auto nl = p.latent().atom_count();
  const auto ny = p.observed().atom_count();
  std::vector<std::size_t> full(order.begin(), order.end());
  for (std::size_t i = 0; i < ny; ++i) full.push_back(nl + i);
  return OpenModel(p.unobserved(), p.latent().select(order), p.observed(),
                   p.kernel().permute_codomain(full));
}

OpenModel permute_unobserved(const OpenModel& p, std::span<const std::size_t> order) {
  Kernel k = p.kernel().permute_domain(order);
  return OpenModel(p.unobserved().select(order), p.latent(), p.observed(), std::move(k));
}

OpenModel permute_observed(const OpenModel& p, std::span<const std::size_t> order) {
  const auto nl = p.latent().atom_count();
  auto full = iota(0, nl);
  for (auto i : order) full.push_back(nl + i);
  return OpenModel(p.unobserved(), p.latent(), p.observed().select(order),
                   p.kernel().permute_codomain(full));
}

OpenModel normalize_rows(const OpenModel& p) {
  const auto& k = p.kernel();
  std::vector<double> w(k.data().begin(), k.data().end());
  for (std::size_t x = 0; x < k.rows(); ++x) {
    auto r = k.row(x);
    const double t = std::accumulate(r.begin(), r.end(), 0.0);
    if (t <= 0.0) continue;
    for (std::size_t j = 0; j < k.cols(); ++j) w[x * k.cols() + j] /= t;
  }
  return OpenModel(p.unobserved(), p.latent(), p.observed(),
                   Kernel(k.domain(), k.codomain(), std::move(w)));
}

std::vector<std::size_t> topological_order(std::span<const BayesNode> nodes) {
  const auto n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : nodes[i].parents) {
      if (j >= n) throw InvalidArgument("bayes net: parent index out of range");
      if (j == i) throw InvalidArgument("bayes net: cycle detected (self loop)");
    }
  }
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (order.size() < n) {
    bool progressed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      bool ready = std::all_of(nodes[i].parents.begin(), nodes[i].parents.end(),
                               [&](std::size_t j) { return placed[j]; });
      if (ready) {
        placed[i] = true;
        order.push_back(i);
        progressed = true;
        break;
      }
    }
    if (!progressed) throw InvalidArgument("bayes net: cycle detected");
  }
  return order;
}

OpenModel from_bayes_net(std::span<const BayesNode> nodes) {
  if (nodes.empty()) throw InvalidArgument("bayes net: no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.space.atom_count() != 1) {
      throw InvalidArgument("bayes net: node " + std::to_string(i) + " must be an atomic space");
    }
    std::vector<FiniteSpace> pa;
    for (auto j : node.parents) {
      if (j >= nodes.size()) throw InvalidArgument("bayes net: parent index out of range");
      pa.push_back(nodes[j].space);
    }
    std::vector<std::size_t> sorted_pa = node.parents;
    std::sort(sorted_pa.begin(), sorted_pa.end());
    if (std::adjacent_find(sorted_pa.begin(), sorted_pa.end()) != sorted_pa.end()) {
      throw InvalidArgument("bayes net: node " + std::to_string(i) + " lists a parent twice");
    }
    if (!(node.conditional.domain() == FiniteSpace::product(pa)) ||
        !(node.conditional.codomain() == node.space)) {
      throw BoundaryMismatch("bayes net: conditional of node " + std::to_string(i) + " is " +
                             node.conditional.domain().describe() + " ~> " +
                             node.conditional.codomain().describe() + ", expected " +
                             FiniteSpace::product(pa).describe() + " ~> " +
                             node.space.describe());
    }
  }

  const auto order = topological_order(nodes);
  std::vector<std::size_t> prefix;  // node ids already placed, in sorted order
  std::optional<OpenModel> composite;
  for (auto i : order) {
    const auto& node = nodes[i];
    std::vector<std::size_t> nonpa;
    std::vector<FiniteSpace> nonpa_spaces;
    for (auto j : prefix) {
      if (std::find(node.parents.begin(), node.parents.end(), j) == node.parents.end()) {
        nonpa.push_back(j);
        nonpa_spaces.push_back(nodes[j].space);
      }
    }
    OpenModel stage = extend_dummy(reveal_inputs(OpenModel::pure(node.conditional)),
                                   FiniteSpace::product(nonpa_spaces));
    // boundary atoms are now (nonpa..., parents...) -> (nonpa..., parents..., i)
    std::vector<std::size_t> current = nonpa;
    current.insert(current.end(), node.parents.begin(), node.parents.end());
    auto position = [&](std::size_t id) {
      return static_cast<std::size_t>(std::find(current.begin(), current.end(), id) -
                                      current.begin());
    };
    std::vector<std::size_t> in_order;
    for (auto j : prefix) in_order.push_back(position(j));
    stage = permute_unobserved(stage, in_order);
    std::vector<std::size_t> out_order = in_order;
    out_order.push_back(current.size());
    stage = permute_observed(stage, out_order);

    composite = composite ? seq_compose(stage, *composite) : stage;
    prefix.push_back(i);
  }

  std::vector<std::size_t> decl_order(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    decl_order[j] = static_cast<std::size_t>(std::find(prefix.begin(), prefix.end(), j) -
                                             prefix.begin());
  }
  return permute_observed(*composite, decl_order);
}

}  // namespace autobayes
