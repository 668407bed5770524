#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "autobayes/space.hpp"

namespace autobayes {

// Extended reals are plain doubles; +inf stands for the top element of
// [0, inf] and is never reported by exception.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute tolerance for identities that hold exactly in exact arithmetic.
inline constexpr double kTolEq = 1e-9;
// Row-sum tolerance for the markov predicate.
inline constexpr double kTolNorm = 1e-9;

class Kernel;

// Nonnegative finite weights over the points of a finite space. The canonical
// base measure is counting measure, so densities equal weights.
class Measure {
 public:
  // Throws InvalidArgument when sizes disagree or a weight is negative/non-finite.
  Measure(FiniteSpace space, std::vector<double> weights);

  static Measure dirac(FiniteSpace space, std::size_t point);
  static Measure uniform(FiniteSpace space);
  static Measure zero(FiniteSpace space);
  // The unique markov measure on the unit space.
  static Measure unit() { return Measure(FiniteSpace::unit(), {1.0}); }

  const FiniteSpace& space() const { return space_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  double density(std::size_t i) const { return weights_.at(i); }
  double total() const;
  bool is_markov(double tol = kTolNorm) const;

  // The measure as a kernel out of the unit space.
  Kernel as_kernel() const;

  bool operator==(const Measure&) const = default;

 private:
  FiniteSpace space_;
  std::vector<double> weights_;
};

// Kernel X ~> Y stored as a dense row-major matrix w[x][y] = c(y|x).
// Rows need not be normalized.
class Kernel {
 public:
  Kernel(FiniteSpace domain, FiniteSpace codomain, std::vector<double> weights);

  static Kernel identity(const FiniteSpace& space);
  static Kernel zero(FiniteSpace domain, FiniteSpace codomain);
  static Kernel from_rows(FiniteSpace domain, FiniteSpace codomain,
                          const std::vector<std::vector<double>>& rows);
  // Deterministic kernel sending x to point f[x] of the codomain.
  static Kernel deterministic(FiniteSpace domain, FiniteSpace codomain,
                              std::span<const std::size_t> f);

  const FiniteSpace& domain() const { return domain_; }
  const FiniteSpace& codomain() const { return codomain_; }
  std::size_t rows() const { return domain_.size(); }
  std::size_t cols() const { return codomain_.size(); }

  double operator()(std::size_t x, std::size_t y) const { return w_[x * cols() + y]; }
  std::span<const double> row(std::size_t x) const {
    return std::span<const double>(w_).subspan(x * cols(), cols());
  }
  Measure row_measure(std::size_t x) const;
  std::span<const double> data() const { return w_; }

  bool is_markov(double tol = kTolNorm) const;

  // Relabel codomain (resp. domain) factors; weights are moved, not changed.
  Kernel permute_codomain(std::span<const std::size_t> order) const;
  Kernel permute_domain(std::span<const std::size_t> order) const;

  bool operator==(const Kernel&) const = default;

 private:
  FiniteSpace domain_;
  FiniteSpace codomain_;
  std::vector<double> w_;
};

// Chapman-Kolmogorov: (d . c)[z|x] = sum_y d[z|y] c[y|x].
Kernel compose_kernels(const Kernel& d, const Kernel& c);
// c_* pi [y] = sum_x c[y|x] pi[x].
Measure pushforward(const Kernel& c, const Measure& pi);
// (a (x) b)[(y,y')|(x,x')] = a[y|x] b[y'|x'].
Kernel tensor_kernels(const Kernel& a, const Kernel& b);
Measure product_measure(const Measure& a, const Measure& b);

enum class Side { first, second };

// Marginal of a measure on first*second onto one side. Throws
// BoundaryMismatch when the measure does not live on that declared product.
Measure marginal(const Measure& joint, const FiniteSpace& first, const FiniteSpace& second,
                 Side side);
// Keep the listed atoms (in the listed order) and sum out the rest.
Measure project(const Measure& m, std::span<const std::size_t> keep_atoms);

// Rescale to total mass one. Throws InvalidArgument on zero mass.
Measure normalize(const Measure& m);

// KL(p || q) in nats. p must be markov; +inf when p is not absolutely
// continuous with respect to q.
double kl_divergence(const Measure& p, const Measure& q);
// Shannon entropy in nats relative to counting measure; p must be markov.
double shannon_entropy(const Measure& p);
// KL(omega || omega_first (x) omega_second).
double mutual_information(const Measure& joint, const FiniteSpace& first,
                          const FiniteSpace& second);

// Expectation sum_i w_i f_i with the convention 0 * inf = 0.
double expect(std::span<const double> weights, std::span<const double> values);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace autobayes
