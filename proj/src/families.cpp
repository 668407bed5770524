#include "autobayes/families.hpp"

#include <algorithm>
#include <cmath>

#include "autobayes/errors.hpp"
#include "autobayes/measure.hpp"

namespace autobayes {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logits[i] - m);
  for (auto& v : p) v /= z;
  return p;
}

std::vector<double> softmax_fisher(std::span<const double> p) {
  const auto n = p.size();
  std::vector<double> f(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) f[i * n + j] = (i == j ? p[i] : 0.0) - p[i] * p[j];
  }
  return f;
}

std::vector<double> softmax_expectation_gradient(std::span<const double> q,
                                                 std::span<const double> e) {
  double mean = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) mean += q[i] * e[i];
  }
  std::vector<double> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) g[i] = q[i] > 0.0 ? q[i] * (e[i] - mean) : 0.0;
  return g;
}

std::vector<double> softmax_entropy_gradient(std::span<const double> q) {
  double h = 0.0;
  for (double v : q) {
    if (v > 0.0) h -= v * std::log(v);
  }
  std::vector<double> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) g[i] = q[i] > 0.0 ? -q[i] * (std::log(q[i]) + h) : 0.0;
  return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw InvalidArgument("grid needs n >= 2 and lo < hi");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

std::vector<double> grid_gaussian(std::span<const double> grid, double mean, double log_std) {
  const double s = std::exp(log_std);
  std::vector<double> w(grid.size());
  double top = -kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = (grid[i] - mean) / s;
    w[i] = -0.5 * d * d;
    top = std::max(top, w[i]);
  }
  double z = 0.0;
  for (auto& v : w) z += v = std::exp(v - top);
  for (auto& v : w) v /= z;
  return w;
}

}  // namespace autobayes
