#pragma once

#include <span>
#include <vector>

namespace autobayes {

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);
// diag(p) - p p^T, row-major n x n.
std::vector<double> softmax_fisher(std::span<const double> p);
// d/dtheta E_{softmax(theta)}[e] = q * (e - <e>_q).
std::vector<double> softmax_expectation_gradient(std::span<const double> q,
                                                 std::span<const double> e);
// d/dtheta H(softmax(theta)) = -q * (log q + H).
std::vector<double> softmax_entropy_gradient(std::span<const double> q);

// n evenly spaced points from lo to hi inclusive (n >= 2).
std::vector<double> linspace(double lo, double hi, std::size_t n);
// Gaussian density at the grid points, renormalized to unit mass.
std::vector<double> grid_gaussian(std::span<const double> grid, double mean, double log_std);

}  // namespace autobayes
