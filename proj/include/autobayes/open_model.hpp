#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autobayes/measure.hpp"

namespace autobayes {

// An open model X -o-> Y: a kernel X ~> L * Y whose latent space L holds the
// intermediates hidden by composition.
class OpenModel {
 public:
  // Throws BoundaryMismatch unless kernel is unobserved ~> latent * observed.
  OpenModel(FiniteSpace unobserved, FiniteSpace latent, FiniteSpace observed, Kernel kernel);

  // Pure model from a kernel X ~> Y (latent is the unit space).
  static OpenModel pure(Kernel kernel);
  // Pure distribution 1 -o-> X.
  static OpenModel distribution(const Measure& m);

  const FiniteSpace& unobserved() const { return unobserved_; }
  const FiniteSpace& latent() const { return latent_; }
  const FiniteSpace& observed() const { return observed_; }
  const Kernel& kernel() const { return kernel_; }

  bool is_pure() const { return latent_.is_unit(); }
  bool is_pure_distribution() const { return unobserved_.is_unit() && latent_.is_unit(); }
  bool is_joint_distribution() const { return unobserved_.is_unit() && !latent_.is_unit(); }
  bool is_markov(double tol = kTolNorm) const { return kernel_.is_markov(tol); }

  // w(a, y | x)
  double weight(std::size_t x, std::size_t a, std::size_t y) const {
    return kernel_(x, a * observed_.size() + y);
  }

  // c_Y: X ~> Y, the latent summed out.
  const Kernel& observed_marginal() const { return observed_marginal_; }
  // c_Y . pi
  Measure pushforward(const Measure& prior) const;
  // c . pi as a measure on L * Y.
  Measure joint_pushforward(const Measure& prior) const;

 private:
  FiniteSpace unobserved_;
  FiniteSpace latent_;
  FiniteSpace observed_;
  Kernel kernel_;
  Kernel observed_marginal_;
};

// q after p. Latent of the composite is (latent(p), Y, latent(q)) in that
// order; weight(s, y, t, z | x) = q(t, z | y) p(s, y | x).
OpenModel seq_compose(const OpenModel& q, const OpenModel& p);
// Parallel composition; latent is latent(q) * latent(q2).
OpenModel tensor(const OpenModel& q, const OpenModel& q2);

OpenModel identity(const FiniteSpace& space);
// A ~> A * A, [a1 = a0 = a2].
OpenModel copier(const FiniteSpace& space);
// 1 -o-> A * A with weight [a1 = a2]; unnormalized.
OpenModel cup(const FiniteSpace& space);
// A * A -o-> 1 with weight [a1 = a2]; unnormalized.
OpenModel cap(const FiniteSpace& space);
// A * B -o-> B * A.
OpenModel swap(const FiniteSpace& first, const FiniteSpace& second);
// A -o-> 1, the deterministic map to the unit space.
OpenModel discard(const FiniteSpace& space);

// Move the selected latent atoms into the observed boundary, in front of Y.
// Throws InvalidArgument when the model is pure or an index is bad.
OpenModel reveal(const OpenModel& p, std::span<const std::size_t> latent_atoms);
// Select by label; throws when the label is missing or ambiguous.
OpenModel reveal(const OpenModel& p, std::string_view latent_label);
OpenModel reveal_all(const OpenModel& p);

// A * p, i.e. tensor(identity(A), p).
OpenModel extend_dummy(const OpenModel& p, const FiniteSpace& space);

// Pure model X -o-> X * Y with weight [x' = x] p(y | x); requires p pure.
OpenModel reveal_inputs(const OpenModel& p);

// Sum out the selected latent atoms (a 2-cell of the model bicategory).
OpenModel forget_latent(const OpenModel& p, std::span<const std::size_t> latent_atoms);
// Reorder the latent atoms.
OpenModel permute_latent(const OpenModel& p, std::span<const std::size_t> order);
// Reorder the unobserved (resp. observed) atoms.
OpenModel permute_unobserved(const OpenModel& p, std::span<const std::size_t> order);
OpenModel permute_observed(const OpenModel& p, std::span<const std::size_t> order);

// Rescale every row of the kernel to unit mass (rows of zero mass stay zero).
OpenModel normalize_rows(const OpenModel& p);

struct BayesNode {
  FiniteSpace space;                 // a single atom
  std::vector<std::size_t> parents;  // indices into the node list
  Kernel conditional;                // (product of parent spaces) ~> space
};

// Encode a Bayesian network as a composite open model 1 -o-> X_0 * ... * X_n
// (declaration order). Nodes are topologically sorted (ties broken by
// declaration order); each factor reveals its parents, is extended by dummy
// variables for the other predecessors and the factors are composed in order.
// Throws InvalidArgument on cycles and BoundaryMismatch on malformed factors.
OpenModel from_bayes_net(std::span<const BayesNode> nodes);
std::vector<std::size_t> topological_order(std::span<const BayesNode> nodes);

}  // namespace autobayes
