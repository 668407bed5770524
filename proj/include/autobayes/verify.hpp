#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace autobayes {

struct SuiteReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t passed = 0;
  double tolerance = 0.0;
  double max_residual = 0.0;  // may be +inf
  std::vector<std::string> notes;

  bool ok() const { return passed == trials; }
};

// chain-rule, vfe-forms, fe-chain, lax-tensor, lax-grad, em-mono.
const std::vector<std::string>& suite_names();

// Runs one randomized property suite. Every trial draws from its own seed
// derived from (seed, trial index). Tolerances are multiplied by tol_scale.
// Throws InvalidArgument for an unknown suite.
SuiteReport run_suite(const std::string& name, std::size_t trials, std::uint64_t seed,
                      double tol_scale = 1.0);

// Seed of trial i of a run seeded with seed (splitmix64 mixing).
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

}  // namespace autobayes
