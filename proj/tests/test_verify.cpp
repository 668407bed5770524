#include <gtest/gtest.h>

#include <cmath>

#include "autobayes/errors.hpp"
#include "autobayes/verify.hpp"

using namespace autobayes;

TEST(Verify, SuiteNames) {
  const std::vector<std::string> expected{"chain-rule", "vfe-forms", "fe-chain", "lax-tensor", "lax-grad", "em-mono"};
  EXPECT_EQ(suite_names(), expected);
}

TEST(Verify, SmallRunsPass) {
  for (const auto& name : suite_names()) {
    const auto r = run_suite(name, 10, 42);
    EXPECT_EQ(r.trials, 10u) << name;
    EXPECT_TRUE(r.ok()) << name << ": " << (r.notes.empty() ? "" : r.notes.front());
    EXPECT_LE(r.max_residual, r.tolerance) << name;
  }
}

TEST(Verify, ZeroTrialsIsVacuous) {
  const auto r = run_suite("chain-rule", 0, 1);
  EXPECT_EQ(r.trials, 0u);
  EXPECT_TRUE(r.ok());
}

TEST(Verify, NegativeScaleFails) {
  const auto r = run_suite("vfe-forms", 3, 1, -1.0);
  EXPECT_FALSE(r.ok());
}

TEST(Verify, UnknownSuiteThrows) { EXPECT_THROW(run_suite("bogus", 1, 0), InvalidArgument); }

TEST(Verify, Deterministic) {
  EXPECT_EQ(trial_seed(5, 3), trial_seed(5, 3));
  EXPECT_NE(trial_seed(5, 3), trial_seed(5, 4));
  EXPECT_NE(trial_seed(5, 3), trial_seed(6, 3));
  const auto a = run_suite("fe-chain", 5, 9), b = run_suite("fe-chain", 5, 9);
  EXPECT_EQ(a.max_residual, b.max_residual);
}
