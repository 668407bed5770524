#pragma once

#include "autobayes/open_model.hpp"

namespace fx {

using namespace autobayes;

struct F1 {
  FiniteSpace X = FiniteSpace::make("X", {"x0", "x1"});
  FiniteSpace Y = FiniteSpace::make("Y", {"y0", "y1"});
  FiniteSpace Z = FiniteSpace::make("Z", {"z0", "z1"});
  Measure pi{X, {0.75, 0.25}};
  Kernel c = Kernel::from_rows(X, Y, {{0.5, 0.5}, {0.0, 1.0}});
  Kernel d = Kernel::from_rows(Y, Z, {{1.0, 0.0}, {0.5, 0.5}});
};

struct F2 {
  FiniteSpace X = FiniteSpace::make("X", {"x0", "x1"});
  FiniteSpace Y = FiniteSpace::make("Y", {"y0", "y1"});
  Measure pi{X, {0.5, 0.5}};
  Kernel c = Kernel::from_rows(X, Y, {{0.8, 0.2}, {0.2, 0.8}});
  Kernel uniform_inversion = Kernel::from_rows(Y, X, {{0.5, 0.5}, {0.5, 0.5}});
};

}  // namespace fx
