#pragma once

#include <string>

#include "autobayes/dsl/ast.hpp"

namespace autobayes::dsl {

// Canonical text: one declaration per line in source order, then the model.
std::string format_ast(const ModelAst& ast);
std::string format_expr(const Expr& e);
std::string format_boundary(const Boundary& b);
// Shortest round-tripping decimal; "inf" for infinity.
std::string format_number(double v);

}  // namespace autobayes::dsl
