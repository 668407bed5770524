#pragma once

#include <map>
#include <optional>
#include <string_view>

#include "autobayes/dsl/ast.hpp"
#include "autobayes/param.hpp"

namespace autobayes::dsl {

struct Elaborated {
  std::optional<OpenModel> model;
  // Present when the file declares any energy, entropy, inversion or param.
  std::optional<ParameterizedGame> game;
  std::vector<double> initial_params;
  std::map<std::string, Measure> priors;
  std::map<std::string, FiniteSpace> spaces;
  // Indices into model->observed().
  std::vector<std::size_t> data;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
  std::size_t error_count() const;
};

Elaborated elaborate(const ModelAst& ast);
// parse, then elaborate when parsing succeeded.
Elaborated elaborate_source(std::string_view source);

}  // namespace autobayes::dsl
