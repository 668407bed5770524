#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autobayes {

// A named finite set of point labels. Every FiniteSpace is a product of
// zero or more atoms; the unit space is the empty product.
struct Atom {
  std::string label;
  std::vector<std::string> points;

  std::size_t size() const { return points.size(); }
  bool operator==(const Atom&) const = default;
};

// Finite space as an ordered list of atomic factors. Points of a product are
// enumerated in row-major order (the last factor varies fastest). Products
// flatten, so (A*B)*C and A*(B*C) are the same space and 1*A is A.
class FiniteSpace {
 public:
  // The unit space: no factors, exactly one point.
  FiniteSpace() = default;

  static FiniteSpace unit() { return FiniteSpace{}; }
  // Throws InvalidArgument on an empty point list or duplicate labels.
  static FiniteSpace make(std::string label, std::vector<std::string> points);
  // Atomic space with points label0, label1, ...
  static FiniteSpace indexed(std::string label, std::size_t n);
  static FiniteSpace product(const FiniteSpace& first, const FiniteSpace& second);
  static FiniteSpace product(std::span<const FiniteSpace> factors);
  static FiniteSpace from_atoms(std::vector<Atom> atoms);

  std::size_t size() const { return size_; }
  bool is_unit() const { return atoms_.empty(); }
  std::size_t atom_count() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }

  // Product of the selected atoms, in the order given.
  FiniteSpace select(std::span<const std::size_t> atom_indices) const;

  std::vector<std::size_t> unravel(std::size_t index) const;
  std::size_t ravel(std::span<const std::size_t> coords) const;

  // "x0" for atoms, "(x0,y1)" for products, "*" for the unit point.
  std::string point_label(std::size_t index) const;
  // Accepts the point_label form, or a comma separated list without parens.
  std::optional<std::size_t> find_point(std::string_view label) const;
  std::optional<std::size_t> find_point(std::span<const std::string> coords) const;

  // "X*Y", or "1" for the unit space.
  std::string describe() const;

  bool operator==(const FiniteSpace& other) const { return atoms_ == other.atoms_; }

 private:
  explicit FiniteSpace(std::vector<Atom> atoms);

  std::vector<Atom> atoms_;
  std::size_t size_ = 1;
};

// Index map for reordering the atoms of a space: result[old_index] is the
// flat index of the same point in space.select(order). `order` must be a
// permutation of 0..atom_count-1.
std::vector<std::size_t> atom_permutation(const FiniteSpace& space,
                                          std::span<const std::size_t> order);

}  // namespace autobayes
