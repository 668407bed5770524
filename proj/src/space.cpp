#include "autobayes/space.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "autobayes/errors.hpp"

namespace autobayes {

FiniteSpace::FiniteSpace(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  size_ = 1;
  for (const auto& a : atoms_) size_ *= a.size();
}

FiniteSpace FiniteSpace::make(std::string label, std::vector<std::string> points) {
  if (points.empty()) {
    throw InvalidArgument("space '" + label + "' must have at least one point");
  }
  std::set<std::string> seen;
  for (const auto& p : points) {
    if (!seen.insert(p).second) {
      throw InvalidArgument("duplicate point '" + p + "' in space '" + label + "'");
    }
  }
  return FiniteSpace({Atom{std::move(label), std::move(points)}});
}

FiniteSpace FiniteSpace::indexed(std::string label, std::size_t n) {
  std::vector<std::string> pts;
  pts.reserve(n);
  std::string stem = label;
  std::transform(stem.begin(), stem.end(), stem.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < n; ++i) pts.push_back(stem + std::to_string(i));
  return make(std::move(label), std::move(pts));
}

FiniteSpace FiniteSpace::product(const FiniteSpace& first, const FiniteSpace& second) {
  std::vector<Atom> atoms = first.atoms_;
  atoms.insert(atoms.end(), second.atoms_.begin(), second.atoms_.end());
  return FiniteSpace(std::move(atoms));
}

FiniteSpace FiniteSpace::product(std::span<const FiniteSpace> factors) {
  std::vector<Atom> atoms;
  for (const auto& f : factors) atoms.insert(atoms.end(), f.atoms_.begin(), f.atoms_.end());
  return FiniteSpace(std::move(atoms));
}

FiniteSpace FiniteSpace::from_atoms(std::vector<Atom> atoms) {
  for (const auto& a : atoms) {
    if (a.points.empty()) throw InvalidArgument("atom '" + a.label + "' has no points");
  }
  return FiniteSpace(std::move(atoms));
}

FiniteSpace FiniteSpace::select(std::span<const std::size_t> atom_indices) const {
  std::vector<Atom> atoms;
  atoms.reserve(atom_indices.size());
  for (auto i : atom_indices) {
    if (i >= atoms_.size()) throw InvalidArgument("atom index out of range");
    atoms.push_back(atoms_[i]);
  }
  return FiniteSpace(std::move(atoms));
}

std::vector<std::size_t> FiniteSpace::unravel(std::size_t index) const {
  std::vector<std::size_t> coords(atoms_.size());
  for (std::size_t k = atoms_.size(); k-- > 0;) {
    coords[k] = index % atoms_[k].size();
    index /= atoms_[k].size();
  }
  return coords;
}

std::size_t FiniteSpace::ravel(std::span<const std::size_t> coords) const {
  if (coords.size() != atoms_.size()) throw InvalidArgument("coordinate arity mismatch");
  std::size_t index = 0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (coords[k] >= atoms_[k].size()) throw InvalidArgument("coordinate out of range");
    index = index * atoms_[k].size() + coords[k];
  }
  return index;
}

std::string FiniteSpace::point_label(std::size_t index) const {
  if (atoms_.empty()) return "*";
  auto coords = unravel(index);
  if (atoms_.size() == 1) return atoms_[0].points[coords[0]];
  std::string out = "(";
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (k) out += ",";
    out += atoms_[k].points[coords[k]];
  }
  return out + ")";
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::optional<std::size_t> FiniteSpace::find_point(std::string_view label) const {
  std::string s = trim(label);
  if (atoms_.empty()) {
    if (s == "*" || s.empty() || s == "()") return 0;
    return std::nullopt;
  }
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto comma = s.find(',', start);
    parts.push_back(trim(std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return find_point(parts);
}

std::optional<std::size_t> FiniteSpace::find_point(std::span<const std::string> coords) const {
  if (atoms_.empty()) return coords.empty() ? std::optional<std::size_t>(0) : std::nullopt;
  if (coords.size() != atoms_.size()) return std::nullopt;
  std::size_t index = 0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const auto& pts = atoms_[k].points;
    auto it = std::find(pts.begin(), pts.end(), coords[k]);
    if (it == pts.end()) return std::nullopt;
    index = index * pts.size() + static_cast<std::size_t>(it - pts.begin());
  }
  return index;
}

std::string FiniteSpace::describe() const {
  if (atoms_.empty()) return "1";
  std::string out;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (k) out += "*";
    out += atoms_[k].label;
  }
  return out;
}

std::vector<std::size_t> atom_permutation(const FiniteSpace& space,
                                          std::span<const std::size_t> order) {
  const std::size_t n = space.atom_count();
  if (order.size() != n) throw InvalidArgument("atom permutation has wrong arity");
  std::vector<bool> used(n, false);
  for (auto i : order) {
    if (i >= n || used[i]) throw InvalidArgument("not a permutation of atoms");
    used[i] = true;
  }
  FiniteSpace target = space.select(order);
  std::vector<std::size_t> map(space.size());
  std::vector<std::size_t> permuted(n);
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    auto coords = space.unravel(idx);
    for (std::size_t k = 0; k < n; ++k) permuted[k] = coords[order[k]];
    map[idx] = target.ravel(permuted);
  }
  return map;
}

}  // namespace autobayes
