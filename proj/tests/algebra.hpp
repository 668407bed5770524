#pragma once

// Residuals of the structural identities of open models.

#include <numeric>

#include "autobayes/open_model.hpp"

namespace algebra {

using namespace autobayes;

inline double residual(const OpenModel& a, const OpenModel& b) {
  if (!(a.unobserved() == b.unobserved()) || !(a.latent() == b.latent()) ||
      !(a.observed() == b.observed())) {
    return kInf;
  }
  return max_abs_diff(a.kernel().data(), b.kernel().data());
}

inline std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

inline OpenModel forget_all(const OpenModel& m) {
  return forget_latent(m, range(0, m.latent().atom_count()));
}

// r . (q . p) against (r . q) . p
inline double associativity(const OpenModel& p, const OpenModel& q, const OpenModel& r) {
  return residual(seq_compose(r, seq_compose(q, p)), seq_compose(seq_compose(r, q), p));
}

// id . p and p . id against p, once the copy of the boundary kept in the
// latent is summed out.
inline double unitality(const OpenModel& p) {
  const auto lp = p.latent().atom_count();
  const auto left = seq_compose(identity(p.observed()), p);
  const auto right = seq_compose(p, identity(p.unobserved()));
  const double a = residual(forget_latent(left, range(lp, lp + p.observed().atom_count())), p);
  const double b = residual(forget_latent(right, range(0, p.unobserved().atom_count())), p);
  return std::max(a, b);
}

// (q (x) q2) . (p (x) p2) against (q . p) (x) (q2 . p2)
inline double interchange(const OpenModel& p, const OpenModel& p2, const OpenModel& q,
                          const OpenModel& q2) {
  const auto left = seq_compose(tensor(q, q2), tensor(p, p2));
  const auto right = tensor(seq_compose(q, p), seq_compose(q2, p2));
  const std::size_t a = p.latent().atom_count(), a2 = p2.latent().atom_count();
  const std::size_t y = p.observed().atom_count(), y2 = p2.observed().atom_count();
  const std::size_t b = q.latent().atom_count(), b2 = q2.latent().atom_count();
  // left latent: Lp Lp2 Y Y2 Lq Lq2; right latent: Lp Y Lq Lp2 Y2 Lq2
  std::vector<std::size_t> order;
  auto add = [&](std::size_t lo, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) order.push_back(lo + i);
  };
  const std::size_t lp = 0, lp2 = a, sy = a + a2, sy2 = sy + y, lq = sy2 + y2, lq2 = lq + b;
  add(lp, a);
  add(sy, y);
  add(lq, b);
  add(lp2, a2);
  add(sy2, y2);
  add(lq2, b2);
  return residual(permute_latent(left, order), right);
}

// (cap (x) id) . (id (x) cup) = id = (id (x) cap) . (cup (x) id), latents summed out.
inline double snake(const FiniteSpace& a) {
  const auto id = identity(a);
  const auto s1 = seq_compose(tensor(cap(a), id), tensor(id, cup(a)));
  const auto s2 = seq_compose(tensor(id, cap(a)), tensor(cup(a), id));
  return std::max(residual(forget_all(s1), id), residual(forget_all(s2), id));
}

}  // namespace algebra
