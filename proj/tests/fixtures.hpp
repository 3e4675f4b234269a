#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bookineq/book.hpp"
#include "bookineq/core.hpp"
#include "bookineq/inequalities.hpp"
#include "bookineq/polyhedra.hpp"

namespace bookineq::testing {

// Uniform rank function min(|I|, 2) on {a,b,c,d}.
inline Polymatroid make_u24() {
  GroundSet gs({"a", "b", "c", "d"});
  std::vector<Rat> rank(16);
  for (Mask m = 0; m < 16; ++m) rank[m] = std::min(popcount(m), 2);
  return make_polymatroid(std::move(gs), std::move(rank));
}

// The standard four-point witness that linear rank inequalities can fail:
// singletons 2, pairs 3 except cd = 4, triples and the full set 4.
inline Polymatroid make_violator() {
  GroundSet gs({"a", "b", "c", "d"});
  std::vector<Rat> rank(16);
  Mask cd = *gs.parse_subset("cd");
  for (Mask m = 1; m < 16; ++m) {
    switch (popcount(m)) {
      case 1: rank[m] = 2; break;
      case 2: rank[m] = m == cd ? 4 : 3; break;
      default: rank[m] = 4; break;
    }
  }
  return make_polymatroid(std::move(gs), std::move(rank));
}

// Nonnegative combination of coverage atoms w * [I hits A]; every such sum is
// monotone and submodular, so the result is always a valid polymatroid.
inline Polymatroid random_polymatroid(std::mt19937& rng, int n,
                                      int atoms = 6) {
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back(std::string(1, char('a' + i)));
  GroundSet gs(labels);
  std::vector<Rat> rank(std::size_t{1} << n, Rat(0));
  std::uniform_int_distribution<Mask> pick_set(1, gs.full_mask());
  std::uniform_int_distribution<int> pick_num(0, 6);
  std::uniform_int_distribution<int> pick_den(1, 3);
  for (int j = 0; j < atoms; ++j) {
    Mask A = pick_set(rng);
    Rat w(pick_num(rng), pick_den(rng));
    w.canonicalize();
    for (Mask m = 1; m <= gs.full_mask(); ++m)
      if (m & A) rank[m] += w;
  }
  return make_polymatroid(std::move(gs), std::move(rank));
}

// A genuinely asymmetric 2-page extension of U24 over spine ab, found by
// minimizing the skew between the two mixed cross-page subsets over the exact
// extension polytope. Deterministic; throws if the solve degenerates.
inline Polymatroid asymmetric_u24_extension(const Polymatroid& u24,
                                            const BookLayout& L2) {
  const GroundSet& eg = L2.extended_ground;
  HCone cone = shannon_cone(eg);
  std::vector<AffineRow> pins;
  for (int i = 0; i < 2; ++i)
    for (Mask J = 1; J <= u24.ground.full_mask(); ++J)
      pins.push_back({{{eg.subset_to_string(L2.embed(i, J)), Rat(1)}},
                      Rel::Eq, u24.at(J)});
  AffineRow indep{{}, Rel::Eq, Rat(0)};
  indep.coeffs[eg.subset_to_string(L2.spine_ext | L2.page_mask(0))] += 1;
  indep.coeffs[eg.subset_to_string(L2.spine_ext | L2.page_mask(1))] += 1;
  indep.coeffs[eg.subset_to_string(eg.full_mask())] -= 1;
  indep.coeffs[eg.subset_to_string(L2.spine_ext)] -= 1;
  pins.push_back(indep);
  std::string cross12 = eg.subset_to_string(*eg.parse_subset("c_1d_2"));
  std::string cross21 = eg.subset_to_string(*eg.parse_subset("c_2d_1"));
  std::map<std::string, Rat> skew{{cross12, Rat(1)}, {cross21, Rat(-1)}};
  auto lp = lp_min(cone, skew, pins);
  if (lp.status != LpStatus::Optimal || lp.value >= 0)
    throw std::logic_error("asymmetric_u24_extension: no skewed point found");
  std::vector<Rat> rank(std::size_t{1} << eg.size(), Rat(0));
  for (const auto& [name, val] : lp.argmin) rank[*eg.parse_subset(name)] = val;
  return make_polymatroid(eg, std::move(rank));
}

}  // namespace bookineq::testing
