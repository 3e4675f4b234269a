#pragma once

#include <string>
#include <vector>

#include "bookineq/core.hpp"

namespace bookineq {

// Total per-element map between ground sets: source position -> target position.
struct ElementMap {
  GroundSet source;
  GroundSet target;
  std::vector<int> to_target;  // size |source|

  Mask image(Mask src) const;
};

ElementMap make_element_map(const GroundSet& source, const GroundSet& target,
                            const std::vector<std::string>& target_labels);

// Disjoint union of parts; part k's labels get suffix "_k" (1-based) unless a
// custom suffix list is supplied. rank(I) = sum of part ranks.
Polymatroid direct_sum(const std::vector<Polymatroid>& parts,
                       const std::vector<std::string>& suffixes = {});

Polymatroid restrict_to(const Polymatroid& g, Mask M);

// (phi^-1 g)(I') = g(phi(I')).
Polymatroid pullback(const Polymatroid& g, const ElementMap& phi);

// h(I') = f(psi^-1(I')) for psi: f.ground -> result ground. A many-to-one psi
// collapses elements: the rank of I' is the rank of its full preimage. psi
// must be surjective so every result element has a nonempty fiber.
Polymatroid preimage_pullback(const Polymatroid& f, const ElementMap& psi);

// h(J) = min(g(J), g(aJ) - t); requires 0 <= t <= g(a).
Polymatroid min_extend(const Polymatroid& g, int a, const Rat& t);

// (g|a)(aI) = g(aI) - (g(N) - g(N-a)), other ranks kept.
Polymatroid tighten(const Polymatroid& g, int a);
Polymatroid tighten_all(const Polymatroid& g, Mask J);
bool is_tight(const Polymatroid& g);

}  // namespace bookineq
