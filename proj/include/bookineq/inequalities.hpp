#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bookineq/core.hpp"
#include "bookineq/polyhedra.hpp"

namespace bookineq {

// Lattice point <k,l> of the coefficient triangle.
struct LatticePoint {
  int k = 0;
  int ell = 0;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

// Non-empty downward-closed subset of {<k,l> : k+l <= n-2}, the index set of
// one generated inequality. points is sorted and duplicate-free.
struct IdealSet {
  int n = 0;
  std::vector<LatticePoint> points;
};

// (x, y, z) coefficient triple attached to an ideal.
struct CoeffTriple {
  long long x = 0;
  long long y = 0;
  long long z = 0;
  friend bool operator==(const CoeffTriple&, const CoeffTriple&) = default;
};

// Validates (non-empty, inside the triangle, downward closed) and normalizes.
IdealSet make_ideal(int n, std::vector<LatticePoint> points);

// All non-empty downward-closed subsets of the n-triangle, deduplicated, in
// graded-lex order on the sorted point lists. Throws for n < 2.
std::vector<IdealSet> enumerate_ideals(int n);

// The horizontal axis ideal {<k,0> : k <= n-2}.
IdealSet axis_ideal_u(int n);
// The vertical axis ideal {<0,l> : l <= n-2}.
IdealSet axis_ideal_v(int n);
// The full triangle {<k,l> : k+l <= n-2}.
IdealSet triangle_ideal(int n);

// Mirrors every point <k,l> to <l,k>. Involution.
IdealSet transpose(const IdealSet& s);

// Componentwise sum of binom(k+l, k) * (1, k+1, l) over the ideal's points.
CoeffTriple coeff_vector(const IdealSet& s);

// The fixed four-element ground set every generated inequality lives on.
const GroundSet& abcd_ground();

// x*[abcd] + (a,b|c) + y*((a,c|b)+(b,c|a)) + z*((a,d|b)+(b,d|a)) for the
// triple (x,y,z) of s.
LinExpr book_ineq_A(const IdealSet& s);
// l*[bdac] + (a,b|d) + l(l+1)/2 * ((b,d|a)+(a,d|b)); requires 1 <= l <= n-1.
LinExpr book_ineq_B(int ell, int n);

// The n-page family: all ideal inequalities followed by the second-form ones,
// as deduplicated canonical inequalities. include_swaps closes the list under
// the relabelings a<->b and c<->d (and therefore their composition).
std::vector<LinExpr> generate_family(int n, bool include_swaps);

struct Violation {
  std::size_t index = 0;
  Rat value;
};

// Members of family whose evaluation on g is negative.
std::vector<Violation> check_against(const Polymatroid& g,
                                     const std::vector<LinExpr>& family);

// Elemental rank-function cone over named subset coordinates: top-level
// monotonicity plus pairwise elemental submodularity (28 rows on four
// elements). Coordinates are the non-empty subsets in graded-lex order.
HCone shannon_cone(const GroundSet& gs);

// Coefficients of e keyed by subset name, the row form used with HCone.
std::map<std::string, Rat> expr_coeff_map(const LinExpr& e);

struct RedundancyResult {
  std::vector<LinExpr> kept;
  std::vector<std::size_t> kept_indices;
  struct Removed {
    std::size_t index = 0;
    // Conic-combination certificate of the removed member over the background
    // rows followed by the kept members (in kept order).
    ImplicationCertificate cert;
  };
  std::vector<Removed> removed;
};

// Drops every member that stays non-negative over {background, remaining
// family}, decided by exact LP on the slice where the rank of the full ground
// set is 1. The scan runs in both orders and insists the surviving canonical
// set agrees; removed members carry re-verifiable certificates.
RedundancyResult remove_redundant(const std::vector<LinExpr>& family,
                                  const HCone& background);

// (y/x, z/x) for the non-redundant ideal inequalities of the n-page family,
// exact rationals, in family order.
std::vector<std::pair<Rat, Rat>> plot_data(int n);

// One-line text form, e.g. "1*abc + 1*abd - 1*ab - 1*abcd >= 0".
std::string ineq_to_text(const LinExpr& e);
// Strict parse of the same format; also accepts the unicode minus and ">=".
LinExpr ineq_from_text(const GroundSet& gs, const std::string& line);

}  // namespace bookineq
