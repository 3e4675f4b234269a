#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bookineq/book.hpp"
#include "bookineq/core.hpp"
#include "bookineq/polyhedra.hpp"

namespace bookineq {

// The group of interest acts on a book layout over the four-element base
// {a,b,c,d} with spine {a,b}: pages may be permuted freely, and inside every
// page the twins of c and d move together.  A subset of the extended ground is
// determined, up to that action, by which spine elements it contains together
// with how many pages it meets in c only, in d only, and in both.
struct OrbitCoord {
  Mask spine_part = 0;  // within {a,b}: bit 0 is a, bit 1 is b
  int n = 0;            // number of pages in the ambient layout
  int q = 0;            // pages met in the c twin only
  int r = 0;            // pages met in the d twin only
  int m = 0;            // pages met in both twins

  int untouched() const { return n - q - r - m; }
  // Cardinality of any subset in the orbit.
  int size() const;
  std::string name() const;
};

inline bool operator==(const OrbitCoord& x, const OrbitCoord& y) {
  return x.spine_part == y.spine_part && x.n == y.n && x.q == y.q &&
         x.r == y.r && x.m == y.m;
}

// Graded order matching orbit_coordinates; usable as a map key.
inline bool operator<(const OrbitCoord& x, const OrbitCoord& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  if (x.spine_part != y.spine_part) return x.spine_part < y.spine_part;
  if (x.q != y.q) return x.q < y.q;
  if (x.r != y.r) return x.r < y.r;
  if (x.m != y.m) return x.m < y.m;
  return x.n < y.n;
}

// All nonempty orbits for an n-page layout, in a fixed graded order
// (by subset cardinality, then spine part, then q, r, m).
std::vector<OrbitCoord> orbit_coordinates(int n);

// Orbit of one concrete subset of the n-page extended ground.
OrbitCoord fold_subset(int n, Mask ext_subset);

// The cone of symmetric n-page book extension candidates, in orbit
// coordinates.  Rows are the fold of every elemental inequality of the
// extended ground; the cross-page independence equalities are substituted
// away eagerly, which removes the coordinates [ab;0,0,s] for s >= 2.
struct SymmetricCone {
  int n = 0;
  HCone cone;  // inequality rows over the surviving orbit coordinates
  // Subsets of the first page (with the spine), i.e. the copy of the base:
  // graded-lex masks over {a,b,c,d} and the orbit name of each.
  std::vector<Mask> base_masks;
  std::vector<std::string> base_coords;
  // Eliminated coordinate -> its expansion over surviving ones.
  std::map<std::string, std::vector<std::pair<std::string, Rat>>> expansions;
};

SymmetricCone assemble_cone(int n);

// The layout the cone's coordinates refer to: base a,b,c,d; spine ab; n pages.
BookLayout cone_layout(int n);

// Value of any orbit coordinate at a point of the cone, expanding the
// substituted coordinates.
Rat orbit_value(const SymmetricCone& cone, const LpPoint& point,
                const std::string& coord);

// Symmetric function on the extended ground <-> point in orbit coordinates.
// fold checks that the input really is orbit-invariant and throws otherwise;
// unfold produces the rank table of the corresponding set function.
LpPoint fold_function(const SymmetricCone& cone, const Polymatroid& h);
Polymatroid unfold_point(const SymmetricCone& cone, const LpPoint& point);

struct ExtensionCheck {
  bool exists = false;
  // When feasible: a point of the cone whose base pins match g.
  LpPoint witness;
  // When infeasible: a verifiable certificate against cone rows + pins.
  FarkasCertificate cert;
  std::vector<AffineRow> pins;
};

// Does g (a polymatroid on four elements, taken positionally as a,b,c,d)
// admit a symmetric n-page book extension over the spine {a,b}?
ExtensionCheck exists_extension(const SymmetricCone& cone, const Polymatroid& g);
ExtensionCheck exists_extension(const Polymatroid& g, int n);

struct BaseProjection {
  bool complete = true;
  // Facets over the 15 base coordinates, renamed to subsets of {a,b,c,d}.
  // When the budget ran out this holds the sound partial list instead.
  std::vector<LinIneq> facets;
  int eliminated = 0;
  int remaining = 0;
};

// Project the cone onto the base coordinates: the exact description of the
// set of four-element polymatroids with a symmetric n-page extension.
BaseProjection project_base(const SymmetricCone& cone,
                            const ProjectOptions& opts = {});

// A pseudo-random extreme ray of the cone (vertex of a normalized slice),
// unfolded to a rank function on the extended ground.  Deterministic per
// seed.  The result is checked to be a genuine book extension of its own
// base restriction before it is returned.
Polymatroid sample_cone_point(const SymmetricCone& cone, std::uint64_t seed);

}  // namespace bookineq
