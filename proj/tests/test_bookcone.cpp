#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bookineq/book.hpp"
#include "bookineq/bookcone.hpp"
#include "bookineq/core.hpp"
#include "bookineq/inequalities.hpp"
#include "bookineq/ops.hpp"
#include "bookineq/polyhedra.hpp"

#include "fixtures.hpp"

using namespace bookineq;
using bookineq::testing::asymmetric_u24_extension;
using bookineq::testing::make_u24;
using bookineq::testing::make_violator;
using bookineq::testing::random_polymatroid;

namespace {

Rat eval_row(const LinIneq& row, const LpPoint& pt) {
  Rat v = 0;
  for (const auto& [name, c] : row.coeffs) {
    auto it = pt.find(name);
    if (it != pt.end()) v += c * it->second;
  }
  return v;
}

bool satisfies_rows(const SymmetricCone& C, const LpPoint& pt) {
  for (const LinIneq& r : C.cone.rows)
    if (eval_row(r, pt) < 0) return false;
  return true;
}

// Membership test for an orbit-invariant rank function: the surviving
// coordinates must satisfy every row, and the eliminated coordinates must
// actually take their substituted values.
bool in_cone(const SymmetricCone& C, const Polymatroid& h) {
  LpPoint pt = fold_function(C, h);
  if (!satisfies_rows(C, pt)) return false;
  const Mask full = (1u << h.ground.size()) - 1u;
  for (Mask s = 1; s <= full; ++s) {
    const std::string name = fold_subset(C.n, s).name();
    if (C.expansions.count(name) && orbit_value(C, pt, name) != h.at(s))
      return false;
  }
  return true;
}

// Twins fall back onto their base elements: h(I) = g(image of I).
Polymatroid collapse_onto_base(const Polymatroid& g, const BookLayout& L) {
  const GroundSet& eg = L.extended_ground;
  std::vector<Rat> rank(std::size_t{1} << eg.size(), Rat(0));
  for (Mask I = 1; I < rank.size(); ++I) {
    Mask base = 0;
    for (int i = 0; i < static_cast<int>(L.pages); ++i)
      for (int e = 0; e < static_cast<int>(g.ground.size()); ++e)
        if (I & (1u << L.to_ext[i][e])) base |= 1u << e;
    rank[I] = g.at(base);
  }
  return make_polymatroid(eg, std::move(rank));
}

Polymatroid base_restriction(const Polymatroid& h, const BookLayout& L) {
  std::vector<Rat> rank(16, Rat(0));
  for (Mask mI = 1; mI < 16; ++mI) rank[mI] = h.at(L.embed(0, mI));
  return make_polymatroid(L.base_ground, std::move(rank));
}

Polymatroid uniform(const GroundSet& gs, int k) {
  std::vector<Rat> rank(std::size_t{1} << gs.size(), Rat(0));
  for (Mask m = 1; m <= gs.full_mask(); ++m)
    rank[m] = std::min(popcount(m), k);
  return make_polymatroid(gs, std::move(rank));
}

Polymatroid mix(const Polymatroid& x, const Polymatroid& y, const Rat& t) {
  std::vector<Rat> rank(x.rank.size());
  for (std::size_t m = 0; m < rank.size(); ++m)
    rank[m] = (1 - t) * x.rank[m] + t * y.rank[m];
  return make_polymatroid(x.ground, std::move(rank));
}

}  // namespace

TEST_CASE("orbit coordinates") {
  CHECK(orbit_coordinates(1).size() == 15);
  CHECK(orbit_coordinates(2).size() == 39);
  CHECK(orbit_coordinates(3).size() == 79);
  CHECK(orbit_coordinates(4).size() == 139);

  std::vector<OrbitCoord> v = orbit_coordinates(2);
  CHECK(v[0].name() == "-;0,1,0");
  CHECK(v[1].name() == "-;1,0,0");
  CHECK(v[2].name() == "a;0,0,0");
  CHECK(v[3].name() == "b;0,0,0");

  std::set<std::string> names;
  for (const OrbitCoord& oc : v) {
    CHECK(oc.n == 2);
    CHECK(oc.untouched() >= 0);
    names.insert(oc.name());
  }
  CHECK(names.size() == v.size());
  for (std::size_t i = 1; i < v.size(); ++i)
    CHECK(v[i - 1].size() <= v[i].size());

  CHECK_THROWS_AS(orbit_coordinates(0), std::invalid_argument);
}

TEST_CASE("subset folding") {
  const int n = 3;
  BookLayout L = cone_layout(n);
  const GroundSet& eg = L.extended_ground;

  CHECK(fold_subset(n, *eg.parse_subset("a")).name() == "a;0,0,0");
  CHECK(fold_subset(n, *eg.parse_subset("c_2")).name() == "-;1,0,0");
  CHECK(fold_subset(n, *eg.parse_subset("d_3")).name() == "-;0,1,0");
  CHECK(fold_subset(n, *eg.parse_subset("c_1d_1")).name() == "-;0,0,1");
  CHECK(fold_subset(n, *eg.parse_subset("c_1d_2")).name() == "-;1,1,0");
  CHECK(fold_subset(n, *eg.parse_subset("abc_1d_1c_2d_2c_3d_3")).name() ==
        "ab;0,0,3");
  CHECK(fold_subset(n, *eg.parse_subset("bc_1d_1c_2")).name() == "b;1,0,1");

  // Orbit signatures are invariant under the page action and match sizes.
  for (Mask I = 1; I <= eg.full_mask(); ++I) {
    OrbitCoord oc = fold_subset(n, I);
    CHECK(oc.size() == popcount(I));
    CHECK(oc.untouched() + oc.q + oc.r + oc.m == n);
  }
  CHECK_THROWS_AS(fold_subset(2, 1u << 7), std::invalid_argument);
  CHECK_THROWS_AS(fold_subset(0, 1u), std::invalid_argument);
}

TEST_CASE("cone assembly") {
  SymmetricCone C2 = assemble_cone(2);
  CHECK(C2.n == 2);
  CHECK(C2.cone.coords.size() == 38);
  CHECK(C2.cone.rows.size() == 134);
  REQUIRE(C2.expansions.size() == 1);
  const auto& ex = C2.expansions.at("ab;0,0,2");
  REQUIRE(ex.size() == 2);
  CHECK(ex[0] == std::pair<std::string, Rat>{"ab;0,0,1", Rat(2)});
  CHECK(ex[1] == std::pair<std::string, Rat>{"ab;0,0,0", Rat(-1)});

  SymmetricCone C3 = assemble_cone(3);
  CHECK(C3.cone.coords.size() == 77);
  CHECK(C3.cone.rows.size() == 384);
  CHECK(C3.expansions.size() == 2);
  CHECK(C3.expansions.at("ab;0,0,3") ==
        std::vector<std::pair<std::string, Rat>>{{"ab;0,0,1", Rat(3)},
                                                 {"ab;0,0,0", Rat(-2)}});

  for (const LinIneq& r : C2.cone.rows) {
    CHECK(r.rel == Rel::Ge);
    for (const auto& [name, c] : r.coeffs) {
      CHECK(C2.cone.coord_index(name) >= 0);
      CHECK(c != 0);
    }
  }

  // Deterministic: a second assembly gives the same rows in the same order.
  SymmetricCone again = assemble_cone(2);
  REQUIRE(again.cone.rows.size() == C2.cone.rows.size());
  for (std::size_t i = 0; i < C2.cone.rows.size(); ++i)
    CHECK(row_key(C2.cone.rows[i], C2.cone.coords) ==
          row_key(again.cone.rows[i], again.cone.coords));

  CHECK_THROWS_AS(assemble_cone(0), std::invalid_argument);
  CHECK_THROWS_AS(assemble_cone(12), std::invalid_argument);
}

TEST_CASE("base coordinates") {
  SymmetricCone C2 = assemble_cone(2);
  REQUIRE(C2.base_masks.size() == 15);
  REQUIRE(C2.base_coords.size() == 15);
  GroundSet bg({"a", "b", "c", "d"});

  std::map<std::string, std::string> byname;
  for (std::size_t i = 0; i < 15; ++i)
    byname[bg.subset_to_string(C2.base_masks[i])] = C2.base_coords[i];
  CHECK(byname.at("a") == "a;0,0,0");
  CHECK(byname.at("c") == "-;1,0,0");
  CHECK(byname.at("d") == "-;0,1,0");
  CHECK(byname.at("cd") == "-;0,0,1");
  CHECK(byname.at("abc") == "ab;1,0,0");
  CHECK(byname.at("abcd") == "ab;0,0,1");

  std::set<std::string> distinct;
  for (const std::string& c : C2.base_coords) {
    distinct.insert(c);
    CHECK(C2.cone.coord_index(c) >= 0);
  }
  CHECK(distinct.size() == 15);

  // Graded-lex order of the base masks.
  for (std::size_t i = 1; i < 15; ++i)
    CHECK(graded_lex_less(C2.base_masks[i - 1], C2.base_masks[i]));
}

TEST_CASE("genuine extensions are members") {
  SymmetricCone C2 = assemble_cone(2);
  BookLayout L = cone_layout(2);
  Polymatroid u24 = make_u24();

  // Collapsing both pages onto the base is an extension of U24 because its
  // spine already has full rank; its fold satisfies everything.
  Polymatroid coll = collapse_onto_base(u24, L);
  REQUIRE(is_book_extension(coll, u24, L).ok);
  CHECK(in_cone(C2, coll));

  // The symmetrized asymmetric extension is a member too.
  Polymatroid ha = asymmetric_u24_extension(u24, L);
  Polymatroid sym = symmetrize(ha, L);
  CHECK(in_cone(C2, sym));

  // The asymmetric point itself is not orbit-invariant.
  CHECK_THROWS_AS(fold_function(C2, ha), std::invalid_argument);
}

TEST_CASE("non-members are rejected") {
  SymmetricCone C2 = assemble_cone(2);
  BookLayout L = cone_layout(2);
  const GroundSet& eg = L.extended_ground;

  // The uniform rank-3 function is a symmetric polymatroid, but its pages are
  // not independent over the spine. The substitution folds independence into
  // the elemental rows, so the violation surfaces on the surviving
  // coordinates themselves, and the eliminated coordinate also disagrees with
  // its substituted value.
  Polymatroid u36 = uniform(eg, 3);
  LpPoint pt = fold_function(C2, u36);
  CHECK(!satisfies_rows(C2, pt));
  CHECK(orbit_value(C2, pt, "ab;0,0,2") == 4);
  CHECK(u36.at(eg.full_mask()) == 3);
  CHECK(!in_cone(C2, u36));

  // Same failure for the collapse of the free matroid (spine rank deficit).
  GroundSet bg({"a", "b", "c", "d"});
  Polymatroid freem = uniform(bg, 4);
  Polymatroid coll = collapse_onto_base(freem, L);
  CHECK(!is_book_extension(coll, freem, L).ok);
  CHECK(!in_cone(C2, coll));

  // A symmetric non-polymatroid violates a row outright.
  std::vector<Rat> sq(std::size_t{1} << eg.size(), Rat(0));
  for (Mask m = 1; m <= eg.full_mask(); ++m) sq[m] = Rat(popcount(m)) * popcount(m);
  Polymatroid square = make_polymatroid(eg, std::move(sq));
  CHECK(!satisfies_rows(C2, fold_function(C2, square)));
}

TEST_CASE("fold and unfold") {
  SymmetricCone C2 = assemble_cone(2);
  BookLayout L = cone_layout(2);

  // Empty point unfolds to the zero polymatroid, trivially an extension.
  Polymatroid zero = unfold_point(C2, LpPoint{});
  for (const Rat& r : zero.rank) CHECK(r == 0);
  CHECK(is_book_extension(zero, base_restriction(zero, L), L).ok);
  LpPoint back = fold_function(C2, zero);
  for (const auto& [name, v] : back) CHECK(v == 0);

  // Round trip through a genuine member.
  Polymatroid coll = collapse_onto_base(make_u24(), L);
  LpPoint pt = fold_function(C2, coll);
  CHECK(unfold_point(C2, pt) == coll);
  CHECK(fold_function(C2, unfold_point(C2, pt)) == pt);

  // Ground-size mismatch and unknown coordinates are reported.
  CHECK_THROWS_AS(fold_function(C2, make_u24()), std::invalid_argument);
  CHECK_THROWS_AS(orbit_value(C2, pt, "ab;9,9,9"), std::invalid_argument);
}

TEST_CASE("extension feasibility") {
  SymmetricCone C2 = assemble_cone(2);
  SymmetricCone C3 = assemble_cone(3);
  Polymatroid u24 = make_u24();
  Polymatroid v = make_violator();
  GroundSet bg({"a", "b", "c", "d"});

  ExtensionCheck e2 = exists_extension(C2, u24);
  REQUIRE(e2.exists);
  // The witness unfolds to a verified extension whose base is exactly U24.
  Polymatroid h = unfold_point(C2, e2.witness);
  REQUIRE(validate_polymatroid(h).ok);
  BookLayout L = cone_layout(2);
  CHECK(base_restriction(h, L) == u24);
  CHECK(is_book_extension(h, u24, L).ok);
  CHECK(fold_function(C2, h) == e2.witness);

  CHECK(exists_extension(C3, u24).exists);

  ExtensionCheck bad = exists_extension(C2, v);
  REQUIRE(!bad.exists);
  CHECK(verify_farkas(C2.cone, bad.pins, bad.cert));
  CHECK(!exists_extension(C3, v).exists);

  CHECK(exists_extension(C2, uniform(bg, 4)).exists);  // free matroid
  CHECK(exists_extension(C3, uniform(bg, 4)).exists);
  CHECK(exists_extension(C2, uniform(bg, 1)).exists);

  // Modular sums of singleton weights always extend.
  std::vector<Rat> modular(16, Rat(0));
  const Rat w[4] = {Rat(1), Rat(1, 2), Rat(3), Rat(2)};
  for (Mask m = 1; m < 16; ++m)
    for (int e = 0; e < 4; ++e)
      if (m & (1u << e)) modular[m] += w[e];
  CHECK(exists_extension(C2, make_polymatroid(bg, modular)).exists);

  // Convenience overload assembles internally.
  CHECK(exists_extension(u24, 2).exists);

  // Invalid input is refused.
  GroundSet small({"a", "b", "c"});
  CHECK_THROWS_AS(exists_extension(C2, uniform(small, 2)),
                  std::invalid_argument);
  std::vector<Rat> jump(16, Rat(0));
  jump[15] = 5;
  CHECK_THROWS_AS(exists_extension(C2, make_polymatroid(bg, jump)),
                  std::invalid_argument);
}

TEST_CASE("two-page feasibility matches the inequality family") {
  SymmetricCone C2 = assemble_cone(2);
  std::vector<LinExpr> fam = generate_family(2, true);
  REQUIRE(fam.size() == 6);

  auto agree = [&](const Polymatroid& g) {
    const bool satisfied = check_against(g, fam).empty();
    const bool extends = exists_extension(C2, g).exists;
    CHECK(satisfied == extends);
    return satisfied;
  };

  GroundSet bg({"a", "b", "c", "d"});
  CHECK(agree(make_u24()));
  CHECK(!agree(make_violator()));
  CHECK(agree(uniform(bg, 4)));
  CHECK(agree(uniform(bg, 1)));

  // Perturbations of the violating point stay on the correct side.
  Polymatroid v = make_violator();
  Polymatroid freem = uniform(bg, 4);
  CHECK(!agree(mix(v, freem, Rat(1, 10))));
  CHECK(!agree(mix(v, freem, Rat(9, 10))));
  CHECK(agree(mix(v, freem, Rat(1))));

  std::mt19937 rng(4242);
  for (int i = 0; i < 40; ++i) agree(random_polymatroid(rng, 4));
  // Random mixes toward the violator explore the infeasible side too.
  int infeasible = 0;
  for (int i = 0; i < 8; ++i) {
    Polymatroid g = mix(random_polymatroid(rng, 4), v, Rat(4, 5));
    if (!agree(g)) ++infeasible;
  }
  CHECK(infeasible > 0);
}

TEST_CASE("more pages never make extension easier") {
  SymmetricCone C2 = assemble_cone(2);
  SymmetricCone C3 = assemble_cone(3);
  Polymatroid v = make_violator();
  std::mt19937 rng(777);
  for (int i = 0; i < 6; ++i) {
    Polymatroid g = i < 3 ? random_polymatroid(rng, 4)
                          : mix(random_polymatroid(rng, 4), v, Rat(3, 4));
    const bool e3 = exists_extension(C3, g).exists;
    const bool e2 = exists_extension(C2, g).exists;
    if (e3) CHECK(e2);
    if (!e2) CHECK(!e3);
  }
}

TEST_CASE("sampled cone points satisfy the family") {
  for (int n : {2, 3}) {
    SymmetricCone C = assemble_cone(n);
    BookLayout L = cone_layout(n);
    std::vector<LinExpr> fam = generate_family(n, true);
    const int count = n == 2 ? 12 : 6;
    for (int seed = 1; seed <= count; ++seed) {
      Polymatroid h = sample_cone_point(C, seed);
      Polymatroid base = base_restriction(h, L);
      for (const LinExpr& e : fam) CHECK(eval(e, base) >= 0);
      CHECK(check_against(base, fam).empty());
    }
  }
}

TEST_CASE("sampling is deterministic per seed") {
  SymmetricCone C2 = assemble_cone(2);
  Polymatroid a = sample_cone_point(C2, 11);
  Polymatroid b = sample_cone_point(C2, 11);
  CHECK(a == b);
  Polymatroid c = sample_cone_point(C2, 12);
  CHECK(!(a == c));
}

TEST_CASE("feasible witnesses ride along the necessity direction") {
  // Whenever a base admits a 3-page extension, the witness's base is the
  // pinned polymatroid and must satisfy the full 3-page family.
  SymmetricCone C3 = assemble_cone(3);
  BookLayout L = cone_layout(3);
  std::vector<LinExpr> fam = generate_family(3, true);
  std::mt19937 rng(31337);
  int hits = 0;
  for (int i = 0; i < 8; ++i) {
    Polymatroid g = random_polymatroid(rng, 4);
    ExtensionCheck e = exists_extension(C3, g);
    if (!e.exists) continue;
    ++hits;
    Polymatroid h = unfold_point(C3, e.witness);
    CHECK(base_restriction(h, L) == g);
    CHECK(is_book_extension(h, g, L).ok);
    CHECK(check_against(g, fam).empty());
  }
  CHECK(hits > 0);
}

TEST_CASE("two-page projection onto the base") {
  SymmetricCone C2 = assemble_cone(2);
  BaseProjection P = project_base(C2);
  REQUIRE(P.complete);
  REQUIRE(P.facets.size() == 34);
  CHECK(P.eliminated == 23);
  CHECK(P.remaining == 0);

  GroundSet bg({"a", "b", "c", "d"});
  HCone sh = shannon_cone(bg);
  std::set<std::string> shannon;
  for (const LinIneq& r : sh.rows)
    shannon.insert(row_key(canonical_row(r, sh.coords), sh.coords));
  REQUIRE(shannon.size() == 28);

  const int inst[6][4] = {{0, 1, 2, 3}, {0, 1, 3, 2}, {1, 3, 0, 2},
                          {0, 3, 1, 2}, {1, 2, 0, 3}, {0, 2, 1, 3}};
  std::set<std::string> nonshannon;
  for (const auto& t : inst) {
    LinIneq li{expr_coeff_map(zhang_yeung_expr(bg, t[0], t[1], t[2], t[3])),
               Rel::Ge};
    nonshannon.insert(row_key(canonical_row(li, sh.coords), sh.coords));
  }
  REQUIRE(nonshannon.size() == 6);

  std::set<std::string> got;
  for (const LinIneq& f : P.facets)
    got.insert(row_key(canonical_row(f, sh.coords), sh.coords));
  REQUIRE(got.size() == 34);

  std::set<std::string> expected = shannon;
  expected.insert(nonshannon.begin(), nonshannon.end());
  CHECK(got == expected);

  // Every facet is satisfied by U24.
  Polymatroid u24 = make_u24();
  LpPoint upt;
  for (Mask m = 1; m < 16; ++m) upt[bg.subset_to_string(m)] = u24.at(m);
  for (const LinIneq& f : P.facets) CHECK(eval_row(f, upt) >= 0);
}

TEST_CASE("projection budget gives sound partial output") {
  SymmetricCone C2 = assemble_cone(2);
  ProjectOptions opts;
  opts.budget_ms = 40;
  BaseProjection P = project_base(C2, opts);
  REQUIRE(!P.complete);
  CHECK(P.remaining > 0);
  CHECK(!P.facets.empty());

  // Every partial row must be valid for the true projection, i.e. implied by
  // its known facet description.
  GroundSet bg({"a", "b", "c", "d"});
  HCone truth = shannon_cone(bg);
  const int inst[6][4] = {{0, 1, 2, 3}, {0, 1, 3, 2}, {1, 3, 0, 2},
                          {0, 3, 1, 2}, {1, 2, 0, 3}, {0, 2, 1, 3}};
  for (const auto& t : inst)
    truth.rows.push_back(
        {expr_coeff_map(zhang_yeung_expr(bg, t[0], t[1], t[2], t[3])), Rel::Ge});
  for (const LinIneq& f : P.facets) {
    ImplicationResult ir = is_implied(f.coeffs, truth);
    CHECK(ir.implied);
    CHECK(verify_implication(f.coeffs, truth, ir.cert));
  }
}
