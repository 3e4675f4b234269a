#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bookineq/core.hpp"
#include "fixtures.hpp"

using namespace bookineq;
using bookineq::testing::make_u24;
using bookineq::testing::make_violator;
using bookineq::testing::random_polymatroid;

TEST_CASE("ground set parses subsets greedily by longest label") {
  GroundSet gs({"a", "c1", "c12", "b"});
  CHECK(*gs.parse_subset("a") == 0b0001);
  CHECK(*gs.parse_subset("c12") == 0b0100);   // not c1 + unknown "2"
  CHECK(*gs.parse_subset("ac1b") == 0b1011);
  CHECK(!gs.parse_subset("ax"));
  CHECK(!gs.parse_subset("aa"));
  CHECK(*gs.parse_subset("") == 0);
  CHECK(gs.subset_to_string(0b0110) == "c1c12");
}

TEST_CASE("subset round-trips through its string form") {
  GroundSet gs({"a", "b", "c", "d"});
  for (Mask m = 0; m <= gs.full_mask(); ++m)
    CHECK(*gs.parse_subset(gs.subset_to_string(m)) == m);
}

TEST_CASE("graded-lex orders by size then mask") {
  CHECK(graded_lex_less(0b001, 0b010));
  CHECK(graded_lex_less(0b100, 0b011));  // singleton before any pair
  CHECK(!graded_lex_less(0b011, 0b100));
  CHECK(!graded_lex_less(0b011, 0b011));
}

TEST_CASE("uniform and violator fixtures validate") {
  for (const Polymatroid& g : {make_u24(), make_violator()}) {
    ValidationReport r = validate_polymatroid(g);
    CHECK(r.ok);
    CHECK(r.violations.empty());
    CHECK(validate_polymatroid_full(g).ok);
  }
}

TEST_CASE("validators flag broken rank functions and agree") {
  Polymatroid g = make_u24();

  SUBCASE("nonzero empty rank") {
    g.rank[0] = 1;
    CHECK(!validate_polymatroid(g).ok);
    CHECK(!validate_polymatroid_full(g).ok);
  }
  SUBCASE("monotonicity broken at the top") {
    g.rank[g.ground.full_mask()] = 1;
    CHECK(!validate_polymatroid(g).ok);
    CHECK(!validate_polymatroid_full(g).ok);
  }
  SUBCASE("submodularity broken on a pair") {
    g.rank[*g.ground.parse_subset("ab")] = 3;  // r(a)+r(b) < r(ab)
    ValidationReport r = validate_polymatroid(g);
    CHECK(!r.ok);
    CHECK(!r.violations.empty());
    CHECK(!validate_polymatroid_full(g).ok);
  }
}

TEST_CASE("elemental and full validation agree on randomized inputs") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> pick_cell(1, 15);
  for (int trial = 0; trial < 200; ++trial) {
    Polymatroid g = random_polymatroid(rng, 4);
    CHECK(validate_polymatroid(g).ok);
    CHECK(validate_polymatroid_full(g).ok);
    // Perturb one cell; whatever the verdict, the two checks must agree.
    Polymatroid h = g;
    h.rank[pick_cell(rng)] += Rat(trial % 5 - 2);
    CHECK(validate_polymatroid(h).ok == validate_polymatroid_full(h).ok);
  }
}

TEST_CASE("expression builders match hand values on the fixtures") {
  Polymatroid u = make_u24();
  Polymatroid v = make_violator();
  const GroundSet& gs = u.ground;
  Mask a = 1, b = 2, c = 4, d = 8;

  CHECK(eval(pair_expr(gs, a, b), u) == 0);
  CHECK(eval(cond_expr(gs, a, b, c), u) == 1);
  CHECK(eval(pair_expr(gs, a, b), v) == 1);
  CHECK(eval(cond_expr(gs, a, b, c), v) == 0);

  CHECK(eval(ingleton_expr(gs, a, b, c, d), u) == 2);
  CHECK(eval(ingleton_expr(gs, a, b, c, d), v) == -1);

  LinExpr zy = zhang_yeung_expr(gs, 0, 1, 2, 3);
  CHECK(eval(zy, u) == 5);
  CHECK(eval(zy, v) == -1);
}

TEST_CASE("four-point pattern expands to its known coefficient list") {
  GroundSet gs({"a", "b", "c", "d"});
  LinExpr zy = zhang_yeung_expr(gs, 0, 1, 2, 3);
  LinExpr want(gs);
  auto add = [&](const char* s, int c) {
    want.add_term(*gs.parse_subset(s), Rat(c));
  };
  add("a", -2); add("b", -2); add("c", -1);
  add("ab", 3); add("ac", 3); add("bc", 3);
  add("ad", 1); add("bd", 1); add("cd", -1);
  add("abc", -4); add("abd", -1);
  CHECK((zy - want).is_zero());
}

TEST_CASE("conditional pattern reduces to the plain one with empty condition") {
  GroundSet gs({"a", "b", "c", "d"});
  LinExpr lhs = cond_expr(gs, 1, 2, 0);
  LinExpr rhs = pair_expr(gs, 1, 2);
  CHECK((lhs - rhs).is_zero());
}

TEST_CASE("eval is linear") {
  std::mt19937 rng(7);
  Polymatroid g = random_polymatroid(rng, 4);
  const GroundSet& gs = g.ground;
  LinExpr x = zhang_yeung_expr(gs, 0, 1, 2, 3);
  LinExpr y = ingleton_expr(gs, 1, 4, 2, 8);
  CHECK(eval(x + y, g) == eval(x, g) + eval(y, g));
  CHECK(eval(Rat(3, 2) * x, g) == Rat(3, 2) * eval(x, g));
}

TEST_CASE("canonical form is scale and sign invariant") {
  GroundSet gs({"a", "b", "c", "d"});
  LinExpr zy = zhang_yeung_expr(gs, 0, 1, 2, 3);
  LinExpr scaled = Rat(2, 3) * zy;
  CHECK(expr_key(canonical_form(zy)) == expr_key(canonical_form(scaled)));
  LinExpr neg = Rat(-1) * zy;
  CHECK(expr_key(canonical_form(zy)) == expr_key(canonical_form(neg)));
  // Canonical form starts with a positive coefficient on the first term.
  LinExpr canon = canonical_form(zy);
  CHECK(canon.coeff.begin()->second > 0);
  for (const auto& [m, c] : canon.coeff) CHECK(is_integral(c));
}

TEST_CASE("expression keys distinguish different expressions") {
  GroundSet gs({"a", "b", "c", "d"});
  LinExpr p = pair_expr(gs, 1, 2);
  LinExpr q = pair_expr(gs, 1, 4);
  CHECK(expr_key(canonical_form(p)) != expr_key(canonical_form(q)));
  LinExpr zero(gs);
  CHECK(expr_key(zero).empty());
}
