#include "bookineq/inequalities.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace bookineq {

namespace {

Rat rat_ll(long long v) { return Rat(static_cast<long>(v)); }

long long binom_ll(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_ideal(const IdealSet& s) {
  if (s.n < 2) throw std::invalid_argument("ideal: page count must be >= 2");
  if (s.points.empty()) throw std::invalid_argument("ideal: empty point set");
  if (!std::is_sorted(s.points.begin(), s.points.end()) ||
      std::adjacent_find(s.points.begin(), s.points.end()) != s.points.end())
    throw std::invalid_argument("ideal: points not sorted/deduplicated");
  auto have = [&](LatticePoint p) {
    return std::binary_search(s.points.begin(), s.points.end(), p);
  };
  for (const auto& p : s.points) {
    if (p.k < 0 || p.ell < 0 || p.k + p.ell > s.n - 2)
      throw std::invalid_argument("ideal: point outside the triangle");
    // Downward closure follows from closure under the two cover steps.
    if (p.k > 0 && !have({p.k - 1, p.ell}))
      throw std::invalid_argument("ideal: not downward closed");
    if (p.ell > 0 && !have({p.k, p.ell - 1}))
      throw std::invalid_argument("ideal: not downward closed");
  }
}

}  // namespace

IdealSet make_ideal(int n, std::vector<LatticePoint> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  IdealSet s{n, std::move(points)};
  check_ideal(s);
  return s;
}

std::vector<IdealSet> enumerate_ideals(int n) {
  if (n < 2) throw std::invalid_argument("enumerate_ideals: n must be >= 2");
  // Column heights h_0 >= h_1 >= ... with h_k <= n-1-k describe exactly the
  // downward closed subsets (column k holds <k,0> ... <k,h_k-1>).
  std::vector<IdealSet> out;
  std::vector<int> h;
  auto emit = [&]() {
    std::vector<LatticePoint> pts;
    for (int k = 0; k < static_cast<int>(h.size()); ++k)
      for (int ell = 0; ell < h[k]; ++ell) pts.push_back({k, ell});
    if (!pts.empty()) {
      std::sort(pts.begin(), pts.end());
      out.push_back(IdealSet{n, std::move(pts)});
    }
  };
  auto rec = [&](auto&& self, int k, int cap) -> void {
    if (k > n - 2) {
      emit();
      return;
    }
    const int hi = std::min(cap, n - 1 - k);
    for (int v = 0; v <= hi; ++v) {
      h.push_back(v);
      if (v == 0)
        emit();  // later columns are forced empty
      else
        self(self, k + 1, v);
      h.pop_back();
    }
  };
  rec(rec, 0, n - 1);
  std::sort(out.begin(), out.end(), [](const IdealSet& a, const IdealSet& b) {
    if (a.points.size() != b.points.size())
      return a.points.size() < b.points.size();
    return a.points < b.points;
  });
  return out;
}

IdealSet axis_ideal_u(int n) {
  std::vector<LatticePoint> pts;
  for (int k = 0; k <= n - 2; ++k) pts.push_back({k, 0});
  return make_ideal(n, std::move(pts));
}

IdealSet axis_ideal_v(int n) {
  std::vector<LatticePoint> pts;
  for (int ell = 0; ell <= n - 2; ++ell) pts.push_back({0, ell});
  return make_ideal(n, std::move(pts));
}

IdealSet triangle_ideal(int n) {
  std::vector<LatticePoint> pts;
  for (int k = 0; k <= n - 2; ++k)
    for (int ell = 0; k + ell <= n - 2; ++ell) pts.push_back({k, ell});
  return make_ideal(n, std::move(pts));
}

IdealSet transpose(const IdealSet& s) {
  std::vector<LatticePoint> pts;
  pts.reserve(s.points.size());
  for (const auto& p : s.points) pts.push_back({p.ell, p.k});
  return make_ideal(s.n, std::move(pts));
}

CoeffTriple coeff_vector(const IdealSet& s) {
  check_ideal(s);
  CoeffTriple t;
  for (const auto& p : s.points) {
    const long long b = binom_ll(p.k + p.ell, p.k);
    t.x += b;
    t.y += b * (p.k + 1);
    t.z += b * p.ell;
  }
  return t;
}

const GroundSet& abcd_ground() {
  static const GroundSet gs({"a", "b", "c", "d"});
  return gs;
}

namespace {
constexpr Mask A = 1, B = 2, C = 4, D = 8;
}

LinExpr book_ineq_A(const IdealSet& s) {
  const CoeffTriple t = coeff_vector(s);
  const GroundSet& gs = abcd_ground();
  LinExpr e = rat_ll(t.x) * ingleton_expr(gs, A, B, C, D);
  e += cond_expr(gs, A, B, C);
  e += rat_ll(t.y) * (cond_expr(gs, A, C, B) + cond_expr(gs, B, C, A));
  e += rat_ll(t.z) * (cond_expr(gs, A, D, B) + cond_expr(gs, B, D, A));
  return e;
}

LinExpr book_ineq_B(int ell, int n) {
  if (n < 2) throw std::invalid_argument("book_ineq_B: n must be >= 2");
  if (ell < 1 || ell > n - 1)
    throw std::invalid_argument("book_ineq_B: index out of range");
  const GroundSet& gs = abcd_ground();
  LinExpr e = Rat(ell) * ingleton_expr(gs, B, D, A, C);
  e += cond_expr(gs, A, B, D);
  e += rat_ll(static_cast<long long>(ell) * (ell + 1) / 2) *
       (cond_expr(gs, B, D, A) + cond_expr(gs, A, D, B));
  return e;
}

std::vector<LinExpr> generate_family(int n, bool include_swaps) {
  std::vector<LinExpr> out;
  std::unordered_set<std::string> seen;
  auto push = [&](const LinExpr& e) {
    LinExpr c = canonical_ineq(e);
    if (seen.insert(expr_key(c)).second) out.push_back(std::move(c));
  };
  for (const IdealSet& s : enumerate_ideals(n)) push(book_ineq_A(s));
  for (int ell = 1; ell <= n - 1; ++ell) push(book_ineq_B(ell, n));
  if (include_swaps) {
    static const std::vector<int> swap_ab{1, 0, 2, 3};
    static const std::vector<int> swap_cd{0, 1, 3, 2};
    // Closure under the group the two swaps generate.
    for (std::size_t i = 0; i < out.size(); ++i) {
      push(permute_expr(out[i], swap_ab));
      push(permute_expr(out[i], swap_cd));
    }
  }
  return out;
}

std::vector<Violation> check_against(const Polymatroid& g,
                                     const std::vector<LinExpr>& family) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    Rat v = eval(family[i], g);
    if (v < 0) out.push_back({i, std::move(v)});
  }
  return out;
}

HCone shannon_cone(const GroundSet& gs) {
  const int n = gs.size();
  const Mask full = (Mask(1) << n) - 1;
  HCone cone;
  std::vector<Mask> masks;
  for (Mask m = 1; m <= full; ++m) masks.push_back(m);
  std::sort(masks.begin(), masks.end(), GradedLex{});
  for (Mask m : masks) cone.coords.push_back(gs.subset_to_string(m));

  auto add = [&](const LinExpr& e) {
    cone.rows.push_back(LinIneq{expr_coeff_map(e), Rel::Ge});
  };
  for (int i = 0; i < n; ++i) {
    LinExpr e(gs);
    e.add_term(full, 1);
    e.add_term(full & ~(Mask(1) << i), -1);
    add(e);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Mask rest = full & ~(Mask(1) << i) & ~(Mask(1) << j);
      Mask K = rest;
      while (true) {
        add(cond_expr(gs, Mask(1) << i, Mask(1) << j, K));
        if (K == 0) break;
        K = (K - 1) & rest;
      }
    }
  return cone;
}

std::map<std::string, Rat> expr_coeff_map(const LinExpr& e) {
  std::map<std::string, Rat> out;
  for (const auto& [m, c] : e.coeff) out[e.ground.subset_to_string(m)] = c;
  return out;
}

RedundancyResult remove_redundant(const std::vector<LinExpr>& family,
                                  const HCone& background) {
  for (const LinExpr& e : family)
    for (const auto& [m, c] : e.coeff)
      if (background.coord_index(e.ground.subset_to_string(m)) < 0)
        throw std::invalid_argument(
            "remove_redundant: family term outside background coordinates");
  // Normalization slice: the rank of the full ground set (the graded-lex last
  // coordinate) is pinned to 1, which meets every nonzero ray exactly once.
  const AffineRow slice{{{background.coords.back(), Rat(1)}}, Rel::Eq, Rat(1)};

  auto scan = [&](const std::vector<std::size_t>& order) {
    std::vector<bool> active(family.size(), true);
    for (std::size_t idx : order) {
      HCone cone = background;
      for (std::size_t j = 0; j < family.size(); ++j)
        if (active[j] && j != idx)
          cone.rows.push_back(LinIneq{expr_coeff_map(family[j]), Rel::Ge});
      LpMinResult r = lp_min(cone, expr_coeff_map(family[idx]), {slice});
      if (r.status == LpStatus::Infeasible)
        throw std::logic_error("remove_redundant: empty normalized region");
      if (r.status == LpStatus::Optimal && r.value >= 0) active[idx] = false;
    }
    return active;
  };

  std::vector<std::size_t> fwd(family.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) fwd[i] = i;
  std::vector<std::size_t> rev(fwd.rbegin(), fwd.rend());
  const std::vector<bool> active = scan(fwd);
  const std::vector<bool> active_rev = scan(rev);

  auto key_multiset = [&](const std::vector<bool>& a) {
    std::multiset<std::string> keys;
    for (std::size_t i = 0; i < family.size(); ++i)
      if (a[i]) keys.insert(expr_key(canonical_ineq(family[i])));
    return keys;
  };
  if (key_multiset(active) != key_multiset(active_rev))
    throw std::logic_error("remove_redundant: scan order changed the result");

  RedundancyResult out;
  for (std::size_t i = 0; i < family.size(); ++i)
    if (active[i]) {
      out.kept.push_back(family[i]);
      out.kept_indices.push_back(i);
    }
  HCone kept_cone = background;
  for (const LinExpr& e : out.kept)
    kept_cone.rows.push_back(LinIneq{expr_coeff_map(e), Rel::Ge});
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (active[i]) continue;
    ImplicationResult r = is_implied(expr_coeff_map(family[i]), kept_cone);
    if (!r.implied)
      throw std::logic_error("remove_redundant: dropped row lost its witness");
    out.removed.push_back({i, std::move(r.cert)});
  }
  return out;
}

std::vector<std::pair<Rat, Rat>> plot_data(int n) {
  std::vector<LinExpr> family;
  std::vector<CoeffTriple> triples;
  std::unordered_set<std::string> seen;
  for (const IdealSet& s : enumerate_ideals(n)) {
    LinExpr e = canonical_ineq(book_ineq_A(s));
    if (seen.insert(expr_key(e)).second) {
      family.push_back(std::move(e));
      triples.push_back(coeff_vector(s));
    }
  }
  RedundancyResult rr = remove_redundant(family, shannon_cone(abcd_ground()));
  std::vector<std::pair<Rat, Rat>> out;
  for (std::size_t i : rr.kept_indices) {
    const CoeffTriple& t = triples[i];
    out.emplace_back(rat_ll(t.y) / rat_ll(t.x), rat_ll(t.z) / rat_ll(t.x));
  }
  return out;
}

std::string ineq_to_text(const LinExpr& e) {
  if (e.coeff.empty()) return "0 >= 0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : e.coeff) {
    const bool neg = c < 0;
    Rat mag = neg ? Rat(-c) : c;
    if (first)
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    first = false;
    out += rat_to_string(mag);
    out += '*';
    out += e.ground.subset_to_string(m);
  }
  out += " >= 0";
  return out;
}

LinExpr ineq_from_text(const GroundSet& gs, const std::string& line) {
  // Normalize the unicode minus and ">=" to their ASCII forms.
  std::string t;
  for (std::size_t i = 0; i < line.size();) {
    if (line.compare(i, 3, "\xE2\x88\x92") == 0) {
      t += '-';
      i += 3;
    } else if (line.compare(i, 3, "\xE2\x89\xA5") == 0) {
      t += ">=";
      i += 3;
    } else {
      t += line[i++];
    }
  }
  const std::size_t rel = t.find(">=");
  if (rel == std::string::npos)
    throw std::invalid_argument("inequality text: missing >=");
  std::string rhs = t.substr(rel + 2);
  rhs.erase(std::remove_if(rhs.begin(), rhs.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            rhs.end());
  if (rhs != "0")
    throw std::invalid_argument("inequality text: right side must be 0");

  std::vector<std::string> tok;
  std::string cur;
  for (std::size_t i = 0; i < rel; ++i) {
    if (std::isspace(static_cast<unsigned char>(t[i]))) {
      if (!cur.empty()) tok.push_back(std::move(cur)), cur.clear();
    } else {
      cur += t[i];
    }
  }
  if (!cur.empty()) tok.push_back(std::move(cur));
  if (tok.empty()) throw std::invalid_argument("inequality text: empty left side");
  if (tok.size() == 1 && tok[0] == "0") return LinExpr(gs);

  LinExpr e(gs);
  bool expect_term = true;
  int sign = 1;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const std::string& w = tok[i];
    if (!expect_term) {
      if (w == "+")
        sign = 1;
      else if (w == "-")
        sign = -1;
      else
        throw std::invalid_argument("inequality text: expected + or -");
      expect_term = true;
      continue;
    }
    std::string term = w;
    if (i == 0 && term.size() > 1 && term[0] == '-') {
      sign = -1;
      term = term.substr(1);
    }
    const std::size_t star = term.find('*');
    if (star == std::string::npos || star == 0 || star + 1 >= term.size())
      throw std::invalid_argument("inequality text: malformed term '" + w + "'");
    auto c = rat_from_string(term.substr(0, star));
    if (!c)
      throw std::invalid_argument("inequality text: bad coefficient in '" + w + "'");
    auto m = gs.parse_subset(term.substr(star + 1));
    if (!m || *m == 0)
      throw std::invalid_argument("inequality text: unknown subset in '" + w + "'");
    e.add_term(*m, Rat(sign) * *c);
    expect_term = false;
    sign = 1;
  }
  if (expect_term)
    throw std::invalid_argument("inequality text: dangling + or -");
  return e;
}

}  // namespace bookineq
