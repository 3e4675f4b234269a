#include "bookineq/proofcheck.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "bookineq/book.hpp"

namespace bookineq {

namespace {

Rat binom_rat(unsigned long a, unsigned long b) {
  mpz_class z;
  mpz_bin_uiui(z.get_mpz_t(), a, b);
  return Rat(z);
}

mpz_class fac(unsigned long a) {
  mpz_class z;
  mpz_fac_ui(z.get_mpz_t(), a);
  return z;
}

// Extended-ground bit layout (see fold_subset): a = bit 0, b = bit 1,
// page p (1-based) holds c_p at bit 2p and d_p at bit 2p+1.
constexpr Mask kSpine = 3u;

Mask cbit(int p) { return Mask{1} << (2 * p); }
Mask dbit(int p) { return Mask{1} << (2 * p + 1); }
Mask page_both(int p) { return cbit(p) | dbit(p); }

Mask crun(int from, int to) {
  Mask m = 0;
  for (int p = from; p <= to; ++p) m |= cbit(p);
  return m;
}
Mask drun(int from, int to) {
  Mask m = 0;
  for (int p = from; p <= to; ++p) m |= dbit(p);
  return m;
}
Mask fullrun(int from, int to) {
  Mask m = 0;
  for (int p = from; p <= to; ++p) m |= page_both(p);
  return m;
}

// c on pages 1..k, d on pages k+1..k+l, both on pages k+l+1..k+l+m.
Mask ckdl(int k, int l, int m = 0) {
  return crun(1, k) | drun(k + 1, k + l) | fullrun(k + l + 1, k + l + m);
}

int page_of(Mask single_bit) { return __builtin_ctz(single_bit) / 2; }

constexpr int kMaxPages = (kMaxGroundSize - 2) / 2;

struct Ctx {
  int n;
  BookLayout L;
  explicit Ctx(int pages) : n(pages), L(cone_layout(pages)) {}
  const GroundSet& g() const { return L.extended_ground; }
};

void add_subset(OrbitExpr& e, Mask s, const Rat& w) {
  if (s == 0 || w == 0) return;
  e.add(fold_subset(e.n, s), w);
}

// (I, J | K) in orbit coordinates; degenerate arguments cancel to zero.
OrbitExpr fold_cond(int n, Mask I, Mask J, Mask K) {
  OrbitExpr e(n);
  add_subset(e, I | K, Rat(1));
  add_subset(e, J | K, Rat(1));
  add_subset(e, I | J | K, Rat(-1));
  add_subset(e, (I & J) | K, Rat(-1));
  return e;
}

OrbitCoord oc(int n, Mask spine, int q, int r, int m) {
  OrbitCoord c;
  c.spine_part = spine;
  c.n = n;
  c.q = q;
  c.r = r;
  c.m = m;
  return c;
}

std::string sm_id(const GroundSet& g, Mask x, Mask y, Mask K) {
  if (x == y || popcount(x) != 1 || popcount(y) != 1 || (K & (x | y)))
    throw std::logic_error("sm_id: malformed elemental instance");
  if (x > y) std::swap(x, y);
  return "sm:" + g.subset_to_string(x) + "," + g.subset_to_string(y) + "|" +
         g.subset_to_string(K);
}

std::string ind_id(int s, int t) {
  return "ind:" + std::to_string(s) + "," + std::to_string(t);
}

using Terms = std::vector<std::pair<std::string, Rat>>;

void append_terms(Terms& out, const Terms& in, const Rat& scale = Rat(1)) {
  for (const auto& [id, w] : in) out.emplace_back(id, w * scale);
}

Terms merge_terms(Terms t) {
  std::sort(t.begin(), t.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Terms out;
  for (auto& p : t) {
    if (!out.empty() && out.back().first == p.first)
      out.back().second += p.second;
    else
      out.push_back(std::move(p));
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const auto& p) { return p.second == 0; }),
            out.end());
  return out;
}

// (I, J | K) as a sum of unit elemental instances, peeling I and J one
// element at a time.  I, J, K pairwise disjoint; an empty I or J
// contributes nothing, matching the zero expression.
void chain_cond(const GroundSet& g, Mask I, Mask J, Mask K, Terms& out) {
  Mask Kx = K;
  for (int i = 0; i < g.size(); ++i) {
    Mask xb = Mask{1} << i;
    if (!(I & xb)) continue;
    Mask Ky = Kx;
    for (int j = 0; j < g.size(); ++j) {
      Mask yb = Mask{1} << j;
      if (!(J & yb)) continue;
      out.emplace_back(sm_id(g, xb, yb, Ky), Rat(1));
      Ky |= yb;
    }
    Kx |= xb;
  }
}

// One transfer step (e, X | ab): e a page element, X a subset of other
// pages.  pos certifies the expression, neg its negation; the latter
// trades the pair (page of e, pages of X) against the block-additivity
// equality, which is what lets material move from right to left of the
// spine without cost.
struct StepCerts {
  OrbitExpr expr;
  Terms pos;
  Terms neg;
};

StepCerts step_certs(const Ctx& c, Mask ebit, Mask X) {
  StepCerts s;
  s.expr = OrbitExpr(c.n);
  if (X == 0) return s;
  s.expr = fold_cond(c.n, ebit, X, kSpine);
  chain_cond(c.g(), ebit, X, kSpine, s.pos);
  int j = page_of(ebit);
  Mask Pj = page_both(j);
  Mask T = 0;
  int tcount = 0;
  for (int p = 1; p <= c.n; ++p)
    if (X & page_both(p)) {
      T |= page_both(p);
      ++tcount;
    }
  chain_cond(c.g(), Pj & ~ebit, T, kSpine | ebit, s.neg);
  chain_cond(c.g(), ebit, T & ~X, kSpine | X, s.neg);
  s.neg.emplace_back(ind_id(1, tcount), Rat(-1));
  return s;
}

// Equality run: ab c^k d^l (extra) = ab (extra) + k(abc-ab) + l(abd-ab),
// as expr == 0 with both directions certified.  extra is either empty or
// one full page just past k+l.
struct EqCerts {
  OrbitExpr expr;
  Terms ge;
  Terms le;
};

EqCerts spine_run(const Ctx& c, int k, int l, Mask extra) {
  EqCerts e;
  e.expr = OrbitExpr(c.n);
  Mask X = extra;
  auto take = [&](Mask eb) {
    StepCerts st = step_certs(c, eb, X);
    e.expr -= st.expr;
    append_terms(e.ge, st.neg);
    append_terms(e.le, st.pos);
    X |= eb;
  };
  for (int p = 1; p <= k; ++p) take(cbit(p));
  for (int p = k + 1; p <= k + l; ++p) take(dbit(p));
  return e;
}

struct Built {
  OrbitExpr expr;
  Terms lower;
  std::optional<Terms> upper;
};

// a + k(ac-a) + l(ad-a) >= a c^k d^l (and the b version): release the
// page letters one at a time over the single spine element.
Built claim_upper_side(const Ctx& c, int k, int l, Mask sbit) {
  Built b;
  b.expr = OrbitExpr(c.n);
  Terms t;
  Mask X = 0;
  auto take = [&](Mask eb) {
    if (X != 0) {
      b.expr += fold_cond(c.n, eb, X, sbit);
      chain_cond(c.g(), eb, X, sbit, t);
    }
    X |= eb;
  };
  for (int p = 1; p <= k; ++p) take(cbit(p));
  for (int p = k + 1; p <= k + l; ++p) take(dbit(p));
  b.lower = std::move(t);
  return b;
}

// c^k d^l (cd)^1 >= cd + k(abc-ab) + l(abd-ab).
Built claim_lower_cd(const Ctx& c, int k, int l) {
  Mask X = ckdl(k, l);
  Mask full = page_both(k + l + 1);
  Built b;
  b.expr = fold_cond(c.n, kSpine, X, full);
  Terms t;
  chain_cond(c.g(), kSpine, X, full, t);
  EqCerts e8 = spine_run(c, k, l, full);
  b.expr += e8.expr;
  append_terms(t, e8.ge);
  b.lower = std::move(t);
  return b;
}

// b d^l (cd)^1 >= bcd + l(abd-ab).
Built claim_lower_bcd(const Ctx& c, int l) {
  Mask X = drun(1, l);
  Mask full = page_both(l + 1);
  Built b;
  b.expr = fold_cond(c.n, Mask{1}, X, Mask{2} | full);
  Terms t;
  chain_cond(c.g(), Mask{1}, X, Mask{2} | full, t);
  EqCerts e8 = spine_run(c, 0, l, full);
  b.expr += e8.expr;
  append_terms(t, e8.ge);
  b.lower = std::move(t);
  return b;
}

// a c d^l >= ac + l(abd-ab); here c sits on page 1 and d on pages 2..l+1.
Built claim_lower_ac(const Ctx& c, int l) {
  Mask X = drun(2, l + 1);
  Built b;
  b.expr = fold_cond(c.n, Mask{2}, X, Mask{1} | cbit(1));
  Terms t;
  chain_cond(c.g(), Mask{2}, X, Mask{1} | cbit(1), t);
  EqCerts e8 = spine_run(c, 1, l, 0);
  b.expr += e8.expr;
  append_terms(t, e8.ge);
  b.lower = std::move(t);
  return b;
}

void check_claim(const ClaimInstance& ci) {
  std::string why;
  if (!verify_certificate(ci.lower, ci.expr, &why))
    throw std::logic_error("claim " + ci.name + ": " + why);
  if (ci.rel == Rel::Eq) {
    if (!ci.upper) throw std::logic_error("claim " + ci.name + ": equality lacks an upper certificate");
    OrbitExpr neg(ci.expr.n);
    neg -= ci.expr;
    if (!verify_certificate(*ci.upper, neg, &why))
      throw std::logic_error("claim " + ci.name + " (upper): " + why);
  }
}

ClaimInstance finish_claim(int n, std::string name, Rel rel, Built b) {
  ClaimInstance ci;
  ci.name = std::move(name);
  ci.rel = rel;
  ci.expr = std::move(b.expr);
  ci.lower = Certificate{n, merge_terms(std::move(b.lower))};
  if (b.upper) ci.upper = Certificate{n, merge_terms(std::move(*b.upper))};
  check_claim(ci);
  return ci;
}

// ---------------------------------------------------------------------------
// Row lists.
// ---------------------------------------------------------------------------

LedgerRow sm_row(const Ctx& c, std::string label, Mask I, Mask J, Mask K) {
  LedgerRow r;
  r.label = std::move(label);
  r.how = "submodularity";
  r.rel = Rel::Ge;
  r.expr = fold_cond(c.n, I, J, K);
  r.sm_instance = {c.g().subset_to_string(I), c.g().subset_to_string(J),
                   c.g().subset_to_string(K)};
  Terms t;
  chain_cond(c.g(), I, J, K, t);
  r.lower = Certificate{c.n, merge_terms(std::move(t))};
  return r;
}

LedgerRow claim_row(const Ctx& c, std::string label, std::string how, Rel rel,
                    Built b) {
  LedgerRow r;
  r.label = std::move(label);
  r.how = std::move(how);
  r.rel = rel;
  r.expr = std::move(b.expr);
  r.lower = Certificate{c.n, merge_terms(std::move(b.lower))};
  if (b.upper) r.upper = Certificate{c.n, merge_terms(std::move(*b.upper))};
  return r;
}

std::vector<LedgerRow> build_rows_A(const Ctx& c, int k, int l) {
  Mask X = ckdl(k, l);
  int j = k + l + 1;
  std::vector<LedgerRow> rows;
  rows.push_back(sm_row(c, "A1", cbit(j), X, Mask{1}));
  rows.push_back(sm_row(c, "A2", dbit(j), X, Mask{2}));
  {
    StepCerts st = step_certs(c, dbit(j), X);
    Built b;
    b.expr = OrbitExpr(c.n);
    b.expr -= st.expr;
    b.lower = std::move(st.neg);
    b.upper = std::move(st.pos);
    rows.push_back(claim_row(c, "A3", "over-spine", Rel::Eq, std::move(b)));
  }
  {
    EqCerts e8 = spine_run(c, k + 1, l, 0);
    Built b{std::move(e8.expr), std::move(e8.ge), std::move(e8.le)};
    rows.push_back(claim_row(c, "A4", "over-spine", Rel::Eq, std::move(b)));
  }
  rows.push_back(
      claim_row(c, "A5", "upper-a", Rel::Ge, claim_upper_side(c, k, l + 1, Mask{1})));
  rows.push_back(
      claim_row(c, "A6", "upper-b", Rel::Ge, claim_upper_side(c, k + 1, l, Mask{2})));
  rows.push_back(claim_row(c, "A7", "lower-cd", Rel::Ge, claim_lower_cd(c, k, l)));
  return rows;
}

std::vector<LedgerRow> build_rows_B(const Ctx& c, int l) {
  Mask Dm = drun(1, l);
  int j = l + 1;
  std::vector<LedgerRow> rows;
  rows.push_back(sm_row(c, "B1", cbit(1), drun(2, l + 1), dbit(1)));
  rows.push_back(sm_row(c, "B2", dbit(j), Dm, Mask{2}));
  {
    StepCerts st = step_certs(c, dbit(j), Dm);
    Built b;
    b.expr = OrbitExpr(c.n);
    b.expr -= st.expr;
    b.lower = std::move(st.neg);
    b.upper = std::move(st.pos);
    rows.push_back(claim_row(c, "B3", "over-spine", Rel::Eq, std::move(b)));
  }
  rows.push_back(
      claim_row(c, "B4", "upper-a", Rel::Ge, claim_upper_side(c, 0, l + 1, Mask{1})));
  rows.push_back(
      claim_row(c, "B5", "upper-b", Rel::Ge, claim_upper_side(c, 1, l, Mask{2})));
  rows.push_back(claim_row(c, "B6", "lower-ac", Rel::Ge, claim_lower_ac(c, l)));
  rows.push_back(claim_row(c, "B7", "lower-bcd", Rel::Ge, claim_lower_bcd(c, l)));
  return rows;
}

const SymmetricCone& cached_cone(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SymmetricCone>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<SymmetricCone>(assemble_cone(n));
  return *slot;
}

std::map<std::string, Rat> negate_row(const std::map<std::string, Rat>& row) {
  std::map<std::string, Rat> out;
  for (const auto& [k, v] : row) out.emplace(k, -v);
  return out;
}

LedgerReport ledger_check_common(char side, int k, int l, int n,
                                 const SymmetricCone* lp_cone) {
  Ctx c(n);
  LedgerReport rep;
  rep.side = side;
  rep.k = k;
  rep.l = l;
  rep.n = n;
  rep.rows = side == 'A' ? build_rows_A(c, k, l) : build_rows_B(c, l);
  OrbitExpr want = side == 'A' ? crucial_A(k, l, n) : crucial_B(l, n);

  const SymmetricCone* C = lp_cone;
  if (!C && n <= kLedgerLpMaxPages) C = &cached_cone(n);

  bool all_ok = true;
  OrbitExpr sum(n);
  for (auto& r : rep.rows) {
    sum += r.expr;
    std::string why;
    if (!verify_certificate(r.lower, r.expr, &why)) {
      all_ok = false;
      rep.detail += r.label + ": " + why + "\n";
    }
    if (r.rel == Rel::Eq) {
      if (!r.upper) {
        all_ok = false;
        rep.detail += r.label + ": equality lacks an upper certificate\n";
      } else {
        OrbitExpr neg(n);
        neg -= r.expr;
        if (!verify_certificate(*r.upper, neg, &why)) {
          all_ok = false;
          rep.detail += r.label + " (upper): " + why + "\n";
        }
      }
    }
    if (C && r.how != "submodularity" && !r.expr.is_zero()) {
      auto row = to_cone_row(*C, r.expr);
      ImplicationResult res = is_implied(row, C->cone);
      bool dir_ok = res.implied;
      if (dir_ok && r.rel == Rel::Eq)
        dir_ok = is_implied(negate_row(row), C->cone).implied;
      r.lp = std::move(res);
      if (!dir_ok) {
        all_ok = false;
        rep.detail += r.label + ": cone implication check failed\n";
      }
    }
  }
  rep.sum_matches = sum == want;
  if (!rep.sum_matches)
    rep.detail += "rows do not sum to the recursion inequality\n";
  rep.ok = all_ok && rep.sum_matches;
  return rep;
}

// Flattened, verified combination for crucial_A / crucial_B, cached per
// (k, l, n) since the telescoping sums revisit the same instances often.
const Terms& crucial_cert_A(int k, int l, int n) {
  static std::mutex mu;
  static std::map<std::array<int, 3>, Terms> cache;
  std::array<int, 3> key{k, l, n};
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Ctx c(n);
  auto rows = build_rows_A(c, k, l);
  OrbitExpr sum(n);
  Terms flat;
  for (auto& r : rows) {
    sum += r.expr;
    std::string why;
    if (!verify_certificate(r.lower, r.expr, &why))
      throw std::logic_error("row " + r.label + ": " + why);
    append_terms(flat, r.lower.terms);
  }
  if (!(sum == crucial_A(k, l, n)))
    throw std::logic_error("A rows do not sum to the recursion inequality");
  flat = merge_terms(std::move(flat));
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(key, std::move(flat)).first->second;
}

const Terms& crucial_cert_B(int l, int n) {
  static std::mutex mu;
  static std::map<std::array<int, 2>, Terms> cache;
  std::array<int, 2> key{l, n};
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Ctx c(n);
  auto rows = build_rows_B(c, l);
  OrbitExpr sum(n);
  Terms flat;
  for (auto& r : rows) {
    sum += r.expr;
    std::string why;
    if (!verify_certificate(r.lower, r.expr, &why))
      throw std::logic_error("row " + r.label + ": " + why);
    append_terms(flat, r.lower.terms);
  }
  if (!(sum == crucial_B(l, n)))
    throw std::logic_error("B rows do not sum to the recursion inequality");
  flat = merge_terms(std::move(flat));
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(key, std::move(flat)).first->second;
}

int parse_int_strict(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument("malformed integer '" + s + "'");
  return v;
}

// Relabels an extended-ground subset along the spine swap a<->b and/or the
// page-letter swap c_i<->d_i.
Mask relabel_mask(Mask m, bool swap_ab, bool swap_cd) {
  Mask out = 0;
  for (int i = 0; i < kMaxGroundSize; ++i) {
    if (!(m & (Mask{1} << i))) continue;
    int j = i;
    if (i < 2) {
      if (swap_ab) j = 1 - i;
    } else {
      if (swap_cd) j = (i % 2 == 0) ? i + 1 : i - 1;
    }
    out |= Mask{1} << j;
  }
  return out;
}

std::string relabel_id(const GroundSet& g, const std::string& id, bool swap_ab,
                       bool swap_cd) {
  if (id.rfind("ind:", 0) == 0) return id;
  auto comma = id.find(',', 3);
  auto bar = id.find('|', comma + 1);
  Mask x = *g.parse_subset(id.substr(3, comma - 3));
  Mask y = *g.parse_subset(id.substr(comma + 1, bar - comma - 1));
  std::string Ks = id.substr(bar + 1);
  Mask K = Ks.empty() ? 0 : *g.parse_subset(Ks);
  return sm_id(g, relabel_mask(x, swap_ab, swap_cd),
               relabel_mask(y, swap_ab, swap_cd),
               relabel_mask(K, swap_ab, swap_cd));
}

}  // namespace

// ---------------------------------------------------------------------------
// OrbitExpr.
// ---------------------------------------------------------------------------

void OrbitExpr::add(const OrbitCoord& c, const Rat& w) {
  if (w == 0) return;
  if (c.n != n)
    throw std::invalid_argument("orbit coordinate for a different page count");
  auto [it, fresh] = coeffs.try_emplace(c, w);
  if (!fresh) {
    it->second += w;
    if (it->second == 0) coeffs.erase(it);
  }
}

Rat OrbitExpr::coeff(const OrbitCoord& c) const {
  auto it = coeffs.find(c);
  return it == coeffs.end() ? Rat(0) : it->second;
}

OrbitExpr& OrbitExpr::operator+=(const OrbitExpr& o) {
  if (o.n != n) throw std::invalid_argument("page count mismatch");
  for (const auto& [c, w] : o.coeffs) add(c, w);
  return *this;
}

OrbitExpr& OrbitExpr::operator-=(const OrbitExpr& o) {
  if (o.n != n) throw std::invalid_argument("page count mismatch");
  for (const auto& [c, w] : o.coeffs) add(c, -w);
  return *this;
}

OrbitExpr& OrbitExpr::operator*=(const Rat& s) {
  if (s == 0) {
    coeffs.clear();
    return *this;
  }
  for (auto& [c, w] : coeffs) w *= s;
  return *this;
}

OrbitExpr operator+(OrbitExpr a, const OrbitExpr& b) { return a += b; }
OrbitExpr operator-(OrbitExpr a, const OrbitExpr& b) { return a -= b; }
OrbitExpr operator*(const Rat& s, OrbitExpr a) { return a *= s; }

bool operator==(const OrbitExpr& a, const OrbitExpr& b) {
  return a.n == b.n && a.coeffs == b.coeffs;
}

Rat orbit_count(const OrbitCoord& c) {
  mpz_class den = fac(c.q) * fac(c.r) * fac(c.m) * fac(c.untouched());
  return Rat(fac(c.n)) / Rat(den);
}

OrbitExpr fold_expr(const LinExpr& e, int n) {
  Ctx c(n);
  if (!(e.ground == c.g()))
    throw std::invalid_argument("fold_expr: expression is not on the extended ground set");
  OrbitExpr out(n);
  for (const auto& [m, w] : e.coeff) out.add(fold_subset(n, m), w);
  return out;
}

LinExpr unfold_expr(const OrbitExpr& e) {
  if (e.n < 1) throw std::invalid_argument("unfold_expr: no page count");
  Ctx c(e.n);
  LinExpr out(c.g());
  for (const auto& [co, w] : e.coeffs) {
    Rat per = w / orbit_count(co);
    std::vector<int> roles;
    roles.reserve(e.n);
    for (int i = 0; i < co.untouched(); ++i) roles.push_back(0);
    for (int i = 0; i < co.q; ++i) roles.push_back(1);
    for (int i = 0; i < co.r; ++i) roles.push_back(2);
    for (int i = 0; i < co.m; ++i) roles.push_back(3);
    do {
      Mask m = co.spine_part;
      for (int p = 0; p < e.n; ++p) {
        if (roles[p] == 1)
          m |= cbit(p + 1);
        else if (roles[p] == 2)
          m |= dbit(p + 1);
        else if (roles[p] == 3)
          m |= page_both(p + 1);
      }
      out.add_term(m, per);
    } while (std::next_permutation(roles.begin(), roles.end()));
  }
  return out;
}

OrbitExpr embed_base_expr(const LinExpr& base, int n) {
  Ctx c(n);
  if (!(base.ground == c.L.base_ground))
    throw std::invalid_argument("embed_base_expr: expected the four-element base ground set");
  OrbitExpr out(n);
  for (const auto& [m, w] : base.coeff) out.add(fold_subset(n, c.L.embed(0, m)), w);
  return out;
}

Rat eval(const OrbitExpr& e, const Polymatroid& h) {
  Ctx c(e.n);
  if (!(h.ground == c.g()))
    throw std::invalid_argument("eval: function is not on the extended ground set");
  Rat acc = 0;
  for (const auto& [co, w] : e.coeffs) {
    Mask m = co.spine_part | crun(1, co.q) | drun(co.q + 1, co.q + co.r) |
             fullrun(co.q + co.r + 1, co.q + co.r + co.m);
    acc += w * h.at(m);
  }
  return acc;
}

std::map<std::string, Rat> to_cone_row(const SymmetricCone& C, const OrbitExpr& e) {
  if (C.n != e.n) throw std::invalid_argument("to_cone_row: page count mismatch");
  std::map<std::string, Rat> row;
  auto addc = [&row](const std::string& name, const Rat& w) {
    auto [it, fresh] = row.try_emplace(name, w);
    if (!fresh) {
      it->second += w;
      if (it->second == 0) row.erase(it);
    }
  };
  for (const auto& [co, w] : e.coeffs) {
    std::string name = co.name();
    auto it = C.expansions.find(name);
    if (it == C.expansions.end()) {
      addc(name, w);
    } else {
      for (const auto& [nm, cw] : it->second) addc(nm, w * cw);
    }
  }
  return row;
}

// ---------------------------------------------------------------------------
// Constraint vocabulary.
// ---------------------------------------------------------------------------

ConstraintRef constraint_expr(const std::string& id, int n) {
  if (n < 1 || n > kMaxPages)
    throw std::invalid_argument("constraint_expr: unsupported page count");
  ConstraintRef ref;
  ref.id = id;
  if (id.rfind("sm:", 0) == 0) {
    auto comma = id.find(',', 3);
    if (comma == std::string::npos)
      throw std::invalid_argument("constraint '" + id + "': missing ','");
    auto bar = id.find('|', comma + 1);
    if (bar == std::string::npos)
      throw std::invalid_argument("constraint '" + id + "': missing '|'");
    Ctx c(n);
    const GroundSet& g = c.g();
    auto xi = g.index_of(id.substr(3, comma - 3));
    auto yi = g.index_of(id.substr(comma + 1, bar - comma - 1));
    if (!xi || !yi)
      throw std::invalid_argument("constraint '" + id + "': unknown element");
    std::string Ks = id.substr(bar + 1);
    Mask K = 0;
    if (!Ks.empty()) {
      auto pk = g.parse_subset(Ks);
      if (!pk)
        throw std::invalid_argument("constraint '" + id + "': bad context subset");
      K = *pk;
    }
    Mask xb = Mask{1} << *xi, yb = Mask{1} << *yi;
    if (*xi >= *yi)
      throw std::invalid_argument("constraint '" + id + "': elements out of order");
    if (K & (xb | yb))
      throw std::invalid_argument("constraint '" + id + "': context overlaps the pair");
    ref.rel = Rel::Ge;
    ref.expr = fold_cond(n, xb, yb, K);
    return ref;
  }
  if (id.rfind("ind:", 0) == 0) {
    auto comma = id.find(',', 4);
    if (comma == std::string::npos)
      throw std::invalid_argument("constraint '" + id + "': missing ','");
    int s = parse_int_strict(id.substr(4, comma - 4));
    int t = parse_int_strict(id.substr(comma + 1));
    if (s < 1 || t < 1 || s + t > n)
      throw std::invalid_argument("constraint '" + id + "': page blocks out of range");
    OrbitExpr e(n);
    e.add(oc(n, kSpine, 0, 0, s), Rat(1));
    e.add(oc(n, kSpine, 0, 0, t), Rat(1));
    e.add(oc(n, kSpine, 0, 0, s + t), Rat(-1));
    e.add(oc(n, kSpine, 0, 0, 0), Rat(-1));
    ref.rel = Rel::Eq;
    ref.expr = std::move(e);
    return ref;
  }
  throw std::invalid_argument("constraint '" + id + "': unknown kind");
}

bool verify_certificate(const Certificate& cert, const OrbitExpr& target,
                        std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (cert.n != target.n) return fail("page count mismatch");
  OrbitExpr acc(target.n);
  for (const auto& [id, w] : cert.terms) {
    ConstraintRef ref;
    try {
      ref = constraint_expr(id, cert.n);
    } catch (const std::invalid_argument& e) {
      return fail(e.what());
    }
    if (ref.rel == Rel::Ge && w < 0)
      return fail("negative multiplier on '" + id + "'");
    acc += w * ref.expr;
  }
  if (!(acc == target)) {
    OrbitExpr diff = acc - target;
    const auto& [c0, w0] = *diff.coeffs.begin();
    return fail("combination differs at " + c0.name() + " by " + rat_to_string(w0));
  }
  return true;
}

std::string necessity_to_text(const NecessityCertificate& c) {
  std::ostringstream os;
  os << "book-necessity-certificate v1\n";
  os << "pages " << c.n << "\n";
  os << "target " << ineq_to_text(c.target) << "\n";
  for (const auto& [id, w] : c.cert.terms)
    os << "term " << rat_to_string(w) << " " << id << "\n";
  os << "end\n";
  return os.str();
}

NecessityCertificate necessity_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next = [&]() {
    if (!std::getline(is, line))
      throw std::invalid_argument("certificate text: truncated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next();
  if (line != "book-necessity-certificate v1")
    throw std::invalid_argument("certificate text: bad header");
  next();
  if (line.rfind("pages ", 0) != 0)
    throw std::invalid_argument("certificate text: expected 'pages'");
  NecessityCertificate c;
  c.n = parse_int_strict(line.substr(6));
  if (c.n < 1 || c.n > kMaxPages)
    throw std::invalid_argument("certificate text: page count out of range");
  next();
  if (line.rfind("target ", 0) != 0)
    throw std::invalid_argument("certificate text: expected 'target'");
  c.target = ineq_from_text(abcd_ground(), line.substr(7));
  c.cert.n = c.n;
  for (;;) {
    next();
    if (line == "end") break;
    if (line.rfind("term ", 0) != 0)
      throw std::invalid_argument("certificate text: expected 'term' or 'end'");
    auto sp = line.find(' ', 5);
    if (sp == std::string::npos)
      throw std::invalid_argument("certificate text: malformed term line");
    auto w = rat_from_string(line.substr(5, sp - 5));
    if (!w) throw std::invalid_argument("certificate text: bad multiplier");
    c.cert.terms.emplace_back(line.substr(sp + 1), *w);
  }
  return c;
}

bool verify_necessity(const NecessityCertificate& c, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (c.n < 1 || c.n > kMaxPages) return fail("page count out of range");
  if (!(c.target.ground == abcd_ground()))
    return fail("target is not on the four-element base ground set");
  OrbitExpr want = embed_base_expr(c.target, c.n);
  return verify_certificate(c.cert, want, why);
}

// ---------------------------------------------------------------------------
// Claims and recursion inequalities.
// ---------------------------------------------------------------------------

std::vector<ClaimInstance> claim_exprs(int k, int l, int n) {
  if (n < 1 || n > kMaxPages || k < 0 || l < 0)
    throw std::invalid_argument("claim_exprs: arguments out of range");
  if (k + l > n)
    throw std::invalid_argument("claim_exprs: more page letters than pages");
  Ctx c(n);
  std::vector<ClaimInstance> out;
  {
    EqCerts e = spine_run(c, k, l, 0);
    out.push_back(finish_claim(
        n, "over-spine", Rel::Eq,
        Built{std::move(e.expr), std::move(e.ge), std::move(e.le)}));
  }
  if (k + l <= n - 1) {
    EqCerts e = spine_run(c, k, l, page_both(k + l + 1));
    out.push_back(finish_claim(
        n, "over-spine-full-page", Rel::Eq,
        Built{std::move(e.expr), std::move(e.ge), std::move(e.le)}));
  }
  out.push_back(finish_claim(n, "upper-a", Rel::Ge, claim_upper_side(c, k, l, Mask{1})));
  out.push_back(finish_claim(n, "upper-b", Rel::Ge, claim_upper_side(c, k, l, Mask{2})));
  if (k + l <= n - 1) {
    out.push_back(finish_claim(n, "lower-cd", Rel::Ge, claim_lower_cd(c, k, l)));
    if (k == 0) {
      out.push_back(finish_claim(n, "lower-bcd", Rel::Ge, claim_lower_bcd(c, l)));
      out.push_back(finish_claim(n, "lower-ac", Rel::Ge, claim_lower_ac(c, l)));
    }
  }
  return out;
}

OrbitExpr crucial_A(int k, int l, int n) {
  if (k < 0 || l < 0 || n < 1 || n > kMaxPages || k + l >= n)
    throw std::invalid_argument("crucial_A: need k, l >= 0 and k + l < n");
  const GroundSet& B = abcd_ground();
  LinExpr base = ingleton_expr(B, 1, 2, 4, 8);
  if (k) base += Rat(k) * (cond_expr(B, 1, 4, 2) + cond_expr(B, 2, 4, 1));
  if (l) base += Rat(l) * (cond_expr(B, 1, 8, 2) + cond_expr(B, 2, 8, 1));
  OrbitExpr e = embed_base_expr(base, n);
  e += fold_cond(n, Mask{1}, Mask{2}, ckdl(k, l));
  e -= fold_cond(n, Mask{1}, Mask{2}, ckdl(k + 1, l));
  e -= fold_cond(n, Mask{1}, Mask{2}, ckdl(k, l + 1));
  e -= fold_cond(n, cbit(n), dbit(n), ckdl(k, l));
  return e;
}

OrbitExpr crucial_B(int l, int n) {
  if (l < 0 || n < 1 || n > kMaxPages || l >= n)
    throw std::invalid_argument("crucial_B: need 0 <= l < n");
  const GroundSet& B = abcd_ground();
  LinExpr base = ingleton_expr(B, 2, 8, 1, 4);
  if (l) base += Rat(l) * (cond_expr(B, 1, 8, 2) + cond_expr(B, 2, 8, 1));
  OrbitExpr e = embed_base_expr(base, n);
  e += fold_cond(n, Mask{1}, Mask{2}, drun(1, l));
  e -= fold_cond(n, Mask{1}, Mask{2}, drun(1, l + 1));
  e -= fold_cond(n, Mask{1}, cbit(l + 1), drun(1, l));
  e -= fold_cond(n, Mask{2}, dbit(n), cbit(n) | drun(1, l));
  return e;
}

LedgerReport ledger_check_A(int k, int l, int n, const SymmetricCone* lp_cone) {
  if (k < 0 || l < 0 || n < 1 || n > kMaxPages || k + l >= n)
    throw std::invalid_argument("ledger_check_A: need k, l >= 0 and k + l < n");
  return ledger_check_common('A', k, l, n, lp_cone);
}

LedgerReport ledger_check_B(int l, int n, const SymmetricCone* lp_cone) {
  if (l < 0 || n < 1 || n > kMaxPages || l >= n)
    throw std::invalid_argument("ledger_check_B: need 0 <= l < n");
  return ledger_check_common('B', 0, l, n, lp_cone);
}

// ---------------------------------------------------------------------------
// Telescoping.
// ---------------------------------------------------------------------------

TelescopeReport telescope_check(const IdealSet& s0, int n) {
  if (s0.n != n)
    throw std::invalid_argument("telescope_check: ideal is for a different page count");
  if (n > kMaxPages)
    throw std::invalid_argument("telescope_check: unsupported page count");
  IdealSet s = make_ideal(n, s0.points);
  Ctx c(n);
  TelescopeReport rep;
  rep.side = 'A';
  rep.n = n;
  rep.s = s;
  rep.target = book_ineq_A(s);
  OrbitExpr want = embed_base_expr(rep.target, n);

  OrbitExpr acc(n);
  Terms flat;
  std::set<std::pair<int, int>> pts;
  for (const auto& p : s.points) pts.insert({p.k, p.ell});
  std::map<std::pair<int, int>, Rat> boundary;
  for (const auto& p : s.points) {
    Rat w = binom_rat(p.k + p.ell, p.k);
    acc += w * crucial_A(p.k + 1, p.ell, n);
    append_terms(flat, crucial_cert_A(p.k + 1, p.ell, n), w);
    LeftoverTerm t;
    t.weight = w;
    Mask K = ckdl(p.k + 1, p.ell);
    t.id = sm_id(c.g(), cbit(n), dbit(n), K);
    t.expr = fold_cond(n, cbit(n), dbit(n), K);
    rep.leftovers.push_back(std::move(t));
    if (!pts.count({p.k + 1, p.ell})) boundary[{p.k + 2, p.ell}] += w;
    if (!pts.count({p.k, p.ell + 1})) boundary[{p.k + 1, p.ell + 1}] += w;
  }
  for (const auto& [kl, w] : boundary) {
    LeftoverTerm t;
    t.weight = w;
    Mask K = ckdl(kl.first, kl.second);
    t.id = sm_id(c.g(), Mask{1}, Mask{2}, K);
    t.expr = fold_cond(n, Mask{1}, Mask{2}, K);
    rep.leftovers.push_back(std::move(t));
  }
  for (const auto& t : rep.leftovers) {
    acc += t.weight * t.expr;
    flat.emplace_back(t.id, t.weight);
  }
  rep.cancellation_ok = acc == want;
  rep.certificate.n = n;
  rep.certificate.target = rep.target;
  rep.certificate.cert = Certificate{n, merge_terms(std::move(flat))};
  std::string why;
  bool cert_ok = verify_necessity(rep.certificate, &why);
  if (!rep.cancellation_ok)
    rep.detail += "combination does not reproduce the target\n";
  if (!cert_ok) rep.detail += "certificate: " + why + "\n";
  rep.ok = rep.cancellation_ok && cert_ok;
  return rep;
}

TelescopeReport telescope_check_B(int ell, int n) {
  if (ell < 1 || n < 1 || n > kMaxPages || ell >= n)
    throw std::invalid_argument("telescope_check_B: need 1 <= l <= n-1");
  Ctx c(n);
  TelescopeReport rep;
  rep.side = 'B';
  rep.n = n;
  rep.s.n = n;
  rep.ell = ell;
  rep.target = book_ineq_B(ell, n);
  OrbitExpr want = embed_base_expr(rep.target, n);

  OrbitExpr acc(n);
  Terms flat;
  for (int j = 1; j <= ell; ++j) {
    acc += crucial_B(j, n);
    append_terms(flat, crucial_cert_B(j, n));
    LeftoverTerm ta;
    ta.weight = Rat(1);
    ta.id = sm_id(c.g(), Mask{1}, cbit(j + 1), drun(1, j));
    ta.expr = fold_cond(n, Mask{1}, cbit(j + 1), drun(1, j));
    rep.leftovers.push_back(std::move(ta));
    LeftoverTerm tb;
    tb.weight = Rat(1);
    tb.id = sm_id(c.g(), Mask{2}, dbit(n), cbit(n) | drun(1, j));
    tb.expr = fold_cond(n, Mask{2}, dbit(n), cbit(n) | drun(1, j));
    rep.leftovers.push_back(std::move(tb));
  }
  {
    LeftoverTerm t;
    t.weight = Rat(1);
    t.id = sm_id(c.g(), Mask{1}, Mask{2}, drun(1, ell + 1));
    t.expr = fold_cond(n, Mask{1}, Mask{2}, drun(1, ell + 1));
    rep.leftovers.push_back(std::move(t));
  }
  for (const auto& t : rep.leftovers) {
    acc += t.weight * t.expr;
    flat.emplace_back(t.id, t.weight);
  }
  rep.cancellation_ok = acc == want;
  rep.certificate.n = n;
  rep.certificate.target = rep.target;
  rep.certificate.cert = Certificate{n, merge_terms(std::move(flat))};
  std::string why;
  bool cert_ok = verify_necessity(rep.certificate, &why);
  if (!rep.cancellation_ok)
    rep.detail += "combination does not reproduce the target\n";
  if (!cert_ok) rep.detail += "certificate: " + why + "\n";
  rep.ok = rep.cancellation_ok && cert_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Family membership.
// ---------------------------------------------------------------------------

namespace {

// The four relabelings that map the family onto itself: identity, a<->b,
// c<->d, both.
const std::array<std::vector<int>, 4>& family_perms() {
  static const std::array<std::vector<int>, 4> perms = {
      std::vector<int>{0, 1, 2, 3}, std::vector<int>{1, 0, 2, 3},
      std::vector<int>{0, 1, 3, 2}, std::vector<int>{1, 0, 3, 2}};
  return perms;
}

struct FamilySource {
  char side;                        // 'A' or 'B'
  std::vector<LatticePoint> points; // side A
  int ell = 0;                      // side B
  int perm = 0;                     // index into family_perms()
};

const std::map<std::string, FamilySource>& family_index(int n) {
  static std::mutex mu;
  static std::map<int, std::map<std::string, FamilySource>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::map<std::string, FamilySource> idx;
  auto insert = [&idx](const LinExpr& base, FamilySource src) {
    for (int pi = 0; pi < 4; ++pi) {
      src.perm = pi;
      std::string key = expr_key(canonical_ineq(permute_expr(base, family_perms()[pi])));
      idx.emplace(key, src);  // first source wins; duplicates are fine
    }
  };
  for (const auto& s : enumerate_ideals(n))
    insert(book_ineq_A(s), FamilySource{'A', s.points, 0, 0});
  for (int l = 1; l <= n - 1; ++l)
    insert(book_ineq_B(l, n), FamilySource{'B', {}, l, 0});
  return cache.emplace(n, std::move(idx)).first->second;
}

}  // namespace

NecessityCertificate certify_family_member(const LinExpr& member, int n) {
  if (n < 2 || n > kMaxPages)
    throw std::invalid_argument("certify_family_member: unsupported page count");
  if (!(member.ground == abcd_ground()))
    throw std::invalid_argument("certify_family_member: wrong ground set");
  std::string key = expr_key(canonical_ineq(member));
  const auto& idx = family_index(n);
  auto it = idx.find(key);
  if (it == idx.end())
    throw std::invalid_argument("certify_family_member: not a family member");
  const FamilySource& src = it->second;
  TelescopeReport rep =
      src.side == 'A' ? telescope_check(make_ideal(n, src.points), n)
                      : telescope_check_B(src.ell, n);
  if (!rep.ok)
    throw std::logic_error("certify_family_member: telescoped derivation failed");
  const std::vector<int>& perm = family_perms()[src.perm];
  bool swap_ab = perm[0] == 1;
  bool swap_cd = perm[2] == 3;
  if (!swap_ab && !swap_cd) return rep.certificate;
  Ctx c(n);
  NecessityCertificate out;
  out.n = n;
  out.target = permute_expr(rep.certificate.target, perm);
  out.cert.n = n;
  for (const auto& [id, w] : rep.certificate.cert.terms)
    out.cert.terms.emplace_back(relabel_id(c.g(), id, swap_ab, swap_cd), w);
  out.cert.terms = merge_terms(std::move(out.cert.terms));
  std::string why;
  if (!verify_necessity(out, &why))
    throw std::logic_error("certify_family_member: relabeled certificate failed: " + why);
  return out;
}

}  // namespace bookineq
