#include "bookineq/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace bookineq {

GroundSet::GroundSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) > kMaxGroundSize)
    throw std::invalid_argument("ground set too large");
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    if (labels_[i].empty()) throw std::invalid_argument("empty element label");
    if (!index_.emplace(labels_[i], i).second)
      throw std::invalid_argument("duplicate element label: " + labels_[i]);
  }
}

std::optional<int> GroundSet::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string GroundSet::subset_to_string(Mask m) const {
  std::string out;
  for (int i = 0; i < size(); ++i)
    if (m & (Mask{1} << i)) out += labels_[i];
  return out;
}

std::optional<Mask> GroundSet::parse_subset(const std::string& s) const {
  Mask m = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    // Longest label matching at this position wins; labels here are single
    // characters or suffix-twins like "c_1", which this resolves unambiguously.
    int best = -1;
    std::size_t best_len = 0;
    for (int i = 0; i < size(); ++i) {
      const std::string& l = labels_[i];
      if (l.size() > best_len && s.compare(pos, l.size(), l) == 0) {
        best = i;
        best_len = l.size();
      }
    }
    if (best < 0) return std::nullopt;
    Mask bit = Mask{1} << best;
    if (m & bit) return std::nullopt;  // repeated element
    m |= bit;
    pos += best_len;
  }
  return m;
}

Polymatroid make_polymatroid(GroundSet gs, std::vector<Rat> rank) {
  Polymatroid g{std::move(gs), std::move(rank)};
  if (g.rank.size() != (std::size_t{1} << g.ground.size()))
    throw std::invalid_argument("rank table size != 2^|ground|");
  return g;
}

ValidationReport validate_polymatroid(const Polymatroid& g) {
  ValidationReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  const int n = g.n();
  if (g.rank.size() != (std::size_t{1} << n)) {
    fail("rank table size != 2^|ground|");
    return rep;
  }
  if (g.rank[0] != 0) fail("rank(empty) != 0");
  const Mask full = g.ground.full_mask();
  for (int i = 0; i < n; ++i) {
    Mask co = full & ~(Mask{1} << i);
    if (g.at(full) < g.at(co))
      fail("monotonicity fails at " + g.ground.label(i) + ": rank(N) < rank(N-" +
           g.ground.label(i) + ")");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Mask ij = (Mask{1} << i) | (Mask{1} << j);
      Mask rest = full & ~ij;
      // Enumerate K over subsets of rest.
      for (Mask K = rest;; K = (K - 1) & rest) {
        Rat lhs = g.at(K | (Mask{1} << i)) + g.at(K | (Mask{1} << j));
        Rat rhs = g.at(K | ij) + g.at(K);
        if (lhs < rhs)
          fail("submodularity fails: (" + g.ground.label(i) + "," +
               g.ground.label(j) + "|" + g.ground.subset_to_string(K) +
               ") = " + rat_to_string(lhs - rhs));
        if (K == 0) break;
      }
    }
  }
  return rep;
}

ValidationReport validate_polymatroid_full(const Polymatroid& g) {
  ValidationReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  const Mask full = g.ground.full_mask();
  if (g.rank.empty() || g.rank[0] != 0) fail("rank(empty) != 0");
  for (Mask I = 0; I <= full; ++I) {
    if (g.at(I) < 0) fail("negative rank at " + g.ground.subset_to_string(I));
    for (Mask J = I;; J = (J + 1) | I) {  // all J >= I as supersets
      if ((J & I) == I && g.at(I) > g.at(J))
        fail("monotonicity fails: " + g.ground.subset_to_string(I) + " vs " +
             g.ground.subset_to_string(J));
      if (J == full) break;
    }
  }
  for (Mask I = 0; I <= full; ++I)
    for (Mask J = 0; J <= full; ++J)
      if (g.at(I) + g.at(J) < g.at(I | J) + g.at(I & J))
        fail("submodularity fails: " + g.ground.subset_to_string(I) + ", " +
             g.ground.subset_to_string(J));
  return rep;
}

void LinExpr::add_term(Mask m, const Rat& c) {
  if (m == 0 || c == 0) return;
  auto [it, inserted] = coeff.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) coeff.erase(it);
  }
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [m, c] : o.coeff) add_term(m, c);
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [m, c] : o.coeff) add_term(m, -c);
  return *this;
}

LinExpr& LinExpr::operator*=(const Rat& c) {
  if (c == 0) {
    coeff.clear();
    return *this;
  }
  for (auto& [m, v] : coeff) v *= c;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(const Rat& c, LinExpr a) { return a *= c; }

Rat eval(const LinExpr& e, const Polymatroid& g) {
  if (!(e.ground == g.ground))
    throw std::invalid_argument("eval: ground set mismatch");
  Rat v = 0;
  for (const auto& [m, c] : e.coeff) v += c * g.at(m);
  return v;
}

LinExpr pair_expr(const GroundSet& gs, Mask I, Mask J) {
  LinExpr e(gs);
  e.add_term(I, 1);
  e.add_term(J, 1);
  e.add_term(I | J, -1);
  e.add_term(I & J, -1);
  return e;
}

LinExpr cond_expr(const GroundSet& gs, Mask I, Mask J, Mask K) {
  LinExpr e(gs);
  e.add_term(I | K, 1);
  e.add_term(J | K, 1);
  e.add_term(I | J | K, -1);
  e.add_term((I & J) | K, -1);
  return e;
}

LinExpr ingleton_expr(const GroundSet& gs, Mask I, Mask J, Mask K, Mask L) {
  LinExpr e(gs);
  e -= pair_expr(gs, I, J);
  e += cond_expr(gs, I, J, K);
  e += cond_expr(gs, I, J, L);
  e += pair_expr(gs, K, L);
  return e;
}

LinExpr zhang_yeung_expr(const GroundSet& gs, int a, int b, int c, int d) {
  Mask A = Mask{1} << a, B = Mask{1} << b, C = Mask{1} << c, D = Mask{1} << d;
  if (popcount(A | B | C | D) != 4)
    throw std::invalid_argument("zhang_yeung_expr: elements not distinct");
  LinExpr e = ingleton_expr(gs, A, B, C, D);
  e += cond_expr(gs, A, B, C);
  e += cond_expr(gs, A, C, B);
  e += cond_expr(gs, B, C, A);
  return e;
}

LinExpr canonical_form(const LinExpr& e) {
  LinExpr out(e.ground);
  if (e.coeff.empty()) return out;
  std::vector<Rat> v;
  v.reserve(e.coeff.size());
  for (const auto& [m, c] : e.coeff) v.push_back(c);
  scale_to_coprime_integers(v);
  // Map order is graded-lex, so v[0] is the leading coefficient.
  if (v[0] < 0)
    for (Rat& r : v) r = -r;
  std::size_t i = 0;
  for (const auto& [m, c] : e.coeff) out.coeff.emplace(m, v[i++]);
  return out;
}

LinExpr canonical_ineq(const LinExpr& e) {
  LinExpr out(e.ground);
  if (e.coeff.empty()) return out;
  std::vector<Rat> v;
  v.reserve(e.coeff.size());
  for (const auto& [m, c] : e.coeff) v.push_back(c);
  scale_to_coprime_integers(v);
  std::size_t i = 0;
  for (const auto& [m, c] : e.coeff) out.coeff.emplace(m, v[i++]);
  return out;
}

LinExpr permute_expr(const LinExpr& e, const std::vector<int>& perm) {
  const int n = e.ground.size();
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permute_expr: permutation size mismatch");
  Mask seen = 0;
  for (int p : perm) {
    if (p < 0 || p >= n || (seen & (Mask(1) << p)))
      throw std::invalid_argument("permute_expr: not a permutation");
    seen |= Mask(1) << p;
  }
  LinExpr out(e.ground);
  for (const auto& [m, c] : e.coeff) {
    Mask im = 0;
    for (int i = 0; i < n; ++i)
      if (m & (Mask(1) << i)) im |= Mask(1) << perm[i];
    out.add_term(im, c);
  }
  return out;
}

std::string expr_key(const LinExpr& e) {
  std::string out;
  for (const auto& [m, c] : e.coeff) {
    if (!out.empty()) out += ' ';
    out += rat_to_string(c);
    out += '*';
    out += e.ground.subset_to_string(m);
  }
  return out;
}

}  // namespace bookineq
