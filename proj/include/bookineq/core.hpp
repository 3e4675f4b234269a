#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bookineq/rational.hpp"

namespace bookineq {

// Subsets are bitmasks over ground-set positions; bit i = i-th label.
using Mask = std::uint32_t;

constexpr int kMaxGroundSize = 24;

class GroundSet {
 public:
  GroundSet() = default;
  explicit GroundSet(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  Mask full_mask() const { return size() == 0 ? 0 : (Mask{1} << size()) - 1; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_[i]; }

  std::optional<int> index_of(const std::string& label) const;

  // Concatenation of member labels in ground order, e.g. "abd".
  std::string subset_to_string(Mask m) const;
  // Greedy longest-label tokenization; rejects unknown or repeated elements.
  std::optional<Mask> parse_subset(const std::string& s) const;

  bool operator==(const GroundSet& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
};

inline int popcount(Mask m) { return __builtin_popcount(m); }

// Graded-lex subset order: by cardinality, then by mask value.
inline bool graded_lex_less(Mask a, Mask b) {
  int ca = popcount(a), cb = popcount(b);
  return ca != cb ? ca < cb : a < b;
}

struct GradedLex {
  bool operator()(Mask a, Mask b) const { return graded_lex_less(a, b); }
};

// Rank function on all subsets of a ground set; rank[mask] indexed by bitmask.
struct Polymatroid {
  GroundSet ground;
  std::vector<Rat> rank;  // size 2^n, rank[0] == 0

  const Rat& at(Mask m) const { return rank[m]; }
  int n() const { return ground.size(); }
};

Polymatroid make_polymatroid(GroundSet gs, std::vector<Rat> rank);

inline bool operator==(const Polymatroid& x, const Polymatroid& y) {
  return x.ground == y.ground && x.rank == y.rank;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;  // human-readable, one per failure
};

// Elemental check: rank(empty)=0, rank(N)>=rank(N-i), and
// rank(iK)+rank(jK) >= rank(ijK)+rank(K) for i<j, K disjoint from {i,j}.
ValidationReport validate_polymatroid(const Polymatroid& g);

// Full definition-level check (monotone on all pairs, submodular on all pairs,
// nonnegative). Quadratic in the subset count; used as a cross-check oracle.
ValidationReport validate_polymatroid_full(const Polymatroid& g);

// Sparse rational linear combination of subset ranks; the empty set is never a
// term (its rank is identically zero).
struct LinExpr {
  GroundSet ground;
  std::map<Mask, Rat, GradedLex> coeff;

  LinExpr() = default;
  explicit LinExpr(GroundSet gs) : ground(std::move(gs)) {}

  void add_term(Mask m, const Rat& c);
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(const Rat& c);
  bool is_zero() const { return coeff.empty(); }
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(const Rat& c, LinExpr a);

Rat eval(const LinExpr& e, const Polymatroid& g);

// delta_I + delta_J - delta_{I|J} - delta_{I&J}
LinExpr pair_expr(const GroundSet& gs, Mask I, Mask J);
// delta_{I|K} + delta_{J|K} - delta_{I|J|K} - delta_{(I&J)|K}
LinExpr cond_expr(const GroundSet& gs, Mask I, Mask J, Mask K);
// -(I,J) + (I,J||K) + (I,J||L) + (K,L)
LinExpr ingleton_expr(const GroundSet& gs, Mask I, Mask J, Mask K, Mask L);
// [abcd] + (a,b||c) + (a,c||b) + (b,c||a) on four distinct elements.
LinExpr zhang_yeung_expr(const GroundSet& gs, int a, int b, int c, int d);

// Scales to coprime integer coefficients with the graded-lex-first nonzero
// coefficient positive; drops zero terms. Zero expression maps to itself.
LinExpr canonical_form(const LinExpr& e);

// Positive scaling to coprime integer coefficients. Unlike canonical_form this
// never flips signs, so "e >= 0" keeps its meaning; two expressions denote the
// same inequality iff their canonical_ineq forms are equal.
LinExpr canonical_ineq(const LinExpr& e);

// Relabels every subset along the ground permutation perm (element i of the
// ground maps to element perm[i]).
LinExpr permute_expr(const LinExpr& e, const std::vector<int>& perm);

// Canonical comparison key: terms in graded-lex order, e.g. "1*ab 2*abc -1*abd".
std::string expr_key(const LinExpr& e);

}  // namespace bookineq
