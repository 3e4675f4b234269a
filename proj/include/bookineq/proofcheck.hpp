#pragma once

// Machine-checked derivations for the book inequality family.
//
// Everything here works in the orbit coordinates of the page-symmetric
// n-page cone (see bookcone.hpp).  The central objects are the
// page-recursion inequalities crucial_A / crucial_B; each one is derived
// from a fixed seven-row list of submodularity instances and auxiliary
// claims, and the family members themselves are obtained by summing
// recursion instances over an ideal (A side) or a prefix (B side) so that
// interior terms cancel.  Every step carries an explicit certificate: a
// nonnegative combination of elemental submodularity instances and
// cross-page independence equalities that reproduces the expression
// exactly under rational arithmetic.  Certificates are re-verified by
// re-multiplication, never trusted from construction.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bookineq/bookcone.hpp"
#include "bookineq/core.hpp"
#include "bookineq/inequalities.hpp"
#include "bookineq/polyhedra.hpp"
#include "bookineq/rational.hpp"

namespace bookineq {

// Sparse rational combination of orbit coordinates for a fixed page count.
// Mirrors LinExpr on the folded side: any OrbitExpr is expressible as a
// LinExpr on the extended ground set, and fold_expr / unfold_expr are
// mutually inverse on page-symmetric expressions.
struct OrbitExpr {
  int n = 0;
  std::map<OrbitCoord, Rat> coeffs;

  OrbitExpr() = default;
  explicit OrbitExpr(int pages) : n(pages) {}

  // Adds w to the coefficient of c, dropping the entry if it becomes zero.
  void add(const OrbitCoord& c, const Rat& w);
  Rat coeff(const OrbitCoord& c) const;
  bool is_zero() const { return coeffs.empty(); }

  OrbitExpr& operator+=(const OrbitExpr& o);
  OrbitExpr& operator-=(const OrbitExpr& o);
  OrbitExpr& operator*=(const Rat& s);
};

OrbitExpr operator+(OrbitExpr a, const OrbitExpr& b);
OrbitExpr operator-(OrbitExpr a, const OrbitExpr& b);
OrbitExpr operator*(const Rat& s, OrbitExpr a);
bool operator==(const OrbitExpr& a, const OrbitExpr& b);

// Number of subsets of the 2n+2 element extended ground set in the orbit
// of c: n! / (q! r! m! (n-q-r-m)!).
Rat orbit_count(const OrbitCoord& c);

// Collapses an expression on the extended ground set of cone_layout(n)
// into orbit coordinates.  Exact for symmetric expressions; a general
// expression is averaged over the page symmetry.
OrbitExpr fold_expr(const LinExpr& e, int n);

// Expands into the symmetric expression on the extended ground set whose
// fold is e: each orbit's weight is spread evenly over its members.
LinExpr unfold_expr(const OrbitExpr& e);

// Embeds an expression on the four-element base ground set into orbit
// coordinates, placing c and d on the first page.
OrbitExpr embed_base_expr(const LinExpr& base, int n);

// Evaluates on a page-symmetric function over the extended ground set by
// picking one representative subset per orbit.  h.ground must match
// cone_layout(e.n); h itself is assumed symmetric.
Rat eval(const OrbitExpr& e, const Polymatroid& h);

// Rewrites e in the coordinates of C (substituting the expansion
// coordinates), ready for is_implied against C.cone.
std::map<std::string, Rat> to_cone_row(const SymmetricCone& C, const OrbitExpr& e);

// ---------------------------------------------------------------------------
// Constraint vocabulary.
//
// Certificates combine two kinds of named constraints:
//   "sm:x,y|K"  elemental submodularity (x,y|K) >= 0 on the extended
//               ground set: x, y single elements, K a subset disjoint
//               from both (K may be empty).  Ordered so that x precedes
//               y in ground order.
//   "ind:s,t"   additivity across disjoint full-page blocks, an equality:
//               f(ab + s pages) + f(ab + t pages) =
//               f(ab + s+t pages) + f(ab); requires s,t >= 1, s+t <= n.
// ---------------------------------------------------------------------------

struct ConstraintRef {
  std::string id;
  Rel rel = Rel::Ge;  // Ge for sm:, Eq for ind:
  OrbitExpr expr;
};

// Parses an id and materialises the constraint for n pages.  Throws
// std::invalid_argument on malformed ids or out-of-range references.
ConstraintRef constraint_expr(const std::string& id, int n);

// A rational combination of named constraints.  Valid when every sm: term
// has a nonnegative multiplier (ind: multipliers are free).
struct Certificate {
  int n = 0;
  std::vector<std::pair<std::string, Rat>> terms;
};

// Re-multiplies the combination and compares with target exactly.  Also
// rejects negative multipliers on inequality constraints.  On failure
// returns false and, if why != nullptr, stores a diagnostic.
bool verify_certificate(const Certificate& cert, const OrbitExpr& target,
                        std::string* why = nullptr);

// A finished derivation: target >= 0 on every n-page book extension cone
// point, witnessed by cert.  target lives on the four-element base ground
// set; the certificate proves embed_base_expr(target, n).
struct NecessityCertificate {
  int n = 0;
  LinExpr target;
  Certificate cert;
};

std::string necessity_to_text(const NecessityCertificate& c);
NecessityCertificate necessity_from_text(const std::string& text);
bool verify_necessity(const NecessityCertificate& c, std::string* why = nullptr);

// ---------------------------------------------------------------------------
// Claims: the auxiliary inequalities the row lists draw on.
// ---------------------------------------------------------------------------

// One claim instance, stated as expr (rel) 0 with certificates.  lower
// certifies expr; for equalities upper certifies -expr.
struct ClaimInstance {
  std::string name;
  Rel rel = Rel::Ge;
  OrbitExpr expr;
  Certificate lower;
  std::optional<Certificate> upper;
};

// All claim instances for page counts k of c-pages and l of d-pages:
//   "over-spine"            (k+l <= n, equality)
//       ab c^k d^l = ab + k(abc - ab) + l(abd - ab)
//   "over-spine-full-page"  (k+l <= n-1, equality)  same with one full
//       page (cd)^1 joined throughout
//   "upper-a", "upper-b"    (k+l <= n)
//       a + k(ac - a) + l(ad - a) >= a c^k d^l  (resp. over b)
//   "lower-cd"              (k+l <= n-1)
//       c^k d^l (cd)^1 >= cd + k(abc - ab) + l(abd - ab)
//   "lower-bcd", "lower-ac" (k = 0, l <= n-1)
//       b d^l (cd)^1 >= bcd + l(abd - ab);  a c d^l >= ac + l(abd - ab)
// Certificates are verified during construction (std::logic_error on an
// internal mismatch).  Throws std::invalid_argument when k+l > n.
std::vector<ClaimInstance> claim_exprs(int k, int l, int n);

// ---------------------------------------------------------------------------
// The page-recursion inequalities.
// ---------------------------------------------------------------------------

// A side, valid for k, l >= 0 with k + l < n:
//   [a,b,c,d] + k((a,c|b)+(b,c|a)) + l((a,d|b)+(b,d|a))
//   + (a,b|c^k d^l) - (a,b|c^{k+1} d^l) - (a,b|c^k d^{l+1})
//   - (c_n, d_n | c^k d^l)
OrbitExpr crucial_A(int k, int l, int n);

// B side, valid for 0 <= l < n:
//   [b,d,a,c] + l((a,d|b)+(b,d|a))
//   + (a,b|d^l) - (a,b|d^{l+1}) - (a,c|d^l) - (b, d_n | c_n d^l)
OrbitExpr crucial_B(int l, int n);

// ---------------------------------------------------------------------------
// Row lists: the seven-row derivations of crucial_A / crucial_B.
// ---------------------------------------------------------------------------

struct LedgerRow {
  std::string label;          // "A1".."A7" or "B1".."B7"
  std::string how;            // "submodularity" or a claim name
  Rel rel = Rel::Ge;
  OrbitExpr expr;             // the row, as expr (rel) 0
  // For submodularity rows: the conditional instance (I, J | K) as subset
  // strings on the extended ground set.
  std::vector<std::string> sm_instance;
  Certificate lower;
  std::optional<Certificate> upper;      // equalities only
  std::optional<ImplicationResult> lp;   // cross-check, when run
};

struct LedgerReport {
  char side = 'A';
  int k = 0, l = 0, n = 0;
  bool ok = false;
  bool sum_matches = false;  // rows sum to the recursion inequality exactly
  std::vector<LedgerRow> rows;
  std::string detail;
};

// Page-count bound up to which the row lists are cross-checked against the
// assembled cone by linear programming (with Farkas certificates kept).
// The combination certificates themselves are produced and verified for
// every n; the LP pass repeats the claim rows independently and its cost
// grows steeply with n (roughly a minute per row at n = 4), so by default
// it runs only for n <= this bound.  Callers wanting the LP pass at a
// larger n can pass the assembled cone explicitly.
inline constexpr int kLedgerLpMaxPages = 3;

// Builds, verifies, and (for n <= kLedgerLpMaxPages, or always when
// lp_cone != nullptr) LP-checks the row list deriving crucial_A(k,l,n)
// resp. crucial_B(l,n).  ok requires: every certificate verifies, every
// LP check that ran confirms implication, and the rows sum to the
// recursion inequality coefficient-by-coefficient.
LedgerReport ledger_check_A(int k, int l, int n,
                            const SymmetricCone* lp_cone = nullptr);
LedgerReport ledger_check_B(int l, int n,
                            const SymmetricCone* lp_cone = nullptr);

// ---------------------------------------------------------------------------
// Telescoping: from recursion instances to family members.
// ---------------------------------------------------------------------------

// A term dropped from the right-hand side during summation, certified
// nonnegative as a single elemental instance.
struct LeftoverTerm {
  Rat weight;
  std::string id;    // the sm: constraint dropped
  OrbitExpr expr;
};

struct TelescopeReport {
  char side = 'A';
  int n = 0;
  IdealSet s;        // A side; ignored for side B
  int ell = 0;       // B side
  bool ok = false;
  bool cancellation_ok = false;  // combination reproduces the target exactly
  LinExpr target;                // the family member, on the base ground set
  std::vector<LeftoverTerm> leftovers;
  NecessityCertificate certificate;  // flattened to sm:/ind: constraints
  std::string detail;
};

// Sums binom(k+l, k) * crucial_A(k+1, l, n) over the points (k,l) of s,
// checks the interior cancellation, certifies every leftover, and emits a
// flattened certificate for book_ineq_A(s).  Requires s.n == n.
TelescopeReport telescope_check(const IdealSet& s, int n);

// Prefix-sum analogue: crucial_B(1..l, n) derive book_ineq_B(l, n).
// Requires 1 <= l <= n-1.
TelescopeReport telescope_check_B(int ell, int n);

// Certificate for an arbitrary member of generate_family(n, true): the
// member is matched to a telescoped form under the a<->b / c<->d
// relabelings and the certificate is relabeled along.  Throws
// std::invalid_argument if expr is not a family member.
NecessityCertificate certify_family_member(const LinExpr& member, int n);

}  // namespace bookineq
