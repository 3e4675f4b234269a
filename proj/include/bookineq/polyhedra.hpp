#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bookineq/rational.hpp"

namespace bookineq {

enum class Rel { Ge, Eq };  // row >= 0 or row == 0

// Homogeneous constraint over named coordinates.
struct LinIneq {
  std::map<std::string, Rat> coeffs;
  Rel rel = Rel::Ge;
};

// Inhomogeneous side constraint for LP calls (e.g. pinning rows, slices).
struct AffineRow {
  std::map<std::string, Rat> coeffs;
  Rel rel = Rel::Ge;
  Rat rhs = 0;
};

struct HCone {
  std::vector<std::string> coords;
  std::vector<LinIneq> rows;

  int coord_index(const std::string& name) const;
};

using LpPoint = std::map<std::string, Rat>;

// Infeasibility witness: multipliers over cone rows and extra rows such that
// the combined coefficients vanish on every coordinate while the combined
// right-hand side is positive. Ge-row multipliers are nonnegative.
struct FarkasCertificate {
  std::vector<std::pair<int, Rat>> cone_mults;
  std::vector<std::pair<int, Rat>> extra_mults;
};

struct FeasibilityResult {
  bool feasible = false;
  LpPoint witness;            // when feasible
  FarkasCertificate cert;     // when infeasible
  // Extra rows the certificate indexes into: the caller's extras, plus the
  // normalization row when one was added. verify_farkas(cone, extras_used, cert).
  std::vector<AffineRow> extras_used;
};

// Feasibility of {cone rows, extra rows}. A fully homogeneous system gets the
// normalization row sum(coords) = 1, so "feasible" means a point on that slice
// (for cones inside the nonnegative orthant: a nonzero point); with
// inhomogeneous extras the rows are taken as given. Witness and certificate are
// re-verified exactly before returning.
FeasibilityResult lp_feasible(const HCone& cone,
                              const std::vector<AffineRow>& extra = {});

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpMinResult {
  LpStatus status = LpStatus::Infeasible;
  Rat value;
  LpPoint argmin;
};

// min objective over {cone rows, extra rows}; pass the normalization slice as
// an extra row (e.g. sum of coordinates = 1).
LpMinResult lp_min(const HCone& cone, const std::map<std::string, Rat>& objective,
                   const std::vector<AffineRow>& extra);

// expr == sum mult_i * row_i with mult >= 0 on Ge rows; row indices into cone.rows.
struct ImplicationCertificate {
  std::vector<std::pair<int, Rat>> mults;
};

struct ImplicationResult {
  bool implied = false;
  ImplicationCertificate cert;  // when implied
};

// Does expr >= 0 hold everywhere on the cone? Decided by exact Farkas
// decomposition (expr must be a conic combination of the rows); the returned
// certificate is re-verified by re-multiplication.
ImplicationResult is_implied(const std::map<std::string, Rat>& expr,
                             const HCone& cone);

// Verifies an implication certificate by re-multiplication.
bool verify_implication(const std::map<std::string, Rat>& expr, const HCone& cone,
                        const ImplicationCertificate& cert);
bool verify_farkas(const HCone& cone, const std::vector<AffineRow>& extra,
                   const FarkasCertificate& cert);

struct ProjectOptions {
  std::int64_t budget_ms = -1;  // < 0: no budget
  bool lp_prune = true;
  int jobs = 1;
};

struct ProjectResult {
  HCone cone;        // over the kept coordinates (complete case)
  bool complete = true;
  int eliminated = 0;
  int remaining = 0;
  // Sound partial output when incomplete: rows supported on kept coords only.
  std::vector<LinIneq> partial_rows;
};

// Fourier-Motzkin projection onto the named coordinates. Equality rows are
// substituted away first; each elimination step prunes redundant rows (exact
// LP). Deterministic for a fixed input.
ProjectResult fm_project(const HCone& cone, const std::vector<std::string>& keep,
                         const ProjectOptions& opts = {});

// Irredundant canonical description of a cone that is full-dimensional in its
// coordinate space: coprime integer coefficients, graded-lex leading sign,
// sorted, duplicates removed, implied rows dropped.
std::vector<LinIneq> facets_canonical(const HCone& cone);

LinIneq canonical_row(const LinIneq& row, const std::vector<std::string>& coord_order);
std::string row_key(const LinIneq& row, const std::vector<std::string>& coord_order);

// Text form, one constraint per line: "name:coef name:coef ... >= 0" / "= 0".
std::string hrep_to_text(const HCone& cone);
HCone hrep_from_text(const std::string& text);

}  // namespace bookineq
