#include "bookineq/polyhedra.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bookineq {
namespace {

// Exact simplex on min c.z s.t. M z = b, z >= 0. Dense tableau with the
// artificial identity block kept as basis-inverse bookkeeping, so row duals
// can be read off at optimality. Dantzig pricing with a stall-triggered,
// permanent switch to Bland's rule guarantees termination.
class Simplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  struct Result {
    Status status = Status::Infeasible;
    Rat value;
    std::vector<Rat> z;         // structural values (Optimal)
    std::vector<Rat> y;         // row duals (Optimal), original row orientation
    std::vector<Rat> y_infeas;  // Farkas row duals (Infeasible)
    std::vector<Rat> ray;       // structural ray with c.ray < 0 (Unbounded)
  };

  Simplex(std::vector<std::vector<Rat>> M, std::vector<Rat> b, int ncols,
          std::int64_t pivot_cap = -1)
      : m_(static_cast<int>(M.size())), n_(ncols), pivot_cap_(pivot_cap) {
    flip_.assign(m_, 1);
    T_.assign(m_, std::vector<Rat>(n_ + m_ + 1));
    for (int i = 0; i < m_; ++i) {
      bool neg = b[i] < 0;
      if (neg) flip_[i] = -1;
      for (int j = 0; j < n_; ++j) T_[i][j] = neg ? -M[i][j] : std::move(M[i][j]);
      T_[i][n_ + i] = 1;
      T_[i][rhs()] = neg ? -b[i] : b[i];
    }
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
    row_live_.assign(m_, true);
  }

  // Returns nullopt if the pivot cap was hit (callers treat as "unknown").
  std::optional<Result> solve(const std::vector<Rat>& c) {
    // Phase 1: minimize the sum of artificials.
    std::vector<Rat> cost(n_ + m_ + 1);
    for (int i = 0; i < m_; ++i) cost[n_ + i] = 1;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j <= rhs(); ++j) cost[j] -= T_[i][j];
    if (!optimize(cost, /*allow_artificial=*/false)) return std::nullopt;
    if (unbounded_col_ >= 0)
      throw std::logic_error("simplex: phase 1 cannot be unbounded");
    Rat w = -cost[rhs()];
    if (w > 0) {
      Result r;
      r.status = Status::Infeasible;
      r.y_infeas.resize(m_);
      // y_i = c_art_i - rc_art_i = 1 - cost[n_+i], mapped back through row flips.
      for (int i = 0; i < m_; ++i)
        r.y_infeas[i] = Rat(flip_[i]) * (Rat(1) - cost[n_ + i]);
      return r;
    }
    drive_out_artificials();

    // Phase 2.
    std::vector<Rat> cost2(n_ + m_ + 1);
    for (int j = 0; j < n_; ++j) cost2[j] = c[j];
    for (int i = 0; i < m_; ++i) {
      if (!row_live_[i] || basis_[i] >= n_) continue;
      const Rat& cb = c[basis_[i]];
      if (cb == 0) continue;
      for (int j = 0; j <= rhs(); ++j) cost2[j] -= cb * T_[i][j];
    }
    if (!optimize(cost2, /*allow_artificial=*/false)) return std::nullopt;
    Result r;
    if (unbounded_col_ >= 0) {
      r.status = Status::Unbounded;
      r.ray.assign(n_, Rat(0));
      r.ray[unbounded_col_] = 1;
      for (int i = 0; i < m_; ++i)
        if (row_live_[i] && basis_[i] < n_ && T_[i][unbounded_col_] != 0)
          r.ray[basis_[i]] = -T_[i][unbounded_col_];
      return r;
    }
    r.status = Status::Optimal;
    r.value = -cost2[rhs()];
    r.z.assign(n_, Rat(0));
    for (int i = 0; i < m_; ++i)
      if (row_live_[i] && basis_[i] < n_) r.z[basis_[i]] = T_[i][rhs()];
    r.y.resize(m_);
    for (int i = 0; i < m_; ++i)
      r.y[i] = row_live_[i] ? Rat(flip_[i]) * (-cost2[n_ + i]) : Rat(0);
    return r;
  }

 private:
  int rhs() const { return n_ + m_; }

  void pivot(int pr, int pc, std::vector<Rat>& cost) {
    Rat inv = 1 / T_[pr][pc];
    for (int j = 0; j <= rhs(); ++j)
      if (T_[pr][j] != 0) T_[pr][j] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == pr || T_[i][pc] == 0) continue;
      Rat f = T_[i][pc];
      for (int j = 0; j <= rhs(); ++j)
        if (T_[pr][j] != 0) T_[i][j] -= f * T_[pr][j];
    }
    if (cost[pc] != 0) {
      Rat f = cost[pc];
      for (int j = 0; j <= rhs(); ++j)
        if (T_[pr][j] != 0) cost[j] -= f * T_[pr][j];
    }
    basis_[pr] = pc;
  }

  // Entering columns are structural only (artificials never re-enter).
  bool optimize(std::vector<Rat>& cost, bool allow_artificial) {
    (void)allow_artificial;
    unbounded_col_ = -1;
    bool bland = false;
    int stall = 0;
    const int stall_limit = 2 * (m_ + n_) + 16;
    while (true) {
      if (pivot_cap_ >= 0 && pivots_ >= pivot_cap_) return false;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < n_; ++j)
          if (cost[j] < 0) {
            enter = j;
            break;
          }
      } else {
        const Rat* best = nullptr;
        for (int j = 0; j < n_; ++j)
          if (cost[j] < 0 && (!best || cost[j] < *best)) {
            best = &cost[j];
            enter = j;
          }
      }
      if (enter < 0) return true;
      int leave = -1;
      Rat best_ratio;
      for (int i = 0; i < m_; ++i) {
        if (!row_live_[i] || T_[i][enter] <= 0) continue;
        Rat ratio = T_[i][rhs()] / T_[i][enter];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) {
        unbounded_col_ = enter;
        return true;
      }
      Rat before = cost[rhs()];
      pivot(leave, enter, cost);
      ++pivots_;
      if (cost[rhs()] == before) {
        if (++stall > stall_limit) bland = true;
      } else {
        stall = 0;
      }
    }
  }

  void drive_out_artificials() {
    std::vector<Rat> nocost(n_ + m_ + 1);
    for (int i = 0; i < m_; ++i) {
      if (!row_live_[i] || basis_[i] < n_) continue;
      int pc = -1;
      for (int j = 0; j < n_; ++j)
        if (T_[i][j] != 0) {
          pc = j;
          break;
        }
      if (pc < 0) {
        row_live_[i] = false;  // dependent row, 0 = 0
        continue;
      }
      pivot(i, pc, nocost);
      ++pivots_;
    }
  }

  int m_, n_;
  std::int64_t pivot_cap_;
  std::int64_t pivots_ = 0;
  std::vector<std::vector<Rat>> T_;
  std::vector<int> basis_;
  std::vector<bool> row_live_;
  std::vector<int> flip_;
  int unbounded_col_ = -1;
};

}  // namespace

int HCone::coord_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(coords.size()); ++i)
    if (coords[i] == name) return i;
  return -1;
}

namespace {

// Indexed view of a constraint system over a fixed coordinate list.
struct Sys {
  std::vector<std::string> coords;
  std::map<std::string, int> index;
  // One entry per original row, in cone order then extra order.
  std::vector<std::vector<Rat>> a;  // dense coefficient rows
  std::vector<Rel> rel;
  std::vector<Rat> rhs;
  int n_cone = 0;

  static Sys build(const HCone& cone, const std::vector<AffineRow>& extra) {
    Sys s;
    s.coords = cone.coords;
    for (int i = 0; i < static_cast<int>(s.coords.size()); ++i)
      s.index[s.coords[i]] = i;
    for (const AffineRow& r : extra)
      for (const auto& [name, c] : r.coeffs)
        if (!s.index.count(name)) {
          s.index[name] = static_cast<int>(s.coords.size());
          s.coords.push_back(name);
        }
    auto add = [&](const std::map<std::string, Rat>& coeffs, Rel rel, Rat rv) {
      std::vector<Rat> row(s.coords.size());
      for (const auto& [name, c] : coeffs) {
        auto it = s.index.find(name);
        if (it == s.index.end())
          throw std::invalid_argument("unknown coordinate " + name);
        row[it->second] = c;
      }
      s.a.push_back(std::move(row));
      s.rel.push_back(rel);
      s.rhs.push_back(std::move(rv));
    };
    for (const LinIneq& r : cone.rows) add(r.coeffs, r.rel, 0);
    s.n_cone = static_cast<int>(s.a.size());
    for (const AffineRow& r : extra) add(r.coeffs, r.rel, r.rhs);
    return s;
  }

  bool all_homogeneous() const {
    for (const Rat& r : rhs)
      if (r != 0) return false;
    return true;
  }
};

// Standard form for the primal: x free (split), surplus s_i on Ge rows.
// Columns: [u_0..u_{n-1} | v_0..v_{n-1} | s per Ge row].
struct PrimalForm {
  std::vector<std::vector<Rat>> M;
  std::vector<Rat> b;
  int n_coords = 0;
  int ncols = 0;
  std::vector<int> surplus_col;  // per row, -1 for Eq

  static PrimalForm build(const Sys& s) {
    PrimalForm p;
    p.n_coords = static_cast<int>(s.coords.size());
    int m = static_cast<int>(s.a.size());
    int n_ge = 0;
    p.surplus_col.assign(m, -1);
    for (int i = 0; i < m; ++i)
      if (s.rel[i] == Rel::Ge) p.surplus_col[i] = 2 * p.n_coords + n_ge++;
    p.ncols = 2 * p.n_coords + n_ge;
    p.M.assign(m, std::vector<Rat>(p.ncols));
    p.b = s.rhs;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < p.n_coords; ++j) {
        if (s.a[i][j] == 0) continue;
        p.M[i][j] = s.a[i][j];
        p.M[i][p.n_coords + j] = -s.a[i][j];
      }
      if (p.surplus_col[i] >= 0) p.M[i][p.surplus_col[i]] = -1;
    }
    return p;
  }

  std::vector<Rat> point_from(const std::vector<Rat>& z) const {
    std::vector<Rat> x(n_coords);
    for (int j = 0; j < n_coords; ++j) x[j] = z[j] - z[n_coords + j];
    return x;
  }
};

bool check_point(const Sys& s, const std::vector<Rat>& x) {
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    Rat v = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (s.a[i][j] != 0) v += s.a[i][j] * x[j];
    if (s.rel[i] == Rel::Eq ? v != s.rhs[i] : v < s.rhs[i]) return false;
  }
  return true;
}

bool check_farkas(const Sys& s, const std::vector<Rat>& y) {
  Rat total = 0;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    if (s.rel[i] == Rel::Ge && y[i] < 0) return false;
    total += y[i] * s.rhs[i];
  }
  if (total <= 0) return false;
  for (std::size_t j = 0; j < s.coords.size(); ++j) {
    Rat v = 0;
    for (std::size_t i = 0; i < s.a.size(); ++i)
      if (y[i] != 0 && s.a[i][j] != 0) v += y[i] * s.a[i][j];
    if (v != 0) return false;
  }
  return true;
}

FarkasCertificate split_cert(const Sys& s, const std::vector<Rat>& y) {
  FarkasCertificate cert;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    if (y[i] == 0) continue;
    if (static_cast<int>(i) < s.n_cone)
      cert.cone_mults.emplace_back(static_cast<int>(i), y[i]);
    else
      cert.extra_mults.emplace_back(static_cast<int>(i) - s.n_cone, y[i]);
  }
  return cert;
}

// Feasibility via the bounded dual system: rows = coordinates + 1, which stays
// small even when the constraint count is large. val > 0 yields a Farkas
// certificate; val == 0 yields a witness from the row duals.
FeasibilityResult feasible_dual_form(const Sys& s) {
  int m = static_cast<int>(s.a.size());
  int nc = static_cast<int>(s.coords.size());
  // Columns: y_i (>=0) for Ge rows, w+/w- for Eq rows, slack for the y-bound.
  std::vector<int> ycol(m, -1);
  int ncols = 0;
  for (int i = 0; i < m; ++i) {
    ycol[i] = ncols;
    ncols += s.rel[i] == Rel::Ge ? 1 : 2;
  }
  int slack = ncols++;
  std::vector<std::vector<Rat>> M(nc + 1, std::vector<Rat>(ncols));
  std::vector<Rat> b(nc + 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < nc; ++j) {
      if (s.a[i][j] == 0) continue;
      M[j][ycol[i]] = s.a[i][j];
      if (s.rel[i] == Rel::Eq) M[j][ycol[i] + 1] = -s.a[i][j];
    }
  for (int i = 0; i < m; ++i)
    if (s.rel[i] == Rel::Ge) M[nc][ycol[i]] = 1;
  M[nc][slack] = 1;
  b[nc] = 1;
  std::vector<Rat> c(ncols);
  for (int i = 0; i < m; ++i) {
    c[ycol[i]] = -s.rhs[i];
    if (s.rel[i] == Rel::Eq) c[ycol[i] + 1] = s.rhs[i];
  }
  Simplex sx(std::move(M), std::move(b), ncols);
  auto res = sx.solve(c);
  if (!res) throw std::logic_error("lp_feasible: pivot cap in capless solve");
  FeasibilityResult out;
  auto yvec_from = [&](const std::vector<Rat>& zz) {
    std::vector<Rat> y(m);
    for (int i = 0; i < m; ++i) {
      y[i] = zz[ycol[i]];
      if (s.rel[i] == Rel::Eq) y[i] -= zz[ycol[i] + 1];
    }
    return y;
  };
  if (res->status == Simplex::Status::Unbounded) {
    std::vector<Rat> y = yvec_from(res->ray);
    if (!check_farkas(s, y))
      throw std::logic_error("lp_feasible: bad unbounded-ray certificate");
    out.feasible = false;
    out.cert = split_cert(s, y);
    return out;
  }
  if (res->status != Simplex::Status::Optimal)
    throw std::logic_error("lp_feasible: dual-form system cannot be infeasible");
  if (res->value < 0) {  // objective was negated: val(D) = -value > 0
    std::vector<Rat> y = yvec_from(res->z);
    if (!check_farkas(s, y))
      throw std::logic_error("lp_feasible: bad Farkas certificate");
    out.feasible = false;
    out.cert = split_cert(s, y);
    return out;
  }
  // val(D) == 0: witness x_j = -pi_j from the coordinate-row duals.
  std::vector<Rat> x(nc);
  for (int j = 0; j < nc; ++j) x[j] = -res->y[j];
  if (!check_point(s, x))
    throw std::logic_error("lp_feasible: witness verification failed");
  out.feasible = true;
  for (int j = 0; j < nc; ++j) out.witness[s.coords[j]] = x[j];
  return out;
}

}  // namespace

// min c'x over the system, solved through its dual (max rhs'y, A'y = c,
// y >= 0 on Ge rows): the tableau then has one row per coordinate rather than
// one per constraint, which is much smaller for row-heavy cones. The outcome
// is verified exactly (strong duality for Optimal, a Farkas ray for
// Infeasible); nullopt means the verification failed and the caller should
// fall back to the primal form.
std::optional<LpMinResult> lp_min_dual_form(const Sys& s,
                                            const std::vector<Rat>& cvec) {
  const int m = static_cast<int>(s.a.size());
  const int nc = static_cast<int>(s.coords.size());
  std::vector<int> ycol(m, -1);
  int ncols = 0;
  for (int i = 0; i < m; ++i) {
    ycol[i] = ncols;
    ncols += s.rel[i] == Rel::Ge ? 1 : 2;
  }
  std::vector<std::vector<Rat>> M(nc, std::vector<Rat>(ncols));
  std::vector<Rat> b = cvec;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < nc; ++j) {
      if (s.a[i][j] == 0) continue;
      M[j][ycol[i]] = s.a[i][j];
      if (s.rel[i] == Rel::Eq) M[j][ycol[i] + 1] = -s.a[i][j];
    }
  std::vector<Rat> c(ncols);
  for (int i = 0; i < m; ++i) {
    c[ycol[i]] = -s.rhs[i];
    if (s.rel[i] == Rel::Eq) c[ycol[i] + 1] = s.rhs[i];
  }
  Simplex sx(std::move(M), std::move(b), ncols);
  auto res = sx.solve(c);
  if (!res) throw std::logic_error("lp_min: pivot cap in capless solve");
  LpMinResult out;
  if (res->status == Simplex::Status::Unbounded) {
    // Unbounded dual = infeasible primal; the ray is a Farkas certificate.
    std::vector<Rat> y(m);
    for (int i = 0; i < m; ++i) {
      y[i] = res->ray[ycol[i]];
      if (s.rel[i] == Rel::Eq) y[i] -= res->ray[ycol[i] + 1];
    }
    if (!check_farkas(s, y)) return std::nullopt;
    out.status = LpStatus::Infeasible;
    return out;
  }
  if (res->status == Simplex::Status::Infeasible) {
    // Dual infeasible: the primal is unbounded below or empty; settle which
    // with the (verified) feasibility solve.
    out.status = feasible_dual_form(s).feasible ? LpStatus::Unbounded
                                                : LpStatus::Infeasible;
    return out;
  }
  std::vector<Rat> x(nc);
  for (int j = 0; j < nc; ++j) x[j] = -res->y[j];
  Rat value = -res->value;
  Rat atx = 0;
  for (int j = 0; j < nc; ++j)
    if (cvec[j] != 0) atx += cvec[j] * x[j];
  if (atx != value || !check_point(s, x)) return std::nullopt;
  out.status = LpStatus::Optimal;
  out.value = std::move(value);
  for (int j = 0; j < nc; ++j) out.argmin[s.coords[j]] = x[j];
  return out;
}

FeasibilityResult lp_feasible(const HCone& cone,
                              const std::vector<AffineRow>& extra) {
  std::vector<AffineRow> ext = extra;
  {
    Sys probe = Sys::build(cone, extra);
    if (probe.all_homogeneous()) {
      AffineRow norm;
      for (const std::string& name : probe.coords) norm.coeffs[name] = 1;
      norm.rel = Rel::Eq;
      norm.rhs = 1;
      ext.push_back(std::move(norm));
    }
  }
  Sys s = Sys::build(cone, ext);
  FeasibilityResult r = feasible_dual_form(s);
  r.extras_used = std::move(ext);
  return r;
}

LpMinResult lp_min(const HCone& cone, const std::map<std::string, Rat>& objective,
                   const std::vector<AffineRow>& extra) {
  Sys s = Sys::build(cone, extra);
  std::vector<Rat> cvec(s.coords.size());
  for (const auto& [name, v] : objective) {
    auto it = s.index.find(name);
    if (it == s.index.end())
      throw std::invalid_argument("objective over unknown coordinate " + name);
    cvec[it->second] = v;
  }
  if (s.a.size() > 2 * s.coords.size() + 8) {
    if (auto dual = lp_min_dual_form(s, cvec)) return *dual;
  }
  PrimalForm p = PrimalForm::build(s);
  std::vector<Rat> c(p.ncols);
  for (int j = 0; j < p.n_coords; ++j) {
    if (cvec[j] == 0) continue;
    c[j] = cvec[j];
    c[p.n_coords + j] = -cvec[j];
  }
  Simplex sx(p.M, p.b, p.ncols);
  auto res = sx.solve(c);
  if (!res) throw std::logic_error("lp_min: pivot cap in capless solve");
  LpMinResult out;
  switch (res->status) {
    case Simplex::Status::Infeasible:
      out.status = LpStatus::Infeasible;
      break;
    case Simplex::Status::Unbounded:
      out.status = LpStatus::Unbounded;
      break;
    case Simplex::Status::Optimal: {
      out.status = LpStatus::Optimal;
      out.value = res->value;
      std::vector<Rat> x = p.point_from(res->z);
      if (!check_point(s, x)) throw std::logic_error("lp_min: bad optimum point");
      for (int j = 0; j < p.n_coords; ++j) out.argmin[s.coords[j]] = x[j];
      break;
    }
  }
  return out;
}

namespace {

struct ImpliedOutcome {
  bool implied = false;
  bool capped = false;  // pivot cap hit: unknown, treat as not implied
  ImplicationCertificate cert;
};

ImpliedOutcome implied_impl(const std::map<std::string, Rat>& expr,
                            const std::vector<std::string>& coords,
                            const std::vector<const LinIneq*>& rows,
                            const std::vector<int>& row_ids,
                            std::int64_t pivot_cap) {
  // Solve expr = sum y_i a_i (y >= 0 on Ge rows) as a phase-1 system over the
  // union support; coordinates outside it must have zero expr coefficient.
  std::map<std::string, int> idx;
  std::vector<std::string> used;
  auto touch = [&](const std::string& name) {
    if (!idx.count(name)) {
      idx[name] = static_cast<int>(used.size());
      used.push_back(name);
    }
  };
  for (const auto& [name, c] : expr)
    if (c != 0) touch(name);
  for (const LinIneq* r : rows)
    for (const auto& [name, c] : r->coeffs)
      if (c != 0) touch(name);
  (void)coords;
  int nr = static_cast<int>(used.size());
  int m = static_cast<int>(rows.size());
  std::vector<int> col(m);
  int ncols = 0;
  for (int i = 0; i < m; ++i) {
    col[i] = ncols;
    ncols += rows[i]->rel == Rel::Ge ? 1 : 2;
  }
  std::vector<std::vector<Rat>> M(nr, std::vector<Rat>(ncols));
  std::vector<Rat> b(nr);
  for (int i = 0; i < m; ++i)
    for (const auto& [name, c] : rows[i]->coeffs) {
      if (c == 0) continue;
      int j = idx[name];
      M[j][col[i]] = c;
      if (rows[i]->rel == Rel::Eq) M[j][col[i] + 1] = -c;
    }
  for (const auto& [name, c] : expr)
    if (c != 0) b[idx[name]] = c;
  Simplex sx(std::move(M), std::move(b), ncols, pivot_cap);
  std::vector<Rat> zero(ncols);
  auto res = sx.solve(zero);
  ImpliedOutcome out;
  if (!res) {
    out.capped = true;
    return out;
  }
  if (res->status != Simplex::Status::Optimal) return out;
  out.implied = true;
  for (int i = 0; i < m; ++i) {
    Rat y = res->z[col[i]];
    if (rows[i]->rel == Rel::Eq) y -= res->z[col[i] + 1];
    if (y != 0) out.cert.mults.emplace_back(row_ids[i], y);
  }
  return out;
}

}  // namespace

ImplicationResult is_implied(const std::map<std::string, Rat>& expr,
                             const HCone& cone) {
  std::vector<const LinIneq*> rows;
  std::vector<int> ids;
  rows.reserve(cone.rows.size());
  for (int i = 0; i < static_cast<int>(cone.rows.size()); ++i) {
    rows.push_back(&cone.rows[i]);
    ids.push_back(i);
  }
  ImpliedOutcome o = implied_impl(expr, cone.coords, rows, ids, -1);
  ImplicationResult r;
  r.implied = o.implied;
  if (o.implied) {
    r.cert = std::move(o.cert);
    if (!verify_implication(expr, cone, r.cert))
      throw std::logic_error("is_implied: certificate verification failed");
  }
  return r;
}

bool verify_implication(const std::map<std::string, Rat>& expr, const HCone& cone,
                        const ImplicationCertificate& cert) {
  std::map<std::string, Rat> sum;
  for (const auto& [i, mult] : cert.mults) {
    if (i < 0 || i >= static_cast<int>(cone.rows.size())) return false;
    if (cone.rows[i].rel == Rel::Ge && mult < 0) return false;
    for (const auto& [name, c] : cone.rows[i].coeffs) sum[name] += mult * c;
  }
  for (const auto& [name, c] : expr) {
    auto it = sum.find(name);
    Rat have = it == sum.end() ? Rat(0) : it->second;
    if (have != c) return false;
    if (it != sum.end()) sum.erase(it);
  }
  for (const auto& [name, c] : sum)
    if (c != 0) return false;
  return true;
}

bool verify_farkas(const HCone& cone, const std::vector<AffineRow>& extra,
                   const FarkasCertificate& cert) {
  std::map<std::string, Rat> sum;
  Rat total = 0;
  for (const auto& [i, mult] : cert.cone_mults) {
    if (i < 0 || i >= static_cast<int>(cone.rows.size())) return false;
    if (cone.rows[i].rel == Rel::Ge && mult < 0) return false;
    for (const auto& [name, c] : cone.rows[i].coeffs) sum[name] += mult * c;
  }
  for (const auto& [j, mult] : cert.extra_mults) {
    if (j < 0 || j >= static_cast<int>(extra.size())) return false;
    if (extra[j].rel == Rel::Ge && mult < 0) return false;
    for (const auto& [name, c] : extra[j].coeffs) sum[name] += mult * c;
    total += mult * extra[j].rhs;
  }
  if (total <= 0) return false;
  for (const auto& [name, c] : sum)
    if (c != 0) return false;
  return true;
}

LinIneq canonical_row(const LinIneq& row, const std::vector<std::string>& coord_order) {
  LinIneq out;
  out.rel = row.rel;
  std::vector<Rat> v;
  std::vector<std::string> names;
  for (const std::string& name : coord_order) {
    auto it = row.coeffs.find(name);
    if (it != row.coeffs.end() && it->second != 0) {
      names.push_back(name);
      v.push_back(it->second);
    }
  }
  if (v.empty()) return out;
  scale_to_coprime_integers(v);
  if (v[0] < 0 && row.rel == Rel::Eq)
    for (Rat& r : v) r = -r;
  for (std::size_t i = 0; i < v.size(); ++i) out.coeffs[names[i]] = v[i];
  return out;
}

std::string row_key(const LinIneq& row, const std::vector<std::string>& coord_order) {
  std::string out = row.rel == Rel::Eq ? "=:" : ">:";
  for (const std::string& name : coord_order) {
    auto it = row.coeffs.find(name);
    if (it == row.coeffs.end() || it->second == 0) continue;
    out += name;
    out += ':';
    out += rat_to_string(it->second);
    out += ' ';
  }
  return out;
}

namespace {

// Fourier-Motzkin working row: dense coefficients + ancestry for the Kohler
// redundancy filter (a row combining more than k+1 originals after k
// eliminations is redundant).
struct FmRow {
  std::vector<Rat> a;
  std::set<int> ancestry;
};

void normalize_fm(FmRow& r) {
  scale_to_coprime_integers(r.a);
}

std::string fm_key(const FmRow& r) {
  std::string out;
  for (std::size_t j = 0; j < r.a.size(); ++j)
    if (r.a[j] != 0) {
      out += std::to_string(j);
      out += ':';
      out += rat_to_string(r.a[j]);
      out += ' ';
    }
  return out;
}

class Deadline {
 public:
  explicit Deadline(std::int64_t budget_ms)
      : enabled_(budget_ms >= 0),
        end_(std::chrono::steady_clock::now() +
             std::chrono::milliseconds(budget_ms < 0 ? 0 : budget_ms)) {}
  bool expired() const {
    return enabled_ && std::chrono::steady_clock::now() >= end_;
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point end_;
};

// Drops rows implied by the others. Exact when pivot_cap < 0; with a cap it
// only ever keeps extra rows (sound). Single pass over a deterministic order.
void prune_rows(std::vector<FmRow>& rows, const std::vector<std::string>& coords,
                std::int64_t pivot_cap, const Deadline& deadline, int jobs) {
  if (rows.size() <= 1) return;
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return fm_key(rows[x]) < fm_key(rows[y]);
  });
  std::vector<bool> dropped(rows.size(), false);
  auto as_lin = [&](const FmRow& r) {
    LinIneq li;
    for (std::size_t j = 0; j < r.a.size(); ++j)
      if (r.a[j] != 0) li.coeffs[coords[j]] = r.a[j];
    return li;
  };
  std::vector<LinIneq> lin(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) lin[i] = as_lin(rows[i]);

  auto implied_by_rest = [&](std::size_t k) {
    std::vector<const LinIneq*> rest;
    std::vector<int> ids;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != k && !dropped[i]) {
        rest.push_back(&lin[i]);
        ids.push_back(static_cast<int>(i));
      }
    std::map<std::string, Rat> expr;
    for (const auto& [name, c] : lin[k].coeffs) expr[name] = c;
    return implied_impl(expr, coords, rest, ids, pivot_cap).implied;
  };

  if (jobs > 1) {
    // Parallel flag phase against the full set, then sequential confirmation
    // so mutually-implying rows are not both removed.
    std::vector<char> flagged(rows.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        std::size_t t = next.fetch_add(1);
        if (t >= order.size() || deadline.expired()) return;
        flagged[order[t]] = implied_by_rest(order[t]) ? 1 : 0;
      }
    };
    std::vector<std::future<void>> fs;
    for (int t = 0; t < jobs; ++t)
      fs.push_back(std::async(std::launch::async, worker));
    for (auto& f : fs) f.get();
    for (std::size_t t = 0; t < order.size(); ++t) {
      std::size_t k = order[t];
      if (!flagged[k] || deadline.expired()) continue;
      if (implied_by_rest(k)) dropped[k] = true;
    }
  } else {
    for (std::size_t t = 0; t < order.size(); ++t) {
      if (deadline.expired()) break;
      std::size_t k = order[t];
      if (implied_by_rest(k)) dropped[k] = true;
    }
  }
  std::vector<FmRow> kept;
  for (std::size_t t = 0; t < order.size(); ++t)
    if (!dropped[order[t]]) kept.push_back(std::move(rows[order[t]]));
  rows = std::move(kept);
}

}  // namespace

ProjectResult fm_project(const HCone& cone, const std::vector<std::string>& keep,
                         const ProjectOptions& opts) {
  Deadline deadline(opts.budget_ms);
  const int nc = static_cast<int>(cone.coords.size());
  std::vector<bool> kept(nc, false);
  for (const std::string& name : keep) {
    int i = cone.coord_index(name);
    if (i < 0) throw std::invalid_argument("fm_project: unknown coordinate " + name);
    kept[i] = true;
  }

  std::vector<FmRow> ge;
  std::vector<std::vector<Rat>> eq;
  for (int i = 0; i < static_cast<int>(cone.rows.size()); ++i) {
    std::vector<Rat> a(nc);
    for (const auto& [name, c] : cone.rows[i].coeffs) a[cone.coord_index(name)] = c;
    if (cone.rows[i].rel == Rel::Eq) {
      eq.push_back(std::move(a));
    } else {
      FmRow r{std::move(a), {i}};
      normalize_fm(r);
      if (!r.a.empty()) ge.push_back(std::move(r));
    }
  }

  std::vector<bool> active(nc, true);
  // Equality substitution for non-kept pivots.
  std::vector<std::vector<Rat>> eq_kept;
  for (std::size_t e = 0; e < eq.size(); ++e) {
    int pivot = -1;
    for (int j = 0; j < nc; ++j)
      if (!kept[j] && active[j] && eq[e][j] != 0) {
        pivot = j;
        break;
      }
    if (pivot < 0) {
      eq_kept.push_back(eq[e]);
      continue;
    }
    const std::vector<Rat>& src = eq[e];
    auto substitute = [&](std::vector<Rat>& row) {
      if (row[pivot] == 0) return;
      Rat f = row[pivot] / src[pivot];
      for (int j = 0; j < nc; ++j)
        if (src[j] != 0) row[j] -= f * src[j];
    };
    for (std::size_t e2 = e + 1; e2 < eq.size(); ++e2) substitute(eq[e2]);
    for (auto& r : eq_kept) substitute(r);
    for (auto& r : ge) {
      substitute(r.a);
      normalize_fm(r);
    }
    active[pivot] = false;
  }
  ge.erase(std::remove_if(ge.begin(), ge.end(),
                          [](const FmRow& r) {
                            for (const Rat& c : r.a)
                              if (c != 0) return false;
                            return true;  // 0 >= 0, drop
                          }),
           ge.end());

  auto dedupe = [&](std::vector<FmRow>& rows) {
    std::map<std::string, std::size_t> seen;
    std::vector<FmRow> out;
    for (FmRow& r : rows) {
      std::string k = fm_key(r);
      auto it = seen.find(k);
      if (it == seen.end()) {
        seen.emplace(std::move(k), out.size());
        out.push_back(std::move(r));
      } else if (r.ancestry.size() < out[it->second].ancestry.size()) {
        out[it->second].ancestry = std::move(r.ancestry);
      }
    }
    rows = std::move(out);
  };
  dedupe(ge);

  ProjectResult result;
  int eliminated_ineq = 0;
  auto remaining_victims = [&]() {
    std::vector<int> v;
    for (int j = 0; j < nc; ++j)
      if (active[j] && !kept[j]) v.push_back(j);
    return v;
  };

  while (true) {
    std::vector<int> victims = remaining_victims();
    result.remaining = static_cast<int>(victims.size());
    if (victims.empty()) break;
    if (deadline.expired()) {
      result.complete = false;
      break;
    }
    // Victim with the fewest pos*neg products.
    int best = -1;
    long best_score = 0;
    for (int v : victims) {
      long pos = 0, neg = 0;
      for (const FmRow& r : ge) {
        if (r.a[v] > 0) ++pos;
        else if (r.a[v] < 0) ++neg;
      }
      long score = pos * neg - (pos + neg);
      if (best < 0 || score < best_score) {
        best = v;
        best_score = score;
      }
    }
    int v = best;
    std::vector<FmRow> zeros, pos, neg;
    for (FmRow& r : ge) {
      if (r.a[v] == 0) zeros.push_back(std::move(r));
      else if (r.a[v] > 0) pos.push_back(std::move(r));
      else neg.push_back(std::move(r));
    }
    std::vector<FmRow> next = std::move(zeros);
    for (const FmRow& p : pos)
      for (const FmRow& q : neg) {
        FmRow r;
        r.a.resize(nc);
        const Rat pf = -q.a[v], qf = p.a[v];
        for (int j = 0; j < nc; ++j) {
          if (p.a[j] != 0) r.a[j] = pf * p.a[j];
          if (q.a[j] != 0) r.a[j] += qf * q.a[j];
        }
        bool nonzero = false, negok = true;
        for (int j = 0; j < nc; ++j)
          if (r.a[j] != 0) {
            nonzero = true;
            break;
          }
        if (!nonzero) continue;
        (void)negok;
        std::set_union(p.ancestry.begin(), p.ancestry.end(), q.ancestry.begin(),
                       q.ancestry.end(),
                       std::inserter(r.ancestry, r.ancestry.begin()));
        if (static_cast<int>(r.ancestry.size()) > eliminated_ineq + 2)
          continue;  // Kohler: redundant combination
        normalize_fm(r);
        next.push_back(std::move(r));
      }
    ge = std::move(next);
    active[v] = false;
    ++eliminated_ineq;
    ++result.eliminated;
    dedupe(ge);
    if (opts.lp_prune && !deadline.expired())
      prune_rows(ge, cone.coords, /*pivot_cap=*/400, deadline, opts.jobs);
  }

  // Assemble output over kept coordinates.
  std::vector<std::string> out_coords;
  for (int j = 0; j < nc; ++j)
    if (kept[j]) out_coords.push_back(cone.coords[j]);
  auto supported_on_keep = [&](const std::vector<Rat>& a) {
    for (int j = 0; j < nc; ++j)
      if (a[j] != 0 && !kept[j]) return false;
    return true;
  };
  auto to_lin = [&](const std::vector<Rat>& a, Rel rel) {
    LinIneq li;
    li.rel = rel;
    for (int j = 0; j < nc; ++j)
      if (a[j] != 0) li.coeffs[cone.coords[j]] = a[j];
    return canonical_row(li, cone.coords);
  };

  if (result.complete) {
    result.cone.coords = out_coords;
    for (const auto& e : eq_kept) {
      bool nonzero = false;
      for (const Rat& c : e)
        if (c != 0) {
          nonzero = true;
          break;
        }
      if (nonzero) result.cone.rows.push_back(to_lin(e, Rel::Eq));
    }
    for (const FmRow& r : ge) result.cone.rows.push_back(to_lin(r.a, Rel::Ge));
  } else {
    std::set<std::string> seen;
    for (const FmRow& r : ge)
      if (supported_on_keep(r.a)) {
        LinIneq li = to_lin(r.a, Rel::Ge);
        std::string k = row_key(li, cone.coords);
        if (seen.insert(k).second) result.partial_rows.push_back(std::move(li));
      }
  }
  return result;
}

std::vector<LinIneq> facets_canonical(const HCone& cone) {
  for (const LinIneq& r : cone.rows)
    if (r.rel == Rel::Eq)
      throw std::invalid_argument("facets_canonical: equality row present");
  std::vector<LinIneq> rows;
  std::set<std::string> seen;
  for (const LinIneq& r : cone.rows) {
    LinIneq c = canonical_row(r, cone.coords);
    if (c.coeffs.empty()) continue;
    std::string k = row_key(c, cone.coords);
    if (seen.insert(k).second) rows.push_back(std::move(c));
  }
  std::stable_sort(rows.begin(), rows.end(), [&](const LinIneq& a, const LinIneq& b) {
    return row_key(a, cone.coords) < row_key(b, cone.coords);
  });
  std::vector<bool> dropped(rows.size(), false);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    HCone rest;
    rest.coords = cone.coords;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != k && !dropped[i]) rest.rows.push_back(rows[i]);
    std::map<std::string, Rat> expr(rows[k].coeffs.begin(), rows[k].coeffs.end());
    if (is_implied(expr, rest).implied) dropped[k] = true;
  }
  std::vector<LinIneq> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!dropped[i]) out.push_back(std::move(rows[i]));
  return out;
}

std::string hrep_to_text(const HCone& cone) {
  std::ostringstream os;
  os << "coords";
  for (const std::string& c : cone.coords) os << ' ' << c;
  os << '\n';
  for (const LinIneq& r : cone.rows) {
    bool first = true;
    for (const std::string& name : cone.coords) {
      auto it = r.coeffs.find(name);
      if (it == r.coeffs.end() || it->second == 0) continue;
      if (!first) os << ' ';
      os << name << ':' << rat_to_string(it->second);
      first = false;
    }
    if (first) os << "0:0";
    os << (r.rel == Rel::Eq ? " = 0" : " >= 0") << '\n';
  }
  return os.str();
}

HCone hrep_from_text(const std::string& text) {
  HCone cone;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::string tag;
      ls >> tag;
      if (tag != "coords") throw std::invalid_argument("h-rep: missing header");
      std::string name;
      while (ls >> name) cone.coords.push_back(name);
      have_header = true;
      continue;
    }
    LinIneq row;
    std::string tok;
    std::vector<std::string> toks;
    while (ls >> tok) toks.push_back(tok);
    if (toks.size() < 2) throw std::invalid_argument("h-rep: short line");
    std::string zero = toks.back();
    std::string rel = toks[toks.size() - 2];
    if (zero != "0" || (rel != ">=" && rel != "="))
      throw std::invalid_argument("h-rep: bad relation: " + line);
    row.rel = rel == "=" ? Rel::Eq : Rel::Ge;
    for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
      std::size_t colon = toks[i].rfind(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("h-rep: bad term " + toks[i]);
      std::string name = toks[i].substr(0, colon);
      auto val = rat_from_string(toks[i].substr(colon + 1));
      if (!val) throw std::invalid_argument("h-rep: bad coefficient " + toks[i]);
      if (name == "0" && *val == 0) continue;
      if (std::find(cone.coords.begin(), cone.coords.end(), name) ==
          cone.coords.end())
        throw std::invalid_argument("h-rep: unknown coordinate " + name);
      row.coeffs[name] = *val;
    }
    cone.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::invalid_argument("h-rep: empty input");
  return cone;
}

}  // namespace bookineq
