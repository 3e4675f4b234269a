#include "bookineq/bookcone.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bookineq/ops.hpp"

namespace bookineq {

namespace {

GroundSet four_element_base() {
  return GroundSet({"a", "b", "c", "d"});
}

OrbitCoord spine_orbit(int n, int m) {
  OrbitCoord oc;
  oc.spine_part = 3;
  oc.n = n;
  oc.m = m;
  return oc;
}

}  // namespace

int OrbitCoord::size() const {
  return std::popcount(spine_part) + q + r + 2 * m;
}

std::string OrbitCoord::name() const {
  static const char* kSpine[4] = {"-", "a", "b", "ab"};
  std::ostringstream os;
  os << kSpine[spine_part & 3u] << ";" << q << "," << r << "," << m;
  return os.str();
}

std::vector<OrbitCoord> orbit_coordinates(int n) {
  if (n < 1) throw std::invalid_argument("orbit_coordinates: need at least one page");
  std::vector<OrbitCoord> out;
  for (Mask sp = 0; sp < 4; ++sp)
    for (int q = 0; q <= n; ++q)
      for (int r = 0; q + r <= n; ++r)
        for (int m = 0; q + r + m <= n; ++m) {
          if (sp == 0 && q == 0 && r == 0 && m == 0) continue;
          OrbitCoord oc;
          oc.spine_part = sp;
          oc.n = n;
          oc.q = q;
          oc.r = r;
          oc.m = m;
          out.push_back(oc);
        }
  std::sort(out.begin(), out.end(), [](const OrbitCoord& x, const OrbitCoord& y) {
    auto key = [](const OrbitCoord& o) {
      return std::array<int, 5>{o.size(), static_cast<int>(o.spine_part), o.q, o.r, o.m};
    };
    return key(x) < key(y);
  });
  return out;
}

OrbitCoord fold_subset(int n, Mask ext_subset) {
  if (n < 1) throw std::invalid_argument("fold_subset: need at least one page");
  if (ext_subset >> (2 + 2 * n))
    throw std::invalid_argument("fold_subset: subset outside the extended ground");
  OrbitCoord oc;
  oc.spine_part = ext_subset & 3u;
  oc.n = n;
  for (int i = 0; i < n; ++i) {
    const bool c = (ext_subset >> (2 + 2 * i)) & 1u;
    const bool d = (ext_subset >> (3 + 2 * i)) & 1u;
    if (c && d)
      ++oc.m;
    else if (c)
      ++oc.q;
    else if (d)
      ++oc.r;
  }
  return oc;
}

BookLayout cone_layout(int n) {
  return make_layout(four_element_base(), 3u, n);
}

SymmetricCone assemble_cone(int n) {
  if (n < 1) throw std::invalid_argument("assemble_cone: need at least one page");
  if (2 + 2 * n > kMaxGroundSize)
    throw std::invalid_argument("assemble_cone: too many pages");
  SymmetricCone C;
  C.n = n;
  const int N = 2 + 2 * n;
  const Mask full = (1u << N) - 1u;

  // Cross-page independence makes the rank of the spine plus s full pages an
  // affine function of s; eliminate those coordinates up front.
  for (int s = 2; s <= n; ++s)
    C.expansions[spine_orbit(n, s).name()] = {
        {spine_orbit(n, 1).name(), Rat(s)},
        {spine_orbit(n, 0).name(), Rat(-(s - 1))}};

  for (const OrbitCoord& oc : orbit_coordinates(n))
    if (!C.expansions.count(oc.name())) C.cone.coords.push_back(oc.name());

  std::map<std::string, LinIneq> by_key;
  auto add = [&](std::map<std::string, Rat> row) {
    std::map<std::string, Rat> flat;
    for (const auto& [name, coef] : row) {
      auto it = C.expansions.find(name);
      if (it == C.expansions.end()) {
        flat[name] += coef;
      } else {
        for (const auto& [sub, k] : it->second) flat[sub] += coef * k;
      }
    }
    for (auto it = flat.begin(); it != flat.end();)
      it = it->second == 0 ? flat.erase(it) : std::next(it);
    if (flat.empty()) return;
    LinIneq li{std::move(flat), Rel::Ge};
    LinIneq canon = canonical_row(li, C.cone.coords);
    by_key.emplace(row_key(canon, C.cone.coords), std::move(canon));
  };

  auto nm = [&](Mask s) { return fold_subset(n, s).name(); };
  for (int e = 0; e < N; ++e) {
    std::map<std::string, Rat> row;
    row[nm(full)] += 1;
    row[nm(full & ~(1u << e))] -= 1;
    add(std::move(row));
  }
  for (int x = 0; x < N; ++x)
    for (int y = x + 1; y < N; ++y) {
      const Mask rest = full & ~(1u << x) & ~(1u << y);
      Mask K = rest;
      while (true) {
        std::map<std::string, Rat> row;
        row[nm(K | (1u << x))] += 1;
        row[nm(K | (1u << y))] += 1;
        row[nm(K | (1u << x) | (1u << y))] -= 1;
        if (K) row[nm(K)] -= 1;
        add(std::move(row));
        if (!K) break;
        K = (K - 1) & rest;
      }
    }

  for (auto& [key, row] : by_key) C.cone.rows.push_back(std::move(row));

  const BookLayout L = cone_layout(n);
  std::vector<Mask> bm;
  for (Mask mI = 1; mI < 16; ++mI) bm.push_back(mI);
  std::sort(bm.begin(), bm.end(), graded_lex_less);
  for (Mask mI : bm) {
    C.base_masks.push_back(mI);
    C.base_coords.push_back(fold_subset(n, L.embed(0, mI)).name());
  }
  return C;
}

Rat orbit_value(const SymmetricCone& cone, const LpPoint& point,
                const std::string& coord) {
  auto it = point.find(coord);
  if (it != point.end()) return it->second;
  auto ex = cone.expansions.find(coord);
  if (ex != cone.expansions.end()) {
    Rat v = 0;
    for (const auto& [sub, k] : ex->second) v += k * orbit_value(cone, point, sub);
    return v;
  }
  if (cone.cone.coord_index(coord) >= 0) return Rat(0);
  throw std::invalid_argument("orbit_value: unknown coordinate " + coord);
}

LpPoint fold_function(const SymmetricCone& cone, const Polymatroid& h) {
  const BookLayout L = cone_layout(cone.n);
  if (h.ground.size() != L.extended_ground.size())
    throw std::invalid_argument("fold_function: ground size mismatch");
  const Mask full = (1u << h.ground.size()) - 1u;
  std::map<std::string, Rat> seen;
  for (Mask s = 1; s <= full; ++s) {
    const std::string name = fold_subset(cone.n, s).name();
    auto [it, fresh] = seen.emplace(name, h.at(s));
    if (!fresh && it->second != h.at(s))
      throw std::invalid_argument("fold_function: not orbit-invariant at " +
                                  h.ground.subset_to_string(s));
  }
  LpPoint out;
  for (const std::string& c : cone.cone.coords) out[c] = seen.at(c);
  return out;
}

Polymatroid unfold_point(const SymmetricCone& cone, const LpPoint& point) {
  const BookLayout L = cone_layout(cone.n);
  const Mask full = (1u << L.extended_ground.size()) - 1u;
  std::vector<Rat> rank(static_cast<std::size_t>(full) + 1, Rat(0));
  for (Mask s = 1; s <= full; ++s)
    rank[s] = orbit_value(cone, point, fold_subset(cone.n, s).name());
  return make_polymatroid(L.extended_ground, std::move(rank));
}

ExtensionCheck exists_extension(const SymmetricCone& cone, const Polymatroid& g) {
  if (g.ground.size() != 4)
    throw std::invalid_argument("exists_extension: base must have four elements");
  ValidationReport vr = validate_polymatroid(g);
  if (!vr.ok)
    throw std::invalid_argument("exists_extension: base is not a polymatroid: " +
                                vr.violations.front());
  ExtensionCheck out;
  for (std::size_t i = 0; i < cone.base_masks.size(); ++i) {
    AffineRow pin;
    pin.coeffs[cone.base_coords[i]] = 1;
    pin.rel = Rel::Eq;
    pin.rhs = g.at(cone.base_masks[i]);
    out.pins.push_back(std::move(pin));
  }
  FeasibilityResult fr = lp_feasible(cone.cone, out.pins);
  out.exists = fr.feasible;
  out.witness = std::move(fr.witness);
  out.cert = std::move(fr.cert);
  out.pins = std::move(fr.extras_used);
  return out;
}

ExtensionCheck exists_extension(const Polymatroid& g, int n) {
  return exists_extension(assemble_cone(n), g);
}

BaseProjection project_base(const SymmetricCone& cone, const ProjectOptions& opts) {
  ProjectResult pr = fm_project(cone.cone, cone.base_coords, opts);
  BaseProjection out;
  out.complete = pr.complete;
  out.eliminated = pr.eliminated;
  out.remaining = pr.remaining;

  const GroundSet bg = four_element_base();
  std::map<std::string, std::string> rename;
  HCone renamed;
  for (std::size_t i = 0; i < cone.base_masks.size(); ++i) {
    const std::string sub = bg.subset_to_string(cone.base_masks[i]);
    rename[cone.base_coords[i]] = sub;
    renamed.coords.push_back(sub);
  }
  const std::vector<LinIneq>& rows = pr.complete ? pr.cone.rows : pr.partial_rows;
  for (const LinIneq& r : rows) {
    LinIneq nr;
    nr.rel = r.rel;
    for (const auto& [name, coef] : r.coeffs) nr.coeffs[rename.at(name)] = coef;
    renamed.rows.push_back(std::move(nr));
  }
  out.facets = facets_canonical(renamed);
  return out;
}

Polymatroid sample_cone_point(const SymmetricCone& cone, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-24, 24);
  // Slice at rank-of-everything = 1: every nonzero point of the cone has a
  // positive top rank (implied monotonicity), so this cuts each extreme ray
  // once, and the row stays sparse under the coordinate substitution.
  AffineRow slice;
  slice.rel = Rel::Eq;
  slice.rhs = 1;
  const Mask full = (1u << (2 + 2 * cone.n)) - 1u;
  const std::string top = fold_subset(cone.n, full).name();
  auto ex = cone.expansions.find(top);
  if (ex == cone.expansions.end()) {
    slice.coeffs[top] = 1;
  } else {
    for (const auto& [sub, k] : ex->second) slice.coeffs[sub] = k;
  }

  for (int attempt = 0; attempt < 64; ++attempt) {
    std::map<std::string, Rat> objective;
    for (const std::string& c : cone.cone.coords) objective[c] = Rat(coef(rng));
    const LpMinResult r = lp_min(cone.cone, objective, {slice});
    if (r.status != LpStatus::Optimal) continue;
    bool zero = true;
    for (const auto& [name, v] : r.argmin)
      if (v != 0) zero = false;
    if (zero) continue;

    Polymatroid h = unfold_point(cone, r.argmin);
    ValidationReport vr = validate_polymatroid(h);
    if (!vr.ok)
      throw std::logic_error("sample_cone_point: vertex is not a polymatroid: " +
                             vr.violations.front());
    const BookLayout L = cone_layout(cone.n);
    std::vector<Rat> base_rank(16, Rat(0));
    for (Mask mI = 1; mI < 16; ++mI) base_rank[mI] = h.at(L.embed(0, mI));
    const Polymatroid base = make_polymatroid(L.base_ground, std::move(base_rank));
    const BookCheckReport rep = is_book_extension(h, base, L);
    if (!rep.ok)
      throw std::logic_error("sample_cone_point: vertex is not an extension: " +
                             rep.detail);
    return h;
  }
  throw std::runtime_error("sample_cone_point: no nonzero vertex found");
}

}  // namespace bookineq
