#include "bookineq/ops.hpp"

#include <algorithm>
#include <stdexcept>

namespace bookineq {

Mask ElementMap::image(Mask src) const {
  Mask out = 0;
  for (int i = 0; i < source.size(); ++i)
    if (src & (Mask{1} << i)) out |= Mask{1} << to_target[i];
  return out;
}

ElementMap make_element_map(const GroundSet& source, const GroundSet& target,
                            const std::vector<std::string>& target_labels) {
  if (static_cast<int>(target_labels.size()) != source.size())
    throw std::invalid_argument("element map: wrong image count");
  ElementMap phi{source, target, {}};
  phi.to_target.reserve(source.size());
  for (const std::string& l : target_labels) {
    auto idx = target.index_of(l);
    if (!idx) throw std::invalid_argument("element map: unknown target " + l);
    phi.to_target.push_back(*idx);
  }
  return phi;
}

Polymatroid direct_sum(const std::vector<Polymatroid>& parts,
                       const std::vector<std::string>& suffixes) {
  if (parts.empty()) throw std::invalid_argument("direct_sum: no parts");
  if (!suffixes.empty() && suffixes.size() != parts.size())
    throw std::invalid_argument("direct_sum: suffix count mismatch");
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::string suf = suffixes.empty() ? "_" + std::to_string(k + 1) : suffixes[k];
    for (const std::string& l : parts[k].ground.labels()) labels.push_back(l + suf);
  }
  GroundSet gs(labels);  // throws on collision
  std::vector<Rat> rank(std::size_t{1} << gs.size());
  for (Mask m = 0; m <= gs.full_mask(); ++m) {
    Rat v = 0;
    int off = 0;
    for (const Polymatroid& p : parts) {
      Mask part = (m >> off) & p.ground.full_mask();
      v += p.at(part);
      off += p.ground.size();
    }
    rank[m] = v;
    if (m == gs.full_mask()) break;
  }
  return make_polymatroid(std::move(gs), std::move(rank));
}

Polymatroid restrict_to(const Polymatroid& g, Mask M) {
  std::vector<std::string> labels;
  std::vector<int> pos;
  for (int i = 0; i < g.n(); ++i)
    if (M & (Mask{1} << i)) {
      labels.push_back(g.ground.label(i));
      pos.push_back(i);
    }
  GroundSet gs(labels);
  std::vector<Rat> rank(std::size_t{1} << gs.size());
  for (Mask m = 0; m < (Mask{1} << gs.size()); ++m) {
    Mask big = 0;
    for (int i = 0; i < gs.size(); ++i)
      if (m & (Mask{1} << i)) big |= Mask{1} << pos[i];
    rank[m] = g.at(big);
  }
  return make_polymatroid(std::move(gs), std::move(rank));
}

Polymatroid pullback(const Polymatroid& g, const ElementMap& phi) {
  if (!(phi.target == g.ground))
    throw std::invalid_argument("pullback: map target != ground");
  std::vector<Rat> rank(std::size_t{1} << phi.source.size());
  for (Mask m = 0; m < (Mask{1} << phi.source.size()); ++m)
    rank[m] = g.at(phi.image(m));
  return make_polymatroid(phi.source, std::move(rank));
}

Polymatroid preimage_pullback(const Polymatroid& f, const ElementMap& psi) {
  if (!(psi.source == f.ground))
    throw std::invalid_argument("preimage_pullback: map source != ground");
  int nt = psi.target.size();
  std::vector<Mask> fiber(nt, 0);
  for (int i = 0; i < psi.source.size(); ++i)
    fiber[psi.to_target[i]] |= Mask{1} << i;
  for (int j = 0; j < nt; ++j)
    if (fiber[j] == 0)
      throw std::invalid_argument("preimage_pullback: map not surjective");
  std::vector<Rat> rank(std::size_t{1} << nt);
  for (Mask m = 0; m < (Mask{1} << nt); ++m) {
    Mask pre = 0;
    for (int j = 0; j < nt; ++j)
      if (m & (Mask{1} << j)) pre |= fiber[j];
    rank[m] = f.at(pre);
  }
  return make_polymatroid(psi.target, std::move(rank));
}

Polymatroid min_extend(const Polymatroid& g, int a, const Rat& t) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("min_extend: bad element");
  Mask A = Mask{1} << a;
  if (t < 0 || t > g.at(A))
    throw std::invalid_argument("min_extend: t outside [0, g(a)]");
  std::vector<Rat> rank(g.rank.size());
  for (Mask m = 1; m < rank.size(); ++m) {
    Rat alt = g.at(m | A) - t;
    rank[m] = std::min(g.at(m), alt);
  }
  return make_polymatroid(g.ground, std::move(rank));
}

Polymatroid tighten(const Polymatroid& g, int a) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("tighten: bad element");
  Mask A = Mask{1} << a;
  Mask full = g.ground.full_mask();
  Rat t = g.at(full) - g.at(full & ~A);
  std::vector<Rat> rank = g.rank;
  for (Mask m = 0; m < rank.size(); ++m)
    if (m & A) rank[m] -= t;
  return make_polymatroid(g.ground, std::move(rank));
}

Polymatroid tighten_all(const Polymatroid& g, Mask J) {
  Polymatroid h = g;
  for (int i = 0; i < g.n(); ++i)
    if (J & (Mask{1} << i)) h = tighten(h, i);
  return h;
}

bool is_tight(const Polymatroid& g) {
  Mask full = g.ground.full_mask();
  for (int i = 0; i < g.n(); ++i)
    if (g.at(full & ~(Mask{1} << i)) != g.at(full)) return false;
  return true;
}

}  // namespace bookineq
