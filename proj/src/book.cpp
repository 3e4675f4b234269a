#include "bookineq/book.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace bookineq {

namespace {

std::vector<int> positions_in(Mask m, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (m & (Mask{1} << i)) out.push_back(i);
  return out;
}

std::string index_set(Mask a) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i = 0; a >> i; ++i)
    if (a & (Mask{1} << i)) {
      if (!first) os << ',';
      os << (i + 1);
      first = false;
    }
  os << '}';
  return os.str();
}

}  // namespace

Mask BookLayout::page_mask(int i) const {
  Mask m = 0;
  for (int e = 0; e < base_ground.size(); ++e)
    if (!(spine & (Mask{1} << e))) m |= Mask{1} << to_ext[i][e];
  return m;
}

ElementMap BookLayout::page_map(int i) const {
  ElementMap phi{base_ground, extended_ground, {}};
  phi.to_target.reserve(base_ground.size());
  for (int e = 0; e < base_ground.size(); ++e) phi.to_target.push_back(to_ext[i][e]);
  return phi;
}

Mask BookLayout::embed(int i, Mask base_subset) const {
  Mask out = 0;
  for (int e = 0; e < base_ground.size(); ++e)
    if (base_subset & (Mask{1} << e)) out |= Mask{1} << to_ext[i][e];
  return out;
}

BookLayout make_layout(const GroundSet& base, Mask spine, int pages) {
  if (base.size() < 2) throw std::invalid_argument("layout: base ground too small");
  if (spine == 0 || (spine & ~base.full_mask()) || spine == base.full_mask())
    throw std::invalid_argument("layout: spine must be non-empty and proper");
  if (pages < 1) throw std::invalid_argument("layout: need at least one page");
  std::vector<int> spine_pos = positions_in(spine, base.size());
  std::vector<int> proto = positions_in(base.full_mask() & ~spine, base.size());
  int total = static_cast<int>(spine_pos.size() + pages * proto.size());
  if (total > kMaxGroundSize)
    throw std::invalid_argument("layout: extended ground too large");

  BookLayout L;
  L.base_ground = base;
  L.spine = spine;
  L.pages = pages;
  std::vector<std::string> labels;
  for (int e : spine_pos) labels.push_back(base.label(e));
  for (int i = 1; i <= pages; ++i)
    for (int e : proto) labels.push_back(base.label(e) + "_" + std::to_string(i));
  L.extended_ground = GroundSet(std::move(labels));
  L.to_ext.assign(pages, std::vector<int>(base.size(), -1));
  for (std::size_t k = 0; k < spine_pos.size(); ++k)
    for (int i = 0; i < pages; ++i) L.to_ext[i][spine_pos[k]] = static_cast<int>(k);
  int off = static_cast<int>(spine_pos.size());
  for (int i = 0; i < pages; ++i)
    for (std::size_t k = 0; k < proto.size(); ++k)
      L.to_ext[i][proto[k]] = off + i * static_cast<int>(proto.size()) + static_cast<int>(k);
  L.spine_ext = (Mask{1} << spine_pos.size()) - 1;
  return L;
}

BookLayout sub_layout(const BookLayout& L, const std::vector<int>& pages_kept) {
  if (pages_kept.empty()) throw std::invalid_argument("sub_layout: no pages kept");
  std::vector<bool> seen(L.pages, false);
  for (int i : pages_kept) {
    if (i < 0 || i >= L.pages || seen[i])
      throw std::invalid_argument("sub_layout: bad page list");
    seen[i] = true;
  }
  Mask keep = L.spine_ext;
  for (int i : pages_kept) keep |= L.page_mask(i);
  std::vector<int> old2new(L.extended_ground.size(), -1);
  std::vector<std::string> labels;
  for (int e = 0; e < L.extended_ground.size(); ++e)
    if (keep & (Mask{1} << e)) {
      old2new[e] = static_cast<int>(labels.size());
      labels.push_back(L.extended_ground.label(e));
    }
  BookLayout S;
  S.base_ground = L.base_ground;
  S.spine = L.spine;
  S.pages = static_cast<int>(pages_kept.size());
  S.extended_ground = GroundSet(std::move(labels));
  S.to_ext.assign(S.pages, std::vector<int>(L.base_ground.size(), -1));
  for (int k = 0; k < S.pages; ++k)
    for (int e = 0; e < L.base_ground.size(); ++e)
      S.to_ext[k][e] = old2new[L.to_ext[pages_kept[k]][e]];
  S.spine_ext = 0;
  for (int e = 0; e < L.extended_ground.size(); ++e)
    if ((L.spine_ext & (Mask{1} << e)))
      S.spine_ext |= Mask{1} << old2new[e];
  return S;
}

BookCheckReport is_book_extension(const Polymatroid& h, const Polymatroid& g,
                                  const BookLayout& L) {
  if (!(h.ground == L.extended_ground) || !(g.ground == L.base_ground))
    throw std::invalid_argument("is_book_extension: layout/ground mismatch");

  for (int i = 0; i < L.pages; ++i)
    for (Mask J = 1; J <= g.ground.full_mask(); ++J)
      if (h.at(L.embed(i, J)) != g.at(J))
        return {false, "pullback page " + std::to_string(i + 1)};

  // Independence over the spine for every disjoint pair of non-empty page
  // index sets; each unordered pair once (cond is symmetric in its two args).
  const int n = L.pages;
  const Mask all = (Mask{1} << n) - 1;
  std::vector<Mask> un(std::size_t{1} << n, 0);
  for (Mask A = 1; A <= all; ++A)
    un[A] = un[A & (A - 1)] | L.page_mask(__builtin_ctz(A));
  const Mask S = L.spine_ext;
  const Rat& base = h.at(S);
  for (Mask A = 1; A <= all; ++A) {
    Mask comp = all & ~A;
    for (Mask B = comp; B; B = (B - 1) & comp) {
      if (B < A) continue;
      if (h.at(un[A] | S) + h.at(un[B] | S) != h.at(un[A] | un[B] | S) + base)
        return {false, "independence " + index_set(A) + "|" + index_set(B)};
    }
  }
  return {true, ""};
}

Polymatroid page_permute(const Polymatroid& h, const BookLayout& L,
                         const PagePermutation& pi) {
  if (!(h.ground == L.extended_ground))
    throw std::invalid_argument("page_permute: ground mismatch");
  const int n = L.pages;
  if (static_cast<int>(pi.size()) != n)
    throw std::invalid_argument("page_permute: wrong permutation size");
  std::vector<int> inv(n, -1);
  for (int k = 0; k < n; ++k) {
    if (pi[k] < 0 || pi[k] >= n || inv[pi[k]] != -1)
      throw std::invalid_argument("page_permute: not a permutation");
    inv[pi[k]] = k;
  }
  const int m = L.extended_ground.size();
  std::vector<int> sig(m);
  for (int e = 0; e < m; ++e) sig[e] = e;  // spine positions stay put
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < L.base_ground.size(); ++e)
      if (!(L.spine & (Mask{1} << e))) sig[L.to_ext[i][e]] = L.to_ext[inv[i]][e];
  std::vector<Rat> rank(h.rank.size());
  for (Mask I = 0; I < rank.size(); ++I) {
    Mask J = 0;
    for (int e = 0; e < m; ++e)
      if (I & (Mask{1} << e)) J |= Mask{1} << sig[e];
    rank[I] = h.at(J);
  }
  return make_polymatroid(L.extended_ground, std::move(rank));
}

Polymatroid symmetrize(const Polymatroid& h, const BookLayout& L) {
  Polymatroid g1 = pullback(h, L.page_map(0));
  BookCheckReport rep = is_book_extension(h, g1, L);
  if (!rep.ok)
    throw std::invalid_argument("symmetrize: not a book extension (" + rep.detail + ")");
  const int n = L.pages;
  std::vector<int> proto = positions_in(L.base_ground.full_mask() & ~L.spine,
                                        L.base_ground.size());
  const std::size_t total = h.rank.size();
  // Orbit of I under page permutations = spine part + multiset of page traces.
  std::map<std::pair<Mask, std::vector<Mask>>, std::pair<Rat, long>> orbit;
  std::vector<std::pair<Mask, std::vector<Mask>>> keys(total);
  for (Mask I = 0; I < total; ++I) {
    std::vector<Mask> traces(n, 0);
    for (int i = 0; i < n; ++i)
      for (std::size_t k = 0; k < proto.size(); ++k)
        if (I & (Mask{1} << L.to_ext[i][proto[k]])) traces[i] |= Mask{1} << k;
    std::sort(traces.begin(), traces.end());
    keys[I] = {I & L.spine_ext, std::move(traces)};
    auto& slot = orbit[keys[I]];
    slot.first += h.at(I);
    slot.second += 1;
  }
  std::vector<Rat> rank(total);
  for (Mask I = 0; I < total; ++I) {
    const auto& slot = orbit[keys[I]];
    rank[I] = slot.first / Rat(slot.second);
  }
  return make_polymatroid(L.extended_ground, std::move(rank));
}

std::pair<Polymatroid, BookLayout> extend_over_singleton(const Polymatroid& g,
                                                         int a, int n) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("extend: no such element");
  if (n < 2) throw std::invalid_argument("extend: need at least two pages");
  BookLayout L = make_layout(g.ground, Mask{1} << a, n);
  Polymatroid sum = direct_sum(std::vector<Polymatroid>(n, g));
  std::vector<std::string> tgt;
  tgt.reserve(sum.ground.size());
  for (int i = 1; i <= n; ++i)
    for (int e = 0; e < g.n(); ++e)
      tgt.push_back(e == a ? g.ground.label(a)
                           : g.ground.label(e) + "_" + std::to_string(i));
  ElementMap psi = make_element_map(sum.ground, L.extended_ground, tgt);
  Polymatroid h0 = preimage_pullback(sum, psi);
  Rat t = Rat(n - 1) * g.at(Mask{1} << a);
  Polymatroid h = min_extend(h0, 0, t);  // spine element sits first
  return {std::move(h), std::move(L)};
}

std::pair<Polymatroid, BookLayout> extend_over_cosingleton(const Polymatroid& g,
                                                           int a, int n) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("extend: no such element");
  if (g.n() < 2) throw std::invalid_argument("extend: ground too small");
  if (n < 2) throw std::invalid_argument("extend: need at least two pages");
  Mask full = g.ground.full_mask();
  BookLayout L = make_layout(g.ground, full & ~(Mask{1} << a), n);

  // Tighten at every element, keeping the stages for the lifts back.
  std::vector<Polymatroid> stage{g};
  for (int e = 0; e < g.n(); ++e) stage.push_back(tighten(stage.back(), e));

  // Fully tight base: all twins of a collapse onto a.
  const int spine_count = popcount(L.spine_ext);
  std::vector<std::string> tgt;
  tgt.reserve(L.extended_ground.size());
  for (int e = 0; e < L.extended_ground.size(); ++e)
    tgt.push_back(e < spine_count ? L.extended_ground.label(e) : g.ground.label(a));
  ElementMap phi = make_element_map(L.extended_ground, g.ground, tgt);
  Polymatroid h = pullback(stage.back(), phi);

  for (int e = g.n() - 1; e >= 0; --e)
    h = lift_tight_extension(stage[e], h, L, e);
  return {std::move(h), std::move(L)};
}

Polymatroid tighten_extension(const Polymatroid& h, const Polymatroid& g,
                              const BookLayout& L, int a) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("tighten_extension: bad element");
  BookCheckReport rep = is_book_extension(h, g, L);
  if (!rep.ok)
    throw std::invalid_argument("tighten_extension: not an extension (" + rep.detail + ")");
  Mask full = g.ground.full_mask();
  Rat t = g.at(full) - g.at(full & ~(Mask{1} << a));
  if (L.spine & (Mask{1} << a)) return min_extend(h, L.to_ext[0][a], t);
  Polymatroid cur = h;
  for (int i = 0; i < L.pages; ++i) cur = min_extend(cur, L.to_ext[i][a], t);
  return cur;
}

Polymatroid lift_tight_extension(const Polymatroid& g, const Polymatroid& hp,
                                 const BookLayout& L, int a) {
  if (a < 0 || a >= g.n()) throw std::invalid_argument("lift: bad element");
  Mask full = g.ground.full_mask();
  Rat t = g.at(full) - g.at(full & ~(Mask{1} << a));
  BookCheckReport rep = is_book_extension(hp, tighten(g, a), L);
  if (!rep.ok)
    throw std::invalid_argument("lift: not an extension of the tightened base (" +
                                rep.detail + ")");
  if (t == 0) return hp;
  Polymatroid h = hp;
  if (L.spine & (Mask{1} << a)) {
    Mask abit = Mask{1} << L.to_ext[0][a];
    for (Mask I = 0; I < h.rank.size(); ++I)
      if (I & abit) h.rank[I] += t;
  } else {
    Mask twins = 0;
    for (int i = 0; i < L.pages; ++i) twins |= Mask{1} << L.to_ext[i][a];
    for (Mask I = 0; I < h.rank.size(); ++I)
      h.rank[I] += t * Rat(popcount(I & twins));
  }
  return h;
}

}  // namespace bookineq
