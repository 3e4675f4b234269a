#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bookineq/core.hpp"
#include "bookineq/ops.hpp"

namespace bookineq {

// Layout of an n-page book over a spine: the base ground splits into spine S
// and page prototype P; page i carries a twin x_i of every x in P, spine
// labels are shared. Extended ground order: spine block first (base order),
// then page blocks 1..n.
struct BookLayout {
  GroundSet base_ground;
  Mask spine = 0;  // within base_ground; non-empty, proper
  int pages = 0;
  GroundSet extended_ground;
  // to_ext[i][base index] -> extended index; spine columns identical across
  // pages, page columns give the twins.
  std::vector<std::vector<int>> to_ext;
  Mask spine_ext = 0;

  Mask page_mask(int i) const;           // P_i within extended_ground
  ElementMap page_map(int i) const;      // phi_i : base -> extended
  Mask embed(int i, Mask base_subset) const;  // phi_i applied to a subset
};

BookLayout make_layout(const GroundSet& base, Mask spine, int pages);

// Layout induced on spine + a subset of the pages (restriction keeps the
// original twin labels; pages renumber in the order given).
BookLayout sub_layout(const BookLayout& L, const std::vector<int>& pages_kept);

struct BookCheckReport {
  bool ok = true;
  std::string detail;  // e.g. "pullback page 2" or "independence {1}|{2,3}"
};

// h is an n-page book extension of g: every page pulls back to g and all
// disjoint non-empty page-index sets are independent over the spine. The full
// pairwise family is checked, not just singleton pairs.
BookCheckReport is_book_extension(const Polymatroid& h, const Polymatroid& g,
                                  const BookLayout& L);

using PagePermutation = std::vector<int>;  // 0-based permutation of pages

// (pi h)(I) = h(sigma_pi(I)) where sigma_pi sends page i's twins to page
// pi^{-1}(i)'s; book extensions stay book extensions.
Polymatroid page_permute(const Polymatroid& h, const BookLayout& L,
                         const PagePermutation& pi);

// Group average over all page permutations, computed orbit-wise: the result
// rank of I depends only on I's spine part and multiset of page traces.
// Throws if h is not a book extension of its own first-page pullback.
Polymatroid symmetrize(const Polymatroid& h, const BookLayout& L);

// n-page extension over the singleton spine {a}: sum of n copies, copies of a
// collapsed, then the minimum construction with t = (n-1) g(a).
std::pair<Polymatroid, BookLayout> extend_over_singleton(const Polymatroid& g,
                                                         int a, int n);

// n-page extension over the co-singleton spine N - {a}: tighten everywhere,
// pull back along a_i -> a, then lift the tightenings back in reverse order.
std::pair<Polymatroid, BookLayout> extend_over_cosingleton(const Polymatroid& g,
                                                           int a, int n);

// Turns an n-page extension of g into one of tighten(g, a): a single minimum
// construction at a spine a, the iterated one over the n twins of a page a.
Polymatroid tighten_extension(const Polymatroid& h, const Polymatroid& g,
                              const BookLayout& L, int a);

// Inverse of tighten_extension: given an extension h' of tighten(g, a), add
// t = g(N) - g(N-a) per occurrence of a (spine) or per twin present (page).
Polymatroid lift_tight_extension(const Polymatroid& g, const Polymatroid& hp,
                                 const BookLayout& L, int a);

}  // namespace bookineq
