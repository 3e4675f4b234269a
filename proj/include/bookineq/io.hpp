#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bookineq/core.hpp"

namespace bookineq {

// JSON polymatroid format:
//   {"ground": ["a","b",...], "rank": {"a": 1, "ab": "3/2", ...}}
// Every non-empty subset appears exactly once, keyed by its concatenated
// label string; the empty set is implicit with rank 0. Values are integers
// or "p/q" strings. Rejects duplicate keys (including two spellings of the
// same subset), unknown labels, missing subsets, and non-exact numbers.
// Structural only: axiom checking is validate_polymatroid's job.
Polymatroid polymatroid_from_json(const std::string& text);

// Inverse of polymatroid_from_json; subsets in graded-lex order, integral
// ranks as JSON numbers and the rest as "p/q" strings.
std::string polymatroid_to_json(const Polymatroid& g);

// Whole-file helpers; throw std::runtime_error carrying the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// CSV for coefficient-ratio pairs: header "y_over_x,z_over_x", one row per
// pair, fields exact ("p" or "p/q", never floating point).
std::string plot_csv(const std::vector<std::pair<Rat, Rat>>& rows);

}  // namespace bookineq
