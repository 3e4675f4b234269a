#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace bookineq {

using Rat = mpq_class;

// Accepts "p", "-p", "p/q"; canonicalizes sign into the numerator.
std::optional<Rat> rat_from_string(const std::string& s);

// "p" for integers, "p/q" otherwise.
std::string rat_to_string(const Rat& r);

inline bool is_integral(const Rat& r) { return r.get_den() == 1; }

// Scales a vector of rationals to coprime integers (in place), preserving signs.
// Zero vector is left untouched. Returns the applied positive factor.
Rat scale_to_coprime_integers(std::vector<Rat>& v);

}  // namespace bookineq
