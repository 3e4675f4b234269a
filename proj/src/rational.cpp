#include "bookineq/rational.hpp"

#include <stdexcept>

namespace bookineq {

std::optional<Rat> rat_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // mpq's own parser accepts whitespace and bases we don't want; keep it strict.
  std::size_t slash = s.find('/');
  auto is_int = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  try {
    if (slash == std::string::npos) {
      if (!is_int(s)) return std::nullopt;
      return Rat(mpz_class(s), 1);
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) return std::nullopt;
    mpz_class d(den);
    if (d == 0) return std::nullopt;
    Rat r(mpz_class(num), d);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rat scale_to_coprime_integers(std::vector<Rat>& v) {
  mpz_class den_lcm = 1, num_gcd = 0;
  for (const Rat& r : v) {
    if (r == 0) continue;
    mpz_class l;
    mpz_lcm(l.get_mpz_t(), den_lcm.get_mpz_t(), r.get_den().get_mpz_t());
    den_lcm = l;
  }
  for (const Rat& r : v) {
    if (r == 0) continue;
    mpz_class scaled = r.get_num() * (den_lcm / r.get_den());
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
    num_gcd = g;
  }
  if (num_gcd == 0) return 1;
  Rat factor(den_lcm, num_gcd);
  factor.canonicalize();
  for (Rat& r : v) r *= factor;
  return factor;
}

}  // namespace bookineq
