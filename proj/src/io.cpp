#include "bookineq/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bookineq {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument("polymatroid json: " + msg);
}

// parse() with duplicate-key detection; nlohmann keeps the last value of a
// repeated key, so repeats have to be caught during the event stream.
json parse_strict(const std::string& text) {
  std::vector<std::set<std::string>> scopes;
  json::parser_callback_t cb = [&](int /*depth*/, json::parse_event_t ev,
                                   json& part) {
    if (ev == json::parse_event_t::object_start) {
      scopes.emplace_back();
    } else if (ev == json::parse_event_t::object_end) {
      scopes.pop_back();
    } else if (ev == json::parse_event_t::key) {
      const auto key = part.get<std::string>();
      if (!scopes.back().insert(key).second) bad("duplicate key \"" + key + "\"");
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

Rat rank_value(const json& v, const std::string& key) {
  // dump() of an integer value is its exact decimal text, any magnitude.
  const std::string s = v.is_number_integer() || v.is_number_unsigned()
                            ? v.dump()
                            : v.is_string() ? v.get<std::string>()
                                            : std::string();
  if (s.empty()) bad("rank of \"" + key + "\" must be an integer or a \"p/q\" string");
  auto r = rat_from_string(s);
  if (!r) bad("bad rational \"" + s + "\" for \"" + key + "\"");
  return *r;
}

}  // namespace

Polymatroid polymatroid_from_json(const std::string& text) {
  const json j = parse_strict(text);
  if (!j.is_object()) bad("top level must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "ground" && key != "rank") bad("unexpected key \"" + key + "\"");
  if (!j.contains("ground") || !j["ground"].is_array())
    bad("missing \"ground\" array");
  if (!j.contains("rank") || !j["rank"].is_object())
    bad("missing \"rank\" object");

  std::vector<std::string> labels;
  for (const auto& v : j["ground"]) {
    if (!v.is_string()) bad("ground labels must be strings");
    labels.push_back(v.get<std::string>());
  }
  GroundSet gs;
  try {
    gs = GroundSet(std::move(labels));
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  if (gs.size() == 0) bad("ground set is empty");

  std::vector<Rat> rank(std::size_t{1} << gs.size(), Rat(0));
  std::vector<bool> seen(rank.size(), false);
  for (const auto& [key, val] : j["rank"].items()) {
    auto m = gs.parse_subset(key);
    if (!m) bad("key \"" + key + "\" is not a subset of the ground set");
    if (*m == 0) bad("the empty set is implicit and may not appear");
    if (seen[*m]) bad("subset \"" + gs.subset_to_string(*m) + "\" given twice");
    seen[*m] = true;
    rank[*m] = rank_value(val, key);
  }
  for (Mask m = 1; m <= gs.full_mask(); ++m)
    if (!seen[m]) bad("missing rank for \"" + gs.subset_to_string(m) + "\"");
  return make_polymatroid(std::move(gs), std::move(rank));
}

std::string polymatroid_to_json(const Polymatroid& g) {
  nlohmann::ordered_json j;
  j["ground"] = g.ground.labels();
  auto& rk = j["rank"] = nlohmann::ordered_json::object();
  std::vector<Mask> subsets;
  for (Mask m = 1; m <= g.ground.full_mask(); ++m) subsets.push_back(m);
  std::sort(subsets.begin(), subsets.end(), GradedLex{});
  for (Mask m : subsets) {
    const Rat& r = g.at(m);
    if (is_integral(r) && r.get_num().fits_slong_p())
      rk[g.ground.subset_to_string(m)] = static_cast<std::int64_t>(r.get_num().get_si());
    else
      rk[g.ground.subset_to_string(m)] = rat_to_string(r);
  }
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed on " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::string plot_csv(const std::vector<std::pair<Rat, Rat>>& rows) {
  std::ostringstream ss;
  ss << "y_over_x,z_over_x\n";
  for (const auto& [a, b] : rows)
    ss << rat_to_string(a) << "," << rat_to_string(b) << "\n";
  return ss.str();
}

}  // namespace bookineq
