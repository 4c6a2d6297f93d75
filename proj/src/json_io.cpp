#include "pixelguard/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pixelguard {
namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void expect_object(const Json& j, const std::string& what) {
  if (!j.is_object()) fail(what + ": expected a JSON object");
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& what) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) fail(what + ": unknown field '" + key + "'");
}

double number(const Json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) fail(what + ": missing field '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) fail(what + ": field '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& what) {
  return j.contains(key) ? number(j, key, what) : fallback;
}

std::int64_t integer(const Json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) fail(what + ": missing field '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) fail(what + ": field '" + key + "' must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    fail(what + ": field '" + key + "' is out of range");
  return v.get<std::int64_t>();
}

}  // namespace

Json to_json(const SystemParams& p) {
  Json j;
  j["mu"] = p.mu;
  j["pulse_rate_hz"] = p.pulse_rate_hz;
  j["loss_db_per_km"] = p.loss_db_per_km;
  j["distance_km"] = p.distance_km;
  j["t_eve"] = p.t_eve;
  j["q"] = p.q;
  j["eta"] = p.eta;
  j["alpha"] = p.alpha;
  if (p.p_b_override) j["p_b_override"] = *p.p_b_override;
  return j;
}

Json to_json(const AttackStrategy& s) {
  Json j;
  j["p_a"] = s.p_a;
  j["p_b"] = s.p_b;
  Json list = Json::array();
  for (const auto& f : s.strategies) list.push_back({{"weight", f.weight}, {"p_d1", f.p_d1}, {"p_d2", f.p_d2}});
  j["strategies"] = list;
  return j;
}

Json to_json(const ClickCounts& c) {
  return {{"n_pulses", c.n_pulses}, {"n_s1", c.n_s1}, {"n_s2", c.n_s2}, {"n_c", c.n_c}};
}

Json to_json(const SimOutcome& o) {
  Json j;
  j["counts"] = to_json(o.counts);
  j["n_eve_known"] = o.n_eve_known;
  j["n_eve_events"] = o.n_eve_events;
  j["true_eve_info"] = o.true_eve_info;
  j["true_eve_event_info"] = o.true_eve_event_info;
  j["seed"] = o.seed;
  return j;
}

Json to_json(const EveInfoBound& b) {
  Json j;
  j["value"] = b.value;
  j["regime"] = to_string(b.regime);
  j["optimum"] = b.optimum ? to_json(*b.optimum) : Json(nullptr);
  j["residuals"] = b.residuals;
  j["unclamped_value"] = b.unclamped_value;
  j["active"] = b.active;
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

SystemParams system_params_from_json(const Json& j) {
  const std::string what = "params";
  expect_object(j, what);
  reject_unknown(j, {"mu", "pulse_rate_hz", "loss_db_per_km", "distance_km", "t_eve", "q", "eta", "alpha", "p_b_override"},
                 what);
  SystemParams p;
  p.mu = number(j, "mu", what);
  p.pulse_rate_hz = number(j, "pulse_rate_hz", what);
  p.loss_db_per_km = number(j, "loss_db_per_km", what);
  p.eta = number(j, "eta", what);
  p.distance_km = number_or(j, "distance_km", 0.0, what);
  p.t_eve = number_or(j, "t_eve", 1.0, what);
  p.q = number_or(j, "q", 0.5, what);
  p.alpha = number_or(j, "alpha", 0.0, what);
  if (j.contains("p_b_override") && !j.at("p_b_override").is_null())
    p.p_b_override = number(j, "p_b_override", what);
  p.validate();
  return p;
}

AttackStrategy attack_strategy_from_json(const Json& j) {
  const std::string what = "attack";
  expect_object(j, what);
  reject_unknown(j, {"p_a", "p_b", "strategies"}, what);
  AttackStrategy s;
  s.p_a = number(j, "p_a", what);
  s.p_b = number(j, "p_b", what);
  if (!j.contains("strategies") || !j.at("strategies").is_array()) fail(what + ": 'strategies' must be an array");
  for (const auto& item : j.at("strategies")) {
    const std::string w = what + ".strategies[]";
    expect_object(item, w);
    reject_unknown(item, {"weight", "p_d1", "p_d2"}, w);
    s.strategies.push_back({number(item, "weight", w), number(item, "p_d1", w), number(item, "p_d2", w)});
  }
  s.validate();
  return s;
}

ClickCounts click_counts_from_json(const Json& j) {
  const std::string what = "counts";
  expect_object(j, what);
  reject_unknown(j, {"n_pulses", "n_s1", "n_s2", "n_c"}, what);
  ClickCounts c{integer(j, "n_pulses", what), integer(j, "n_s1", what), integer(j, "n_s2", what),
                integer(j, "n_c", what)};
  c.validate();
  return c;
}

SimOutcome sim_outcome_from_json(const Json& j) {
  const std::string what = "simulation";
  expect_object(j, what);
  reject_unknown(j, {"counts", "n_eve_known", "n_eve_events", "true_eve_info", "true_eve_event_info", "seed"}, what);
  if (!j.contains("counts")) fail(what + ": missing field 'counts'");
  SimOutcome o;
  o.counts = click_counts_from_json(j.at("counts"));
  o.n_eve_known = integer(j, "n_eve_known", what);
  o.n_eve_events = j.contains("n_eve_events") ? integer(j, "n_eve_events", what) : 0;
  o.true_eve_info = number(j, "true_eve_info", what);
  o.true_eve_event_info = number_or(j, "true_eve_event_info", 0.0, what);
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
    fail(what + ": 'seed' must be a non-negative integer");
  o.seed = j.at("seed").get<std::uint64_t>();
  const std::int64_t clicks = o.counts.n_s1 + o.counts.n_s2;
  if (o.n_eve_known < 0 || o.n_eve_known > clicks) fail(what + ": n_eve_known must be in [0, n_s1 + n_s2]");
  const double expect = clicks > 0 ? static_cast<double>(o.n_eve_known) / static_cast<double>(clicks) : 0.0;
  if (std::abs(expect - o.true_eve_info) > 1e-12) fail(what + ": true_eve_info disagrees with the counts");
  return o;
}

ClickCounts counts_from_any_json(const Json& j) {
  if (j.is_object() && j.contains("counts")) return sim_outcome_from_json(j).counts;
  return click_counts_from_json(j);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace pixelguard
