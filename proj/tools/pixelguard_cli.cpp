// pixelguard: analyze click counts, simulate sessions, and produce sweep CSVs.
//
// Exit codes: 0 ok, 1 invalid input, 2 security abort.  Errors are printed
// to stderr as one JSON object.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pixelguard/eve_bound.hpp"
#include "pixelguard/json_io.hpp"
#include "pixelguard/monte_carlo.hpp"
#include "pixelguard/sweep.hpp"

namespace pg = pixelguard;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kAbort = 2;

int report_error(const std::string& kind, const std::string& message, const std::string& reason = "") {
  pg::Json j;
  j["error"] = kind;
  if (!reason.empty()) j["reason"] = reason;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return kind == "security-abort" ? kAbort : kInvalid;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

const std::map<std::string, pg::PixelOrder> kOrders{{"second-dominant", pg::PixelOrder::second_dominant},
                                                     {"first-dominant", pg::PixelOrder::first_dominant}};
const std::map<std::string, pg::Objective> kObjectives{{"clicks", pg::Objective::clicks},
                                                       {"events", pg::Objective::events}};

struct SolverFlags {
  std::string orientation = "second-dominant";
  std::string objective = "clicks";

  void attach(CLI::App* cmd) {
    cmd->add_option("--orientation", orientation, "Pixel that fires more often on faked states")
        ->check(CLI::IsMember({"second-dominant", "first-dominant"}));
    cmd->add_option("--objective", objective, "Count Eve's knowledge per click or per detection event")
        ->check(CLI::IsMember({"clicks", "events"}));
  }
  [[nodiscard]] pg::SolverOptions options() const { return {kOrders.at(orientation), kObjectives.at(objective)}; }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "' in list");
    }
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// --- analyze -----------------------------------------------------------------

struct AnalyzeArgs {
  std::string counts_file, params_file, output;
  double epsilon = 1e-10;
  std::optional<double> imbalance_threshold;
  bool symmetric = false;
  SolverFlags solver;
};

int run_analyze(const AnalyzeArgs& a) {
  const pg::ClickCounts counts = pg::counts_from_any_json(pg::read_json_file(a.counts_file));
  const pg::SystemParams params = pg::system_params_from_json(pg::read_json_file(a.params_file));
  const pg::FiniteKeyParams fk{counts.n_pulses, a.epsilon};
  fk.validate();
  const double p_e = pg::compute_p_e(params);
  const double threshold =
      a.imbalance_threshold ? *a.imbalance_threshold : pg::default_imbalance_threshold(counts, params.alpha);
  pg::FiniteKeyOptions opt;
  opt.solver = a.solver.options();
  opt.symmetric = a.symmetric;
  const pg::EveInfoBound bound = pg::finite_key_bound(counts, fk, p_e, params.alpha, threshold, opt);
  const pg::FiniteKeyCorner corner = pg::finite_key_corner(counts, fk);

  pg::Json report;
  report["i_e_upper"] = bound.value;
  report["regime"] = pg::to_string(bound.regime);
  report["optimum"] = bound.optimum ? pg::to_json(*bound.optimum) : pg::Json(nullptr);
  report["residuals"] = bound.residuals;
  report["active"] = bound.active;
  if (!bound.note.empty()) report["note"] = bound.note;
  report["corner"] = {{"p_s1_lower", corner.p_s1_lower},
                      {"p_s2_lower", corner.p_s2_lower},
                      {"p_c_upper", corner.p_c_upper}};
  report["total_failure_probability"] = 3.0 * a.epsilon;
  report["inputs"] = {{"counts", pg::to_json(counts)},
                      {"params", pg::to_json(params)},
                      {"epsilon", a.epsilon},
                      {"imbalance_threshold", threshold},
                      {"p_e", p_e},
                      {"orientation", a.solver.orientation},
                      {"objective", a.solver.objective},
                      {"symmetric", a.symmetric}};
  write_output(a.output, report.dump(2) + "\n");
  return kOk;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string params_file, attack_file, output;
  std::int64_t n_pulses = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::int64_t fast_path_above = pg::SimOptions{}.fast_path_above;
};

int run_simulate(const SimulateArgs& a) {
  const pg::SystemParams params = pg::system_params_from_json(pg::read_json_file(a.params_file));
  const pg::AttackStrategy attack = pg::attack_strategy_from_json(pg::read_json_file(a.attack_file));
  const pg::SimOutcome out = pg::simulate(attack, pg::compute_p_e(params), params.alpha, a.n_pulses, a.seed,
                                          {a.workers, a.fast_path_above});
  write_output(a.output, pg::to_json(out).dump(2) + "\n");
  return kOk;
}

// --- sweep-distance ----------------------------------------------------------

struct SweepArgs {
  std::string params_file, output, at_list = "1,60,3600,86400";
  double d_min = 0.0, d_max = 300.0, step = 5.0, epsilon = 1e-10;
  unsigned workers = 1;
  SolverFlags solver;
  std::string mc_output;
  std::uint64_t seed = 1;
  int mc_every = 10;
};

int run_sweep_distance(const SweepArgs& a) {
  const pg::SystemParams params = pg::system_params_from_json(pg::read_json_file(a.params_file));
  pg::DistanceSweep sw;
  sw.acquisition_times_s = parse_list(a.at_list);
  sw.d_min = a.d_min;
  sw.d_max = a.d_max;
  sw.step = a.step;
  sw.epsilon = a.epsilon;
  sw.workers = a.workers;
  sw.solver = a.solver.options();
  const auto rows = pg::sweep_distance(params, sw);
  write_output(a.output, pg::distance_csv(rows));

  if (!a.mc_output.empty()) {
    // Replace the expected counts of every mc_every-th row by simulated ones.
    if (a.mc_every < 1) throw std::invalid_argument("--mc-every must be >= 1");
    std::string csv = "distance_km,acquisition_time_s,n_pulses,i_e_upper,i_e_upper_mc,status_mc\n";
    for (std::size_t i = 0; i < rows.size(); i += static_cast<std::size_t>(a.mc_every)) {
      const auto& r = rows[i];
      pg::SystemParams p = params;
      p.distance_km = r.distance_km;
      const pg::AttackStrategy honest{0.0, pg::honest_pixel_prob(p), {pg::FakedState{1.0, 0.0, 0.0}}};
      const pg::SimOutcome sim = pg::simulate(honest, pg::compute_p_e(p), p.alpha, r.n_pulses, a.seed + i,
                                              {a.workers, pg::SimOptions{}.fast_path_above});
      double mc = 1.0;
      std::string status = "ok";
      if (sim.counts.n_s1 + sim.counts.n_s2 == 0) {
        status = "no-detections";
      } else {
        try {
          pg::FiniteKeyOptions opt;
          opt.solver = sw.solver;
          opt.symmetric = p.alpha == 0.0;
          mc = pg::finite_key_bound(sim.counts, {r.n_pulses, a.epsilon}, pg::compute_p_e(p), p.alpha,
                                    pg::default_imbalance_threshold(sim.counts, p.alpha), opt)
                   .value;
        } catch (const pg::SecurityAbort& e) {
          status = e.reason_name();
        }
      }
      csv += pg::format_number(r.distance_km) + ',' + pg::format_number(r.acquisition_time_s) + ',' +
             std::to_string(r.n_pulses) + ',' + pg::format_number(r.i_e_upper) + ',' + pg::format_number(mc) +
             ',' + status + '\n';
    }
    write_output(a.mc_output, csv);
  }
  return kOk;
}

// --- sweep-ratio -------------------------------------------------------------

struct RatioArgs {
  std::optional<double> p_e;
  std::string params_file, output;
  double r_min = 1.0, r_max = 10.0, step = 0.1;
};

int run_sweep_ratio(const RatioArgs& a) {
  double p_e = 0.0;
  if (a.p_e && !a.params_file.empty()) throw std::invalid_argument("give either --p-e or --params, not both");
  if (a.p_e) {
    p_e = *a.p_e;
  } else if (!a.params_file.empty()) {
    p_e = pg::compute_p_e(pg::system_params_from_json(pg::read_json_file(a.params_file)));
  } else {
    throw std::invalid_argument("sweep-ratio needs --p-e or --params");
  }
  write_output(a.output, pg::ratio_csv(pg::sweep_ratio(p_e, a.r_min, a.r_max, a.step)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eavesdropper information bounds for two-pixel detectors under blinding attacks"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Finite-key bound on Eve's information from observed counts");
  an->add_option("--counts", analyze.counts_file, "ClickCounts or simulate output JSON")->required();
  an->add_option("--params", analyze.params_file, "SystemParams JSON")->required();
  an->add_option("--epsilon", analyze.epsilon, "Failure probability per estimated quantity")->capture_default_str();
  an->add_option("--imbalance-threshold", analyze.imbalance_threshold,
                 "Abort if |p_s1 - p_s2| exceeds this (default: 2 alpha p_B + 5 sigma)");
  an->add_flag("--symmetric", analyze.symmetric, "Use the closed form (alpha must be 0)");
  an->add_option("--output,-o", analyze.output, "Write the report here instead of stdout");
  analyze.solver.attach(an);

  SimulateArgs sim;
  auto* si = app.add_subcommand("simulate", "Seeded pulse-level simulation");
  si->add_option("--params", sim.params_file, "SystemParams JSON")->required();
  si->add_option("--attack", sim.attack_file, "AttackStrategy JSON")->required();
  si->add_option("--n-pulses", sim.n_pulses, "Pulses to simulate")->required()->check(CLI::PositiveNumber);
  si->add_option("--seed", sim.seed, "RNG seed")->required();
  si->add_option("--workers", sim.workers, "Threads")->capture_default_str()->check(CLI::PositiveNumber);
  si->add_option("--fast-path-above", sim.fast_path_above, "Multinomial sampling above this pulse count")
      ->capture_default_str();
  si->add_option("--output,-o", sim.output, "Write JSON here instead of stdout");

  SweepArgs sweep;
  auto* sd = app.add_subcommand("sweep-distance", "Finite-key bound versus channel length (CSV)");
  sd->add_option("--params", sweep.params_file, "SystemParams JSON (distance_km is ignored)")->required();
  sd->add_option("--at", sweep.at_list, "Comma-separated acquisition times in seconds")->capture_default_str();
  sd->add_option("--d-min", sweep.d_min, "First distance (km)")->capture_default_str();
  sd->add_option("--d-max", sweep.d_max, "Last distance (km)")->capture_default_str();
  sd->add_option("--step", sweep.step, "Distance step (km)")->capture_default_str();
  sd->add_option("--epsilon", sweep.epsilon, "Failure probability per estimated quantity")->capture_default_str();
  sd->add_option("--workers", sweep.workers, "Threads")->capture_default_str()->check(CLI::PositiveNumber);
  sd->add_option("--monte-carlo", sweep.mc_output, "Also write a simulated cross-check CSV to this file");
  sd->add_option("--seed", sweep.seed, "Seed for --monte-carlo")->capture_default_str();
  sd->add_option("--mc-every", sweep.mc_every, "Cross-check every k-th row")->capture_default_str();
  sd->add_option("--output,-o", sweep.output, "Write CSV here instead of stdout");
  sweep.solver.attach(sd);

  RatioArgs ratio;
  auto* sr = app.add_subcommand("sweep-ratio", "Asymptotic symmetric bound versus r (CSV)");
  sr->add_option("--p-e", ratio.p_e, "Faked-state detectability p_E");
  sr->add_option("--params", ratio.params_file, "Derive p_E from SystemParams JSON");
  sr->add_option("--r-min", ratio.r_min, "First r (>= 1)")->capture_default_str();
  sr->add_option("--r-max", ratio.r_max, "Last r")->capture_default_str();
  sr->add_option("--step", ratio.step, "Step in r")->capture_default_str();
  sr->add_option("--output,-o", ratio.output, "Write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (an->parsed()) return run_analyze(analyze);
    if (si->parsed()) return run_simulate(sim);
    if (sd->parsed()) return run_sweep_distance(sweep);
    if (sr->parsed()) return run_sweep_ratio(ratio);
  } catch (const pg::SecurityAbort& e) {
    return report_error("security-abort", e.what(), e.reason_name());
  } catch (const std::invalid_argument& e) {
    return report_error("invalid-input", e.what());
  } catch (const std::exception& e) {
    return report_error("invalid-input", e.what());
  }
  return kInvalid;
}
