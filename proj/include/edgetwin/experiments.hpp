#pragma once
// Experiment drivers behind the CLI subcommands: the single-AP offloading
// comparison, digital-twin training, and multi-scheme association
// comparisons. All outputs are plain CSV with a provenance header line.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "edgetwin/baselines.hpp"
#include "edgetwin/config.hpp"
#include "edgetwin/digital_twin.hpp"
#include "edgetwin/learner.hpp"
#include "edgetwin/parallel.hpp"

#ifndef EDGETWIN_BUILD_ID
#define EDGETWIN_BUILD_ID "dev"
#endif

namespace edgetwin {

inline std::string csv_preamble(const std::string& command, std::uint64_t seed) {
  return "# edgetwin-csv/1 cmd=" + command + " seed=" + std::to_string(seed) +
         " build=" + EDGETWIN_BUILD_ID;
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Settings shared by the subcommands, read from a key-value config file.

struct Settings {
  GenerationConfig gen;
  ExplorationConfig expl;
  SearchTolerances tol;
  std::uint64_t seed = 1;
  int workers = 1;
  // solve-ap
  std::vector<int> k_sweep{5, 8, 13};  // per-class user counts (K_u = K_b)
  int draws = 200;
  // train
  std::int64_t epochs = 1000;
  int hidden_width = 100;
  int hidden_layers = 4;
  double learning_rate = 0.001;
  std::size_t memory_capacity = 1024;
  std::vector<DriftEvent> drift;
  // compare / sweep
  std::string checkpoint;
  int test_scenarios = 100;
  long exhaustive_cap = 4096;
  CoalitionOptions game;
  std::vector<std::pair<double, double>> ratio_sweep;
};

inline Settings load_settings(const KeyValueConfig& kv) {
  Settings s;
  GenerationConfig& g = s.gen;
  g.num_aps = static_cast<int>(kv.get_int("aps", g.num_aps));
  g.num_urllc = static_cast<int>(kv.get_int("urllc_users", g.num_urllc));
  g.num_dt = static_cast<int>(kv.get_int("dt_users", g.num_dt));
  const auto ratio = parse_ratio(kv.get_string("ratio", "5:5"));
  g.ratio_region1 = ratio.first;
  g.ratio_region2 = ratio.second;
  g.ap_spacing_m = kv.get_double("ap_spacing_m", g.ap_spacing_m);
  g.region_radius_m = kv.get_double("region_radius_m", g.region_radius_m);
  g.min_distance_m = kv.get_double("min_distance_m", g.min_distance_m);
  g.shadowing_std_db = kv.get_double("shadowing_std_db", g.shadowing_std_db);
  g.lambda_urllc_per_s = kv.get_double("lambda_urllc_per_s", g.lambda_urllc_per_s);
  g.lambda_dt_min_per_s = kv.get_double("lambda_dt_min_per_s", g.lambda_dt_min_per_s);
  g.lambda_dt_max_per_s = kv.get_double("lambda_dt_max_per_s", g.lambda_dt_max_per_s);
  g.urllc_packet_bytes = kv.get_double("urllc_packet_bytes", g.urllc_packet_bytes);
  g.dt_packet_min_kb = kv.get_double("dt_packet_min_kb", g.dt_packet_min_kb);
  g.dt_packet_max_kb = kv.get_double("dt_packet_max_kb", g.dt_packet_max_kb);
  g.cycles_per_byte = kv.get_double("cycles_per_byte", g.cycles_per_byte);
  g.k0 = kv.get_double("k0", g.k0);
  g.max_local_cycles_per_slot =
      kv.get_double("cmax_cycles_per_slot", g.max_local_cycles_per_slot);

  g.radio.slot_s = kv.get_double("ts_ms", 0.125) * 1e-3;
  g.radio.subcarrier_hz = kv.get_double("w_khz", 120.0) * 1e3;
  g.radio.noise_w_per_hz = std::pow(10.0, (kv.get_double("n0_dbm_hz", -174.0) - 30.0) / 10.0);
  g.radio.snr_loss = kv.get_double("phi", 1.0);
  g.radio.max_subcarriers = static_cast<int>(kv.get_int("nmax", 128));
  g.radio.max_tx_power_w = std::pow(10.0, (kv.get_double("pmax_dbm", 23.0) - 30.0) / 10.0);
  g.server_cycles_per_slot = kv.get_double("s_ghz", 1.6) * 1e9 * g.radio.slot_s;
  const double dmax_ms = kv.get_double("dmax_ms", 1.0);
  g.qos.max_delay_slots = static_cast<int>(std::lround(dmax_ms * 1e-3 / g.radio.slot_s));
  if (g.qos.max_delay_slots < 2) throw ConfigError("dmax_ms must span at least 2 slots");
  g.qos.max_violation_prob = kv.get_double("eps_max", 1e-7);

  s.tol.eta = kv.get_double("sigma_eta", s.tol.eta);
  s.tol.subcarriers = kv.get_double("sigma_n", s.tol.subcarriers);
  s.tol.offload = kv.get_double("sigma_x", s.tol.offload);

  s.expl.one_step_count = static_cast<int>(kv.get_int("mu_os", -1));
  s.expl.random_count = static_cast<int>(kv.get_int("mu_re", 20));
  s.expl.batch_size = static_cast<int>(kv.get_int("batch", 128));
  s.expl.loss_threshold = kv.get_double("loss_threshold", 0.1);

  s.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  s.workers = static_cast<int>(kv.get_int("workers", 1));
  s.draws = static_cast<int>(kv.get_int("draws", s.draws));
  if (kv.has("k_sweep")) {
    s.k_sweep.clear();
    for (const auto& item : split_list(kv.get_string("k_sweep", ""))) {
      try {
        s.k_sweep.push_back(std::stoi(item));
      } catch (...) {
        throw ConfigError("bad k_sweep entry: " + item);
      }
    }
    if (s.k_sweep.empty()) throw ConfigError("k_sweep is empty");
  }
  s.epochs = kv.get_int("epochs", s.epochs);
  s.hidden_width = static_cast<int>(kv.get_int("hidden_width", s.hidden_width));
  s.hidden_layers = static_cast<int>(kv.get_int("hidden_layers", s.hidden_layers));
  s.learning_rate = kv.get_double("learning_rate", s.learning_rate);
  s.memory_capacity = static_cast<std::size_t>(kv.get_int("memory_capacity", 1024));
  if (kv.has("drift")) {
    for (const auto& item : split_list(kv.get_string("drift", ""), ';')) {
      const auto [r, epoch] = parse_drift(item);
      s.drift.push_back(DriftEvent{epoch, r.first, r.second});
    }
  }
  s.checkpoint = kv.get_string("checkpoint", "");
  s.test_scenarios = static_cast<int>(kv.get_int("test_scenarios", s.test_scenarios));
  s.exhaustive_cap = kv.get_int("exhaustive_cap", s.exhaustive_cap);
  s.game.max_iters = static_cast<int>(kv.get_int("game_max_iters", s.game.max_iters));
  s.game.stall_limit = static_cast<int>(kv.get_int("game_stall_limit", s.game.stall_limit));
  if (kv.has("ratio_sweep")) {
    for (const auto& item : split_list(kv.get_string("ratio_sweep", ""))) {
      s.ratio_sweep.push_back(parse_ratio(item));
    }
  }
  validate(s.gen);
  return s;
}

// ---------------------------------------------------------------------------
// solve-ap: proposed vs all-MEC vs all-local on seeded single-AP draws.

struct SolveApRow {
  int k_per_class = 0;
  int draw = 0;
  std::string scheme;
  double eta = 0.0;
  bool feasible = false;
};

inline ApProblem single_ap_problem(const Scenario& sc, const SearchTolerances& tol) {
  ApProblem prob;
  prob.ap_index = 0;
  prob.radio = sc.radio;
  prob.radio.max_subcarriers = sc.aps.at(0).max_subcarriers;
  prob.server_cycles_per_slot = sc.aps.at(0).server_cycles_per_slot;
  prob.qos = sc.qos;
  prob.tol = tol;
  for (const auto& u : sc.users) {
    (u.service_class == ServiceClass::urllc ? prob.urllc_users : prob.dt_users).push_back(u);
  }
  return prob;
}

inline std::vector<SolveApRow> run_solve_ap_experiment(const Settings& s) {
  std::vector<SolveApRow> rows;
  for (int k : s.k_sweep) {
    GenerationConfig gen = s.gen;
    gen.num_aps = 1;
    gen.num_urllc = k;
    gen.num_dt = k;
    std::vector<std::vector<SolveApRow>> per_draw(static_cast<size_t>(s.draws));
    parallel_for(static_cast<size_t>(s.draws), s.workers, [&](std::size_t d) {
      std::mt19937_64 rng = rng_substream(s.seed, (static_cast<std::uint64_t>(k) << 32) | d);
      const Scenario sc = generate_scenario(gen, rng);
      const ApProblem prob = single_ap_problem(sc, s.tol);
      const ApSolution proposed = solve_ap(prob);
      const ApSolution mec = all_mec_policy(prob, proposed);
      const ApSolution local = all_local_policy(prob);
      per_draw[d] = {
          {k, static_cast<int>(d), "proposed", proposed.eta_star, proposed.feasible},
          {k, static_cast<int>(d), "mec", mec.eta_star, mec.feasible},
          {k, static_cast<int>(d), "local", local.eta_star, local.feasible}};
    });
    for (auto& batch : per_draw) {
      for (auto& r : batch) rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline void write_solve_ap_csv(const std::string& path, const Settings& s,
                               const std::vector<SolveApRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << csv_preamble("solve-ap", s.seed) << "\n";
  os << "k_per_class,draw,scheme,eta_j_per_bit,feasible\n";
  for (const auto& r : rows) {
    os << r.k_per_class << ',' << r.draw << ',' << r.scheme << ','
       << format_double(r.eta) << ',' << (r.feasible ? 1 : 0) << "\n";
  }
}

// ---------------------------------------------------------------------------
// train: the learning loop with metrics CSV and a checkpoint.

inline void write_metrics_header(std::ofstream& os, const Settings& s) {
  os << csv_preamble("train", s.seed) << "\n";
  os << "epoch,loss,q_best,q_exploit,feasible_fraction,drift_flag\n";
}

inline void append_metrics_row(std::ofstream& os, const EpochMetrics& m) {
  os << m.epoch << ',' << format_double(m.loss) << ',' << format_double(m.q_best) << ','
     << format_double(m.q_exploit) << ',' << format_double(m.feasible_fraction) << ','
     << (m.drift ? 1 : 0) << "\n";
}

struct TrainResult {
  LearnerState state;
  std::int64_t epochs_run = 0;
};

inline TrainResult run_train(const Settings& s, const std::string& metrics_path,
                             const std::string& checkpoint_path,
                             const std::string& resume_path = "") {
  LearnerRunConfig cfg;
  cfg.generation = s.gen;
  cfg.exploration = s.expl;
  cfg.epochs = s.epochs;
  cfg.seed = s.seed;
  cfg.tol = s.tol;
  cfg.workers = s.workers;
  cfg.drift_schedule = s.drift;

  const int num_users = s.gen.num_urllc + s.gen.num_dt;
  LearnerState st;
  if (!resume_path.empty()) {
    const Checkpoint ck = load_checkpoint(resume_path);
    st.params = ck.params;
    st.adam = ck.adam;
    st.epoch = ck.epoch;
    st.memory = ReplayMemory(s.memory_capacity);
    st.num_users = num_users;
    st.num_aps = s.gen.num_aps;
  } else {
    std::mt19937_64 init_rng = rng_substream(s.seed, 0x171);
    st = make_learner(num_users, s.gen.num_aps, init_rng, s.hidden_width, s.hidden_layers,
                      s.learning_rate, s.memory_capacity);
  }

  std::ofstream metrics(metrics_path);
  if (!metrics) throw std::runtime_error("cannot open output file: " + metrics_path);
  write_metrics_header(metrics, s);
  TrainResult res;
  res.state = run_learning(cfg, std::move(st),
                           [&](const EpochMetrics& m, const Scenario&, const LearnerState&) {
                             append_metrics_row(metrics, m);
                           });
  res.epochs_run = s.epochs;
  if (!checkpoint_path.empty()) {
    save_checkpoint(checkpoint_path,
                    Checkpoint{res.state.params, res.state.adam, res.state.epoch});
  }
  return res;
}

// ---------------------------------------------------------------------------
// compare / sweep: association schemes on a common set of test scenarios.

/// One DL decision: exploit the network output and optionally explore around
/// it, returning the best feasible candidate's objective.
inline SelectionResult dl_decide(const Scenario& sc, const MlpParams& params,
                                 const ExplorationConfig& expl, std::mt19937_64& rng,
                                 const SearchTolerances& tol, int workers) {
  const std::vector<double> features = dnn_input_features(sc);
  const std::vector<double> beta_hat = forward(params, features);
  const int num_users = static_cast<int>(sc.users.size());
  const int num_aps = static_cast<int>(sc.aps.size());
  std::vector<AssociationScheme> candidates;
  candidates.push_back(exploit_map(beta_hat, num_users, num_aps));
  for (auto& s : one_step_neighbors(candidates.front(), expl.one_step_count, rng)) {
    candidates.push_back(std::move(s));
  }
  for (auto& s : random_schemes(expl.random_count, num_users, num_aps, rng)) {
    candidates.push_back(std::move(s));
  }
  return select_best(sc, candidates, tol, workers);
}

struct SchemeStats {
  std::string scheme;
  double mean_eta = std::numeric_limits<double>::infinity();  // over common feasible set
  double pct_of_nearest = std::numeric_limits<double>::quiet_NaN();
  int feasible_count = 0;
  double mean_objective_evaluations = 0.0;
};

struct CompareResult {
  std::vector<SchemeStats> stats;
  int scenarios = 0;
  int common_feasible = 0;
};

/// Evaluates DL (when params given), coalition game, nearest-AP, highest-gain
/// and (when within cap) exhaustive search on the same scenario set. Means
/// are taken over scenarios where every evaluated scheme is feasible, so the
/// comparison is apples to apples; feasible counts are reported per scheme.
inline CompareResult run_compare(const Settings& s, const GenerationConfig& gen,
                                 const MlpParams* dl_params) {
  const int T = s.test_scenarios;
  struct Cell {
    double q = std::numeric_limits<double>::infinity();
    double evals = 0.0;
  };
  std::vector<std::string> schemes;
  if (dl_params) schemes.push_back("dl");
  schemes.insert(schemes.end(), {"game", "nearest_ap", "highest_alpha"});
  double space = 1.0;
  for (size_t k = 0; k < static_cast<size_t>(gen.num_urllc + gen.num_dt); ++k) {
    space *= gen.num_aps;
  }
  const bool with_exhaustive = space <= static_cast<double>(s.exhaustive_cap);
  if (with_exhaustive) schemes.push_back("exhaustive");

  std::vector<std::vector<Cell>> table(schemes.size(), std::vector<Cell>(static_cast<size_t>(T)));
  parallel_for(static_cast<size_t>(T), s.workers, [&](std::size_t t) {
    std::mt19937_64 scen_rng = rng_substream(s.seed, 0x7e57000 + t);
    const Scenario sc = generate_scenario(gen, scen_rng);
    size_t row = 0;
    if (dl_params) {
      std::mt19937_64 dl_rng = rng_substream(s.seed, 0xd1000 + t);
      const SelectionResult r = dl_decide(sc, *dl_params, s.expl, dl_rng, s.tol, 1);
      table[row][t] = {r.q_best, static_cast<double>(r.objective_evaluations)};
      ++row;
    }
    {
      std::mt19937_64 game_rng = rng_substream(s.seed, 0x9a3e000 + t);
      const SearchOutcome g = coalition_game(sc, game_rng, s.game, s.tol);
      table[row][t] = {g.q, static_cast<double>(g.objective_evaluations)};
      ++row;
    }
    table[row][t] = {evaluate_association(sc, nearest_ap(sc), s.tol).q, 1.0};
    ++row;
    table[row][t] = {evaluate_association(sc, highest_alpha(sc), s.tol).q, 1.0};
    ++row;
    if (with_exhaustive) {
      const auto ex = exhaustive_optimal(sc, s.tol, s.exhaustive_cap, 1);
      table[row][t] = {ex->q, static_cast<double>(ex->objective_evaluations)};
    }
  });

  CompareResult res;
  res.scenarios = T;
  std::vector<bool> common(static_cast<size_t>(T), true);
  for (size_t i = 0; i < schemes.size(); ++i) {
    for (int t = 0; t < T; ++t) {
      if (!std::isfinite(table[i][static_cast<size_t>(t)].q)) common[static_cast<size_t>(t)] = false;
    }
  }
  for (bool c : common) res.common_feasible += c ? 1 : 0;
  double nearest_mean = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < schemes.size(); ++i) {
    SchemeStats st;
    st.scheme = schemes[i];
    double sum = 0.0, evals = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto& cell = table[i][static_cast<size_t>(t)];
      if (std::isfinite(cell.q)) ++st.feasible_count;
      if (common[static_cast<size_t>(t)]) sum += cell.q;
      evals += cell.evals;
    }
    st.mean_eta = res.common_feasible > 0 ? sum / res.common_feasible
                                          : std::numeric_limits<double>::infinity();
    st.mean_objective_evaluations = evals / T;
    if (st.scheme == "nearest_ap") nearest_mean = st.mean_eta;
    res.stats.push_back(std::move(st));
  }
  for (auto& st : res.stats) {
    st.pct_of_nearest = 100.0 * st.mean_eta / nearest_mean;
  }
  return res;
}

inline void write_compare_csv(const std::string& path, const Settings& s,
                              const CompareResult& res, const std::string& command,
                              std::optional<std::pair<double, double>> ratio = {}) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  if (os.tellp() == 0) {
    os << csv_preamble(command, s.seed) << "\n";
    os << "ratio,scheme,mean_eta_j_per_bit,pct_of_nearest,feasible_count,scenarios,"
          "common_feasible,mean_objective_evals\n";
  }
  const std::string rat = ratio ? format_double(ratio->first) + ":" + format_double(ratio->second)
                                : format_double(s.gen.ratio_region1) + ":" +
                                      format_double(s.gen.ratio_region2);
  for (const auto& st : res.stats) {
    os << rat << ',' << st.scheme << ',' << format_double(st.mean_eta) << ','
       << format_double(st.pct_of_nearest) << ',' << st.feasible_count << ','
       << res.scenarios << ',' << res.common_feasible << ','
       << format_double(st.mean_objective_evaluations) << "\n";
  }
}

}  // namespace edgetwin
