// Command-line runner for the digital-twin experiments: single-AP offloading
// sweeps, DNN training against the twin, and association-scheme comparisons.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "edgetwin/experiments.hpp"
#include "edgetwin/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;      // negative: keep config value
  int workers = -1;
  std::int64_t epochs = -1;
  std::string drift;
  std::string checkpoint;
  std::string resume;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out-dir", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--workers", args.workers, "override the worker count");
}

edgetwin::Settings settings_from(const CommonArgs& args) {
  auto s = edgetwin::load_settings(edgetwin::KeyValueConfig::parse_file(args.config_path));
  if (args.seed >= 0) s.seed = static_cast<std::uint64_t>(args.seed);
  if (args.workers > 0) s.workers = args.workers;
  if (args.epochs >= 0) s.epochs = args.epochs;
  if (!args.drift.empty()) {
    const auto [ratio, epoch] = edgetwin::parse_drift(args.drift);
    s.drift.push_back(edgetwin::DriftEvent{epoch, ratio.first, ratio.second});
  }
  if (!args.checkpoint.empty()) s.checkpoint = args.checkpoint;
  std::filesystem::create_directories(args.out_dir);
  return s;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgetwin: digital-twin simulator and optimizer for multi-AP mobile edge computing"};
  app.require_subcommand(1);

  CommonArgs solve_args, train_args, compare_args, sweep_args;

  CLI::App* solve = app.add_subcommand("solve-ap", "single-AP offloading comparison over seeded draws");
  add_common(solve, solve_args);

  CLI::App* train = app.add_subcommand("train", "train the association DNN against the digital twin");
  add_common(train, train_args);
  train->add_option("--epochs", train_args.epochs, "override the epoch count");
  train->add_option("--drift", train_args.drift, "ratio@epoch distribution drift, e.g. 9:1@1000");
  train->add_option("--resume", train_args.resume, "checkpoint to continue from");

  CLI::App* compare = app.add_subcommand("compare", "compare association schemes on test scenarios");
  add_common(compare, compare_args);
  compare->add_option("--checkpoint", compare_args.checkpoint, "trained DNN checkpoint");

  CLI::App* sweep = app.add_subcommand("sweep", "compare schemes across user-distribution ratios");
  add_common(sweep, sweep_args);
  sweep->add_option("--checkpoint", sweep_args.checkpoint, "trained DNN checkpoint");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const auto s = settings_from(solve_args);
      const auto rows = edgetwin::run_solve_ap_experiment(s);
      const std::string path = join(solve_args.out_dir, "solve_ap.csv");
      edgetwin::write_solve_ap_csv(path, s, rows);
      std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    } else if (train->parsed()) {
      const auto s = settings_from(train_args);
      if (!train_args.resume.empty() && !std::filesystem::exists(train_args.resume)) {
        std::cerr << "error: resume checkpoint not found: " << train_args.resume << "\n";
        return kExitMissingArtifact;
      }
      const std::string metrics = join(train_args.out_dir, "metrics.csv");
      const std::string ckpt = join(train_args.out_dir, "checkpoint.bin");
      const auto res = edgetwin::run_train(s, metrics, ckpt, train_args.resume);
      std::cout << "wrote " << metrics << " and " << ckpt << " (epoch "
                << res.state.epoch << ")\n";
    } else if (compare->parsed() || sweep->parsed()) {
      const bool is_sweep = sweep->parsed();
      const auto& args = is_sweep ? sweep_args : compare_args;
      const auto s = settings_from(args);
      const edgetwin::MlpParams* dl = nullptr;
      edgetwin::Checkpoint ck;
      if (!s.checkpoint.empty()) {
        if (!std::filesystem::exists(s.checkpoint)) {
          std::cerr << "error: checkpoint not found: " << s.checkpoint << "\n";
          return kExitMissingArtifact;
        }
        ck = edgetwin::load_checkpoint(s.checkpoint);
        dl = &ck.params;
      } else if (!is_sweep) {
        std::cerr << "error: compare requires a checkpoint (config key or --checkpoint)\n";
        return kExitMissingArtifact;
      }
      const std::string name = is_sweep ? "sweep.csv" : "compare.csv";
      const std::string path = join(args.out_dir, name);
      std::filesystem::remove(path);
      if (is_sweep) {
        auto ratios = s.ratio_sweep;
        if (ratios.empty()) {
          ratios = {{9, 1}, {8, 2}, {7, 3}, {6, 4}, {5, 5}};
        }
        for (const auto& r : ratios) {
          const auto gen = edgetwin::apply_drift(s.gen, r.first, r.second);
          const auto res = edgetwin::run_compare(s, gen, dl);
          edgetwin::write_compare_csv(path, s, res, "sweep", r);
        }
      } else {
        const auto res = edgetwin::run_compare(s, s.gen, dl);
        edgetwin::write_compare_csv(path, s, res, "compare");
        for (const auto& st : res.stats) {
          std::cout << st.scheme << ": mean eta " << edgetwin::format_double(st.mean_eta)
                    << " J/bit (" << edgetwin::format_double(st.pct_of_nearest)
                    << "% of nearest), evals "
                    << edgetwin::format_double(st.mean_objective_evaluations) << "\n";
        }
      }
      std::cout << "wrote " << path << "\n";
    }
  } catch (const edgetwin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
