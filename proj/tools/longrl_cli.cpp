// Command-line trainer for the toy long-context policy-optimization stack:
// `train` runs the on-policy loop, `eval` scores a frozen policy on a seeded
// task suite, `inspect` pretty-prints a metrics log and dumps per-metric
// columns for plotting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "longrl/config.hpp"
#include "longrl/metrics.hpp"
#include "longrl/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;

// Every RunConfig field is overridable as --key value on top of --config.
const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys = {
      "group_size",     "batch_groups", "learning_rate",     "temperature",
      "top_p",          "advantage_mode", "advantage_epsilon", "mask_mode",
      "tau_token",      "tau_sequence", "aepo_h_low",        "aepo_h_high",
      "sampler",        "samples_per_task", "vocab_size",    "feature_dim",
      "tasks",          "curriculum",   "init_params",
  };
  return keys;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir;
  std::map<std::string, std::string> overrides;
  bool seed_set = false;
  std::uint64_t seed = 0;
  bool steps_set = false;
  std::int64_t steps = 0;
};

int run_train(const TrainArgs& args) {
  longrl::RunConfig config;
  if (!args.config_path.empty()) {
    config = longrl::load_run_config(args.config_path);
  }
  for (const auto& [key, value] : args.overrides) {
    longrl::apply_override(config, key, value);
  }
  if (args.seed_set) {
    config.seed = args.seed;
  }
  if (args.steps_set) {
    config.total_steps = args.steps;
  }
  longrl::validate(config);

  const longrl::RunResult result =
      longrl::run_training(config, std::filesystem::path(args.out_dir));
  if (!result.metrics.empty()) {
    const longrl::StepMetrics& last = result.metrics.back();
    std::printf("trained %zu steps: mean_reward=%.4f batch_entropy=%.4f (%s)\n",
                result.metrics.size(), last.mean_reward, last.batch_entropy,
                last.aepo_mode.c_str());
  } else {
    std::printf("trained 0 steps\n");
  }
  std::printf("wrote %s and %s\n",
              (std::filesystem::path(args.out_dir) / "metrics.jsonl").c_str(),
              (std::filesystem::path(args.out_dir) / "params.txt").c_str());
  return kExitOk;
}

int run_eval(const std::string& params_path, const std::string& config_path,
             int per_task, std::uint64_t seed, bool greedy) {
  longrl::RunConfig config;
  if (!config_path.empty()) {
    config = longrl::load_run_config(config_path);
  }
  const longrl::ParamsSnapshot snapshot = longrl::load_params(params_path);
  const auto rewards =
      longrl::evaluate(snapshot.params, config, per_task, seed, greedy);
  double overall = 0.0;
  for (const auto& [kind, reward] : rewards) {
    std::printf("%-18s %.4f\n", std::string(longrl::to_string(kind)).c_str(),
                reward);
    overall += reward;
  }
  std::printf("%-18s %.4f\n", "overall",
              overall / static_cast<double>(rewards.size()));
  return kExitOk;
}

int run_inspect(const std::string& log_path, const std::string& columns_out) {
  const auto metrics = longrl::load_metrics(log_path);
  if (metrics.empty()) {
    std::printf("empty metrics log\n");
    return kExitOk;
  }

  std::printf("%6s %5s %11s %13s %8s %9s %9s %14s\n", "step", "stage",
              "mean_reward", "batch_entropy", "resp_len", "mask_frac",
              "grad_norm", "aepo_mode");
  for (const longrl::StepMetrics& m : metrics) {
    std::printf("%6lld %5d %11.4f %13.4f %8.2f %9.4f %9.4f %14s\n",
                static_cast<long long>(m.step), m.stage_index, m.mean_reward,
                m.batch_entropy, m.mean_response_len, m.masked_token_fraction,
                m.grad_norm, m.aepo_mode.c_str());
  }

  if (!columns_out.empty()) {
    const std::filesystem::path dir(columns_out);
    std::filesystem::create_directories(dir);
    const auto write_column = [&](const std::string& name, auto getter) {
      std::ofstream out(dir / (name + ".dat"), std::ios::trunc);
      for (const longrl::StepMetrics& m : metrics) {
        out << m.step << ' ' << getter(m) << '\n';
      }
    };
    write_column("mean_reward",
                 [](const auto& m) { return m.mean_reward; });
    write_column("batch_entropy",
                 [](const auto& m) { return m.batch_entropy; });
    write_column("mean_response_len",
                 [](const auto& m) { return m.mean_response_len; });
    write_column("masked_token_fraction",
                 [](const auto& m) { return m.masked_token_fraction; });
    write_column("grad_norm", [](const auto& m) { return m.grad_norm; });
    write_column("stage_index",
                 [](const auto& m) { return m.stage_index; });

    std::map<std::string, std::ofstream> task_files;
    for (const longrl::StepMetrics& m : metrics) {
      for (const auto& [task, reward] : m.per_task_mean_reward) {
        auto it = task_files.find(task);
        if (it == task_files.end()) {
          it = task_files
                   .emplace(task, std::ofstream(
                                      dir / ("per_task_mean_reward." + task +
                                             ".dat"),
                                      std::ios::trunc))
                   .first;
        }
        it->second << m.step << ' ' << reward << '\n';
      }
    }
    std::printf("wrote column files to %s\n", dir.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toy long-context RL trainer"};
  app.require_subcommand(1);

  TrainArgs train_args;
  std::map<std::string, std::string> raw_overrides;
  CLI::App* train = app.add_subcommand("train", "run the training loop");
  train->add_option("--config", train_args.config_path, "run config JSON file");
  train->add_option("--out", train_args.out_dir, "output directory")->required();
  CLI::Option* seed_opt =
      train->add_option("--seed", train_args.seed, "run seed");
  CLI::Option* steps_opt =
      train->add_option("--steps", train_args.steps, "total training steps");
  for (const std::string& key : override_keys()) {
    train->add_option("--" + key, raw_overrides[key], "override " + key);
  }

  std::string eval_params;
  std::string eval_config;
  int eval_per_task = 50;
  std::uint64_t eval_seed = 0;
  bool eval_greedy = false;
  CLI::App* eval = app.add_subcommand("eval", "score frozen params");
  eval->add_option("--params", eval_params, "params file")->required();
  eval->add_option("--config", eval_config, "run config JSON file");
  eval->add_option("--per-task", eval_per_task, "tasks per kind");
  eval->add_option("--seed", eval_seed, "suite seed");
  eval->add_flag("--greedy", eval_greedy, "argmax decoding");

  std::string inspect_log;
  std::string inspect_columns;
  CLI::App* inspect = app.add_subcommand("inspect", "pretty-print a metrics log");
  inspect->add_option("--log", inspect_log, "metrics.jsonl file")->required();
  inspect->add_option("--columns-out", inspect_columns,
                      "directory for per-metric column files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (train->parsed()) {
      train_args.seed_set = seed_opt->count() > 0;
      train_args.steps_set = steps_opt->count() > 0;
      for (const std::string& key : override_keys()) {
        if (train->count("--" + key) > 0) {
          train_args.overrides[key] = raw_overrides[key];
        }
      }
      return run_train(train_args);
    }
    if (eval->parsed()) {
      return run_eval(eval_params, eval_config, eval_per_task, eval_seed,
                      eval_greedy);
    }
    if (inspect->parsed()) {
      return run_inspect(inspect_log, inspect_columns);
    }
  } catch (const longrl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitConfigError;
}
