#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "longrl/aepo.hpp"
#include "longrl/config.hpp"
#include "longrl/env.hpp"
#include "longrl/metrics.hpp"
#include "longrl/sampler.hpp"

namespace longrl {

// Checkpoint contents: the policy matrix plus the minimal trainer state
// (absolute step, controller mode) needed to continue a run.
struct ParamsSnapshot {
  PolicyParams params;
  std::int64_t step = 0;
  AepoMode aepo_mode = AepoMode::keep_negatives;
};

// Versioned header followed by the row-major matrix in decimal text with
// round-trip precision.
void save_params(const ParamsSnapshot& snapshot,
                 const std::filesystem::path& path);
ParamsSnapshot load_params(const std::filesystem::path& path);

// Strictly on-policy training loop: within each step the parameters that
// sample the rollouts are the parameters being differentiated, and one
// plain gradient-ascent update is applied per batch. All randomness is
// derived from (seed, absolute step), so a run resumed from a snapshot
// replays exactly like an uninterrupted one.
class Trainer {
 public:
  explicit Trainer(RunConfig config);

  StepMetrics step();

  const RunConfig& config() const { return config_; }  // resolved taus included
  const PolicyParams& params() const { return params_; }
  const AepoState& aepo_state() const { return aepo_; }
  std::int64_t current_step() const { return step_; }
  int stage_index_for(std::int64_t step) const;

 private:
  struct DrawnBatch {
    std::vector<EnvTask> tasks;
    TrainBatch batch;
  };
  DrawnBatch draw_batch(std::int64_t step);
  void resolve_mask_thresholds();

  RunConfig config_;
  DatasetIndex index_;
  std::map<std::string, TaskKind> task_of_id_;
  std::size_t batches_per_epoch_ = 0;
  std::int64_t cached_epoch_ = -1;
  std::vector<std::vector<std::string>> epoch_batches_;
  PolicyParams params_;
  AepoState aepo_;
  MaskMode mask_mode_;
  std::int64_t step_ = 0;
};

struct RunResult {
  PolicyParams params;
  std::vector<StepMetrics> metrics;
};

// Runs the configured number of steps, appending one metrics record per
// step to <out_dir>/metrics.jsonl (flushed every step) and writing the
// final snapshot to <out_dir>/params.txt plus the resolved configuration to
// <out_dir>/config.json. Fails before step 1 if the directory is not
// writable.
RunResult run_training(const RunConfig& config,
                       const std::filesystem::path& out_dir);

// In-memory variant used by tests; metrics are only returned.
RunResult run_training(const RunConfig& config);

// Mean reward per task kind over a freshly generated seeded task suite,
// sampling one response per task at the configured temperature/top-p
// (greedy when requested). Tasks use the final curriculum stage.
std::map<TaskKind, double> evaluate(const PolicyParams& params,
                                    const RunConfig& config, int tasks_per_kind,
                                    std::uint64_t seed, bool greedy);

}  // namespace longrl
