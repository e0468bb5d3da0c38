#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longrl {

using Token = std::int32_t;

// Task families the balanced sampler draws from. The enum is extensible;
// everything downstream treats the tag as opaque data.
enum class TaskKind : std::uint8_t {
  multiple_choice,
  doc_multihop,
  general_rc,
  dialogue_memory,
  corpus_numeric,
};

inline constexpr std::array<TaskKind, 5> kAllTaskKinds = {
    TaskKind::multiple_choice, TaskKind::doc_multihop, TaskKind::general_rc,
    TaskKind::dialogue_memory, TaskKind::corpus_numeric,
};

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);

// One sampled response. Log-probs and entropies are recorded under the
// sampling policy at generation time; the strictly on-policy trainer reads
// the stored values instead of recomputing them.
struct Rollout {
  std::vector<Token> tokens;
  std::vector<double> logprobs;   // log pi(token | prefix), per step
  std::vector<double> entropies;  // sampling-distribution entropy, nats
  double reward = 0.0;            // in [0, 1]
  TaskKind task = TaskKind::general_rc;
  std::string prompt_id;

  std::size_t length() const { return tokens.size(); }
};

// Builds a rollout; clamps the reward into [0, 1] and rejects mismatched
// per-token array lengths.
Rollout make_rollout(std::vector<Token> tokens, std::vector<double> logprobs,
                     std::vector<double> entropies, double reward,
                     TaskKind task, std::string prompt_id);

// G rollouts answering the same prompt; the unit of advantage normalization.
struct RolloutGroup {
  std::vector<Rollout> rollouts;
  std::optional<std::vector<double>> advantages;  // aligned with rollouts

  std::size_t size() const { return rollouts.size(); }
};

// Rejects groups whose rollouts disagree on prompt_id or task.
RolloutGroup make_group(std::vector<Rollout> rollouts);

// A set of groups updated together; the unit of batch entropy measurement
// and of one gradient step.
struct TrainBatch {
  std::vector<RolloutGroup> groups;
  std::int64_t step = 0;

  std::size_t rollout_count() const;
  std::size_t total_tokens() const;
};

enum class MaskKind : std::uint8_t { none, token_level, sequence_level };

// Negative-gradient clipping setup. Thresholds are absolute entropies in
// nats and apply only to tokens of negative-advantage rollouts.
struct MaskMode {
  MaskKind kind = MaskKind::none;
  double tau_token = 0.0;
  double tau_sequence = 0.0;
};

std::string_view to_string(MaskKind kind);
std::optional<MaskKind> mask_kind_from_string(std::string_view name);

struct ValidationResult {
  bool ok = true;
  std::string violation;  // first violated invariant, by name

  explicit operator bool() const { return ok; }
};

// Checks every rollout invariant against the given vocabulary size and
// reports the first violation by name.
ValidationResult validate_rollout(const Rollout& r, Token vocab_size);

}  // namespace longrl
