#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "longrl/masking.hpp"
#include "longrl/rewards.hpp"
#include "longrl/types.hpp"

namespace longrl {

// Reserved vocabulary slots. The end token terminates generation; the key
// marker starts every planted key-value clause and never appears in filler,
// so a (marker, key-id) query matches exactly the planted needles.
inline constexpr Token kEndToken = 0;
inline constexpr Token kKeyMarkToken = 1;
inline constexpr Token kFirstContentToken = 2;

// Input/output limits of one curriculum stage, in tokens. steps is the
// stage's training-step budget (0 = rest of the run, only meaningful for
// the last stage).
struct StageLimits {
  int min_input = 16;
  int max_input = 32;
  int max_output = 8;
  int steps = 0;
};

struct EnvConfig {
  int vocab_size = 16;   // includes the two reserved tokens
  int feature_dim = 16;  // co-occurrence buckets; == vocab_size keeps them exact
  std::vector<TaskKind> tasks = {TaskKind::multiple_choice,
                                 TaskKind::doc_multihop, TaskKind::general_rc,
                                 TaskKind::dialogue_memory,
                                 TaskKind::corpus_numeric};
};

// Tabular softmax policy: logits(step) = theta^T f(step) / temperature.
struct PolicyParams {
  int feature_dim = 0;
  int vocab_size = 0;
  std::vector<double> theta;  // row-major feature_dim x vocab_size

  double at(int f, int v) const {
    return theta[static_cast<std::size_t>(f) * vocab_size + v];
  }
  double& at(int f, int v) {
    return theta[static_cast<std::size_t>(f) * vocab_size + v];
  }
};

PolicyParams zero_params(int feature_dim, int vocab_size);

// One synthetic prompt: a haystack context with planted key-value needles,
// a (marker, key-id) query, the scoring rule, and precomputed per-step
// feature vectors. Feature j at step t counts the tokens hashed to bucket j
// that appear in the context at offset t after an occurrence of the query,
// so a diagonal-dominant theta reads the planted value off step by step.
struct EnvTask {
  TaskKind kind = TaskKind::general_rc;
  std::string prompt_id;
  std::vector<Token> context;
  std::vector<Token> query;
  RewardSpec reward;
  std::vector<std::vector<double>> features;  // [step][feature_dim]

  int horizon() const { return static_cast<int>(features.size()); }
};

// Deterministic in (kind, stage, seed). multiple-choice plants a
// single-token answer drawn from four option tokens; dialogue-memory plants
// the same key twice with different multi-token values and scores the last
// one with the dense similarity ratio; the remaining kinds are key-value
// retrieval with distractor needles under the sparse containment reward.
EnvTask generate_task(const EnvConfig& config, TaskKind kind,
                      const StageLimits& stage, std::uint64_t seed);

// Full sampling distribution at one decoding step.
struct StepDistribution {
  std::vector<double> probs;
  std::vector<double> logprobs;
  double entropy = 0.0;  // of the untruncated distribution, nats
};

// Softmax of theta^T f(step) / temperature. temperature <= 0 is the greedy
// limit and returns the one-hot argmax distribution. The feature vector
// depends on the emitted prefix only through its length.
StepDistribution policy_step_at(const PolicyParams& params, const EnvTask& task,
                                int step, double temperature);
StepDistribution policy_step(const PolicyParams& params, const EnvTask& task,
                             std::span<const Token> emitted, double temperature);

// Autoregressive top-p sampling. Stored log-probs and entropies are those
// of the untruncated distribution, so the on-policy importance ratio is
// exactly 1; top-p shapes sampling only. Generation stops at the end token
// or after max_tokens steps; the reward is computed on the emitted tokens
// with a trailing end token stripped.
Rollout sample_rollout(const PolicyParams& params, const EnvTask& task,
                       int max_tokens, double temperature, double top_p,
                       std::uint64_t seed);

// The emitted tokens that get scored: everything before a trailing end token.
std::span<const Token> scored_prediction(std::span<const Token> tokens);

// Ascent gradient of the on-policy objective
//   J = (1 / sum_j |y_j|) * sum_i A_i * sum_t mask(i,t) * rho_{i,t}
// at theta = theta_old, i.e. (1/N) sum A_i mask(i,t) grad log pi(y_{i,t}).
// The denominator counts all tokens, masked ones included. tasks must be
// aligned with batch.groups. Throws "off-policy batch" when stored
// log-probs disagree with the current parameters.
std::vector<double> grpo_gradient(const PolicyParams& params,
                                  const TrainBatch& batch,
                                  std::span<const EnvTask> tasks,
                                  const BatchMask& mask, double temperature);

}  // namespace longrl
