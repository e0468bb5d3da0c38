#include "longrl/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace longrl {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::multiple_choice:
      return "multiple-choice";
    case TaskKind::doc_multihop:
      return "doc-multihop";
    case TaskKind::general_rc:
      return "general-rc";
    case TaskKind::dialogue_memory:
      return "dialogue-memory";
    case TaskKind::corpus_numeric:
      return "corpus-numeric";
  }
  return "unknown";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) {
  for (const TaskKind kind : kAllTaskKinds) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::none:
      return "none";
    case MaskKind::token_level:
      return "token-level";
    case MaskKind::sequence_level:
      return "sequence-level";
  }
  return "unknown";
}

std::optional<MaskKind> mask_kind_from_string(std::string_view name) {
  for (const MaskKind kind :
       {MaskKind::none, MaskKind::token_level, MaskKind::sequence_level}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

Rollout make_rollout(std::vector<Token> tokens, std::vector<double> logprobs,
                     std::vector<double> entropies, double reward,
                     TaskKind task, std::string prompt_id) {
  if (tokens.empty()) {
    throw std::invalid_argument("empty rollout");
  }
  if (tokens.size() != logprobs.size() || tokens.size() != entropies.size()) {
    throw std::invalid_argument("length mismatch");
  }
  Rollout r;
  r.tokens = std::move(tokens);
  r.logprobs = std::move(logprobs);
  r.entropies = std::move(entropies);
  r.reward = std::clamp(reward, 0.0, 1.0);
  r.task = task;
  r.prompt_id = std::move(prompt_id);
  return r;
}

RolloutGroup make_group(std::vector<Rollout> rollouts) {
  if (rollouts.empty()) {
    throw std::invalid_argument("empty group");
  }
  for (const Rollout& r : rollouts) {
    if (r.prompt_id != rollouts.front().prompt_id) {
      throw std::invalid_argument("group prompt mismatch");
    }
    if (r.task != rollouts.front().task) {
      throw std::invalid_argument("group task mismatch");
    }
  }
  RolloutGroup g;
  g.rollouts = std::move(rollouts);
  return g;
}

std::size_t TrainBatch::rollout_count() const {
  std::size_t n = 0;
  for (const RolloutGroup& g : groups) {
    n += g.rollouts.size();
  }
  return n;
}

std::size_t TrainBatch::total_tokens() const {
  std::size_t n = 0;
  for (const RolloutGroup& g : groups) {
    for (const Rollout& r : g.rollouts) {
      n += r.tokens.size();
    }
  }
  return n;
}

ValidationResult validate_rollout(const Rollout& r, Token vocab_size) {
  if (vocab_size <= 0) {
    return {false, "vocab size not positive"};
  }
  if (r.tokens.empty()) {
    return {false, "empty rollout"};
  }
  if (r.tokens.size() != r.logprobs.size() ||
      r.tokens.size() != r.entropies.size()) {
    return {false, "length mismatch"};
  }
  for (const Token t : r.tokens) {
    if (t < 0 || t >= vocab_size) {
      return {false, "token out of range"};
    }
  }
  const double max_entropy = std::log(static_cast<double>(vocab_size));
  for (const double h : r.entropies) {
    if (!(h >= 0.0)) {
      return {false, "entropy negative"};
    }
    if (h > max_entropy + 1e-9) {
      return {false, "entropy exceeds ln|V|"};
    }
  }
  for (const double lp : r.logprobs) {
    if (!(lp <= 1e-12) || std::isnan(lp)) {
      return {false, "logprob positive"};
    }
  }
  if (!(r.reward >= 0.0 && r.reward <= 1.0)) {
    return {false, "reward out of range"};
  }
  return {};
}

}  // namespace longrl
