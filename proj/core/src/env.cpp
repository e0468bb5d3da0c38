#include "longrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "longrl/rng.hpp"

namespace longrl {

PolicyParams zero_params(int feature_dim, int vocab_size) {
  if (feature_dim < 1 || vocab_size < 2) {
    throw std::invalid_argument("feature dim");
  }
  PolicyParams params;
  params.feature_dim = feature_dim;
  params.vocab_size = vocab_size;
  params.theta.assign(
      static_cast<std::size_t>(feature_dim) * static_cast<std::size_t>(vocab_size),
      0.0);
  return params;
}

namespace {

struct NeedleBlock {
  std::vector<Token> tokens;
  bool is_target = false;
  std::vector<Token> value;
};

int value_length_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::multiple_choice:
      return 1;
    case TaskKind::general_rc:
      return 2;
    case TaskKind::corpus_numeric:
      return 2;
    case TaskKind::doc_multihop:
      return 3;
    case TaskKind::dialogue_memory:
      return 4;
  }
  return 2;
}

Token random_content_token(Rng& rng, int vocab_size) {
  return kFirstContentToken +
         static_cast<Token>(rng.below(
             static_cast<std::uint64_t>(vocab_size - kFirstContentToken)));
}

NeedleBlock make_needle(Token key_id, std::vector<Token> value, bool is_target) {
  NeedleBlock block;
  block.tokens.reserve(value.size() + 3);
  block.tokens.push_back(kKeyMarkToken);
  block.tokens.push_back(key_id);
  block.tokens.insert(block.tokens.end(), value.begin(), value.end());
  block.tokens.push_back(kEndToken);  // in-context stop marker after the value
  block.is_target = is_target;
  block.value = std::move(value);
  return block;
}

std::vector<std::size_t> find_occurrences(std::span<const Token> haystack,
                                          std::span<const Token> needle) {
  std::vector<std::size_t> positions;
  if (needle.empty() || haystack.size() < needle.size()) {
    return positions;
  }
  for (std::size_t p = 0; p + needle.size() <= haystack.size(); ++p) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + p)) {
      positions.push_back(p);
    }
  }
  return positions;
}

}  // namespace

EnvTask generate_task(const EnvConfig& config, TaskKind kind,
                      const StageLimits& stage, std::uint64_t seed) {
  if (config.vocab_size < 8) {
    throw std::invalid_argument("vocab_size must be at least 8");
  }
  if (config.feature_dim < 1) {
    throw std::invalid_argument("feature dim");
  }
  if (stage.min_input < 1 || stage.max_input < stage.min_input ||
      stage.max_output < 1) {
    throw std::invalid_argument("stage limits");
  }

  Rng rng(seed);
  const int vocab = config.vocab_size;

  int value_len = std::min(value_length_for(kind), stage.max_output);
  const int n_targets = kind == TaskKind::dialogue_memory ? 2 : 1;
  int n_distractors = 2;
  const auto needed = [&](int vl, int nd) {
    return (n_targets + nd) * (vl + 3);
  };
  while (needed(value_len, n_distractors) > stage.max_input && n_distractors > 0) {
    --n_distractors;
  }
  while (needed(value_len, n_distractors) > stage.max_input && value_len > 1) {
    --value_len;
  }
  if (needed(value_len, n_distractors) > stage.max_input) {
    throw std::invalid_argument("stage too small");
  }

  const Token key_id = random_content_token(rng, vocab);

  const auto draw_value = [&](int len) {
    std::vector<Token> value(static_cast<std::size_t>(len));
    for (Token& v : value) {
      if (kind == TaskKind::multiple_choice) {
        // answer comes from the four designated option tokens
        v = kFirstContentToken + static_cast<Token>(rng.below(4));
      } else if (kind == TaskKind::corpus_numeric) {
        // "numeric" sub-alphabet: upper half of the content range
        const Token lo = kFirstContentToken + (vocab - kFirstContentToken) / 2;
        v = lo + static_cast<Token>(rng.below(static_cast<std::uint64_t>(vocab - lo)));
      } else {
        v = random_content_token(rng, vocab);
      }
    }
    return value;
  };

  std::vector<NeedleBlock> blocks;
  if (kind == TaskKind::dialogue_memory) {
    // Same key planted twice with different values; the later occurrence is
    // the one that counts, and offset features cannot tell the two apart.
    std::vector<Token> first = draw_value(value_len);
    std::vector<Token> second = draw_value(value_len);
    while (second == first) {
      second = draw_value(value_len);
    }
    blocks.push_back(make_needle(key_id, std::move(first), true));
    blocks.push_back(make_needle(key_id, std::move(second), true));
  } else {
    blocks.push_back(make_needle(key_id, draw_value(value_len), true));
  }
  for (int d = 0; d < n_distractors; ++d) {
    Token other = random_content_token(rng, vocab);
    while (other == key_id) {
      other = random_content_token(rng, vocab);
    }
    blocks.push_back(make_needle(other, draw_value(value_len), false));
  }
  rng.shuffle(blocks);

  const int block_total = needed(value_len, n_distractors);
  const int lo = std::max(stage.min_input, block_total);
  const int length = static_cast<int>(rng.uniform_int(lo, stage.max_input));
  const int filler_len = length - block_total;

  // Split the filler into |blocks|+1 gaps via sorted cuts.
  std::vector<int> cuts(blocks.size());
  for (int& c : cuts) {
    c = static_cast<int>(rng.below(static_cast<std::uint64_t>(filler_len) + 1));
  }
  std::sort(cuts.begin(), cuts.end());

  EnvTask task;
  task.kind = kind;
  task.query = {kKeyMarkToken, key_id};
  task.context.reserve(static_cast<std::size_t>(length));
  int prev_cut = 0;
  std::vector<Token> last_target_value;
  for (std::size_t b = 0; b <= blocks.size(); ++b) {
    const int cut = b < blocks.size() ? cuts[b] : filler_len;
    for (int k = prev_cut; k < cut; ++k) {
      task.context.push_back(random_content_token(rng, vocab));
    }
    prev_cut = cut;
    if (b < blocks.size()) {
      task.context.insert(task.context.end(), blocks[b].tokens.begin(),
                          blocks[b].tokens.end());
      if (blocks[b].is_target) {
        last_target_value = blocks[b].value;
      }
    }
  }

  task.reward.kind = kind == TaskKind::dialogue_memory ? RewardKind::similarity
                                                       : RewardKind::contains;
  task.reward.gold = std::move(last_target_value);

  // Offset-indexed co-occurrence features: bucket j at step t counts query
  // occurrences whose context continuation at offset t hashes to j.
  const auto positions = find_occurrences(task.context, task.query);
  task.features.assign(static_cast<std::size_t>(stage.max_output),
                       std::vector<double>(
                           static_cast<std::size_t>(config.feature_dim), 0.0));
  for (int t = 0; t < stage.max_output; ++t) {
    auto& f = task.features[static_cast<std::size_t>(t)];
    for (const std::size_t p : positions) {
      const std::size_t pos = p + task.query.size() + static_cast<std::size_t>(t);
      if (pos < task.context.size()) {
        f[static_cast<std::size_t>(task.context[pos] % config.feature_dim)] += 1.0;
      }
    }
  }

  char buf[32];
  std::snprintf(buf, sizeof buf, "task-%016llx",
                static_cast<unsigned long long>(seed));
  task.prompt_id = buf;

  if (score(task.reward, task.reward.gold) != 1.0) {
    throw std::logic_error("generated task is not solvable");
  }
  return task;
}

StepDistribution policy_step_at(const PolicyParams& params, const EnvTask& task,
                                int step, double temperature) {
  if (step < 0 || step >= task.horizon()) {
    throw std::out_of_range("step beyond task horizon");
  }
  const auto& f = task.features[static_cast<std::size_t>(step)];
  if (static_cast<int>(f.size()) != params.feature_dim) {
    throw std::invalid_argument("feature dim");
  }
  const int vocab = params.vocab_size;

  std::vector<double> logits(static_cast<std::size_t>(vocab), 0.0);
  for (int fi = 0; fi < params.feature_dim; ++fi) {
    const double x = f[static_cast<std::size_t>(fi)];
    if (x == 0.0) {
      continue;
    }
    for (int v = 0; v < vocab; ++v) {
      logits[static_cast<std::size_t>(v)] += x * params.at(fi, v);
    }
  }

  StepDistribution dist;
  dist.probs.assign(static_cast<std::size_t>(vocab), 0.0);
  dist.logprobs.assign(static_cast<std::size_t>(vocab),
                       -std::numeric_limits<double>::infinity());

  if (temperature <= 0.0) {
    // greedy limit: the sampling distribution collapses onto the argmax
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    dist.probs[best] = 1.0;
    dist.logprobs[best] = 0.0;
    dist.entropy = 0.0;
    return dist;
  }

  double max_logit = -std::numeric_limits<double>::infinity();
  for (double& l : logits) {
    l /= temperature;
    max_logit = std::max(max_logit, l);
  }
  double sum = 0.0;
  for (const double l : logits) {
    sum += std::exp(l - max_logit);
  }
  const double lse = max_logit + std::log(sum);
  double entropy = 0.0;
  for (int v = 0; v < vocab; ++v) {
    const double lp = logits[static_cast<std::size_t>(v)] - lse;
    dist.logprobs[static_cast<std::size_t>(v)] = lp;
    const double p = std::exp(lp);
    dist.probs[static_cast<std::size_t>(v)] = p;
    if (p > 0.0) {
      entropy -= p * lp;
    }
  }
  dist.entropy = entropy < 0.0 ? 0.0 : entropy;
  return dist;
}

StepDistribution policy_step(const PolicyParams& params, const EnvTask& task,
                             std::span<const Token> emitted, double temperature) {
  return policy_step_at(params, task, static_cast<int>(emitted.size()),
                        temperature);
}

std::span<const Token> scored_prediction(std::span<const Token> tokens) {
  if (!tokens.empty() && tokens.back() == kEndToken) {
    return tokens.first(tokens.size() - 1);
  }
  return tokens;
}

Rollout sample_rollout(const PolicyParams& params, const EnvTask& task,
                       int max_tokens, double temperature, double top_p,
                       std::uint64_t seed) {
  if (max_tokens < 1) {
    throw std::invalid_argument("max_tokens must be positive");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw std::invalid_argument("top_p out of range");
  }
  if (task.horizon() == 0) {
    throw std::invalid_argument("task horizon empty");
  }
  const int limit = std::min(max_tokens, task.horizon());

  Rng rng(seed);
  std::vector<Token> tokens;
  std::vector<double> logprobs;
  std::vector<double> entropies;
  tokens.reserve(static_cast<std::size_t>(limit));

  for (int t = 0; t < limit; ++t) {
    const StepDistribution dist = policy_step_at(params, task, t, temperature);
    Token tok;
    if (temperature <= 0.0) {
      tok = static_cast<Token>(
          std::max_element(dist.probs.begin(), dist.probs.end()) -
          dist.probs.begin());
    } else {
      // nucleus sampling: smallest prefix of the sorted distribution whose
      // mass reaches top_p, renormalized
      std::vector<int> order(dist.probs.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dist.probs[static_cast<std::size_t>(a)] >
               dist.probs[static_cast<std::size_t>(b)];
      });
      double cum = 0.0;
      std::size_t cutoff = 0;
      while (cutoff < order.size()) {
        cum += dist.probs[static_cast<std::size_t>(order[cutoff])];
        ++cutoff;
        if (cum >= top_p) {
          break;
        }
      }
      const double r = rng.unit() * cum;
      double acc = 0.0;
      tok = static_cast<Token>(order[cutoff - 1]);
      for (std::size_t k = 0; k < cutoff; ++k) {
        acc += dist.probs[static_cast<std::size_t>(order[k])];
        if (r < acc) {
          tok = static_cast<Token>(order[k]);
          break;
        }
      }
    }
    tokens.push_back(tok);
    logprobs.push_back(dist.logprobs[static_cast<std::size_t>(tok)]);
    entropies.push_back(dist.entropy);
    if (tok == kEndToken) {
      break;
    }
  }

  const double reward = score(task.reward, scored_prediction(tokens));
  return make_rollout(std::move(tokens), std::move(logprobs),
                      std::move(entropies), reward, task.kind, task.prompt_id);
}

std::vector<double> grpo_gradient(const PolicyParams& params,
                                  const TrainBatch& batch,
                                  std::span<const EnvTask> tasks,
                                  const BatchMask& mask, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  if (tasks.size() != batch.groups.size() ||
      mask.keep.size() != batch.groups.size()) {
    throw std::invalid_argument("task alignment");
  }
  const std::size_t total_tokens = batch.total_tokens();
  if (total_tokens == 0) {
    throw std::invalid_argument("empty batch");
  }
  const int vocab = params.vocab_size;

  std::vector<double> grad(params.theta.size(), 0.0);
  std::vector<double> col(static_cast<std::size_t>(vocab), 0.0);

  for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const RolloutGroup& group = batch.groups[gi];
    const EnvTask& task = tasks[gi];
    if (!group.advantages.has_value() ||
        group.advantages->size() != group.rollouts.size()) {
      throw std::invalid_argument("advantages not computed");
    }
    if (mask.keep[gi].size() != group.rollouts.size()) {
      throw std::invalid_argument("mask shape");
    }
    if (!group.rollouts.empty() &&
        group.rollouts.front().prompt_id != task.prompt_id) {
      throw std::invalid_argument("task alignment");
    }

    std::size_t max_len = 0;
    for (std::size_t ri = 0; ri < group.rollouts.size(); ++ri) {
      if (mask.keep[gi][ri].size() != group.rollouts[ri].tokens.size()) {
        throw std::invalid_argument("mask shape");
      }
      max_len = std::max(max_len, group.rollouts[ri].tokens.size());
    }

    // The distribution at a step is shared by the whole group: features
    // depend on the step index, not on what was emitted.
    for (std::size_t t = 0; t < max_len; ++t) {
      const StepDistribution dist =
          policy_step_at(params, task, static_cast<int>(t), temperature);

      std::fill(col.begin(), col.end(), 0.0);
      double coeff_sum = 0.0;
      bool any = false;
      for (std::size_t ri = 0; ri < group.rollouts.size(); ++ri) {
        const Rollout& r = group.rollouts[ri];
        if (t >= r.tokens.size()) {
          continue;
        }
        const auto tok = static_cast<std::size_t>(r.tokens[t]);
        if (std::abs(dist.logprobs[tok] - r.logprobs[t]) > 1e-9) {
          throw std::runtime_error("off-policy batch");
        }
        const double a = (*group.advantages)[ri];
        if (a == 0.0 || mask.keep[gi][ri][t] == 0) {
          continue;
        }
        col[tok] += a;
        coeff_sum += a;
        any = true;
      }
      if (!any) {
        continue;
      }

      // grad log pi(y) = f (x) (onehot(y) - probs) / temperature
      const auto& f = task.features[t];
      for (int fi = 0; fi < params.feature_dim; ++fi) {
        const double x = f[static_cast<std::size_t>(fi)];
        if (x == 0.0) {
          continue;
        }
        const double scale = x / temperature;
        double* row = grad.data() + static_cast<std::size_t>(fi) * vocab;
        for (int v = 0; v < vocab; ++v) {
          const auto vi = static_cast<std::size_t>(v);
          row[vi] += scale * (col[vi] - coeff_sum * dist.probs[vi]);
        }
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(total_tokens);
  for (double& g : grad) {
    g *= inv;
  }
  return grad;
}

}  // namespace longrl
