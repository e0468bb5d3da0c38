#include "longrl/advantage.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace longrl {

namespace {

double mean_of(std::span<const double> xs) {
  double m = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m += (xs[i] - m) / static_cast<double>(i + 1);
  }
  return m;
}

// Population std: the group/slice is the whole population, not a sample.
double population_std(std::span<const double> xs) {
  const double m = mean_of(xs);
  double acc = 0.0;
  for (const double x : xs) {
    acc += (x - m) * (x - m);
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

std::string_view to_string(AdvantageKind kind) {
  switch (kind) {
    case AdvantageKind::group_std:
      return "group-std";
    case AdvantageKind::batch_std:
      return "batch-std";
    case AdvantageKind::task_batch_std:
      return "task-batch-std";
  }
  return "unknown";
}

std::optional<AdvantageKind> advantage_kind_from_string(std::string_view name) {
  for (const AdvantageKind kind :
       {AdvantageKind::group_std, AdvantageKind::batch_std,
        AdvantageKind::task_batch_std}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double epsilon) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("degenerate group");
  }
  const double mean = mean_of(rewards);
  const double std = population_std(rewards);
  std::vector<double> advantages(rewards.size(), 0.0);
  if (std == 0.0) {
    return advantages;
  }
  const double denom = std::max(std, epsilon);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / denom;
  }
  return advantages;
}

void compute_advantages(TrainBatch& batch, const AdvantageMode& mode) {
  if (batch.groups.empty()) {
    throw std::invalid_argument("empty batch");
  }
  for (const RolloutGroup& g : batch.groups) {
    if (g.rollouts.size() < 2) {
      throw std::invalid_argument("degenerate group");
    }
  }

  // Pool rewards per task and over the whole batch.
  std::map<TaskKind, std::vector<double>> task_rewards;
  std::vector<double> all_rewards;
  for (const RolloutGroup& g : batch.groups) {
    for (const Rollout& r : g.rollouts) {
      task_rewards[r.task].push_back(r.reward);
      all_rewards.push_back(r.reward);
    }
  }
  for (const auto& [task, rewards] : task_rewards) {
    if (rewards.size() < 2) {
      throw std::invalid_argument("degenerate task slice");
    }
  }

  std::map<TaskKind, double> task_std;
  for (const auto& [task, rewards] : task_rewards) {
    task_std[task] = population_std(rewards);
  }
  const double batch_std = population_std(all_rewards);

  for (RolloutGroup& g : batch.groups) {
    std::vector<double> rewards;
    rewards.reserve(g.rollouts.size());
    for (const Rollout& r : g.rollouts) {
      rewards.push_back(r.reward);
    }

    if (mode.kind == AdvantageKind::group_std) {
      g.advantages = group_advantages(rewards, mode.epsilon);
      continue;
    }

    const double group_mean = mean_of(rewards);
    std::vector<double> advantages(rewards.size(), 0.0);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      const double std = mode.kind == AdvantageKind::batch_std
                             ? batch_std
                             : task_std.at(g.rollouts[i].task);
      if (std == 0.0) {
        continue;  // degenerate slice: no signal
      }
      advantages[i] = (rewards[i] - group_mean) / std::max(std, mode.epsilon);
    }
    g.advantages = std::move(advantages);
  }
}

}  // namespace longrl
