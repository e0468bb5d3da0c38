// Independent oracles for the test and acceptance suites. Everything here
// recomputes expected values through a different route than the library:
// subset enumeration instead of the LCS table, direct formula loops instead
// of the advantage module, central finite differences instead of the
// analytic gradient.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "longrl/env.hpp"
#include "longrl/masking.hpp"
#include "longrl/rng.hpp"
#include "longrl/types.hpp"

namespace oracles {

// Longest common subsequence by enumerating every subsequence of the
// shorter side and checking it against the longer side. Exponential, only
// for short inputs.
inline std::size_t lcs_by_enumeration(std::span<const longrl::Token> a,
                                      std::span<const longrl::Token> b) {
  const auto shorter = a.size() <= b.size() ? a : b;
  const auto longer = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  const auto n = shorter.size();
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    const auto count = static_cast<std::size_t>(std::popcount(mask));
    if (count <= best) {
      continue;
    }
    std::size_t pos = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1ULL << i))) {
        continue;
      }
      while (pos < longer.size() && longer[pos] != shorter[i]) {
        ++pos;
      }
      if (pos == longer.size()) {
        ok = false;
      } else {
        ++pos;
      }
    }
    if (ok) {
      best = count;
    }
  }
  return best;
}

inline double similarity_by_enumeration(std::span<const longrl::Token> a,
                                        std::span<const longrl::Token> b) {
  if (a.empty() || b.empty()) {
    return 0.0;
  }
  return 2.0 * static_cast<double>(lcs_by_enumeration(a, b)) /
         static_cast<double>(a.size() + b.size());
}

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (const double x : xs) {
    s += x;
  }
  return s / static_cast<double>(xs.size());
}

inline double pop_std(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (const double x : xs) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// Straight-line reimplementation of the three advantage denominators:
// numerator is reward minus group mean; denominator is the mode's spread
// (zero spread -> zero advantage, otherwise floored at epsilon).
// Returns advantages in batch order, one vector per group.
inline std::vector<std::vector<double>> advantage_oracle(
    const longrl::TrainBatch& batch, longrl::AdvantageKind kind,
    double epsilon) {
  std::vector<double> all;
  std::map<longrl::TaskKind, std::vector<double>> by_task;
  for (const auto& g : batch.groups) {
    for (const auto& r : g.rollouts) {
      all.push_back(r.reward);
      by_task[r.task].push_back(r.reward);
    }
  }
  const double batch_sigma = pop_std(all);

  std::vector<std::vector<double>> out;
  for (const auto& g : batch.groups) {
    std::vector<double> rewards;
    for (const auto& r : g.rollouts) {
      rewards.push_back(r.reward);
    }
    const double group_mean = mean(rewards);
    const double group_sigma = pop_std(rewards);
    std::vector<double> adv(rewards.size(), 0.0);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      double sigma = 0.0;
      switch (kind) {
        case longrl::AdvantageKind::group_std:
          sigma = group_sigma;
          break;
        case longrl::AdvantageKind::batch_std:
          sigma = batch_sigma;
          break;
        case longrl::AdvantageKind::task_batch_std:
          sigma = pop_std(by_task.at(g.rollouts[i].task));
          break;
      }
      if (sigma != 0.0) {
        adv[i] = (rewards[i] - group_mean) / std::max(sigma, epsilon);
      }
    }
    out.push_back(std::move(adv));
  }
  return out;
}

// Value of the on-policy surrogate
//   J(theta) = (1/N) sum_i A_i sum_t mask(i,t) exp(logpi_theta - logpi_stored)
// whose gradient at theta = theta_old is what grpo_gradient returns.
inline double surrogate_value(const longrl::PolicyParams& params,
                              const longrl::TrainBatch& batch,
                              std::span<const longrl::EnvTask> tasks,
                              const longrl::BatchMask& mask,
                              double temperature) {
  double value = 0.0;
  for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const auto& group = batch.groups[gi];
    for (std::size_t ri = 0; ri < group.rollouts.size(); ++ri) {
      const auto& r = group.rollouts[ri];
      const double a = (*group.advantages)[ri];
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        if (mask.keep[gi][ri][t] == 0) {
          continue;
        }
        const auto dist = longrl::policy_step_at(
            params, tasks[gi], static_cast<int>(t), temperature);
        const double ratio =
            std::exp(dist.logprobs[static_cast<std::size_t>(r.tokens[t])] -
                     r.logprobs[t]);
        value += a * ratio;
      }
    }
  }
  return value / static_cast<double>(batch.total_tokens());
}

// Central finite differences of the surrogate, coordinate by coordinate.
inline std::vector<double> fd_gradient(const longrl::PolicyParams& params,
                                       const longrl::TrainBatch& batch,
                                       std::span<const longrl::EnvTask> tasks,
                                       const longrl::BatchMask& mask,
                                       double temperature, double step) {
  std::vector<double> grad(params.theta.size(), 0.0);
  longrl::PolicyParams probe = params;
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    probe.theta[i] = params.theta[i] + step;
    const double up = surrogate_value(probe, batch, tasks, mask, temperature);
    probe.theta[i] = params.theta[i] - step;
    const double down = surrogate_value(probe, batch, tasks, mask, temperature);
    probe.theta[i] = params.theta[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (const double x : xs) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace oracles
