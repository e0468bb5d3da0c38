#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "longrl/types.hpp"

namespace longrl {

// Which spread estimate normalizes the advantage denominator:
//   group_std      - population std of the rollout's own group
//   batch_std      - population std of every reward in the batch
//   task_batch_std - population std of all same-task rewards in the batch
enum class AdvantageKind : std::uint8_t { group_std, batch_std, task_batch_std };

std::string_view to_string(AdvantageKind kind);
std::optional<AdvantageKind> advantage_kind_from_string(std::string_view name);

struct AdvantageMode {
  AdvantageKind kind = AdvantageKind::group_std;
  double epsilon = 1e-8;  // floor for numerically tiny nonzero stds
};

// Group z-score with population std. A zero-variance group carries no
// learning signal and gets all-zero advantages. Throws for fewer than two
// rewards. epsilon = 0 applies the formula unfloored.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double epsilon = 0.0);

// Fills group.advantages for every group. The numerator is always the
// reward minus its own group mean; only the denominator varies by mode.
// A zero denominator yields zero advantages for the affected rollouts;
// otherwise the denominator is floored at mode.epsilon.
void compute_advantages(TrainBatch& batch, const AdvantageMode& mode);

}  // namespace longrl
