#pragma once

#include <cstdint>
#include <vector>

#include "longrl/types.hpp"

namespace longrl {

// Per-token keep mask aligned with a batch: 1 keeps the token in the
// objective's numerator, 0 drops it. The token-count denominator is never
// affected by masking.
struct BatchMask {
  std::vector<std::vector<std::vector<std::uint8_t>>> keep;  // [group][rollout][token]

  std::size_t total_tokens() const;
  std::size_t zero_count() const;

  bool operator==(const BatchMask&) const = default;
};

BatchMask all_ones_mask(const TrainBatch& batch);

// Negative-gradient clipping indicator. A token is dropped iff its rollout
// has a negative advantage and the entropy statistic selected by the mode
// strictly exceeds its threshold: the token's own entropy for token-level,
// the rollout's mean entropy for sequence-level. Mode none keeps everything.
BatchMask clip_mask(const TrainBatch& batch, const MaskMode& mode);

// Drops every token of every rollout with a negative advantage.
BatchMask aepo_negative_mask(const TrainBatch& batch);

}  // namespace longrl
