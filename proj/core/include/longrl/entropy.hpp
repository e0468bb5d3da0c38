#pragma once

#include <span>
#include <vector>

#include "longrl/types.hpp"

namespace longrl {

// A full next-token distribution over the vocabulary.
struct DistributionRow {
  std::vector<double> probs;  // each >= 0, summing to 1
};

// Shannon entropy -sum p ln p in nats, with 0 * ln(0) = 0. Rejects rows
// that do not sum to 1 (within 1e-9) or contain negative entries.
double token_entropy(std::span<const double> probs);
double token_entropy(const DistributionRow& row);

// Arithmetic mean of the rollout's stored per-token entropies.
double sequence_entropy(const Rollout& r);

// Mean over every rollout in the batch of its sequence entropy: sequences
// are weighted uniformly regardless of length.
double batch_entropy(const TrainBatch& batch);

}  // namespace longrl
