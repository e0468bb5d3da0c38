#include "longrl/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace longrl {

double token_entropy(std::span<const double> probs) {
  if (probs.empty()) {
    throw std::invalid_argument("empty distribution");
  }
  double sum = 0.0;
  for (const double p : probs) {
    if (p < 0.0 || std::isnan(p)) {
      throw std::invalid_argument("negative probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("unnormalized distribution");
  }
  double h = 0.0;
  for (const double p : probs) {
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  return h < 0.0 ? 0.0 : h;
}

double token_entropy(const DistributionRow& row) {
  return token_entropy(std::span<const double>(row.probs));
}

namespace {

// Running mean keeps the all-equal case exact: once the mean equals the
// inputs, each increment is exactly zero.
double running_mean(std::span<const double> xs) {
  double m = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m += (xs[i] - m) / static_cast<double>(i + 1);
  }
  return m;
}

}  // namespace

double sequence_entropy(const Rollout& r) {
  if (r.entropies.empty()) {
    throw std::invalid_argument("empty sequence");
  }
  return running_mean(r.entropies);
}

double batch_entropy(const TrainBatch& batch) {
  if (batch.groups.empty() || batch.rollout_count() == 0) {
    throw std::invalid_argument("empty batch");
  }
  double m = 0.0;
  std::size_t n = 0;
  for (const RolloutGroup& g : batch.groups) {
    for (const Rollout& r : g.rollouts) {
      m += (sequence_entropy(r) - m) / static_cast<double>(++n);
    }
  }
  return m;
}

}  // namespace longrl
