#include "longrl/masking.hpp"

#include <stdexcept>

#include "longrl/entropy.hpp"

namespace longrl {

std::size_t BatchMask::total_tokens() const {
  std::size_t n = 0;
  for (const auto& group : keep) {
    for (const auto& rollout : group) {
      n += rollout.size();
    }
  }
  return n;
}

std::size_t BatchMask::zero_count() const {
  std::size_t n = 0;
  for (const auto& group : keep) {
    for (const auto& rollout : group) {
      for (const std::uint8_t k : rollout) {
        n += k == 0 ? 1 : 0;
      }
    }
  }
  return n;
}

BatchMask all_ones_mask(const TrainBatch& batch) {
  BatchMask mask;
  mask.keep.reserve(batch.groups.size());
  for (const RolloutGroup& g : batch.groups) {
    auto& group = mask.keep.emplace_back();
    group.reserve(g.rollouts.size());
    for (const Rollout& r : g.rollouts) {
      group.emplace_back(r.tokens.size(), std::uint8_t{1});
    }
  }
  return mask;
}

namespace {

void require_advantages(const TrainBatch& batch) {
  for (const RolloutGroup& g : batch.groups) {
    if (!g.advantages.has_value() ||
        g.advantages->size() != g.rollouts.size()) {
      throw std::invalid_argument("advantages not computed");
    }
  }
}

}  // namespace

BatchMask clip_mask(const TrainBatch& batch, const MaskMode& mode) {
  require_advantages(batch);
  BatchMask mask = all_ones_mask(batch);
  if (mode.kind == MaskKind::none) {
    return mask;
  }
  for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const RolloutGroup& g = batch.groups[gi];
    for (std::size_t ri = 0; ri < g.rollouts.size(); ++ri) {
      if ((*g.advantages)[ri] >= 0.0) {
        continue;  // positive advantages are never clipped
      }
      const Rollout& r = g.rollouts[ri];
      auto& keep = mask.keep[gi][ri];
      if (mode.kind == MaskKind::token_level) {
        for (std::size_t t = 0; t < r.entropies.size(); ++t) {
          if (r.entropies[t] > mode.tau_token) {
            keep[t] = 0;
          }
        }
      } else if (sequence_entropy(r) > mode.tau_sequence) {
        keep.assign(keep.size(), 0);
      }
    }
  }
  return mask;
}

BatchMask aepo_negative_mask(const TrainBatch& batch) {
  require_advantages(batch);
  BatchMask mask = all_ones_mask(batch);
  for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const RolloutGroup& g = batch.groups[gi];
    for (std::size_t ri = 0; ri < g.rollouts.size(); ++ri) {
      if ((*g.advantages)[ri] < 0.0) {
        mask.keep[gi][ri].assign(g.rollouts[ri].tokens.size(), 0);
      }
    }
  }
  return mask;
}

}  // namespace longrl
