#include "longrl/aepo.hpp"

#include <cmath>
#include <stdexcept>

namespace longrl {

std::string_view to_string(AepoMode mode) {
  switch (mode) {
    case AepoMode::keep_negatives:
      return "keep-negatives";
    case AepoMode::mask_negatives:
      return "mask-negatives";
  }
  return "unknown";
}

std::optional<AepoMode> aepo_mode_from_string(std::string_view name) {
  for (const AepoMode mode :
       {AepoMode::keep_negatives, AepoMode::mask_negatives}) {
    if (to_string(mode) == name) {
      return mode;
    }
  }
  return std::nullopt;
}

AepoState make_aepo_state(double h_low, double h_high) {
  if (std::isnan(h_low) || std::isnan(h_high) || h_low < 0.0 ||
      !(h_low < h_high)) {
    throw std::invalid_argument("invalid entropy band");
  }
  AepoState state;
  state.h_low = h_low;
  state.h_high = h_high;
  return state;
}

AepoState aepo_step(AepoState state, double batch_entropy_value) {
  if (!(batch_entropy_value >= 0.0)) {
    throw std::invalid_argument("invalid entropy");
  }
  if (batch_entropy_value > state.h_high) {
    state.mode = AepoMode::mask_negatives;
  } else if (batch_entropy_value < state.h_low) {
    state.mode = AepoMode::keep_negatives;
  }
  // inside [h_low, h_high]: mode unchanged
  state.last_entropy = batch_entropy_value;
  return state;
}

BatchMask effective_mask(const AepoState& state, const TrainBatch& batch,
                         const MaskMode& clip_mode) {
  if (state.mode == AepoMode::mask_negatives) {
    return aepo_negative_mask(batch);
  }
  return clip_mask(batch, clip_mode);
}

}  // namespace longrl
