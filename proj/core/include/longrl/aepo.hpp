#pragma once

#include <limits>
#include <optional>
#include <string_view>

#include "longrl/masking.hpp"
#include "longrl/types.hpp"

namespace longrl {

enum class AepoMode : std::uint8_t { keep_negatives, mask_negatives };

std::string_view to_string(AepoMode mode);
std::optional<AepoMode> aepo_mode_from_string(std::string_view name);

// Batch-entropy band controller. Above h_high the gradients of
// negative-advantage rollouts are masked, turning the update into
// advantage-weighted rejection-sampling fine-tuning that lowers entropy;
// below h_low negative gradients are reintroduced. Inside the band the
// previous mode is retained (hysteresis), which prevents mode thrashing.
struct AepoState {
  double h_low = 0.0;
  double h_high = std::numeric_limits<double>::infinity();
  AepoMode mode = AepoMode::keep_negatives;
  std::optional<double> last_entropy;
};

// Validates 0 <= h_low < h_high. Initial mode keeps negatives, so a
// (0, inf) band degenerates to the plain objective.
AepoState make_aepo_state(double h_low, double h_high);

// Applies one controller transition. Rejects negative or NaN entropies.
AepoState aepo_step(AepoState state, double batch_entropy_value);

// The mask a training step applies under the controller's current mode:
// mask-negatives delegates to aepo_negative_mask, keep-negatives to the
// configured clipping rule (all-ones when clipping is off).
BatchMask effective_mask(const AepoState& state, const TrainBatch& batch,
                         const MaskMode& clip_mode);

}  // namespace longrl
