#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "longrl/advantage.hpp"
#include "longrl/env.hpp"
#include "longrl/types.hpp"

namespace longrl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which batch sampler the trainer uses: the task-balanced sampler or the
// conventional shuffled baseline.
enum class SamplerKind : std::uint8_t { balanced, shuffled };

std::string_view to_string(SamplerKind kind);
std::optional<SamplerKind> sampler_kind_from_string(std::string_view name);

struct AepoBand {
  double h_low = 0.0;
  double h_high = 0.0;
};

// Full description of one training run. Defaults are the toy-scale values;
// every field can come from the JSON config file or a CLI override.
struct RunConfig {
  int group_size = 8;
  int batch_groups = 20;
  double learning_rate = 0.05;
  double temperature = 0.7;
  double top_p = 0.95;
  AdvantageMode advantage{};
  MaskKind mask_kind = MaskKind::none;
  std::optional<double> tau_token;     // resolved from a warmup batch if unset
  std::optional<double> tau_sequence;  // resolved from a warmup batch if unset
  std::optional<AepoBand> aepo;        // absent = controller degenerate (0, inf)
  SamplerKind sampler = SamplerKind::balanced;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 500;
  int samples_per_task = 64;
  EnvConfig env{};
  std::vector<StageLimits> curriculum = {
      {16, 32, 8, 200},
      {32, 96, 12, 200},
      {96, 192, 24, 0},
  };
  std::optional<std::string> init_params;  // params file to resume from
};

// Throws ConfigError with the offending field named.
void validate(const RunConfig& config);

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one "--key value" style override; throws ConfigError on unknown
// keys or unparsable values. `tasks` takes a comma-separated list and
// `curriculum` a JSON array of stage objects.
void apply_override(RunConfig& config, std::string_view key,
                    std::string_view value);

}  // namespace longrl
