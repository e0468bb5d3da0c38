#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace longrl {

// Per-step observables, one JSON record per line in the metrics log. The
// schema is frozen by these field names.
struct StepMetrics {
  std::int64_t step = 0;
  int stage_index = 0;
  double mean_reward = 0.0;
  std::map<std::string, double> per_task_mean_reward;
  double batch_entropy = 0.0;
  std::string aepo_mode;
  double mean_response_len = 0.0;
  double masked_token_fraction = 0.0;
  double grad_norm = 0.0;
};

std::string metrics_to_json_line(const StepMetrics& m);
StepMetrics metrics_from_json_line(const std::string& line);

std::vector<StepMetrics> load_metrics(const std::filesystem::path& path);

}  // namespace longrl
