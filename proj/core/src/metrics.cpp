#include "longrl/metrics.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace longrl {

using nlohmann::json;

std::string metrics_to_json_line(const StepMetrics& m) {
  json j;
  j["step"] = m.step;
  j["stage_index"] = m.stage_index;
  j["mean_reward"] = m.mean_reward;
  j["per_task_mean_reward"] = json(m.per_task_mean_reward);
  j["batch_entropy"] = m.batch_entropy;
  j["aepo_mode"] = m.aepo_mode;
  j["mean_response_len"] = m.mean_response_len;
  j["masked_token_fraction"] = m.masked_token_fraction;
  j["grad_norm"] = m.grad_norm;
  return j.dump();
}

StepMetrics metrics_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad metrics record: ") + e.what());
  }
  StepMetrics m;
  m.step = j.at("step").get<std::int64_t>();
  m.stage_index = j.at("stage_index").get<int>();
  m.mean_reward = j.at("mean_reward").get<double>();
  m.per_task_mean_reward =
      j.at("per_task_mean_reward").get<std::map<std::string, double>>();
  m.batch_entropy = j.at("batch_entropy").get<double>();
  m.aepo_mode = j.at("aepo_mode").get<std::string>();
  m.mean_response_len = j.at("mean_response_len").get<double>();
  m.masked_token_fraction = j.at("masked_token_fraction").get<double>();
  m.grad_norm = j.at("grad_norm").get<double>();
  return m;
}

std::vector<StepMetrics> load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open metrics file: " + path.string());
  }
  std::vector<StepMetrics> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      out.push_back(metrics_from_json_line(line));
    }
  }
  return out;
}

}  // namespace longrl
