#include "longrl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace longrl {

using nlohmann::json;

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::balanced:
      return "balanced";
    case SamplerKind::shuffled:
      return "shuffled";
  }
  return "unknown";
}

std::optional<SamplerKind> sampler_kind_from_string(std::string_view name) {
  for (const SamplerKind kind : {SamplerKind::balanced, SamplerKind::shuffled}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

void validate(const RunConfig& config) {
  if (config.group_size < 2) {
    throw ConfigError("group_size must be at least 2");
  }
  if (config.batch_groups < 1) {
    throw ConfigError("batch_groups must be positive");
  }
  if (config.sampler == SamplerKind::balanced && !config.env.tasks.empty() &&
      config.batch_groups % static_cast<int>(config.env.tasks.size()) != 0) {
    throw ConfigError("batch_groups not divisible by task count");
  }
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(config.top_p > 0.0 && config.top_p <= 1.0)) {
    throw ConfigError("top_p must be in (0, 1]");
  }
  if (!(config.advantage.epsilon > 0.0)) {
    throw ConfigError("advantage_epsilon must be positive");
  }
  if (config.aepo.has_value()) {
    if (std::isnan(config.aepo->h_low) || std::isnan(config.aepo->h_high) ||
        config.aepo->h_low < 0.0 || !(config.aepo->h_low < config.aepo->h_high)) {
      throw ConfigError("aepo band requires 0 <= h_low < h_high");
    }
  }
  if (config.total_steps < 0) {
    throw ConfigError("total_steps must be non-negative");
  }
  if (config.samples_per_task < 1) {
    throw ConfigError("samples_per_task must be positive");
  }
  if (config.env.vocab_size < 8) {
    throw ConfigError("vocab_size must be at least 8");
  }
  if (config.env.feature_dim < 1) {
    throw ConfigError("feature_dim must be positive");
  }
  if (config.env.tasks.empty()) {
    throw ConfigError("tasks must not be empty");
  }
  for (std::size_t i = 0; i < config.env.tasks.size(); ++i) {
    for (std::size_t j = i + 1; j < config.env.tasks.size(); ++j) {
      if (config.env.tasks[i] == config.env.tasks[j]) {
        throw ConfigError("tasks contains a duplicate");
      }
    }
  }
  if (config.curriculum.empty()) {
    throw ConfigError("curriculum must have at least one stage");
  }
  int prev_max_input = 0;
  for (const StageLimits& stage : config.curriculum) {
    if (stage.min_input < 1 || stage.max_input < stage.min_input) {
      throw ConfigError("stage input limits invalid");
    }
    if (stage.max_output < 1) {
      throw ConfigError("stage max_output must be positive");
    }
    if (stage.max_input <= prev_max_input && prev_max_input > 0) {
      throw ConfigError("stage max_input must increase");
    }
    if (stage.steps < 0) {
      throw ConfigError("stage steps must be non-negative");
    }
    prev_max_input = stage.max_input;
  }
}

namespace {

double parse_bound(const json& j, const char* field) {
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") {
      return std::numeric_limits<double>::infinity();
    }
  }
  throw ConfigError(std::string("bad value for ") + field);
}

template <typename T, typename Parse>
void read_field(const json& j, const char* key, T& out, Parse parse) {
  if (j.contains(key) && !j[key].is_null()) {
    out = parse(j[key]);
  }
}

StageLimits stage_from_json(const json& j) {
  StageLimits stage;
  stage.min_input = j.at("min_input").get<int>();
  stage.max_input = j.at("max_input").get<int>();
  stage.max_output = j.at("max_output").get<int>();
  stage.steps = j.value("steps", 0);
  return stage;
}

json stage_to_json(const StageLimits& stage) {
  return json{{"min_input", stage.min_input},
              {"max_input", stage.max_input},
              {"max_output", stage.max_output},
              {"steps", stage.steps}};
}

std::vector<TaskKind> tasks_from_json(const json& arr) {
  if (!arr.is_array()) {
    throw ConfigError("tasks must be an array");
  }
  std::vector<TaskKind> tasks;
  for (const auto& item : arr) {
    const auto kind = task_kind_from_string(item.get<std::string>());
    if (!kind) {
      throw ConfigError("unknown task: " + item.get<std::string>());
    }
    tasks.push_back(*kind);
  }
  return tasks;
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be an object");
  }

  RunConfig config;
  try {
    read_field(j, "group_size", config.group_size,
               [](const json& v) { return v.get<int>(); });
    read_field(j, "batch_groups", config.batch_groups,
               [](const json& v) { return v.get<int>(); });
    read_field(j, "learning_rate", config.learning_rate,
               [](const json& v) { return v.get<double>(); });
    read_field(j, "temperature", config.temperature,
               [](const json& v) { return v.get<double>(); });
    read_field(j, "top_p", config.top_p,
               [](const json& v) { return v.get<double>(); });
    read_field(j, "advantage_mode", config.advantage.kind, [](const json& v) {
      const auto kind = advantage_kind_from_string(v.get<std::string>());
      if (!kind) {
        throw ConfigError("unknown advantage_mode: " + v.get<std::string>());
      }
      return *kind;
    });
    read_field(j, "advantage_epsilon", config.advantage.epsilon,
               [](const json& v) { return v.get<double>(); });
    read_field(j, "mask_mode", config.mask_kind, [](const json& v) {
      const auto kind = mask_kind_from_string(v.get<std::string>());
      if (!kind) {
        throw ConfigError("unknown mask_mode: " + v.get<std::string>());
      }
      return *kind;
    });
    if (j.contains("tau_token") && !j["tau_token"].is_null()) {
      config.tau_token = j["tau_token"].get<double>();
    }
    if (j.contains("tau_sequence") && !j["tau_sequence"].is_null()) {
      config.tau_sequence = j["tau_sequence"].get<double>();
    }
    if (j.contains("aepo") && !j["aepo"].is_null()) {
      AepoBand band;
      band.h_low = parse_bound(j["aepo"].at("h_low"), "aepo.h_low");
      band.h_high = parse_bound(j["aepo"].at("h_high"), "aepo.h_high");
      config.aepo = band;
    }
    read_field(j, "sampler", config.sampler, [](const json& v) {
      const auto kind = sampler_kind_from_string(v.get<std::string>());
      if (!kind) {
        throw ConfigError("unknown sampler: " + v.get<std::string>());
      }
      return *kind;
    });
    read_field(j, "seed", config.seed,
               [](const json& v) { return v.get<std::uint64_t>(); });
    read_field(j, "total_steps", config.total_steps,
               [](const json& v) { return v.get<std::int64_t>(); });
    read_field(j, "samples_per_task", config.samples_per_task,
               [](const json& v) { return v.get<int>(); });
    if (j.contains("env") && !j["env"].is_null()) {
      const json& env = j["env"];
      read_field(env, "vocab_size", config.env.vocab_size,
                 [](const json& v) { return v.get<int>(); });
      read_field(env, "feature_dim", config.env.feature_dim,
                 [](const json& v) { return v.get<int>(); });
      if (env.contains("tasks") && !env["tasks"].is_null()) {
        config.env.tasks = tasks_from_json(env["tasks"]);
      }
    }
    if (j.contains("curriculum") && !j["curriculum"].is_null()) {
      if (!j["curriculum"].is_array() || j["curriculum"].empty()) {
        throw ConfigError("curriculum must be a non-empty array");
      }
      config.curriculum.clear();
      for (const auto& item : j["curriculum"]) {
        config.curriculum.push_back(stage_from_json(item));
      }
    }
    if (j.contains("init_params") && !j["init_params"].is_null()) {
      config.init_params = j["init_params"].get<std::string>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }

  validate(config);
  return config;
}

std::string run_config_to_json(const RunConfig& config) {
  json j;
  j["group_size"] = config.group_size;
  j["batch_groups"] = config.batch_groups;
  j["learning_rate"] = config.learning_rate;
  j["temperature"] = config.temperature;
  j["top_p"] = config.top_p;
  j["advantage_mode"] = std::string(to_string(config.advantage.kind));
  j["advantage_epsilon"] = config.advantage.epsilon;
  j["mask_mode"] = std::string(to_string(config.mask_kind));
  j["tau_token"] =
      config.tau_token.has_value() ? json(*config.tau_token) : json(nullptr);
  j["tau_sequence"] = config.tau_sequence.has_value() ? json(*config.tau_sequence)
                                                      : json(nullptr);
  if (config.aepo.has_value()) {
    j["aepo"] = json{{"h_low", config.aepo->h_low},
                     {"h_high", std::isinf(config.aepo->h_high)
                                    ? json("inf")
                                    : json(config.aepo->h_high)}};
  } else {
    j["aepo"] = nullptr;
  }
  j["sampler"] = std::string(to_string(config.sampler));
  j["seed"] = config.seed;
  j["total_steps"] = config.total_steps;
  j["samples_per_task"] = config.samples_per_task;
  j["env"] = json{{"vocab_size", config.env.vocab_size},
                  {"feature_dim", config.env.feature_dim}};
  json tasks = json::array();
  for (const TaskKind kind : config.env.tasks) {
    tasks.push_back(std::string(to_string(kind)));
  }
  j["env"]["tasks"] = tasks;
  json curriculum = json::array();
  for (const StageLimits& stage : config.curriculum) {
    curriculum.push_back(stage_to_json(stage));
  }
  j["curriculum"] = curriculum;
  j["init_params"] = config.init_params.has_value() ? json(*config.init_params)
                                                    : json(nullptr);
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(buffer.str());
}

namespace {

double parse_double(std::string_view key, std::string_view value) {
  if (value == "inf" || value == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(value), &used);
    if (used != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + std::string(key) + ": " +
                      std::string(value));
  }
}

std::int64_t parse_int(std::string_view key, std::string_view value) {
  std::int64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("bad value for " + std::string(key) + ": " +
                      std::string(value));
  }
  return out;
}

}  // namespace

void apply_override(RunConfig& config, std::string_view key,
                    std::string_view value) {
  const std::string v(value);
  if (key == "group_size") {
    config.group_size = static_cast<int>(parse_int(key, value));
  } else if (key == "batch_groups") {
    config.batch_groups = static_cast<int>(parse_int(key, value));
  } else if (key == "learning_rate") {
    config.learning_rate = parse_double(key, value);
  } else if (key == "temperature") {
    config.temperature = parse_double(key, value);
  } else if (key == "top_p") {
    config.top_p = parse_double(key, value);
  } else if (key == "advantage_mode") {
    const auto kind = advantage_kind_from_string(v);
    if (!kind) {
      throw ConfigError("unknown advantage_mode: " + v);
    }
    config.advantage.kind = *kind;
  } else if (key == "advantage_epsilon") {
    config.advantage.epsilon = parse_double(key, value);
  } else if (key == "mask_mode") {
    const auto kind = mask_kind_from_string(v);
    if (!kind) {
      throw ConfigError("unknown mask_mode: " + v);
    }
    config.mask_kind = *kind;
  } else if (key == "tau_token") {
    config.tau_token = parse_double(key, value);
  } else if (key == "tau_sequence") {
    config.tau_sequence = parse_double(key, value);
  } else if (key == "aepo_h_low") {
    if (!config.aepo.has_value()) {
      config.aepo = AepoBand{};
      config.aepo->h_high = std::numeric_limits<double>::infinity();
    }
    config.aepo->h_low = parse_double(key, value);
  } else if (key == "aepo_h_high") {
    if (!config.aepo.has_value()) {
      config.aepo = AepoBand{};
    }
    config.aepo->h_high = parse_double(key, value);
  } else if (key == "sampler") {
    const auto kind = sampler_kind_from_string(v);
    if (!kind) {
      throw ConfigError("unknown sampler: " + v);
    }
    config.sampler = *kind;
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "total_steps" || key == "steps") {
    config.total_steps = parse_int(key, value);
  } else if (key == "samples_per_task") {
    config.samples_per_task = static_cast<int>(parse_int(key, value));
  } else if (key == "vocab_size") {
    config.env.vocab_size = static_cast<int>(parse_int(key, value));
  } else if (key == "feature_dim") {
    config.env.feature_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "tasks") {
    std::vector<TaskKind> tasks;
    std::size_t start = 0;
    while (start <= v.size()) {
      const std::size_t comma = v.find(',', start);
      const std::string name =
          v.substr(start, comma == std::string::npos ? v.size() - start
                                                     : comma - start);
      if (!name.empty()) {
        const auto kind = task_kind_from_string(name);
        if (!kind) {
          throw ConfigError("unknown task: " + name);
        }
        tasks.push_back(*kind);
      }
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (tasks.empty()) {
      throw ConfigError("tasks override is empty");
    }
    config.env.tasks = std::move(tasks);
  } else if (key == "curriculum") {
    json arr;
    try {
      arr = json::parse(v);
    } catch (const json::exception&) {
      throw ConfigError("curriculum override is not valid JSON");
    }
    if (!arr.is_array() || arr.empty()) {
      throw ConfigError("curriculum override must be a non-empty array");
    }
    config.curriculum.clear();
    try {
      for (const auto& item : arr) {
        config.curriculum.push_back(stage_from_json(item));
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad curriculum stage: ") + e.what());
    }
  } else if (key == "init_params") {
    config.init_params = v;
  } else {
    throw ConfigError("unknown config key: " + std::string(key));
  }
}

}  // namespace longrl
