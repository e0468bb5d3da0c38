#include "longrl/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "longrl/rng.hpp"

namespace longrl {

void validate_index(const DatasetIndex& index) {
  std::unordered_set<std::string> seen;
  seen.reserve(index.entries.size());
  for (const IndexEntry& e : index.entries) {
    if (!seen.insert(e.sample_id).second) {
      throw std::invalid_argument("duplicate sample_id: " + e.sample_id);
    }
  }
}

DatasetIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open index file: " + path.string());
  }
  DatasetIndex index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad index record at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
    IndexEntry entry;
    entry.sample_id = record.at("sample_id").get<std::string>();
    const auto task = task_kind_from_string(record.at("task").get<std::string>());
    if (!task) {
      throw std::runtime_error("unknown task at line " + std::to_string(line_no));
    }
    entry.task = *task;
    if (record.contains("passk") && !record["passk"].is_null()) {
      entry.passk = record["passk"].get<double>();
    }
    index.entries.push_back(std::move(entry));
  }
  validate_index(index);
  return index;
}

void save_index(const DatasetIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write index file: " + path.string());
  }
  for (const IndexEntry& e : index.entries) {
    nlohmann::json record;
    record["sample_id"] = e.sample_id;
    record["task"] = std::string(to_string(e.task));
    record["passk"] = e.passk.has_value() ? nlohmann::json(*e.passk)
                                          : nlohmann::json(nullptr);
    out << record.dump() << '\n';
  }
}

DatasetIndex stratified_subsample(const DatasetIndex& index, int n_bins,
                                  int per_bin, std::uint64_t seed) {
  if (n_bins < 1 || per_bin < 1) {
    throw std::invalid_argument("n_bins and per_bin must be positive");
  }
  validate_index(index);

  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const IndexEntry& e = index.entries[i];
    if (!e.passk.has_value()) {
      throw std::invalid_argument("missing pass@k");
    }
    const double p = std::clamp(*e.passk, 0.0, 1.0);
    auto bin = static_cast<std::size_t>(p * n_bins);
    bin = std::min(bin, static_cast<std::size_t>(n_bins - 1));
    bins[bin].push_back(i);
  }

  Rng rng(seed);
  DatasetIndex out;
  for (auto& bin : bins) {
    const std::size_t take = std::min(bin.size(), static_cast<std::size_t>(per_bin));
    rng.shuffle(bin);
    for (std::size_t k = 0; k < take; ++k) {
      out.entries.push_back(index.entries[bin[k]]);
    }
  }
  return out;
}

std::vector<std::vector<std::string>> balanced_batches(
    const DatasetIndex& index, int batch_groups, std::uint64_t seed) {
  if (batch_groups < 1) {
    throw std::invalid_argument("batch_groups must be positive");
  }
  validate_index(index);

  // Group ids per task; std::map fixes the task iteration order.
  std::map<TaskKind, std::vector<std::string>> per_task;
  for (const IndexEntry& e : index.entries) {
    per_task[e.task].push_back(e.sample_id);
  }
  if (per_task.empty()) {
    return {};
  }
  const auto n_tasks = static_cast<int>(per_task.size());
  if (batch_groups % n_tasks != 0) {
    throw std::invalid_argument("batch not divisible by task count");
  }
  const auto quota = static_cast<std::size_t>(batch_groups / n_tasks);

  Rng rng(seed);
  std::size_t n_batches = SIZE_MAX;
  for (auto& [task, ids] : per_task) {
    rng.shuffle(ids);
    n_batches = std::min(n_batches, ids.size() / quota);
  }

  std::vector<std::vector<std::string>> batches;
  batches.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    auto& batch = batches.emplace_back();
    batch.reserve(static_cast<std::size_t>(batch_groups));
    for (const auto& [task, ids] : per_task) {
      for (std::size_t k = 0; k < quota; ++k) {
        batch.push_back(ids[b * quota + k]);
      }
    }
  }
  return batches;
}

std::vector<std::vector<std::string>> shuffled_batches(
    const DatasetIndex& index, int batch_groups, std::uint64_t seed) {
  if (batch_groups < 1) {
    throw std::invalid_argument("batch_groups must be positive");
  }
  validate_index(index);

  std::vector<std::string> ids;
  ids.reserve(index.entries.size());
  for (const IndexEntry& e : index.entries) {
    ids.push_back(e.sample_id);
  }
  Rng rng(seed);
  rng.shuffle(ids);

  const auto width = static_cast<std::size_t>(batch_groups);
  std::vector<std::vector<std::string>> batches;
  for (std::size_t start = 0; start + width <= ids.size(); start += width) {
    batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                         ids.begin() + static_cast<std::ptrdiff_t>(start + width));
  }
  return batches;
}

}  // namespace longrl
