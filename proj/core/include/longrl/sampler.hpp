#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "longrl/types.hpp"

namespace longrl {

// One dataset record. passk is the pre-inference pass@k score used for
// stratified subsampling; it stays unset for indices that never went
// through pre-inference.
struct IndexEntry {
  std::string sample_id;
  TaskKind task = TaskKind::general_rc;
  std::optional<double> passk;
};

struct DatasetIndex {
  std::vector<IndexEntry> entries;
};

// Throws on duplicate sample ids.
void validate_index(const DatasetIndex& index);

// Line-delimited JSON, one record per line with fields sample_id, task,
// passk (null when unset).
DatasetIndex load_index(const std::filesystem::path& path);
void save_index(const DatasetIndex& index, const std::filesystem::path& path);

// Difficulty-balanced pre-sampling: partitions [0, 1] into n_bins
// equal-width bins by pass@k and uniformly draws min(per_bin, bin size)
// entries from each bin. Deterministic for a fixed seed. Requires every
// entry to carry a pass@k score.
DatasetIndex stratified_subsample(const DatasetIndex& index, int n_bins,
                                  int per_bin, std::uint64_t seed);

// One epoch of task-balanced batches: every batch holds exactly
// batch_groups / n_tasks sample ids per task, drawn without replacement in
// seeded shuffled order; the tail that cannot fill a balanced batch is
// dropped. Throws if batch_groups is not divisible by the number of
// distinct tasks present.
std::vector<std::vector<std::string>> balanced_batches(
    const DatasetIndex& index, int batch_groups, std::uint64_t seed);

// The conventional baseline sampler: one seeded shuffle of all entries,
// chunked into batches of batch_groups ids; tail dropped. Batch task
// composition varies freely.
std::vector<std::vector<std::string>> shuffled_batches(
    const DatasetIndex& index, int batch_groups, std::uint64_t seed);

}  // namespace longrl
