#include "longrl/rewards.hpp"

#include <algorithm>
#include <stdexcept>

namespace longrl {

double contains_reward(std::span<const Token> prediction,
                       std::span<const Token> gold) {
  if (gold.empty()) {
    throw std::invalid_argument("empty gold");
  }
  if (prediction.size() < gold.size()) {
    return 0.0;
  }
  const auto it = std::search(prediction.begin(), prediction.end(),
                              gold.begin(), gold.end());
  return it != prediction.end() ? 1.0 : 0.0;
}

double similarity_reward(std::span<const Token> prediction,
                         std::span<const Token> gold) {
  if (gold.empty()) {
    throw std::invalid_argument("empty gold");
  }
  if (prediction.empty()) {
    return 0.0;
  }
  // Classic two-row LCS table.
  const std::size_t n = prediction.size();
  const std::size_t m = gold.size();
  std::vector<std::size_t> prev(m + 1, 0);
  std::vector<std::size_t> curr(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (prediction[i - 1] == gold[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  const double lcs = static_cast<double>(prev[m]);
  return 2.0 * lcs / static_cast<double>(n + m);
}

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::contains:
      return "contains";
    case RewardKind::similarity:
      return "similarity";
  }
  return "unknown";
}

double score(const RewardSpec& spec, std::span<const Token> prediction) {
  switch (spec.kind) {
    case RewardKind::contains:
      return contains_reward(prediction, spec.gold);
    case RewardKind::similarity:
      return similarity_reward(prediction, spec.gold);
  }
  throw std::invalid_argument("unknown reward kind");
}

}  // namespace longrl
