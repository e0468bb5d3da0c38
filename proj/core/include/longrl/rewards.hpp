#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "longrl/types.hpp"

namespace longrl {

// 1.0 if gold occurs as a contiguous subsequence of prediction, else 0.0.
// Throws on empty gold.
double contains_reward(std::span<const Token> prediction,
                       std::span<const Token> gold);

// Dense similarity ratio 2*LCS(a, b) / (|a| + |b|) in [0, 1]. Symmetric,
// order-preserving, 0 for an empty prediction. Throws on empty gold.
double similarity_reward(std::span<const Token> prediction,
                         std::span<const Token> gold);

enum class RewardKind : std::uint8_t { contains, similarity };

std::string_view to_string(RewardKind kind);

// A task's scoring rule: which branch to apply and against which reference.
struct RewardSpec {
  RewardKind kind = RewardKind::contains;
  std::vector<Token> gold;
};

double score(const RewardSpec& spec, std::span<const Token> prediction);

}  // namespace longrl
