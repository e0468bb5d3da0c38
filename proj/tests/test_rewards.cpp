#include <doctest.h>

#include <vector>

#include "longrl/rewards.hpp"
#include "longrl/rng.hpp"
#include "oracles.hpp"

using namespace longrl;

TEST_CASE("contains_reward is contiguous containment") {
  const std::vector<Token> pred = {7, 3, 9, 4};
  CHECK(contains_reward(pred, std::vector<Token>{3, 9}) == 1.0);
  CHECK(contains_reward(pred, std::vector<Token>{9, 3}) == 0.0);  // order matters
  CHECK(contains_reward(pred, pred) == 1.0);
  CHECK(contains_reward(std::vector<Token>{}, std::vector<Token>{1}) == 0.0);
  CHECK_THROWS_WITH(contains_reward(pred, std::vector<Token>{}), "empty gold");
}

TEST_CASE("similarity_reward matches the hand-computed ratio") {
  const std::vector<Token> a = {1, 2, 3, 4, 5};
  CHECK(similarity_reward(a, a) == 1.0);
  CHECK(similarity_reward(std::vector<Token>{1, 2}, std::vector<Token>{3, 4}) ==
        0.0);
  // LCS([1,2,3,4],[2,4]) = 2 -> 2*2/(4+2)
  CHECK(similarity_reward(std::vector<Token>{1, 2, 3, 4},
                          std::vector<Token>{2, 4}) ==
        doctest::Approx(2.0 * 2.0 / 6.0).epsilon(1e-12));
  CHECK(similarity_reward(std::vector<Token>{}, std::vector<Token>{1}) == 0.0);
  CHECK_THROWS_WITH(similarity_reward(a, std::vector<Token>{}), "empty gold");
}

TEST_CASE("similarity_reward properties against the enumeration oracle") {
  Rng rng(20260810);
  for (int trial = 0; trial < 300; ++trial) {
    const auto draw = [&](std::size_t max_len) {
      std::vector<Token> xs(1 + rng.below(max_len));
      for (Token& x : xs) {
        x = static_cast<Token>(rng.below(5));
      }
      return xs;
    };
    const std::vector<Token> a = draw(10);
    const std::vector<Token> b = draw(10);

    const double ab = similarity_reward(a, b);
    CHECK(ab == oracles::similarity_by_enumeration(a, b));
    CHECK(ab == similarity_reward(b, a));  // symmetric
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(similarity_reward(a, a) == 1.0);

    if (contains_reward(a, b) == 1.0) {
      // containment implies at least the full gold as common subsequence
      const double bound = 2.0 * static_cast<double>(b.size()) /
                           static_cast<double>(a.size() + b.size());
      CHECK(ab >= bound - 1e-12);
    }
  }
}

TEST_CASE("score dispatches on the reward kind") {
  RewardSpec contains{RewardKind::contains, {3, 9}};
  RewardSpec similar{RewardKind::similarity, {3, 9}};
  const std::vector<Token> pred = {7, 3, 9, 4};
  CHECK(score(contains, pred) == 1.0);
  CHECK(score(similar, pred) == doctest::Approx(2.0 * 2.0 / 6.0));
}
