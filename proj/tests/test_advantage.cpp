#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "longrl/advantage.hpp"
#include "longrl/rng.hpp"
#include "oracles.hpp"

using namespace longrl;

namespace {

Rollout reward_only(double reward, TaskKind task, const std::string& prompt) {
  return make_rollout({1}, {-1.0}, {0.5}, reward, task, prompt);
}

RolloutGroup group_of(const std::vector<double>& rewards, TaskKind task,
                      const std::string& prompt) {
  std::vector<Rollout> rollouts;
  for (const double r : rewards) {
    rollouts.push_back(reward_only(r, task, prompt));
  }
  return make_group(std::move(rollouts));
}

TrainBatch batch_of(const std::vector<std::pair<std::vector<double>, TaskKind>>&
                        groups) {
  TrainBatch batch;
  int i = 0;
  for (const auto& [rewards, task] : groups) {
    batch.groups.push_back(group_of(rewards, task, "p" + std::to_string(i++)));
  }
  return batch;
}

}  // namespace

TEST_CASE("group_advantages matches the hand z-score oracle") {
  // mean 0.5, population std 0.5
  const auto a = group_advantages(std::vector<double>{1, 0, 0, 1});
  const std::vector<double> expected = {1, -1, -1, 1};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  const auto b = group_advantages(std::vector<double>{1, 0});
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(-1.0));

  const auto zero = group_advantages(std::vector<double>{0.5, 0.5, 0.5, 0.5});
  for (const double x : zero) {
    CHECK(x == 0.0);
  }

  CHECK_THROWS_WITH(group_advantages(std::vector<double>{1.0}),
                    "degenerate group");
}

TEST_CASE("task-batch-std uses the pooled task spread with the group mean") {
  // task std over {1,0,1,1}: mean 0.75, var 0.1875, std 0.43301
  TrainBatch batch = batch_of({{{1, 0}, TaskKind::general_rc},
                               {{1, 1}, TaskKind::general_rc}});
  compute_advantages(batch, {AdvantageKind::task_batch_std, 1e-8});
  const double sigma = std::sqrt(0.1875);
  CHECK((*batch.groups[0].advantages)[0] ==
        doctest::Approx(0.5 / sigma).epsilon(1e-9));  // 1.1547
  CHECK((*batch.groups[0].advantages)[1] ==
        doctest::Approx(-0.5 / sigma).epsilon(1e-9));
  CHECK((*batch.groups[1].advantages)[0] == 0.0);
  CHECK((*batch.groups[1].advantages)[1] == 0.0);
}

TEST_CASE("single-group batch: all three modes coincide") {
  for (const AdvantageKind kind :
       {AdvantageKind::group_std, AdvantageKind::batch_std,
        AdvantageKind::task_batch_std}) {
    TrainBatch batch = batch_of({{{0.9, 0.1, 0.4, 0.4}, TaskKind::doc_multihop}});
    compute_advantages(batch, {kind, 1e-8});
    TrainBatch reference =
        batch_of({{{0.9, 0.1, 0.4, 0.4}, TaskKind::doc_multihop}});
    compute_advantages(reference, {AdvantageKind::group_std, 1e-8});
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK((*batch.groups[0].advantages)[i] ==
            doctest::Approx((*reference.groups[0].advantages)[i])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform task rewards yield zero advantages in task mode") {
  TrainBatch batch = batch_of({{{0.3, 0.3}, TaskKind::corpus_numeric},
                               {{0.3, 0.3}, TaskKind::corpus_numeric},
                               {{1, 0}, TaskKind::general_rc}});
  compute_advantages(batch, {AdvantageKind::task_batch_std, 1e-8});
  for (std::size_t g = 0; g < 2; ++g) {
    for (const double a : *batch.groups[g].advantages) {
      CHECK(a == 0.0);
    }
  }
  CHECK((*batch.groups[2].advantages)[0] > 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  TrainBatch batch;
  CHECK_THROWS_WITH(compute_advantages(batch, {}), "empty batch");

  TrainBatch single = batch_of({{{1, 0}, TaskKind::general_rc}});
  single.groups[0].rollouts.pop_back();
  CHECK_THROWS_WITH(compute_advantages(single, {}), "degenerate group");

  // one task appears in exactly one rollout across the batch
  TrainBatch mixed = batch_of({{{1, 0}, TaskKind::general_rc}});
  mixed.groups[0].rollouts[1].task = TaskKind::dialogue_memory;
  CHECK_THROWS_WITH(
      compute_advantages(mixed, {AdvantageKind::task_batch_std, 1e-8}),
      "degenerate task slice");
}

TEST_CASE("group mode: nonzero-variance groups normalize to mean 0, std 1") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> rewards(2 + rng.below(7));
    for (double& r : rewards) {
      r = rng.unit();
    }
    const auto adv = group_advantages(rewards);
    double mean = 0.0;
    for (const double a : adv) {
      mean += a;
    }
    mean /= static_cast<double>(adv.size());
    CHECK(std::abs(mean) < 1e-9);
    double var = 0.0;
    for (const double a : adv) {
      var += (a - mean) * (a - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(adv.size()));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("affine invariance of task-batch-std advantages") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    // two tasks, two groups each, spread-out rewards
    const auto draw_rewards = [&] {
      std::vector<double> rs(4);
      for (double& r : rs) {
        r = rng.unit();
      }
      return rs;
    };
    TrainBatch batch = batch_of({{draw_rewards(), TaskKind::general_rc},
                                 {draw_rewards(), TaskKind::general_rc},
                                 {draw_rewards(), TaskKind::dialogue_memory},
                                 {draw_rewards(), TaskKind::dialogue_memory}});
    TrainBatch scaled = batch;
    // per-task positive scale and shift staying inside [0,1]
    const double a_rc = 0.2 + 0.6 * rng.unit();
    const double b_rc = (1.0 - a_rc) * rng.unit();
    const double a_dm = 0.2 + 0.6 * rng.unit();
    const double b_dm = (1.0 - a_dm) * rng.unit();
    for (auto& g : scaled.groups) {
      for (auto& r : g.rollouts) {
        const double a = r.task == TaskKind::general_rc ? a_rc : a_dm;
        const double b = r.task == TaskKind::general_rc ? b_rc : b_dm;
        r.reward = a * r.reward + b;
      }
    }
    compute_advantages(batch, {AdvantageKind::task_batch_std, 1e-8});
    compute_advantages(scaled, {AdvantageKind::task_batch_std, 1e-8});
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
      for (std::size_t i = 0; i < batch.groups[g].rollouts.size(); ++i) {
        CHECK(std::abs((*batch.groups[g].advantages)[i] -
                       (*scaled.groups[g].advantages)[i]) < 1e-9);
      }
    }
  }
}

TEST_CASE("sign preservation across modes") {
  Rng rng(5);
  for (const AdvantageKind kind :
       {AdvantageKind::group_std, AdvantageKind::batch_std,
        AdvantageKind::task_batch_std}) {
    TrainBatch batch = batch_of({{{0.9, 0.2, 0.5}, TaskKind::general_rc},
                                 {{0.1, 0.7, 0.7}, TaskKind::dialogue_memory}});
    compute_advantages(batch, {kind, 1e-8});
    for (const auto& g : batch.groups) {
      std::vector<double> rewards;
      for (const auto& r : g.rollouts) {
        rewards.push_back(r.reward);
      }
      const double mean = oracles::mean(rewards);
      for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (rewards[i] > mean) {
          CHECK((*g.advantages)[i] > 0.0);
        } else if (rewards[i] < mean) {
          CHECK((*g.advantages)[i] < 0.0);
        }
      }
    }
  }
}
