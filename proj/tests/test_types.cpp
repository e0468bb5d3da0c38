#include <doctest.h>

#include <cmath>

#include "longrl/types.hpp"

using namespace longrl;

namespace {

Rollout well_formed(double reward = 0.5) {
  return make_rollout({3, 9, 4}, {-1.0, -0.5, -2.0}, {0.3, 0.2, 0.1}, reward,
                      TaskKind::general_rc, "p0");
}

}  // namespace

TEST_CASE("task kind names round-trip") {
  for (const TaskKind kind : kAllTaskKinds) {
    const auto parsed = task_kind_from_string(to_string(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK_FALSE(task_kind_from_string("no-such-task").has_value());
}

TEST_CASE("make_rollout clamps reward and rejects bad shapes") {
  CHECK(well_formed(1.7).reward == 1.0);
  CHECK(well_formed(-0.2).reward == 0.0);
  CHECK(well_formed(0.5).reward == 0.5);
  CHECK_THROWS_WITH(make_rollout({1, 2, 3}, {-1, -1, -1}, {0.1, 0.2}, 0.5,
                                 TaskKind::general_rc, "p"),
                    "length mismatch");
  CHECK_THROWS_WITH(
      make_rollout({}, {}, {}, 0.5, TaskKind::general_rc, "p"),
      "empty rollout");
}

TEST_CASE("validate_rollout reports the first violated invariant by name") {
  const Token vocab = 16;

  SUBCASE("well-formed rollout passes") {
    const auto result = validate_rollout(well_formed(), vocab);
    CHECK(result.ok);
    CHECK(result.violation.empty());
  }

  SUBCASE("length mismatch") {
    Rollout r = well_formed();
    r.entropies.pop_back();
    const auto result = validate_rollout(r, vocab);
    CHECK_FALSE(result.ok);
    CHECK(result.violation == "length mismatch");
  }

  SUBCASE("entropy above ln|V|") {
    Rollout r = well_formed();
    r.entropies[1] = std::log(static_cast<double>(vocab)) + 0.1;
    const auto result = validate_rollout(r, vocab);
    CHECK_FALSE(result.ok);
    CHECK(result.violation == "entropy exceeds ln|V|");
  }

  SUBCASE("negative entropy") {
    Rollout r = well_formed();
    r.entropies[0] = -0.01;
    CHECK(validate_rollout(r, vocab).violation == "entropy negative");
  }

  SUBCASE("token out of range") {
    Rollout r = well_formed();
    r.tokens[2] = vocab;
    CHECK(validate_rollout(r, vocab).violation == "token out of range");
    r.tokens[2] = -1;
    CHECK(validate_rollout(r, vocab).violation == "token out of range");
  }

  SUBCASE("reward out of range is unreachable through make_rollout") {
    Rollout r = well_formed();
    r.reward = 1.5;  // direct field write bypasses the factory clamp
    CHECK(validate_rollout(r, vocab).violation == "reward out of range");
  }
}

TEST_CASE("make_group requires a shared prompt and task") {
  Rollout a = well_formed();
  Rollout b = well_formed();
  CHECK(make_group({a, b}).size() == 2);

  Rollout other_prompt = well_formed();
  other_prompt.prompt_id = "p1";
  CHECK_THROWS_WITH(make_group({a, other_prompt}), "group prompt mismatch");

  Rollout other_task = well_formed();
  other_task.task = TaskKind::dialogue_memory;
  CHECK_THROWS_WITH(make_group({a, other_task}), "group task mismatch");
}

TEST_CASE("batch counters") {
  TrainBatch batch;
  batch.groups.push_back(make_group({well_formed(), well_formed()}));
  Rollout c = well_formed();
  c.prompt_id = "p1";
  batch.groups.push_back(make_group({c, c}));
  CHECK(batch.rollout_count() == 4);
  CHECK(batch.total_tokens() == 12);
}
