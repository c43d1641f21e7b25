#include <doctest.h>

#include <random>

#include "popcast/error.hpp"
#include "popcast/model.hpp"
#include "support.hpp"

using namespace popcast;

namespace {
const Status kU{0};
const Status kP{1};
}  // namespace

TEST_SUITE("model") {
  TEST_CASE("accuracy reward follows the binary matrix") {
    const auto spec = RewardSpec::binary(100, 10.0, 0.01);
    CHECK(accuracy_reward(kP, kP, spec) == 10.0);
    CHECK(accuracy_reward(kU, kP, spec) == 0.0);
    CHECK(accuracy_reward(kU, kU, spec) == 1.0);
    CHECK(accuracy_reward(kP, kU, spec) == 0.0);
    CHECK_THROWS_AS(accuracy_reward(Status{2}, kU, spec), ConfigError);
  }

  TEST_CASE("prediction reward adds timeliness") {
    const auto spec = RewardSpec::binary(100, 10.0, 0.01);
    CHECK(prediction_reward(kP, kP, 1, spec) == doctest::Approx(10.99).epsilon(1e-12));
    CHECK(prediction_reward(kU, kU, 100, spec) == 1.0);
    CHECK(prediction_reward(kP, kU, 50, spec) == doctest::Approx(0.50).epsilon(1e-12));
    CHECK_THROWS_AS(prediction_reward(kP, kU, 0, spec), ContractError);
    CHECK_THROWS_AS(prediction_reward(kP, kU, 101, spec), ContractError);
  }

  TEST_CASE("u_max and normalization") {
    const auto spec = RewardSpec::binary(100, 10.0, 0.01);
    CHECK(spec.u_max() == doctest::Approx(10.99).epsilon(1e-12));
    CHECK(normalize_reward(spec.u_max(), spec) == 1.0);
    CHECK(normalize_reward(0.0, spec) == 0.0);
    CHECK(normalize_reward(1.99, spec) == doctest::Approx(1.99 / 10.99).epsilon(1e-12));
    CHECK(normalize_reward(1.99, spec) == doctest::Approx(0.18107).epsilon(1e-4));
    CHECK_THROWS_AS(normalize_reward(-0.1, spec), ContractError);
    CHECK_THROWS_AS(normalize_reward(11.0, spec), ContractError);
  }

  TEST_CASE("age reward vector examples") {
    const auto spec = RewardSpec::binary(100, 10.0, 0.01);
    std::vector<Action> actions(100, Action::predict(kU));
    actions[0] = actions[1] = Action::wait();
    actions[2] = Action::predict(kP);
    const auto r = age_reward_vector(actions, kP, spec);
    CHECK(r[0] == doctest::Approx(10.97).epsilon(1e-12));
    CHECK(r[1] == r[0]);
    CHECK(r[2] == r[0]);

    std::vector<Action> first(100, Action::wait());
    first[0] = Action::predict(kU);
    first[99] = Action::predict(kP);
    CHECK(age_reward_vector(first, kU, spec)[0] == doctest::Approx(1.99).epsilon(1e-12));

    std::vector<Action> late(100, Action::wait());
    late[99] = Action::predict(kU);
    for (double v : age_reward_vector(late, kP, spec)) CHECK(v == 0.0);

    std::vector<Action> bad(100, Action::predict(kU));
    bad[99] = Action::wait();
    CHECK_THROWS_AS(age_reward_vector(bad, kU, spec), ContractError);
    CHECK_THROWS_AS(age_reward_vector(std::vector<Action>(3, Action::predict(kU)), kU, spec), ContractError);
  }

  TEST_CASE("make_outcome reports the first forecast") {
    const auto spec = RewardSpec::binary(5, 10.0, 0.1);
    const auto actions = forecast_at(3, kP, 5);
    REQUIRE(actions.size() == 5);
    CHECK(actions[0].is_wait());
    CHECK(actions[2] == Action::predict(kP));
    const auto o = make_outcome(actions, kP, spec);
    CHECK(o.forecast_age == 3);
    CHECK(o.predicted == kP);
    CHECK(o.overall_reward == doctest::Approx(10.2));
    CHECK(o.normalized_reward == doctest::Approx(10.2 / 10.4));
  }

  TEST_CASE("action order, names and parsing") {
    CHECK(Action::predict(kU) < Action::predict(kP));
    CHECK(Action::predict(Status{7}) < Action::wait());
    CHECK(to_string(Action::wait()) == "wait");
    CHECK(to_string(Action::predict(Status{2})) == "predict_2");
    CHECK(parse_action("predict_2") == Action::predict(Status{2}));
    CHECK(parse_action("wait") == Action::wait());
    CHECK_THROWS(parse_action("predict_x"));
    CHECK(Action::from_ordinal(2, 2) == Action::wait());
    CHECK(Action::wait().ordinal(3) == 3);
  }

  TEST_CASE("context vectors live in the unit cube") {
    CHECK_NOTHROW(ContextVector{0.0, 1.0, 0.5});
    CHECK_THROWS_AS(ContextVector({1.5}), ContractError);
    CHECK_THROWS_AS(ContextVector({-0.01}), ContractError);
    CHECK_THROWS_AS(ContextVector({std::nan("")}), ContractError);
  }

  TEST_CASE("reward spec validation") {
    CHECK_THROWS_AS(RewardSpec::binary(0, 10, 0.01), ConfigError);
    CHECK_THROWS_AS(RewardSpec::binary(10, 0, 0.01), ConfigError);
    CHECK_THROWS_AS(RewardSpec::binary(10, 10, -1), ConfigError);
    CHECK_THROWS_AS(RewardSpec(3, 0.0, {{1.0}}), ConfigError);
    CHECK_THROWS_AS(RewardSpec(3, 0.0, {{1, 0}, {0}}), ConfigError);
    CHECK_THROWS_AS(RewardSpec(3, 0.0, {{0, 0}, {0, 0}}), ConfigError);
    const auto refined = RewardSpec::diagonal(100, {1, 5, 10}, 0.01);
    CHECK(refined.num_statuses() == 3);
    CHECK(accuracy_reward(Status{1}, Status{1}, refined) == 5.0);
    CHECK(accuracy_reward(Status{1}, Status{2}, refined) == 0.0);
    const RewardSpec flat(4, 0.5, {{1, 0}, {0, 2}}, Timeliness::none);
    CHECK(flat.timeliness(1) == 0.0);
    CHECK(flat.u_max() == 2.0);
  }

  TEST_CASE("property: recursion equals the forward definition") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
      const auto spec = testsupport::random_spec(rng);
      const auto actions = testsupport::random_actions(rng, spec.horizon(), spec.num_statuses());
      const std::size_t s = std::uniform_int_distribution<std::size_t>(0, spec.num_statuses() - 1)(rng);
      const auto r = age_reward_vector(actions, Status{s}, spec);
      for (int n = 1; n <= spec.horizon(); ++n) {
        REQUIRE(r[static_cast<std::size_t>(n - 1)] ==
                doctest::Approx(testsupport::forward_reward(actions, s, n, spec)).epsilon(1e-12));
        if (n < spec.horizon() && actions[static_cast<std::size_t>(n - 1)].is_wait()) {
          REQUIRE(r[static_cast<std::size_t>(n - 1)] == r[static_cast<std::size_t>(n)]);
        }
      }
      const auto o = make_outcome(actions, Status{s}, spec);
      for (int n = 1; n <= o.forecast_age; ++n) REQUIRE(r[static_cast<std::size_t>(n - 1)] == o.overall_reward);
      REQUIRE(o.normalized_reward >= 0.0);
      REQUIRE(o.normalized_reward <= 1.0);
    }
  }

  TEST_CASE("property: prefix independence after a forecast") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto spec = testsupport::random_spec(rng);
      const int N = spec.horizon();
      auto actions = testsupport::random_actions(rng, N, spec.num_statuses());
      const int m = std::uniform_int_distribution<int>(1, N)(rng);
      actions[static_cast<std::size_t>(m - 1)] = Action::predict(Status{0});
      const auto before = age_reward_vector(actions, Status{1}, spec);
      auto changed = testsupport::random_actions(rng, N, spec.num_statuses());
      for (int n = 1; n <= m; ++n) changed[static_cast<std::size_t>(n - 1)] = actions[static_cast<std::size_t>(n - 1)];
      const auto after = age_reward_vector(changed, Status{1}, spec);
      for (int n = 1; n <= m; ++n) REQUIRE(before[static_cast<std::size_t>(n - 1)] == after[static_cast<std::size_t>(n - 1)]);
    }
  }

  TEST_CASE("property: normalized rewards are unit bounded and decay with age") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
      const auto spec = testsupport::random_spec(rng, 20);
      const std::size_t S = spec.num_statuses();
      for (std::size_t a = 0; a < S; ++a) {
        for (std::size_t s = 0; s < S; ++s) {
          for (int n = 1; n <= spec.horizon(); ++n) {
            const double u = normalize_reward(prediction_reward(Status{a}, Status{s}, n, spec), spec);
            REQUIRE(u >= 0.0);
            REQUIRE(u <= 1.0);
            if (n > 1 && spec.lambda() > 0.0) {
              REQUIRE(prediction_reward(Status{a}, Status{s}, n, spec) <
                      prediction_reward(Status{a}, Status{s}, n - 1, spec));
            }
          }
        }
      }
    }
  }
}
