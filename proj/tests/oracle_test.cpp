#include <doctest.h>

#include <random>
#include <sstream>

#include "popcast/error.hpp"
#include "popcast/oracle.hpp"
#include "support.hpp"

using namespace popcast;
using testsupport::tiny_world;

namespace {

const Action kPredictU = Action::predict(Status{0});
const Action kPredictP = Action::predict(Status{1});

DiscreteWorldModel random_small_world(std::mt19937_64& rng, int max_horizon, std::size_t max_alphabet) {
  const int N = std::uniform_int_distribution<int>(1, max_horizon)(rng);
  const double w = std::uniform_real_distribution<double>(1.0, 10.0)(rng);
  const double lambda = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  RandomWorldOptions options;
  for (int n = 0; n < N; ++n) {
    options.alphabet_sizes.push_back(std::uniform_int_distribution<std::size_t>(1, max_alphabet)(rng));
  }
  return random_world(RewardSpec::binary(N, w, lambda), options, rng);
}

TabularPolicy random_policy(std::mt19937_64& rng, const DiscreteWorldModel& model) {
  TabularPolicy pi = TabularPolicy::constant(model, kPredictU);
  for (int n = 1; n <= model.horizon(); ++n) {
    const auto actions = age_actions(model.reward_spec(), n);
    for (std::size_t i = 0; i < model.alphabet(n).size(); ++i) {
      pi.set(n, i, actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)]);
    }
  }
  return pi;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("tiny world expected rewards") {
    const auto world = tiny_world();
    const auto any = TabularPolicy::constant(world, kPredictU);
    CHECK(expected_action_reward(world, 2, 0, kPredictP, any) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(expected_action_reward(world, 2, 0, kPredictU, any) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(conditional_action_reward(world, 2, 0, kPredictP, any) == doctest::Approx(0.8 / 0.65).epsilon(1e-12));
    CHECK(world.marginal(1, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("tiny world optimum") {
    const auto world = tiny_world();
    const auto opt = solve(world);
    CHECK(opt.at(2, 0) == kPredictP);
    CHECK(opt.at(2, 1) == kPredictU);
    CHECK(opt.at(1, 0) == Action::wait());
    CHECK(opt.at(1, 1) == kPredictU);
    CHECK(policy_value(world, opt) == doctest::Approx(1.45).epsilon(1e-12));
    CHECK(policy_value(world, TabularPolicy::constant(world, kPredictU)) == doctest::Approx(0.70).epsilon(1e-12));
    CHECK(testsupport::brute_optimum(world) == doctest::Approx(1.45).epsilon(1e-12));

    const auto first = best_response(world, TabularPolicy::constant(world, kPredictU));
    CHECK(first.age_map(2) == opt.age_map(2));
    CHECK(best_response(world, opt) == opt);
  }

  TEST_CASE("context-free world predicts popular at once") {
    // P(P) = 0.3, w = 5: 0.3 * 5 > 0.7 * 1.
    const auto spec = RewardSpec::binary(3, 5.0, 0.05);
    std::vector<std::vector<WorldSymbol>> alphabets{{{"x", {}}}, {{"y", {}}}, {{"z", {}}}};
    std::vector<WorldOutcome> outcomes{{{0, 0, 0}, Status{1}, 0.3}, {{0, 0, 0}, Status{0}, 0.7}};
    const DiscreteWorldModel world(spec, alphabets, outcomes);
    CHECK(solve(world).at(1, 0) == kPredictP);
  }

  TEST_CASE("one-age world is a myopic argmax") {
    const auto spec = RewardSpec::binary(1, 2.0, 0.1);
    std::vector<std::vector<WorldSymbol>> alphabets{{{"a", {}}, {"b", {}}}};
    std::vector<WorldOutcome> outcomes{
        {{0}, Status{1}, 0.3}, {{0}, Status{0}, 0.2}, {{1}, Status{1}, 0.1}, {{1}, Status{0}, 0.4}};
    const DiscreteWorldModel world(spec, alphabets, outcomes);
    const auto opt = solve(world);
    CHECK(opt.at(1, 0) == kPredictP);  // 0.6 > 0.2
    CHECK(opt.at(1, 1) == kPredictU);  // 0.4 > 0.2
  }

  TEST_CASE("errors") {
    const auto world = tiny_world();
    const auto spec = world.reward_spec();
    CHECK_THROWS(DiscreteWorldModel(spec, {{{"a", {}}}, {{"c", {}}}}, {{{0, 0}, Status{0}, 0.9}}));
    std::vector<std::vector<WorldSymbol>> alphabets{{{"a", {}}, {"b", {}}}, {{"c", {}}}};
    const DiscreteWorldModel partial(spec, alphabets, {{{0, 0}, Status{0}, 1.0}});
    CHECK_FALSE(partial.reachable(1, 1));
    CHECK_THROWS_AS(expected_action_reward(partial, 1, 1, kPredictU, TabularPolicy::constant(partial, kPredictU)),
                    DataError);
    CHECK(solve(partial).at(1, 1) == kPredictU);
  }

  TEST_CASE("world CSV round trip") {
    const auto world = tiny_world();
    std::stringstream ss;
    write_world(ss, world);
    CHECK(ss.str().rfind("x_1,x_2,s,probability\n", 0) == 0);
    const auto back = read_world(ss, world.reward_spec());
    CHECK(policy_value(back, solve(back)) == doctest::Approx(1.45).epsilon(1e-12));
    CHECK(back.symbol_index(1, "b") == std::optional<std::size_t>(1));

    std::istringstream bad_cols("x_1,x_2,s,probability\na,c,1\n");
    CHECK_THROWS_AS(read_world(bad_cols, world.reward_spec()), ParseError);
    std::istringstream bad_status("x_1,x_2,s,probability\na,c,5,1.0\n");
    CHECK_THROWS_AS(read_world(bad_status, world.reward_spec()), ParseError);
    std::istringstream bad_header("x_1,s,probability\na,1,1.0\n");
    CHECK_THROWS_AS(read_world(bad_header, world.reward_spec()), ParseError);
  }

  TEST_CASE("property: solve attains the brute-force optimum") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
      const auto world = random_small_world(rng, 3, 2);
      const auto opt = solve(world);
      const double v = policy_value(world, opt);
      REQUIRE(v == doctest::Approx(testsupport::brute_optimum(world)).epsilon(1e-12));
      REQUIRE(v == doctest::Approx(testsupport::brute_value(world, [&](int n, std::size_t i) { return opt.at(n, i); }))
                       .epsilon(1e-12));
    }
  }

  TEST_CASE("property: convergence from arbitrary starts and independence from earlier ages") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
      const auto world = random_small_world(rng, 4, 5);
      const int N = world.horizon();
      const auto opt = solve(world);
      for (int start = 0; start < 5; ++start) {
        TabularPolicy pi = random_policy(rng, world);
        for (int it = 1; it <= N; ++it) {
          pi = best_response(world, pi);
          // After `it` iterations the ages N+1-it..N are final.
          for (int n = N + 1 - it; n <= N; ++n) REQUIRE(pi.age_map(n) == opt.age_map(n));
        }
        REQUIRE(pi == opt);
      }
      // Changing earlier ages never moves the best response at later ages.
      const auto base = random_policy(rng, world);
      auto perturbed = base;
      const int n = std::uniform_int_distribution<int>(1, N)(rng);
      for (int m = 1; m < n; ++m) {
        const auto other = random_policy(rng, world);
        for (std::size_t i = 0; i < world.alphabet(m).size(); ++i) perturbed.set(m, i, other.at(m, i));
      }
      const auto a = best_response(world, base);
      const auto b = best_response(world, perturbed);
      for (int m = n; m <= N; ++m) REQUIRE(a.age_map(m) == b.age_map(m));
    }
  }

  TEST_CASE("property: age-1 expected rewards sum to the value") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
      const auto world = random_small_world(rng, 3, 4);
      const auto opt = solve(world);
      const double v = policy_value(world, opt);
      double sum = 0.0;
      for (std::size_t i = 0; i < world.alphabet(1).size(); ++i) {
        if (world.reachable(1, i)) sum += expected_action_reward(world, 1, i, opt.at(1, i), opt);
      }
      REQUIRE(sum == doctest::Approx(v).epsilon(1e-12));
    }
  }

  TEST_CASE("random world gap filter") {
    std::mt19937_64 rng(44);
    RandomWorldOptions options{{4, 4}, 0.05, 0.05, 1000};
    const auto world = random_world(RewardSpec::binary(2, 2.0, 0.1), options, rng);
    CHECK(min_action_gap(world, solve(world), 0.05) >= 0.05);
    CHECK(world.alphabet(1)[2].name == "1:2");
  }
}
