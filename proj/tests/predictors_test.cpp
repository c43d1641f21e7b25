#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "popcast/error.hpp"
#include "popcast/predictors.hpp"

using namespace popcast;

namespace {

VideoTrace trace_with_views(std::vector<std::uint64_t> cum, Status s) {
  VideoTrace t;
  t.status = s;
  for (auto v : cum) {
    t.raw.push_back(RawFeatures{v, 0, 0, 0.0});
    t.contexts.push_back(ContextVector{0.0, 0.0, 0.0});
  }
  return t;
}

VideoTrace flat_trace(int horizon, std::uint64_t at_age, int age, std::uint64_t final_views, Status s) {
  std::vector<std::uint64_t> cum(static_cast<std::size_t>(horizon), at_age);
  for (int n = age; n <= horizon; ++n) cum[static_cast<std::size_t>(n - 1)] = final_views;
  cum[static_cast<std::size_t>(age - 1)] = at_age;
  return trace_with_views(cum, s);
}

// Closed-form least squares from raw sums.
std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - b1 * sx) / n, b1};
}

}  // namespace

TEST_SUITE("predictors") {
  const auto spec = RewardSpec::binary(100, 10.0, 0.01);
  const auto unpopular = trace_with_views(std::vector<std::uint64_t>(100, 50), Status{0});
  const auto popular = trace_with_views(std::vector<std::uint64_t>(100, 50000), Status{1});

  TEST_CASE("all-unpopular and all-popular") {
    const auto au = au_predict(unpopular, spec);
    CHECK(au.overall_reward == doctest::Approx(1.99));
    CHECK(au.forecast_age == 1);
    CHECK(ap_predict(unpopular, spec).overall_reward == doctest::Approx(0.99));
    CHECK(ap_predict(popular, spec).overall_reward == doctest::Approx(10.99));
    CHECK(au_predict(popular, spec).overall_reward == doctest::Approx(0.99));
    CHECK(ap_predict(popular, spec).forecast_age == 1);
  }

  TEST_CASE("perfect reward") {
    CHECK(perfect_reward(popular, spec) == doctest::Approx(10.99));
    CHECK(perfect_reward(unpopular, spec) == doctest::Approx(1.99));
    CHECK(perfect_predict(popular, spec).overall_reward == perfect_reward(popular, spec));
  }

  TEST_CASE("VP fit from two points") {
    VpModel m(25, {10000});
    CHECK(m.degenerate());
    m.add(9, 99);
    CHECK(m.degenerate());
    m.add(99, 9999);
    REQUIRE_FALSE(m.degenerate());
    CHECK(m.beta1() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(m.beta0()) < 1e-12);
    CHECK(m.count() == 2);

    VpModel dup(25, {10000});
    dup.add(40, 100);
    dup.add(40, 5000);
    CHECK(dup.degenerate());
    CHECK_THROWS_AS(dup.beta1(), ContractError);
  }

  TEST_CASE("VP prediction") {
    VpModel m(25, {10000});
    m.add(9, 99);
    m.add(99, 9999);
    const auto low = vp_predict(m, flat_trace(100, 49, 25, 100, Status{0}), spec);
    REQUIRE(low.predicted_views);
    CHECK(*low.predicted_views == doctest::Approx(2499.0).epsilon(1e-9));
    CHECK(low.outcome.predicted == Status{0});
    CHECK(low.outcome.forecast_age == 25);
    const auto high = vp_predict(m, flat_trace(100, 999, 25, 50000, Status{1}), spec);
    CHECK(*high.predicted_views == doctest::Approx(999999.0).epsilon(1e-9));
    CHECK(high.outcome.predicted == Status{1});
    CHECK(high.outcome.overall_reward == doctest::Approx(10.75));

    const VpModel empty(25, {10000});
    const auto fb = vp_predict(empty, flat_trace(100, 999, 25, 50000, Status{1}), spec);
    CHECK(fb.fallback);
    CHECK_FALSE(fb.predicted_views);
    CHECK(fb.outcome.predicted == Status{0});
    CHECK(fb.outcome.forecast_age == 25);
    CHECK_THROWS_AS(vp_predict(VpModel(101, {10000}), popular, spec), ConfigError);
  }

  TEST_CASE("property: online fit equals closed-form least squares") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 100; ++trial) {
      VpModel m(10, {10000});
      std::vector<double> xs, ys;
      const int n = std::uniform_int_distribution<int>(2, 200)(rng);
      for (int i = 0; i < n; ++i) {
        const double v = std::floor(std::exp(std::uniform_real_distribution<double>(0.0, 10.0)(rng)));
        const double f = std::floor(v * std::exp(std::uniform_real_distribution<double>(0.0, 3.0)(rng)));
        m.add(v, f);
        xs.push_back(std::log10(1.0 + v));
        ys.push_back(std::log10(1.0 + f));
      }
      if (m.degenerate()) continue;
      const auto [b0, b1] = ols(xs, ys);
      REQUIRE(m.beta1() == doctest::Approx(b1).epsilon(1e-9));
      REQUIRE(m.beta0() == doctest::Approx(b0).epsilon(1e-9));
    }
  }

  TEST_CASE("confusion matrix and rates") {
    std::vector<VideoTrace> traces{popular, unpopular, unpopular};
    std::vector<PredictionOutcome> ap, au, perfect;
    for (const auto& t : traces) {
      ap.push_back(ap_predict(t, spec));
      au.push_back(au_predict(t, spec));
      perfect.push_back(perfect_predict(t, spec));
    }
    const auto cap = classification_rates(ap, traces, 2);
    CHECK(cap.true_positive_rate() == 1.0);
    CHECK(cap.true_negative_rate() == 0.0);
    const auto cau = classification_rates(au, traces, 2);
    CHECK(cau.true_positive_rate() == 0.0);
    CHECK(cau.true_negative_rate() == 1.0);
    const auto cp = classification_rates(perfect, traces, 2);
    CHECK(cp.true_positive_rate() == 1.0);
    CHECK(cp.true_negative_rate() == 1.0);
    CHECK(cp.total() == 3);

    std::vector<VideoTrace> only_unpopular{unpopular};
    std::vector<PredictionOutcome> one{au_predict(unpopular, spec)};
    CHECK_FALSE(classification_rates(one, only_unpopular, 2).true_positive_rate().has_value());
    CHECK_THROWS_AS(classification_rates(one, traces, 2), ContractError);

    ConfusionMatrix refined(3);
    refined.add(Status{1}, Status{2});
    refined.add(Status{1}, Status{1});
    CHECK(refined.recall(Status{1}) == 0.5);
    CHECK_FALSE(refined.recall(Status{0}).has_value());
  }

  TEST_CASE("property: later issuance never helps an identical classification") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 200; ++trial) {
      const double lambda = std::uniform_real_distribution<double>(0.0, 0.05)(rng);
      const auto s = RewardSpec::binary(100, 10.0, lambda);
      const Status truth{static_cast<std::size_t>(trial % 2)};
      const Status guess{static_cast<std::size_t>((trial / 2) % 2)};
      double prev = 1e300;
      for (int age : {25, 50, 75}) {
        const double r = make_outcome(forecast_at(age, guess, 100), truth, s).overall_reward;
        REQUIRE(r <= prev);
        prev = r;
      }
      // And rewards grow with lambda for a fixed issuance age.
      const auto s2 = RewardSpec::binary(100, 10.0, lambda + 0.01);
      REQUIRE(make_outcome(forecast_at(25, guess, 100), truth, s2).overall_reward >
              make_outcome(forecast_at(25, guess, 100), truth, s).overall_reward);
    }
  }
}
