#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pih/convergence.hpp"
#include "pih/rng.hpp"

using namespace pih;

namespace {

constexpr double kDt = 0.02;  // 50 ticks per 1 s window

EpisodeLog log_from_fz(const std::vector<double>& fz) {
  EpisodeLog log;
  log.meta.dt = kDt;
  for (std::size_t i = 0; i < fz.size(); ++i) {
    EpisodeRecord r;
    r.t = static_cast<double>(i) * kDt;
    r.wrench.fz = fz[i];
    log.records.push_back(r);
  }
  return log;
}

// Independent two-pass mean / sample-std oracle.
std::pair<double, double> two_pass(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

TEST_CASE("constant signal: flat means, zero spread") {
  std::vector<double> fz(150, 5.0);
  const auto stats = window_statistics(fz, kDt, 1.0);
  REQUIRE(stats.size() == 3);
  for (const auto& s : stats) {
    CHECK(s.mean_fz == 5.0);
    CHECK(s.two_sigma_fz == 0.0);
  }
}

TEST_CASE("alternating signal matches the two-pass oracle") {
  std::vector<double> fz;
  for (int i = 0; i < 150; ++i) fz.push_back(i % 2 == 0 ? 1.0 : -1.0);
  const auto stats = window_statistics(fz, kDt, 1.0);
  std::vector<double> window(fz.begin(), fz.begin() + 50);
  const auto [mean, sd] = two_pass(window);
  for (const auto& s : stats) {
    CHECK(s.mean_fz == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.two_sigma_fz == doctest::Approx(2.0 * sd).epsilon(1e-12));
    CHECK(std::abs(s.mean_fz) < 1e-15);
  }
}

TEST_CASE("window statistics agree with the oracle on random series") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> fz;
    const int n = 100 + static_cast<int>(rng.next_u64() % 400);
    for (int i = 0; i < n; ++i) fz.push_back(rng.gaussian(2.0, 3.0));
    const auto stats = window_statistics(fz, kDt, 1.0);
    REQUIRE(stats.size() == static_cast<std::size_t>(n / 50));
    for (const auto& s : stats) {
      std::vector<double> window(fz.begin() + static_cast<long>(s.window_index) * 50,
                                 fz.begin() + static_cast<long>(s.window_index + 1) * 50);
      const auto [mean, sd] = two_pass(window);
      CHECK(std::abs(s.mean_fz - mean) < 1e-10);
      CHECK(std::abs(s.two_sigma_fz - 2.0 * sd) < 1e-10);
    }
  }
}

TEST_CASE("trailing partial window is dropped") {
  std::vector<double> fz(90, 1.0);  // 50-tick windows: one full, 40 dropped
  const auto stats = window_statistics(fz, kDt, 1.0);
  CHECK(stats.size() == 1);
  std::vector<double> too_short(40, 1.0);
  CHECK_THROWS_AS(window_statistics(too_short, kDt, 1.0),
                  InsufficientDataError);
}

TEST_CASE("identical episodes collapse the ensemble spread") {
  std::vector<double> fz;
  Rng rng(9);
  for (int i = 0; i < 200; ++i) fz.push_back(rng.gaussian(4.0, 0.5));
  const std::vector<EpisodeLog> logs{log_from_fz(fz), log_from_fz(fz),
                                     log_from_fz(fz)};
  const auto ens = ensemble_statistics(logs, 1.0);
  REQUIRE(ens.mean_of_means.size() == 4);
  for (std::size_t w = 0; w < 4; ++w) {
    CHECK(ens.ci_half[w] < 1e-12);
    CHECK(ens.std_two_sigma[w] < 1e-12);
  }
}

TEST_CASE("two-episode ensemble, by hand") {
  const std::vector<EpisodeLog> logs{log_from_fz(std::vector<double>(100, 4.0)),
                                     log_from_fz(std::vector<double>(100, 6.0))};
  const auto ens = ensemble_statistics(logs, 1.0);
  REQUIRE(ens.mean_of_means.size() == 2);
  // window means are {4, 6}: mean 5, sample std sqrt(2), CI 1.96*sqrt(2)/sqrt(2)
  CHECK(ens.mean_of_means[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(ens.ci_half[0] == doctest::Approx(1.96).epsilon(1e-12));
  CHECK(ens.mean_two_sigma[0] == 0.0);
  CHECK(ens.std_two_sigma[0] == 0.0);
}

TEST_CASE("noise keeps the spread statistics strictly positive") {
  Rng rng(17);
  std::vector<EpisodeLog> logs;
  for (int e = 0; e < 10; ++e) {
    std::vector<double> fz;
    for (int i = 0; i < 200; ++i) fz.push_back(rng.gaussian(0.0, 0.05));
    logs.push_back(log_from_fz(fz));
  }
  const auto ens = ensemble_statistics(logs, 1.0);
  for (double v : ens.mean_two_sigma) CHECK(v > 0.0);
}

TEST_CASE("ensemble needs at least two episodes") {
  const std::vector<EpisodeLog> one{log_from_fz(std::vector<double>(100, 1.0))};
  CHECK_THROWS_AS(ensemble_statistics(one, 1.0), InsufficientDataError);
}

TEST_CASE("constant statistics detect at window 2") {
  const std::vector<std::vector<double>> series(4,
                                                std::vector<double>(6, 3.0));
  ConvergenceCriterionConfig cfg;
  const auto k = detect_convergence(series, cfg);
  REQUIRE(k.has_value());
  CHECK(*k == 2);
}

TEST_CASE("a steep ramp never detects") {
  std::vector<double> ramp;
  for (int i = 0; i < 10; ++i) ramp.push_back(0.5 * i);  // slope 0.5 > eta
  ConvergenceCriterionConfig cfg;
  CHECK_FALSE(detect_convergence({ramp}, cfg).has_value());
}

TEST_CASE("detection is invariant to a constant offset") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b;
    const double offset = rng.uniform(-100, 100);
    for (int i = 0; i < 12; ++i) {
      const double v = rng.gaussian(0.0, 0.2);
      a.push_back(v);
      b.push_back(v + offset);
    }
    ConvergenceCriterionConfig cfg;
    CHECK(detect_convergence({a}, cfg) == detect_convergence({b}, cfg));
  }
}

TEST_CASE("a larger threshold never delays detection") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    for (int i = 0; i < 15; ++i) s.push_back(rng.gaussian(0.0, 0.3));
    ConvergenceCriterionConfig small, big;
    small.eta_th = 0.1;
    big.eta_th = 0.4;
    const auto k_small = detect_convergence({s}, small);
    const auto k_big = detect_convergence({s}, big);
    if (k_small.has_value()) {
      REQUIRE(k_big.has_value());
      CHECK(*k_big <= *k_small);
    }
  }
}

TEST_CASE("online detector finds the settling point of a step-then-flat") {
  std::vector<double> fz;
  for (int i = 0; i < 100; ++i) fz.push_back(0.1 * i);  // rising
  for (int i = 0; i < 200; ++i) fz.push_back(10.0);     // settled
  const auto k = detect_convergence_online(fz, kDt, {});
  REQUIRE(k.has_value());
  CHECK(*k == 4);  // windows 3 and 4 are the first two flat-to-flat steps
  // too-short series degrade to "not detected"
  CHECK_FALSE(detect_convergence_online(std::vector<double>(60, 1.0), kDt, {})
                  .has_value());
}
