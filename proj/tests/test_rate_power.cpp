#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "maofdm/rate_power.hpp"
#include "maofdm/rng.hpp"
#include "maofdm/scenario.hpp"

using namespace maofdm;

namespace {

// Closed-form active-set water-filling: sort inverse gains, activate greedily,
// solve the water level exactly.
PowerAllocation oracle_water_fill(const std::vector<double>& gains,
                                  const LinkBudget& lb) {
  std::vector<std::size_t> order;
  for (std::size_t m = 0; m < gains.size(); ++m) {
    if (gains[m] > 0.0) order.push_back(m);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gains[a] > gains[b];
  });
  PowerAllocation out;
  out.p.assign(gains.size(), 0.0);
  double inv_sum = 0.0;
  double mu = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    inv_sum += lb.sigma2 / gains[order[i]];
    const double candidate_mu = (lb.power + inv_sum) / (i + 1);
    // Valid if every activated subcarrier stays above its floor and the next
    // one (if any) would not be activated.
    const bool floor_ok = candidate_mu >= lb.sigma2 / gains[order[i]];
    const bool next_off = (i + 1 == order.size()) ||
                          candidate_mu <= lb.sigma2 / gains[order[i + 1]];
    if (floor_ok && next_off) {
      mu = candidate_mu;
      active = i + 1;
      break;
    }
  }
  REQUIRE(active > 0);
  out.water_level = mu;
  for (std::size_t i = 0; i < active; ++i) {
    out.p[order[i]] = mu - lb.sigma2 / gains[order[i]];
  }
  return out;
}

}  // namespace

TEST_CASE("achievable_rate basics") {
  LinkBudget lb{4, 0, 1.0, 1.0};
  CfrVector c{{1, 0}, {2, 0}, {0, 1}, {1, 1}};

  PowerAllocation zero;
  zero.p.assign(4, 0.0);
  CHECK(achievable_rate(c, zero, lb) == 0.0);

  PowerAllocation bad;
  bad.p.assign(3, 0.1);
  CHECK_THROWS_AS(achievable_rate(c, bad, lb), std::invalid_argument);
}

TEST_CASE("achievable_rate with equal gains and uniform power equals the bound") {
  LinkBudget lb{8, 2, 2.0, 0.5};
  const double gain = 3.0;
  CfrVector c(8, cdouble{std::sqrt(gain), 0.0});
  PowerAllocation uniform;
  uniform.p.assign(8, lb.power / 8);
  const double rate = achievable_rate(c, uniform, lb);
  CHECK(rate ==
        doctest::Approx(rate_upper_bound(gain, lb)).epsilon(1e-14));
}

TEST_CASE("achievable_rate hand-evaluated example") {
  LinkBudget lb{2, 0, 1.0, 1.0};
  CfrVector c{{1, 0}, {2, 0}};  // gains 1 and 4
  PowerAllocation p;
  p.p = {0.5, 0.5};
  const double want = (std::log2(1.5) + std::log2(3.0)) / 2.0;
  CHECK(achievable_rate(c, p, lb) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("water_fill equal gains gives uniform power") {
  LinkBudget lb{8, 0, 2.0, 1.0};
  std::vector<double> gains(8, 5.0);
  const auto alloc = water_fill(gains, lb, 1e-9);
  for (double p : alloc.p) CHECK(p == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("water_fill shuts off a tiny-gain subcarrier") {
  LinkBudget lb{2, 0, 1.0, 1.0};
  const auto alloc = water_fill({1.0, 1e-6}, lb, 1e-9);
  CHECK(alloc.p[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(alloc.p[1] == 0.0);
}

TEST_CASE("water_fill rejects an identically zero channel") {
  LinkBudget lb{3, 0, 1.0, 1.0};
  CHECK_THROWS_AS(water_fill({0.0, 0.0, 0.0}, lb, 1e-9),
                  std::runtime_error);
}

TEST_CASE("water_fill matches the closed-form active-set oracle") {
  LinkBudget lb{4, 0, 2.0, 1.0};
  const std::vector<double> gains{4.0, 2.0, 1.0, 0.5};
  const auto got = water_fill(gains, lb, 1e-10);
  const auto want = oracle_water_fill(gains, lb);
  for (int m = 0; m < 4; ++m) {
    CHECK(got.p[m] == doctest::Approx(want.p[m]).epsilon(1e-7));
  }

  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int m_sub = 2 + static_cast<int>(rng.uniform() * 7);  // 2..8
    LinkBudget rlb{m_sub, 0, 0.5 + rng.uniform() * 3.0, 1.0};
    std::vector<double> g(m_sub);
    for (auto& v : g) v = std::exp(rng.uniform(-4.0, 3.0));
    const auto a = water_fill(g, rlb, 1e-10);
    const auto b = oracle_water_fill(g, rlb);
    for (int m = 0; m < m_sub; ++m) {
      CHECK(std::abs(a.p[m] - b.p[m]) < 1e-8);
    }
  }
}

TEST_CASE("water_fill KKT and budget invariants on random instances") {
  Rng rng(7);
  const double eps_p = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    const int m_sub = 2 + static_cast<int>(rng.uniform() * 63);
    LinkBudget lb{m_sub, 0, 0.1 + rng.uniform() * 5.0, 1.0};
    std::vector<double> g(m_sub);
    for (auto& v : g) {
      v = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-5.0, 3.0));
    }
    if (std::accumulate(g.begin(), g.end(), 0.0) == 0.0) g[0] = 1.0;
    const auto alloc = water_fill(g, lb, eps_p);
    const double total = std::accumulate(alloc.p.begin(), alloc.p.end(), 0.0);
    CHECK(total <= lb.power + 1e-15);
    CHECK(total >= lb.power - eps_p);
    for (int m = 0; m < m_sub; ++m) {
      CHECK(alloc.p[m] >= 0.0);
      if (g[m] == 0.0) CHECK(alloc.p[m] == 0.0);
      if (alloc.p[m] > 0.0) {
        CHECK(alloc.p[m] + lb.sigma2 / g[m] ==
              doctest::Approx(alloc.water_level).epsilon(1e-12));
      } else if (g[m] > 0.0) {
        CHECK(lb.sigma2 / g[m] >= alloc.water_level - eps_p);
      }
    }
  }
}

TEST_CASE("rate_waterfilled dominates uniform allocation") {
  Rng rng(9);
  LinkBudget lb{16, 2, 1.0, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    CfrVector c(16);
    for (auto& v : c) v = {rng.normal(), rng.normal()};
    PowerAllocation uniform;
    uniform.p.assign(16, lb.power / 16);
    CHECK(rate_waterfilled(c, lb, 1e-8) >=
          achievable_rate(c, uniform, lb) - 1e-9);
  }
}

TEST_CASE("rate_waterfilled flat CFR equals the closed-form bound") {
  LinkBudget lb{8, 1, 1.0, 1.0};
  CfrVector c(8, cdouble{2.0, 0.0});
  CHECK(rate_waterfilled(c, lb, 1e-9) ==
        doctest::Approx(rate_upper_bound(4.0, lb)).epsilon(1e-7));
}

TEST_CASE("rate_waterfilled two-tone oracle value") {
  LinkBudget lb{4, 0, 1.0, 1.0};
  CfrVector c{{2, 0}, {1, 0}, {2, 0}, {1, 0}};  // gains 4,1,4,1
  std::vector<double> gains{4, 1, 4, 1};
  const auto alloc = oracle_water_fill(gains, lb);
  double want = 0.0;
  for (int m = 0; m < 4; ++m) {
    want += std::log2(1.0 + gains[m] * alloc.p[m]);
  }
  want /= 4.0;
  CHECK(rate_waterfilled(c, lb, 1e-10) ==
        doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("cir_power basics and Parseval link") {
  CHECK(cir_power(CirVector(4, cdouble{0, 0})) == 0.0);

  TapCluster tap;
  tap.paths.emplace_back(0.1, 0.2, 0.3, 0.4);
  tap.paths.emplace_back(-0.5, 1.0, 0.2, -0.3);
  tap.coeffs = {cdouble{2.0, 0.0}, cdouble{3.0, 0.0}};
  WidebandChannel ch;
  ch.taps.push_back(tap);
  const CirVector h = cir(ch, {0, 0, 0}, {0, 0, 0});
  CHECK(cir_power(h) == doctest::Approx(25.0).epsilon(1e-12));

  Rng rng(5);
  CirVector rh(6);
  long double acc = 0.0L;
  for (auto& v : rh) {
    v = {rng.normal(), rng.normal()};
    acc += (long double)std::norm(v);
  }
  CHECK(cir_power(rh) == doctest::Approx((double)acc).epsilon(1e-13));

  const CfrVector c = cfr(rh, 32);
  double cp = 0.0;
  for (const auto& v : c) cp += std::norm(v);
  CHECK(cp == doctest::Approx(32.0 * cir_power(rh)).epsilon(1e-10));
}

TEST_CASE("rate_upper_bound values") {
  LinkBudget lb{64, 6, 1.0, 1.0};
  CHECK(rate_upper_bound(0.0, lb) == 0.0);

  // 25 dB receive SNR in the reference setup.
  const double snr = std::pow(10.0, 2.5);
  const double total_gain = 64.0 * snr;  // makes GP/(M sigma^2) = 10^2.5
  CHECK(rate_upper_bound(total_gain, lb) ==
        doctest::Approx(64.0 / 70.0 * std::log2(1.0 + snr)).epsilon(1e-14));

  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const double g = std::exp(rng.uniform(-2.0, 8.0));
    const long double want =
        64.0L / 70.0L *
        std::log2(1.0L + (long double)g * lb.power / (64.0L * lb.sigma2));
    CHECK(rate_upper_bound(g, lb) ==
          doctest::Approx((double)want).epsilon(1e-13));
  }
}

TEST_CASE("channel_power_bound values and dominance") {
  TapCluster one;
  one.paths.emplace_back(0.0, 0.0, 0.0, 0.0);
  one.coeffs.emplace_back(1.0, 0.0);
  WidebandChannel unit;
  unit.taps.push_back(one);
  CHECK(channel_power_bound(unit) == doctest::Approx(1.0));

  // ||b_1||_1 = 2, ||b_2||_1 = 3 -> G = 13.
  WidebandChannel two;
  TapCluster t1, t2;
  t1.paths.emplace_back(0.1, 0.1, 0.1, 0.1);
  t1.paths.emplace_back(0.2, 0.2, 0.2, 0.2);
  t1.coeffs = {cdouble{0.0, 1.0}, cdouble{1.0, 0.0}};
  t2.paths.emplace_back(0.3, 0.3, 0.3, 0.3);
  t2.coeffs = {cdouble{-3.0, 0.0}};
  two.taps = {t1, t2};
  CHECK(channel_power_bound(two) == doctest::Approx(13.0).epsilon(1e-12));

  ScenarioConfig cfg;
  const WidebandChannel ch = sample_channel(cfg, 0);
  const double bound = channel_power_bound(ch);
  Rng rng(55);
  for (int i = 0; i < 1000; ++i) {
    const Position t{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Position r{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    CHECK(cir_power(cir(ch, t, r)) <= bound + 1e-9);
  }
}

TEST_CASE("water-filled rate never exceeds the closed-form bound") {
  ScenarioConfig cfg;
  const LinkBudget lb = cfg.link_budget();
  Rng rng(66);
  for (int i = 0; i < 50; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    const double bound = rate_upper_bound(channel_power_bound(ch), lb);
    const Position t{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Position r{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double rate =
        rate_waterfilled(cfr(cir(ch, t, r), lb.subcarriers), lb, 1e-6);
    CHECK(rate <= bound + 1e-9);
  }
}
