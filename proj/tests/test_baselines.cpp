#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maofdm/baselines.hpp"
#include "maofdm/pga.hpp"
#include "maofdm/scenario.hpp"

using namespace maofdm;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig cfg;
  cfg.subcarriers = 16;
  cfg.cp_len = 4;
  cfg.taps = 3;
  cfg.paths_per_tap = 3;
  return cfg;
}

}  // namespace

TEST_CASE("fpa_rate equals the water-filled rate at the reference point") {
  ScenarioConfig cfg = small_scenario();
  const LinkBudget lb = cfg.link_budget();
  for (int i = 0; i < 5; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    const double direct = rate_waterfilled(
        cfr(cir(ch, {0, 0, 0}, {0, 0, 0}), lb.subcarriers), lb, 1e-8);
    CHECK(fpa_rate(ch, lb, 1e-8) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("as_rate with 1x1 grids reduces to fpa_rate") {
  ScenarioConfig cfg = small_scenario();
  const LinkBudget lb = cfg.link_budget();
  AsGrid grid;
  grid.n_tx = 1;
  grid.n_rx = 1;
  for (int i = 0; i < 5; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    CHECK(as_rate(ch, grid, lb, 1e-8) ==
          doctest::Approx(fpa_rate(ch, lb, 1e-8)).epsilon(1e-14));
  }
}

TEST_CASE("as_rate never falls below fpa_rate on odd centered grids") {
  // Odd grids include the reference point, so the exhaustive maximum is at
  // least the fixed-position rate.
  ScenarioConfig cfg = small_scenario();
  const LinkBudget lb = cfg.link_budget();
  AsGrid grid;  // 3x3, half-wavelength spacing
  for (int i = 0; i < 20; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    CHECK(as_rate(ch, grid, lb, 1e-8) >= fpa_rate(ch, lb, 1e-8) - 1e-12);
  }
}

TEST_CASE("as_rate equals a hand enumeration of grid pairs") {
  ScenarioConfig cfg = small_scenario();
  const LinkBudget lb = cfg.link_budget();
  const WidebandChannel ch = sample_channel(cfg, 3);
  AsGrid grid;
  grid.n_tx = 2;
  grid.n_rx = 3;
  grid.spacing = 0.5;
  grid.axis = Axis::y;

  double best = -1.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Position t{0.0, (i - 0.5) * 0.5, 0.0};
      const Position r{0.0, (j - 1.0) * 0.5, 0.0};
      best = std::max(best,
                      rate_waterfilled(cfr(cir(ch, t, r), lb.subcarriers), lb,
                                       1e-8));
    }
  }
  CHECK(as_rate(ch, grid, lb, 1e-8) == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("as_rate grows with grid size on a fixed channel") {
  ScenarioConfig cfg = small_scenario();
  const LinkBudget lb = cfg.link_budget();
  const WidebandChannel ch = sample_channel(cfg, 8);
  AsGrid small, large;
  small.n_tx = small.n_rx = 1;
  large.n_tx = large.n_rx = 5;
  // 1x1 positions are a subset of the centered 5x5 positions.
  CHECK(as_rate(ch, large, lb, 1e-8) >=
        as_rate(ch, small, lb, 1e-8) - 1e-12);
}

TEST_CASE("as_rate rejects invalid grids") {
  ScenarioConfig cfg = small_scenario();
  const WidebandChannel ch = sample_channel(cfg, 0);
  AsGrid grid;
  grid.n_tx = 0;
  CHECK_THROWS_AS(as_rate(ch, grid, cfg.link_budget(), 1e-8),
                  std::invalid_argument);
  grid = {};
  grid.spacing = 0.0;
  CHECK_THROWS_AS(as_rate(ch, grid, cfg.link_budget(), 1e-8),
                  std::invalid_argument);
}

TEST_CASE("rate-mode pga dominates antenna selection on full scenarios") {
  // Near-certain per-realization dominance (pilot: 60/60 with worst margin
  // +0.07 bps/Hz); allow one miss in the small sample.
  ScenarioConfig cfg;
  const LinkBudget lb = cfg.link_budget();
  AsGrid grid;
  const int n = 15;
  int wins = 0;
  for (int i = 0; i < n; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    PgaConfig pc;
    std::uint64_t s = 1;
    pc.seed = splitmix64(s) ^
              (static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ULL);
    const auto trace =
        pga(ch, cfg.tx_region(), cfg.rx_region(), lb, pc, PgaMode::rate);
    if (trace.best_objective >= as_rate(ch, grid, lb, 1e-6) - 1e-9) ++wins;
  }
  CHECK(wins >= n - 1);
}

TEST_CASE("pga on degenerate point regions matches fpa_rate") {
  ScenarioConfig cfg = small_scenario();
  cfg.tx_half_width = 0.0;
  cfg.rx_half_width = 0.0;
  const LinkBudget lb = cfg.link_budget();
  PgaConfig pc;
  pc.i_max = 5;
  for (int i = 0; i < 3; ++i) {
    const WidebandChannel ch = sample_channel(cfg, i);
    const auto trace =
        pga(ch, cfg.tx_region(), cfg.rx_region(), lb, pc, PgaMode::rate);
    CHECK(trace.best_objective ==
          doctest::Approx(fpa_rate(ch, lb, pc.eps_p)).epsilon(1e-12));
  }
}
