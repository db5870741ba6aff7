#pragma once

#include <stdexcept>
#include <vector>

#include "maofdm/geometry.hpp"
#include "maofdm/rate_power.hpp"

namespace maofdm {

enum class Axis { x, y, z };

// Discrete antenna-selection grid, centered on the region reference point.
struct AsGrid {
  int n_tx = 3;
  int n_rx = 3;
  double spacing = 0.5;  // wavelengths
  Axis axis = Axis::x;
};

// Fixed-position antennas at the reference point, water-filled.
inline double fpa_rate(const WidebandChannel& channel, const LinkBudget& lb,
                       double eps_p) {
  const CfrVector c = cfr(cir(channel, {0, 0, 0}, {0, 0, 0}), lb.subcarriers);
  return rate_waterfilled(c, lb, eps_p);
}

namespace detail {
inline std::vector<Position> grid_positions(int count, double spacing,
                                            Axis axis) {
  std::vector<Position> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double offset = (i - 0.5 * (count - 1)) * spacing;
    Position p;
    p[static_cast<int>(axis)] = offset;
    out.push_back(p);
  }
  return out;
}
}  // namespace detail

// Exhaustive search over all Tx/Rx grid pairs for the best water-filled rate.
inline double as_rate(const WidebandChannel& channel, const AsGrid& grid,
                      const LinkBudget& lb, double eps_p) {
  if (grid.n_tx < 1 || grid.n_rx < 1 || grid.spacing <= 0.0) {
    throw std::invalid_argument("as_rate: invalid grid");
  }
  const auto tx = detail::grid_positions(grid.n_tx, grid.spacing, grid.axis);
  const auto rx = detail::grid_positions(grid.n_rx, grid.spacing, grid.axis);
  double best = 0.0;
  bool first = true;
  for (const auto& t : tx) {
    for (const auto& r : rx) {
      const double rate = rate_waterfilled(
          cfr(cir(channel, t, r), lb.subcarriers), lb, eps_p);
      if (first || rate > best) {
        best = rate;
        first = false;
      }
    }
  }
  return best;
}

}  // namespace maofdm
