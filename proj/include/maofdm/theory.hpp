#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "maofdm/geometry.hpp"
#include "maofdm/rate_power.hpp"
#include "maofdm/rng.hpp"

namespace maofdm {

// Target CIR phases nu_tau (in cycles) and tolerance delta for the
// constructive phase-synthesis search along the Tx x-axis.
struct PhaseTarget {
  std::vector<double> nu;
  double delta = 0.0;
};

struct SynthesisResult {
  std::uint64_t k = 0;
  std::vector<double> residuals;  // | ||b_tau||_1 e^{j 2 pi nu_tau} - h_tau |
  double box_volume = 0.0;
};

namespace detail {
inline double frac(double x) {
  const double f = x - std::floor(x);
  return f < 1.0 ? f : 0.0;
}
}  // namespace detail

// Searches t = [k, 0, 0], r = 0 for integer k whose x-axis virtual AoD
// multiples fall in the anchored boxes [a, a + delta / (2 pi Delta)) mod 1,
// with Delta = (1/2pi) sum_tau ||b_tau||_1. A box hit whose verified residual
// exceeds delta is rejected and the search continues. not-found is a value:
// it signals k_limit too small for the box volume.
inline std::optional<SynthesisResult> synthesize_phases(
    const WidebandChannel& channel, const PhaseTarget& target,
    std::uint64_t k_limit) {
  const std::size_t tap_count = channel.taps.size();
  if (target.nu.size() != tap_count) {
    throw std::invalid_argument("synthesize_phases: nu length mismatch");
  }
  if (target.delta <= 0.0) {
    throw std::invalid_argument("synthesize_phases: delta must be > 0");
  }

  double l1_total = 0.0;
  for (const auto& tap : channel.taps) l1_total += tap.coeff_l1();
  const double width = target.delta / l1_total;  // delta / (2 pi Delta)

  std::vector<double> thetas, anchors;
  for (std::size_t tau = 0; tau < tap_count; ++tau) {
    const auto& tap = channel.taps[tau];
    for (std::size_t l = 0; l < tap.paths.size(); ++l) {
      thetas.push_back(tap.paths[l].wave_tx.x);
      anchors.push_back(detail::frac(target.nu[tau] -
                                     std::arg(tap.coeffs[l]) / kTwoPi));
    }
  }
  const std::size_t dims = thetas.size();
  const double volume = std::pow(width, static_cast<double>(dims));

  for (std::uint64_t k = 1; k <= k_limit; ++k) {
    bool hit = true;
    for (std::size_t n = 0; n < dims; ++n) {
      const double offset =
          detail::frac(static_cast<double>(k) * thetas[n] - anchors[n]);
      if (offset >= width) {
        hit = false;
        break;
      }
    }
    if (!hit) continue;

    const Position t{static_cast<double>(k), 0.0, 0.0};
    const Position r{0.0, 0.0, 0.0};
    std::vector<double> residuals(tap_count);
    bool ok = true;
    for (std::size_t tau = 0; tau < tap_count; ++tau) {
      const cdouble want = std::polar(channel.taps[tau].coeff_l1(),
                                      kTwoPi * target.nu[tau]);
      residuals[tau] = std::abs(want - cir_tap(channel.taps[tau], t, r));
      if (residuals[tau] > target.delta) ok = false;
    }
    if (ok) return SynthesisResult{k, std::move(residuals), volume};
  }
  return std::nullopt;
}

struct RationalDependence {
  std::vector<long> coefficients;  // same length as the input angles
};

namespace detail {

inline bool scan_subset(const std::vector<double>& angles,
                        const std::vector<std::size_t>& idx, long limit,
                        std::vector<long>& out) {
  // Odometer over coefficient vectors in [-limit, limit]^|idx| \ {0}.
  std::vector<long> a(idx.size(), -limit);
  for (;;) {
    bool all_zero = true;
    double sum = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (a[i] != 0) all_zero = false;
      sum += static_cast<double>(a[i]) * angles[idx[i]];
    }
    if (!all_zero && std::abs(sum) <= 1e-12) {
      out.assign(angles.size(), 0);
      for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = a[i];
      return true;
    }
    std::size_t pos = 0;
    while (pos < a.size() && a[pos] == limit) {
      a[pos] = -limit;
      ++pos;
    }
    if (pos == a.size()) return false;
    ++a[pos];
  }
}

}  // namespace detail

// Heuristic falsifier for the linear-independence-over-Q condition: looks for
// a small-integer combination summing to zero within 1e-12. Exhaustive over
// the full vector when the enumeration is small enough, otherwise over all
// pairs and triples of components (dependencies among sampled angles are
// low-order when they exist at all).
inline std::optional<RationalDependence> rational_dependence_scan(
    const std::vector<double>& angles, long denominator_limit) {
  if (angles.empty()) {
    throw std::invalid_argument("rational_dependence_scan: empty input");
  }
  const std::size_t n = angles.size();
  const double per_dim = 2.0 * denominator_limit + 1.0;
  std::vector<long> coeffs;

  if (std::pow(per_dim, static_cast<double>(n)) <= 2e7) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    if (detail::scan_subset(angles, all, denominator_limit, coeffs)) {
      return RationalDependence{std::move(coeffs)};
    }
    return std::nullopt;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (detail::scan_subset(angles, {i}, denominator_limit, coeffs)) {
      return RationalDependence{std::move(coeffs)};
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (detail::scan_subset(angles, {i, j}, denominator_limit, coeffs)) {
        return RationalDependence{std::move(coeffs)};
      }
      for (std::size_t k = j + 1; k < n; ++k) {
        if (detail::scan_subset(angles, {i, j, k}, denominator_limit,
                                coeffs)) {
          return RationalDependence{std::move(coeffs)};
        }
      }
    }
  }
  return std::nullopt;
}

struct DominanceReport {
  int trials = 0;
  int violations = 0;
  double max_violation = 0.0;  // positive means a sample beat the equal vector
  bool pass() const { return violations == 0; }
};

// High-SNR equalization property: among feasible gain vectors with total
// M * G, the equal-gain vector maximizes the water-filled rate. Samples are
// normalized exponentials (uniform on the simplex).
inline DominanceReport equal_gain_dominance(int subcarriers, double total_gain,
                                            const LinkBudget& lb, int trials,
                                            std::uint64_t seed = 7) {
  if (total_gain * lb.power / (subcarriers * lb.sigma2) < 1e3) {
    throw std::invalid_argument(
        "equal_gain_dominance: high-SNR regime GP/(M sigma^2) >= 1e3 required");
  }
  LinkBudget budget = lb;
  budget.subcarriers = subcarriers;

  // Equal gains make p = P/M the exact water-filling optimum.
  PowerAllocation uniform;
  uniform.p.assign(subcarriers, budget.power / subcarriers);
  CfrVector flat(subcarriers, std::sqrt(total_gain));
  const double equal_rate = achievable_rate(flat, uniform, budget);

  Rng rng(seed);
  DominanceReport report;
  report.trials = trials;
  std::vector<double> v(subcarriers);
  for (int trial = 0; trial < trials; ++trial) {
    double sum = 0.0;
    for (auto& g : v) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      g = -std::log(u);
      sum += g;
    }
    for (auto& g : v) g *= subcarriers * total_gain / sum;
    const double rate = rate_waterfilled_gains(v, budget, 1e-9);
    const double violation = rate - equal_rate;
    if (violation > report.max_violation) report.max_violation = violation;
    if (violation > 1e-12) ++report.violations;
  }
  return report;
}

}  // namespace maofdm
