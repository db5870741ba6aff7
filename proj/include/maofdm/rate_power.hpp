#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maofdm/geometry.hpp"

namespace maofdm {

struct LinkBudget {
  int subcarriers = 64;  // M
  int cp_len = 6;        // M_CP
  double power = 1.0;    // total transmit power P
  double sigma2 = 1.0;   // per-subcarrier noise power
};

struct PowerAllocation {
  std::vector<double> p;
  double water_level = 0.0;
};

// Rates are reported in bps/Hz: Eq-(5)-style sum without a bandwidth factor.
inline double achievable_rate(const CfrVector& c, const PowerAllocation& alloc,
                              const LinkBudget& lb) {
  if (static_cast<int>(c.size()) != lb.subcarriers ||
      alloc.p.size() != c.size()) {
    throw std::invalid_argument("achievable_rate: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    sum += std::log2(1.0 + std::norm(c[m]) * alloc.p[m] / lb.sigma2);
  }
  return sum / (lb.subcarriers + lb.cp_len);
}

namespace detail {
inline double waterfill_budget(const std::vector<double>& gains, double sigma2,
                               double mu) {
  double total = 0.0;
  for (double g : gains) {
    if (g > 0.0) total += std::max(mu - sigma2 / g, 0.0);
  }
  return total;
}
}  // namespace detail

// Water-filling by bisection on the water level. The returned allocation sums
// to a value in [P - eps_p, P]; zero-gain subcarriers get zero power.
inline PowerAllocation water_fill(const std::vector<double>& gains,
                                  const LinkBudget& lb, double eps_p) {
  double floor_min = 0.0;
  double floor_max = 0.0;
  bool any_positive = false;
  for (double g : gains) {
    if (g > 0.0) {
      const double floor = lb.sigma2 / g;
      if (!any_positive || floor < floor_min) floor_min = floor;
      if (!any_positive || floor > floor_max) floor_max = floor;
      any_positive = true;
    }
  }
  if (!any_positive) {
    throw std::runtime_error("water_fill: channel identically zero");
  }

  double mu_lo = floor_min;                // budget(mu_lo) == 0 <= P
  double mu_hi = lb.power + floor_max;     // budget(mu_hi) >= P
  // Keep budget(mu_lo) <= P at all times so the result never oversupplies.
  for (int iter = 0; iter < 200; ++iter) {
    if (lb.power - detail::waterfill_budget(gains, lb.sigma2, mu_lo) <= eps_p) {
      break;
    }
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (detail::waterfill_budget(gains, lb.sigma2, mid) > lb.power) {
      mu_hi = mid;
    } else {
      mu_lo = mid;
    }
  }

  PowerAllocation out;
  out.water_level = mu_lo;
  out.p.resize(gains.size(), 0.0);
  for (std::size_t m = 0; m < gains.size(); ++m) {
    if (gains[m] > 0.0) {
      out.p[m] = std::max(mu_lo - lb.sigma2 / gains[m], 0.0);
    }
  }
  return out;
}

inline double rate_waterfilled_gains(const std::vector<double>& gains,
                                     const LinkBudget& lb, double eps_p) {
  const PowerAllocation alloc = water_fill(gains, lb, eps_p);
  double sum = 0.0;
  for (std::size_t m = 0; m < gains.size(); ++m) {
    sum += std::log2(1.0 + gains[m] * alloc.p[m] / lb.sigma2);
  }
  return sum / (lb.subcarriers + lb.cp_len);
}

inline double rate_waterfilled(const CfrVector& c, const LinkBudget& lb,
                               double eps_p) {
  std::vector<double> gains(c.size());
  for (std::size_t m = 0; m < c.size(); ++m) gains[m] = std::norm(c[m]);
  return rate_waterfilled_gains(gains, lb, eps_p);
}

inline double cir_power(const CirVector& h) {
  double total = 0.0;
  for (const auto& v : h) total += std::norm(v);
  return total;
}

// Closed-form high-SNR rate bound for total channel power G.
inline double rate_upper_bound(double total_gain, const LinkBudget& lb) {
  const double m = lb.subcarriers;
  return m / (m + lb.cp_len) *
         std::log2(1.0 + total_gain * lb.power / (m * lb.sigma2));
}

// G = sum_tau ||b_tau||_1^2; dominates ||h(t,r)||_2^2 for every position pair.
inline double channel_power_bound(const WidebandChannel& channel) {
  double total = 0.0;
  for (const auto& tap : channel.taps) {
    const double l1 = tap.coeff_l1();
    total += l1 * l1;
  }
  return total;
}

}  // namespace maofdm
