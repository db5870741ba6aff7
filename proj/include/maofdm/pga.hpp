#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "maofdm/geometry.hpp"
#include "maofdm/rate_power.hpp"
#include "maofdm/rng.hpp"

namespace maofdm {

struct PgaConfig {
  int k_max = 10;           // parallel candidates K_max
  double zeta = 0.04;       // line-search step, wavelength units (lambda/25)
  int i_max = 100;          // iteration cap I_max
  double eps_p = 1e-6;      // water-filling accuracy
  double dedup_tol = 1e-3;  // candidate-merge distance, wavelengths
  std::uint64_t seed = 1;
};

enum class PgaMode { rate, cir_power };

struct CandidatePoint {
  Position t;
  Position r;
  double objective = 0.0;
};

enum class PgaStop { iteration_cap, empty_set };

struct PgaTrace {
  std::vector<double> best_history;   // incumbent objective, index 0 = init
  std::vector<int> candidate_counts;  // K^(i) per iteration
  Position best_t;
  Position best_r;
  double best_objective = 0.0;
  PowerAllocation allocation;
  PgaStop termination = PgaStop::iteration_cap;
  int iterations = 0;
  int last_improvement_iteration = 0;
  long evaluations = 0;
};

// Gradient of the water-filled rate R_p with the allocation held fixed at its
// optimum (envelope treatment; the active set changes only on measure-zero
// boundaries). Assembled by chain rule through the CFR.
inline std::pair<Vec3, Vec3> grad_rate(const WidebandChannel& channel,
                                       const Position& t, const Position& r,
                                       const LinkBudget& lb, double eps_p) {
  const int tap_count = static_cast<int>(channel.taps.size());
  const int m_sub = lb.subcarriers;

  std::vector<cdouble> h(tap_count);
  std::vector<cdouble> dh_t(3 * tap_count), dh_r(3 * tap_count);
  for (int tau = 0; tau < tap_count; ++tau) {
    const auto& tap = channel.taps[tau];
    cdouble hv = 0.0;
    cdouble dt[3] = {0.0, 0.0, 0.0};
    cdouble dr[3] = {0.0, 0.0, 0.0};
    for (std::size_t l = 0; l < tap.paths.size(); ++l) {
      const Vec3& kt = tap.paths[l].wave_tx;
      const Vec3& kr = tap.paths[l].wave_rx;
      const cdouble term =
          tap.coeffs[l] * std::polar(1.0, kTwoPi * (t.dot(kt) - r.dot(kr)));
      hv += term;
      const cdouble jterm = cdouble{0.0, kTwoPi} * term;
      for (int a = 0; a < 3; ++a) {
        dt[a] += jterm * kt[a];
        dr[a] -= jterm * kr[a];
      }
    }
    h[tau] = hv;
    for (int a = 0; a < 3; ++a) {
      dh_t[3 * tau + a] = dt[a];
      dh_r[3 * tau + a] = dr[a];
    }
  }

  std::vector<cdouble> c(m_sub), dc_t(3 * m_sub), dc_r(3 * m_sub);
  for (int tau = 0; tau < tap_count; ++tau) {
    const cdouble w = std::polar(1.0, -kTwoPi * tau / m_sub);
    cdouble f{1.0, 0.0};
    for (int m = 0; m < m_sub; ++m) {
      c[m] += h[tau] * f;
      for (int a = 0; a < 3; ++a) {
        dc_t[3 * m + a] += dh_t[3 * tau + a] * f;
        dc_r[3 * m + a] += dh_r[3 * tau + a] * f;
      }
      f *= w;
    }
  }

  std::vector<double> gains(m_sub);
  for (int m = 0; m < m_sub; ++m) gains[m] = std::norm(c[m]);
  const PowerAllocation alloc = water_fill(gains, lb, eps_p);

  const double scale = 1.0 / ((m_sub + lb.cp_len) * std::numbers::ln2);
  Vec3 gt, gr;
  for (int m = 0; m < m_sub; ++m) {
    if (alloc.p[m] <= 0.0) continue;
    const double w = scale * alloc.p[m] / (lb.sigma2 + gains[m] * alloc.p[m]);
    const cdouble cc = std::conj(c[m]);
    for (int a = 0; a < 3; ++a) {
      gt[a] += w * 2.0 * (cc * dc_t[3 * m + a]).real();
      gr[a] += w * 2.0 * (cc * dc_r[3 * m + a]).real();
    }
  }
  return {gt, gr};
}

// Closed-form gradient of the CIR power sum_tau |h_tau|^2. Only paths within
// the same tap couple; cross-tap terms do not enter the objective.
inline std::pair<Vec3, Vec3> grad_cir_power(const WidebandChannel& channel,
                                            const Position& t,
                                            const Position& r) {
  Vec3 gt, gr;
  for (const auto& tap : channel.taps) {
    const std::size_t n = tap.paths.size();
    for (std::size_t l = 0; l < n; ++l) {
      const double amp_l = std::abs(tap.coeffs[l]);
      const double arg_l = std::arg(tap.coeffs[l]);
      for (std::size_t lp = l + 1; lp < n; ++lp) {
        const Vec3 dk_t = tap.paths[l].wave_tx - tap.paths[lp].wave_tx;
        const Vec3 dk_r = tap.paths[l].wave_rx - tap.paths[lp].wave_rx;
        const double arg = kTwoPi * (t.dot(dk_t) - r.dot(dk_r)) + arg_l -
                           std::arg(tap.coeffs[lp]);
        const double s =
            2.0 * kTwoPi * amp_l * std::abs(tap.coeffs[lp]) * std::sin(arg);
        gt += dk_t * (-s);
        gr += dk_r * s;
      }
    }
  }
  return {gt, gr};
}

// Largest eta >= 0 keeping t + eta dir_t and r + eta dir_r inside the regions.
// Returns +inf only when both directions are zero.
inline double eta_max(const Position& t, const Position& r, const Vec3& dir_t,
                      const Vec3& dir_r, const Region& region_t,
                      const Region& region_r) {
  double best = std::numeric_limits<double>::infinity();
  auto account = [&best](const Position& p, const Vec3& d,
                         const Region& reg) {
    for (int a = 0; a < 3; ++a) {
      if (d[a] > 0.0) {
        best = std::min(best, std::max((reg.max[a] - p[a]) / d[a], 0.0));
      } else if (d[a] < 0.0) {
        best = std::min(best, std::max((reg.min[a] - p[a]) / d[a], 0.0));
      }
    }
  };
  account(t, dir_t, region_t);
  account(r, dir_r, region_r);
  return best;
}

// All discrete local maxima over the segment, per the strict-then-weak rule:
// value[q] > value[q-1] and value[q] >= value[q+1], with the objective at
// eta = 0 serving as the first predecessor. The endpoint has no successor; it
// qualifies if it strictly exceeds both its predecessor and the segment
// origin (the latter guard keeps a rise back toward the starting value from
// minting a spurious boundary candidate).
inline std::vector<CandidatePoint> line_maxima(
    const std::function<double(const Position&, const Position&)>& objective,
    const Position& t, const Position& r, const Vec3& dir_t, const Vec3& dir_r,
    double zeta, double eta_limit) {
  std::vector<CandidatePoint> maxima;
  if (eta_limit <= 0.0 || !std::isfinite(eta_limit)) return maxima;

  std::vector<double> etas;
  const int full_steps = static_cast<int>(std::floor(eta_limit / zeta));
  etas.reserve(full_steps + 1);
  for (int q = 1; q <= full_steps; ++q) etas.push_back(q * zeta);
  if (etas.empty() || etas.back() < eta_limit) etas.push_back(eta_limit);

  const std::size_t n = etas.size();
  std::vector<Position> pts_t(n), pts_r(n);
  std::vector<double> values(n);
  for (std::size_t q = 0; q < n; ++q) {
    pts_t[q] = t + dir_t * etas[q];
    pts_r[q] = r + dir_r * etas[q];
    values[q] = objective(pts_t[q], pts_r[q]);
  }

  const double at_origin = objective(t, r);
  for (std::size_t q = 0; q < n; ++q) {
    const double prev = (q == 0) ? at_origin : values[q - 1];
    const bool rises = values[q] > prev;
    const bool holds = (q + 1 == n) ? values[q] > at_origin
                                    : values[q] >= values[q + 1];
    if (rises && holds) {
      maxima.push_back({pts_t[q], pts_r[q], values[q]});
    }
  }
  return maxima;
}

inline std::vector<std::pair<Position, Position>> init_candidates(
    const Region& region_t, const Region& region_r, int k_max,
    std::uint64_t seed) {
  std::vector<std::pair<Position, Position>> out;
  out.reserve(k_max);
  out.emplace_back(clamp_to_region({0, 0, 0}, region_t),
                   clamp_to_region({0, 0, 0}, region_r));
  Rng rng(seed);
  auto draw = [&rng](const Region& reg) {
    Position p;
    for (int a = 0; a < 3; ++a) p[a] = rng.uniform(reg.min[a], reg.max[a]);
    return p;
  };
  for (int k = 1; k < k_max; ++k) {
    Position t = draw(region_t);
    Position r = draw(region_r);
    out.emplace_back(t, r);
  }
  return out;
}

namespace detail {

inline double joint_distance2(const CandidatePoint& a,
                              const CandidatePoint& b) {
  return (a.t - b.t).norm2() + (a.r - b.r).norm2();
}

}  // namespace detail

// Parallel greedy ascent over joint Tx/Rx positions. In rate mode the
// objective is the water-filled rate; in cir_power mode it is the CIR power
// with water-filling applied once at the end.
inline PgaTrace pga(const WidebandChannel& channel, const Region& region_t,
                    const Region& region_r, const LinkBudget& lb,
                    const PgaConfig& cfg, PgaMode mode) {
  PgaTrace trace;

  std::function<double(const Position&, const Position&)> objective;
  if (mode == PgaMode::rate) {
    objective = [&](const Position& t, const Position& r) {
      ++trace.evaluations;
      return rate_waterfilled(cfr(cir(channel, t, r), lb.subcarriers), lb,
                              cfg.eps_p);
    };
  } else {
    objective = [&](const Position& t, const Position& r) {
      ++trace.evaluations;
      return cir_power(cir(channel, t, r));
    };
  }

  auto gradient = [&](const Position& t, const Position& r) {
    return mode == PgaMode::rate ? grad_rate(channel, t, r, lb, cfg.eps_p)
                                 : grad_cir_power(channel, t, r);
  };

  std::vector<CandidatePoint> shortlist;
  for (const auto& [t, r] : init_candidates(region_t, region_r, cfg.k_max,
                                            cfg.seed)) {
    shortlist.push_back({t, r, objective(t, r)});
  }
  std::stable_sort(shortlist.begin(), shortlist.end(),
                   [](const CandidatePoint& a, const CandidatePoint& b) {
                     return a.objective > b.objective;
                   });

  trace.best_t = shortlist.front().t;
  trace.best_r = shortlist.front().r;
  trace.best_objective = shortlist.front().objective;
  trace.best_history.push_back(trace.best_objective);
  trace.candidate_counts.push_back(static_cast<int>(shortlist.size()));

  for (int i = 1; i <= cfg.i_max; ++i) {
    trace.iterations = i;
    std::vector<CandidatePoint> found;
    for (const auto& cand : shortlist) {
      const auto [gt, gr] = gradient(cand.t, cand.r);
      const double joint_norm = std::sqrt(gt.norm2() + gr.norm2());
      if (joint_norm <= 1e-12) continue;  // local maximum, empty segment
      // Unit joint direction so eta (and zeta) are wavelength distances.
      const Vec3 dir_t = gt * (1.0 / joint_norm);
      const Vec3 dir_r = gr * (1.0 / joint_norm);
      const double limit =
          eta_max(cand.t, cand.r, dir_t, dir_r, region_t, region_r);
      if (limit <= 0.0 || !std::isfinite(limit)) continue;
      auto maxima = line_maxima(objective, cand.t, cand.r, dir_t, dir_r,
                                cfg.zeta, limit);
      for (auto& m : maxima) {
        m.t = clamp_to_region(m.t, region_t);
        m.r = clamp_to_region(m.r, region_r);
        found.push_back(m);
      }
    }

    if (found.empty()) {
      trace.termination = PgaStop::empty_set;
      break;
    }

    std::stable_sort(found.begin(), found.end(),
                     [](const CandidatePoint& a, const CandidatePoint& b) {
                       return a.objective > b.objective;
                     });
    // Merge near-duplicate candidates; the sort order keeps the better one.
    std::vector<CandidatePoint> merged;
    const double tol2 = cfg.dedup_tol * cfg.dedup_tol;
    for (const auto& c : found) {
      bool dup = false;
      for (const auto& kept : merged) {
        if (detail::joint_distance2(c, kept) < tol2) {
          dup = true;
          break;
        }
      }
      if (!dup) merged.push_back(c);
    }

    const int k_i = std::min<int>(static_cast<int>(merged.size()), cfg.k_max);
    shortlist.assign(merged.begin(), merged.begin() + k_i);
    trace.candidate_counts.push_back(k_i);

    if (shortlist.front().objective > trace.best_objective) {
      trace.best_objective = shortlist.front().objective;
      trace.best_t = shortlist.front().t;
      trace.best_r = shortlist.front().r;
      trace.last_improvement_iteration = i;
    }
    trace.best_history.push_back(trace.best_objective);
  }

  const CfrVector c = cfr(cir(channel, trace.best_t, trace.best_r),
                          lb.subcarriers);
  std::vector<double> gains(c.size());
  for (std::size_t m = 0; m < c.size(); ++m) gains[m] = std::norm(c[m]);
  trace.allocation = water_fill(gains, lb, cfg.eps_p);
  return trace;
}

}  // namespace maofdm
