#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maofdm/geometry.hpp"
#include "maofdm/rate_power.hpp"
#include "maofdm/rng.hpp"

namespace maofdm {

inline constexpr double kSpeedOfLight = 299792458.0;

// Physical and statistical experiment parameters. Noise power is normalized
// to 1 and the large-scale gain g0 is solved from the target receive SNR,
// which fully determines all rates.
struct ScenarioConfig {
  int subcarriers = 64;      // M
  int cp_len = 6;            // M_CP
  int taps = 6;              // T
  int paths_per_tap = 5;     // L
  double alpha = 2.0;        // PDP exponential decay factor
  double snr_db = 25.0;      // g0 P / (M sigma^2) in dB
  double power = 1.0;        // P, watts
  double sigma2 = 1.0;
  double tx_half_width = 2.0;  // region half-width per axis, wavelengths
  double rx_half_width = 2.0;
  double carrier_freq_hz = 2.4e9;  // metadata only
  double bandwidth_hz = 40e6;      // metadata only
  std::uint64_t seed = 1;

  double g0() const {
    return subcarriers * sigma2 * std::pow(10.0, snr_db / 10.0) / power;
  }
  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  LinkBudget link_budget() const {
    return {subcarriers, cp_len, power, sigma2};
  }
  Region tx_region() const { return Region::cube(tx_half_width); }
  Region rx_region() const { return Region::cube(rx_half_width); }

  void validate() const {
    if (taps < 1) throw std::invalid_argument("scenario: taps must be >= 1");
    if (subcarriers < taps) {
      throw std::invalid_argument("scenario: subcarriers must be >= taps");
    }
    if (cp_len < taps) {
      throw std::invalid_argument("scenario: cp_len must be >= taps");
    }
    if (paths_per_tap < 1) {
      throw std::invalid_argument("scenario: paths_per_tap must be >= 1");
    }
    if (alpha < 0.0) throw std::invalid_argument("scenario: alpha < 0");
    if (power <= 0.0 || sigma2 <= 0.0) {
      throw std::invalid_argument("scenario: power and sigma2 must be > 0");
    }
    if (tx_half_width < 0.0 || rx_half_width < 0.0) {
      throw std::invalid_argument("scenario: negative region half-width");
    }
  }
};

struct Pdp {
  std::vector<double> q;  // normalized tap powers, sum 1
};

inline Pdp pdp(int taps, double alpha) {
  if (taps < 1) throw std::invalid_argument("pdp: taps must be >= 1");
  Pdp out;
  out.q.resize(taps);
  double norm = 0.0;
  for (int tau = 0; tau < taps; ++tau) {
    out.q[tau] = std::exp(-alpha * tau);
    norm += out.q[tau];
  }
  for (auto& v : out.q) v /= norm;
  return out;
}

// Elevation/azimuth pair with joint density cos(theta)/(2 pi) over the
// forward half-space [-pi/2, pi/2]^2: azimuth uniform, sin(elevation)
// uniform on [-1, 1]. The half-space support is what normalizes that
// density to 1, and it keeps closely spaced antennas spatially correlated
// (full-circle azimuth would decorrelate half-wavelength spacing entirely).
inline std::pair<double, double> sample_angles(Rng& rng) {
  const double elev = std::asin(rng.uniform(-1.0, 1.0));
  const double azim = std::numbers::pi / 2 - std::numbers::pi * rng.uniform();
  return {elev, azim};
}

// One random channel realization. The stream is derived from (seed, index),
// so realizations are reproducible and order-independent.
inline WidebandChannel sample_channel(const ScenarioConfig& cfg,
                                      std::uint64_t realization_index) {
  cfg.validate();
  Rng rng = Rng::stream(cfg.seed, realization_index);
  const Pdp profile = pdp(cfg.taps, cfg.alpha);
  const double g0 = cfg.g0();

  WidebandChannel channel;
  channel.wavelength = cfg.wavelength_m();
  channel.taps.resize(cfg.taps);
  for (int tau = 0; tau < cfg.taps; ++tau) {
    auto& tap = channel.taps[tau];
    const double sd =
        std::sqrt(g0 * profile.q[tau] / cfg.paths_per_tap / 2.0);
    tap.paths.reserve(cfg.paths_per_tap);
    tap.coeffs.reserve(cfg.paths_per_tap);
    for (int l = 0; l < cfg.paths_per_tap; ++l) {
      const auto [elev_d, azim_d] = sample_angles(rng);
      const auto [elev_a, azim_a] = sample_angles(rng);
      tap.paths.emplace_back(elev_d, azim_d, elev_a, azim_a);
      const double re = sd * rng.normal();
      const double im = sd * rng.normal();
      tap.coeffs.emplace_back(re, im);
    }
  }
  return channel;
}

// JSON form for cross-implementation golden tests:
// {"wavelength": w, "taps": [{"paths": [{"elev_aod", "azim_aod",
//  "elev_aoa", "azim_aoa", "re", "im"}, ...]}, ...]}
inline nlohmann::json channel_to_json(const WidebandChannel& channel) {
  nlohmann::json taps = nlohmann::json::array();
  for (const auto& tap : channel.taps) {
    nlohmann::json paths = nlohmann::json::array();
    for (std::size_t l = 0; l < tap.paths.size(); ++l) {
      const auto& p = tap.paths[l];
      paths.push_back({{"elev_aod", p.elev_aod},
                       {"azim_aod", p.azim_aod},
                       {"elev_aoa", p.elev_aoa},
                       {"azim_aoa", p.azim_aoa},
                       {"re", tap.coeffs[l].real()},
                       {"im", tap.coeffs[l].imag()}});
    }
    taps.push_back({{"paths", std::move(paths)}});
  }
  return {{"wavelength", channel.wavelength}, {"taps", std::move(taps)}};
}

inline WidebandChannel channel_from_json(const nlohmann::json& j) {
  WidebandChannel channel;
  channel.wavelength = j.at("wavelength").get<double>();
  for (const auto& jt : j.at("taps")) {
    TapCluster tap;
    for (const auto& jp : jt.at("paths")) {
      tap.paths.emplace_back(jp.at("elev_aod").get<double>(),
                             jp.at("azim_aod").get<double>(),
                             jp.at("elev_aoa").get<double>(),
                             jp.at("azim_aoa").get<double>());
      tap.coeffs.emplace_back(jp.at("re").get<double>(),
                              jp.at("im").get<double>());
    }
    channel.taps.push_back(std::move(tap));
  }
  if (channel.taps.empty()) {
    throw std::invalid_argument("channel_from_json: no taps");
  }
  return channel;
}

}  // namespace maofdm
