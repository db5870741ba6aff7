#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace maofdm {

using cdouble = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// All positions are expressed in wavelength units (dimensionless multiples of
// the carrier wavelength), so phase terms are 2*pi * pos . k without a 1/lambda
// factor.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

using Position = Vec3;

// Axis-aligned cuboid; degenerate (zero-width) axes are legal and enable
// planar or linear movement studies.
struct Region {
  Position min;
  Position max;

  bool contains(const Position& p, double tol = 0.0) const {
    for (int a = 0; a < 3; ++a) {
      if (p[a] < min[a] - tol || p[a] > max[a] + tol) return false;
    }
    return true;
  }

  static Region cube(double half_width) {
    return {{-half_width, -half_width, -half_width},
            {half_width, half_width, half_width}};
  }

  static Region point(const Position& p) { return {p, p}; }
};

inline Position clamp_to_region(const Position& pos, const Region& region) {
  Position out;
  for (int a = 0; a < 3; ++a) {
    out[a] = std::clamp(pos[a], region.min[a], region.max[a]);
  }
  return out;
}

// One propagation path: elevation/azimuth angle pairs on each side plus the
// derived virtual-angle wave vectors, cached at construction.
struct PathGeometry {
  double elev_aod = 0.0;
  double azim_aod = 0.0;
  double elev_aoa = 0.0;
  double azim_aoa = 0.0;
  Vec3 wave_tx;  // (cos e cos a, cos e sin a, sin e) from the AoD pair
  Vec3 wave_rx;

  PathGeometry() = default;
  PathGeometry(double elev_d, double azim_d, double elev_a, double azim_a)
      : elev_aod(elev_d), azim_aod(azim_d), elev_aoa(elev_a), azim_aoa(azim_a) {
    wave_tx = virtual_angles(elev_d, azim_d);
    wave_rx = virtual_angles(elev_a, azim_a);
  }

  static Vec3 virtual_angles(double elev, double azim) {
    const double ce = std::cos(elev);
    return {ce * std::cos(azim), ce * std::sin(azim), std::sin(elev)};
  }
};

enum class Side { tx, rx };

// One delay tap: the clustered paths plus their complex response coefficients
// (the diagonal of the path-response matrix).
struct TapCluster {
  std::vector<PathGeometry> paths;
  std::vector<cdouble> coeffs;

  double coeff_l1() const {
    double s = 0.0;
    for (const auto& b : coeffs) s += std::abs(b);
    return s;
  }
};

struct WidebandChannel {
  double wavelength = 1.0;  // meters; kept only for unit conversion at I/O
  std::vector<TapCluster> taps;
};

using CirVector = std::vector<cdouble>;
using CfrVector = std::vector<cdouble>;

// Per-path unit-modulus phase factors for one side of the link.
inline std::vector<cdouble> frv(const TapCluster& tap, const Position& pos,
                                Side side) {
  std::vector<cdouble> out;
  out.reserve(tap.paths.size());
  for (const auto& path : tap.paths) {
    const Vec3& k = (side == Side::tx) ? path.wave_tx : path.wave_rx;
    out.push_back(std::polar(1.0, kTwoPi * pos.dot(k)));
  }
  return out;
}

// f_tau(r)^H Sigma_tau g_tau(t), expanded path by path.
inline cdouble cir_tap(const TapCluster& tap, const Position& t,
                       const Position& r) {
  cdouble sum = 0.0;
  const std::size_t n = tap.paths.size();
  for (std::size_t l = 0; l < n; ++l) {
    const double phase =
        kTwoPi * (t.dot(tap.paths[l].wave_tx) - r.dot(tap.paths[l].wave_rx));
    sum += tap.coeffs[l] * std::polar(1.0, phase);
  }
  return sum;
}

inline CirVector cir(const WidebandChannel& channel, const Position& t,
                     const Position& r) {
  CirVector h;
  h.reserve(channel.taps.size());
  for (const auto& tap : channel.taps) h.push_back(cir_tap(tap, t, r));
  return h;
}

// Unnormalized forward DFT of the zero-padded CIR, so that D^H D = M I.
// Twiddles advance by recurrence; the tap count is small.
inline CfrVector cfr(const CirVector& h, int subcarriers) {
  const int tap_count = static_cast<int>(h.size());
  if (subcarriers < tap_count) {
    throw std::invalid_argument("cfr: subcarrier count below tap count");
  }
  CfrVector c(static_cast<std::size_t>(subcarriers), cdouble{0.0, 0.0});
  for (int tau = 0; tau < tap_count; ++tau) {
    const cdouble w = std::polar(1.0, -kTwoPi * tau / subcarriers);
    cdouble f{1.0, 0.0};
    for (int m = 0; m < subcarriers; ++m) {
      c[m] += h[tau] * f;
      f *= w;
    }
  }
  return c;
}

}  // namespace maofdm
