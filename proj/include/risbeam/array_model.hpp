#pragma once

#include <span>
#include <vector>

#include "risbeam/common.hpp"

namespace risbeam {

enum class ArrayKind { Ula, Upa };

// Element layout of the surface. For a UPA, elements are ordered with the
// z (elevation) index varying fastest: element = y_index * rows + z_index.
struct ArrayGeometry {
  ArrayKind kind = ArrayKind::Ula;
  int rows = 1;          // P, elevation (z) axis; 1 for a ULA
  int cols = 1;          // Q, azimuth (y) axis; N for a ULA
  double spacing = 0.5;  // element spacing in carrier wavelengths

  static ArrayGeometry ula(int n, double spacing = 0.5);
  static ArrayGeometry upa(int rows, int cols, double spacing = 0.5);

  int size() const { return rows * cols; }
  void validate() const;
};

// Angles in degrees. For a ULA only `theta` is used; for a UPA `theta` is the
// elevation and `azimuth` the azimuth angle.
struct Angle {
  double theta = 0.0;
  double azimuth = 0.0;
};

struct ChannelGains {
  cplx alpha{1.0, 0.0};  // target -> surface
  cplx beta{1.0, 0.0};   // surface -> base station
  Angle bs_angle{};      // phi
  double noise_var = 1.0;

  void validate() const;
};

// SNR of one element with a unit-modulus weight and unit pilot,
// |alpha beta|^2 / (N^2 sigma^2), in dB.
double element_snr_db(const ArrayGeometry& geom, const ChannelGains& gains);
// Gains with beta = 1 and a real alpha giving the requested element SNR.
ChannelGains gains_for_snr(const ArrayGeometry& geom, double snr_db, double noise_var = 1.0, Angle bs_angle = {});

CVector steering(const ArrayGeometry& geom, const Angle& angle);

// hbar = g .* conj(h) with g = alpha a(target), h = beta a(phi).
CVector effective_channel(const ArrayGeometry& geom, const ChannelGains& gains, const Angle& target);

// Columns are hbar(angle) for each grid angle.
CMatrix channel_table(const ArrayGeometry& geom, const ChannelGains& gains, std::span<const Angle> grid);

// |hbar(angle)^H w|^2 per column of `table`. Parallel over angles.
RVector beam_power(const CMatrix& table, const CVector& weights);
// Single-threaded reference of beam_power; kept for tests and benchmarks.
RVector beam_power_serial(const CMatrix& table, const CVector& weights);

// Convenience overload that builds the channel per angle on the fly, for
// evaluation grids too large to tabulate.
RVector beam_power(const ArrayGeometry& geom, const ChannelGains& gains, const CVector& weights,
                   std::span<const Angle> grid);

// Normalized ULA array factor sin(N x) / (N sin x), x = pi d sin(theta) - delta_phi / 2.
double array_factor(int n, double theta_deg, double delta_phi, double spacing = 0.5);

// Full width (degrees) of the boresight array-factor main lobe at `drop_db`
// below the peak, half-wavelength spacing.
double beamwidth(int n, double drop_db);

}  // namespace risbeam
