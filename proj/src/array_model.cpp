#include "risbeam/array_model.hpp"

#include <cmath>

#include "risbeam/parallel.hpp"

namespace risbeam {

namespace {

void check_angle(double deg, const char* what) {
  if (!(deg >= -90.0 && deg <= 90.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [-90, 90] degrees");
  }
}

// (1/sqrt(n)) [1, e^{j k u}, ..., e^{j (n-1) k u}] with k = 2 pi d.
CVector uniform_line(int n, double spacing, double u) {
  CVector v(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double step = 2.0 * kPi * spacing * u;
  for (int i = 0; i < n; ++i) v[i] = std::polar(scale, step * i);
  return v;
}

}  // namespace

ArrayGeometry ArrayGeometry::ula(int n, double spacing) {
  ArrayGeometry g{ArrayKind::Ula, 1, n, spacing};
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::upa(int rows, int cols, double spacing) {
  ArrayGeometry g{ArrayKind::Upa, rows, cols, spacing};
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("array geometry: element counts must be >= 1");
  if (kind == ArrayKind::Ula && rows != 1) throw std::invalid_argument("array geometry: a ULA has a single row");
  if (!(spacing > 0.0)) throw std::invalid_argument("array geometry: spacing must be > 0");
}

void ChannelGains::validate() const {
  if (!(noise_var > 0.0)) throw std::invalid_argument("channel gains: noise variance must be > 0");
  check_angle(bs_angle.theta, "bs angle");
  check_angle(bs_angle.azimuth, "bs azimuth");
}

double element_snr_db(const ArrayGeometry& geom, const ChannelGains& gains) {
  const double n = geom.size();
  return to_db(std::norm(gains.alpha * gains.beta) / (n * n * gains.noise_var));
}

ChannelGains gains_for_snr(const ArrayGeometry& geom, double snr_db, double noise_var, Angle bs_angle) {
  geom.validate();
  ChannelGains g;
  g.noise_var = noise_var;
  g.bs_angle = bs_angle;
  g.alpha = geom.size() * std::sqrt(noise_var * from_db(snr_db));
  g.beta = 1.0;
  g.validate();
  return g;
}

CVector steering(const ArrayGeometry& geom, const Angle& angle) {
  geom.validate();
  check_angle(angle.theta, "theta");
  const double el = deg2rad(angle.theta);
  if (geom.kind == ArrayKind::Ula) return uniform_line(geom.cols, geom.spacing, std::sin(el));

  check_angle(angle.azimuth, "azimuth");
  const double psi = std::sin(deg2rad(angle.azimuth)) * std::cos(el);
  const CVector ay = uniform_line(geom.cols, geom.spacing, psi);
  const CVector az = uniform_line(geom.rows, geom.spacing, std::sin(el));
  CVector a(geom.size());
  for (int iy = 0; iy < geom.cols; ++iy)
    for (int iz = 0; iz < geom.rows; ++iz) a[iy * geom.rows + iz] = ay[iy] * az[iz];
  return a;
}

CVector effective_channel(const ArrayGeometry& geom, const ChannelGains& gains, const Angle& target) {
  gains.validate();
  const CVector g = gains.alpha * steering(geom, target);
  const CVector h = gains.beta * steering(geom, gains.bs_angle);
  return g.cwiseProduct(h.conjugate());
}

CMatrix channel_table(const ArrayGeometry& geom, const ChannelGains& gains, std::span<const Angle> grid) {
  if (grid.empty()) throw std::invalid_argument("channel table: empty angle grid");
  CMatrix table(geom.size(), static_cast<Eigen::Index>(grid.size()));
  parallel_for(static_cast<std::ptrdiff_t>(grid.size()),
               [&](std::ptrdiff_t k) { table.col(k) = effective_channel(geom, gains, grid[k]); });
  return table;
}

RVector beam_power(const CMatrix& table, const CVector& weights) {
  if (table.rows() != weights.size()) throw std::invalid_argument("beam power: weight length does not match array size");
  RVector out(table.cols());
  parallel_for(table.cols(), [&](std::ptrdiff_t k) { out[k] = std::norm(table.col(k).dot(weights)); });
  return out;
}

RVector beam_power_serial(const CMatrix& table, const CVector& weights) {
  if (table.rows() != weights.size()) throw std::invalid_argument("beam power: weight length does not match array size");
  RVector out(table.cols());
  for (Eigen::Index k = 0; k < table.cols(); ++k) {
    cplx acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < table.rows(); ++i) acc += std::conj(table(i, k)) * weights[i];
    out[k] = std::norm(acc);
  }
  return out;
}

RVector beam_power(const ArrayGeometry& geom, const ChannelGains& gains, const CVector& weights,
                   std::span<const Angle> grid) {
  if (weights.size() != geom.size()) throw std::invalid_argument("beam power: weight length does not match array size");
  if (grid.empty()) throw std::invalid_argument("beam power: empty angle grid");
  RVector out(static_cast<Eigen::Index>(grid.size()));
  parallel_for(static_cast<std::ptrdiff_t>(grid.size()), [&](std::ptrdiff_t k) {
    out[k] = std::norm(effective_channel(geom, gains, grid[k]).dot(weights));
  });
  return out;
}

double array_factor(int n, double theta_deg, double delta_phi, double spacing) {
  if (n < 1) throw std::invalid_argument("array factor: n must be >= 1");
  const double x = kPi * spacing * std::sin(deg2rad(theta_deg)) - 0.5 * delta_phi;
  const double denom = std::sin(x);
  if (std::abs(denom) > 1e-6) return std::sin(n * x) / (n * denom);

  // Near x = k pi: ratio = (-1)^{k(n-1)} sin(n e) / (n sin e), e = x - k pi,
  // and sin(n e) / (n sin e) = 1 - (n^2 - 1) e^2 / 6 + O(e^4).
  const double k = std::round(x / kPi);
  const double e = x - k * kPi;
  const long long parity = static_cast<long long>(k) * (n - 1);
  const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
  const double nn = static_cast<double>(n) * n;
  const double e2 = e * e;
  return sign * (1.0 - (nn - 1.0) * e2 / 6.0 + (nn - 1.0) * (3.0 * nn - 7.0) * e2 * e2 / 360.0);
}

double beamwidth(int n, double drop_db) {
  if (n < 2) throw std::invalid_argument("beamwidth: n must be >= 2");
  if (!(drop_db > 0.0)) throw std::invalid_argument("beamwidth: drop must be > 0 dB");
  const double target = std::pow(10.0, -drop_db / 20.0);
  // Main lobe of the boresight pattern ends at the first null, sin(theta) = 2 / n.
  double lo = 0.0;
  double hi = rad2deg(std::asin(std::min(1.0, 2.0 / n)));
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(array_factor(n, mid, 0.0)) > target) lo = mid;
    else hi = mid;
  }
  return lo + hi;  // 2 * midpoint
}

}  // namespace risbeam
