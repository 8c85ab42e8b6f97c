#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risbeam {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Power floor keeps log10 finite on exact nulls.
inline double to_db(double linear) { return 10.0 * std::log10(linear > 1e-300 ? linear : 1e-300); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Raised when an iterative numerical routine gives up. Carries the module
// name and the outer iteration index so callers can report where it failed.
class NumericalError : public std::runtime_error {
public:
  NumericalError(std::string module, int iteration, const std::string& what)
      : std::runtime_error(module + " (iteration " + std::to_string(iteration) + "): " + what),
        module_(std::move(module)),
        iteration_(iteration) {}

  const std::string& module() const noexcept { return module_; }
  int iteration() const noexcept { return iteration_; }

private:
  std::string module_;
  int iteration_;
};

}  // namespace risbeam
