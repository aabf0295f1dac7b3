#pragma once

#include "mosaic/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace mosaic {

using Complex = std::complex<double>;

// Coefficients are ascending throughout: p(z) = c[0] + c[1] z + ... + c[d] z^d.

template <class Scalar>
std::pair<Scalar, Scalar> horner(const std::vector<Scalar>& coeffs, Scalar z) {
  Scalar p{};
  Scalar dp{};
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) {
    dp = dp * z + p;
    p = p * z + coeffs[i];
  }
  return {p, dp};
}

// All roots of a complex polynomial via the companion-matrix eigenproblem.
inline std::vector<Complex> companion_roots(std::vector<Complex> coeffs) {
  while (coeffs.size() > 1 && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
  const int degree = static_cast<int>(coeffs.size()) - 1;
  if (degree < 1) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (int i = 0; i + 1 < degree; ++i) companion(i + 1, i) = 1.0;
  for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs[i] / coeffs[degree];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("companion_roots: eigenvalue iteration failed");
  std::vector<Complex> roots(degree);
  for (int i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

// Newton iteration on a caller-supplied (value, derivative) evaluation.
// Stops on a relative step bound or when the step degenerates.
template <class ValueAndDerivative>
Complex newton_refine(Complex z, ValueAndDerivative&& fdf, int max_iter = 60,
                      double step_tol = 1e-13) {
  for (int it = 0; it < max_iter; ++it) {
    const auto [f, df] = fdf(z);
    if (!std::isfinite(std::abs(f)) || std::abs(df) == 0.0) break;
    const Complex step = f / df;
    if (!std::isfinite(std::abs(step))) break;
    z -= step;
    if (std::abs(step) <= step_tol * (1.0 + std::abs(z))) break;
  }
  return z;
}

// Real roots of a real polynomial: companion eigenvalues filtered by
// |imag| < imag_tol, Newton-polished on the real axis.
inline std::vector<double> real_roots(const std::vector<double>& coeffs,
                                      double imag_tol = 1e-9) {
  std::vector<Complex> ccoeffs(coeffs.begin(), coeffs.end());
  std::vector<double> out;
  for (const Complex& root : companion_roots(std::move(ccoeffs))) {
    if (std::abs(root.imag()) >= imag_tol) continue;
    double x = root.real();
    for (int it = 0; it < 60; ++it) {
      const auto [p, dp] = horner(coeffs, x);
      if (dp == 0.0) break;
      const double step = p / dp;
      if (!std::isfinite(step)) break;
      x -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(x))) break;
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace mosaic
