#pragma once

#include "mosaic/bath.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/laplace.hpp"
#include "mosaic/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <iostream>
#include <string>
#include <vector>

namespace mosaic {

enum class Method { volterra, auxiliary_ode, residue_reconstruction };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::volterra: return "volterra";
    case Method::auxiliary_ode: return "auxiliary_ode";
    case Method::residue_reconstruction: return "residue_reconstruction";
  }
  return "?";
}

// Decimated time series of the lattice amplitudes. Integration always runs
// at full step resolution; only every `decimation`-th step (plus the final
// one) is stored.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXcd amplitudes;  // N x times.size(), column per stored time
  Method method = Method::auxiliary_ode;

  int sites() const { return static_cast<int>(amplitudes.rows()); }
  int points() const { return static_cast<int>(times.size()); }
};

namespace detail {

inline long grid_steps(double horizon, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("integration step must be > 0");
  if (!(horizon >= step)) throw std::invalid_argument("horizon must cover at least one step");
  const double count = horizon / step;
  if (count > 1e6 + 0.5)
    throw std::invalid_argument("more than 1e6 integration steps requested; enlarge the step");
  return std::lround(count);
}

inline void check_initial_norm(const Eigen::VectorXcd& alpha0) {
  if (alpha0.size() == 0) throw std::invalid_argument("empty initial state");
  if (std::abs(alpha0.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("initial amplitudes must be normalized");
}

inline void warn_if_stiff(const Eigen::MatrixXd& h, double step) {
  const double scale = h.cwiseAbs().rowwise().sum().maxCoeff();
  if (step * scale > 0.5)
    std::cerr << "[mosaic] warning: step " << step << " is large for |H| ~ " << scale
              << "; expect degraded accuracy\n";
}

inline void check_finite(const Eigen::VectorXcd& v, Method m, double t) {
  if (!v.allFinite())
    throw NumericalError(std::string("integrate(") + to_string(m) +
                         "): non-finite amplitudes at t = " + std::to_string(t));
}

// 4th-order composite quadrature weight for node j of k uniform intervals:
// Simpson with a 3/8 tail when the interval count is odd. The k = 1
// trapezoid only ever covers the first step of a run.
inline double quadrature_weight(long k, long j) {
  if (k == 1) return 0.5;
  if (k == 2) return (j == 1) ? 4.0 / 3.0 : 1.0 / 3.0;
  if (k == 3) return (j == 0 || j == 3) ? 3.0 / 8.0 : 9.0 / 8.0;
  if (k % 2 == 0) {
    if (j == 0 || j == k) return 1.0 / 3.0;
    return (j % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  }
  const long m = k - 3;
  if (j < m) {
    if (j == 0) return 1.0 / 3.0;
    return (j % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  }
  if (j == m) return 1.0 / 3.0 + 3.0 / 8.0;
  if (j == k) return 3.0 / 8.0;
  return 9.0 / 8.0;
}

}  // namespace detail

// Direct integration of the memory-kernel equation of motion
//   alpha' = -i H alpha - u int_0^t f(t - tau) s(tau) dtau,  s = sum_n alpha_n,
// discretized on a uniform grid: composite Simpson-family quadrature of the
// convolution with an Adams-Bashforth-Moulton PECE sweep and a Taylor-series
// startup. Work grows as (T/h)^2 because the full history is re-summed each
// step; no property of the exponential kernel is used beyond its value table.
inline Trajectory integrate_volterra(const HamiltonianMatrix& h,
                                     const SpectralDensityParams& bath,
                                     const Eigen::VectorXcd& alpha0, double horizon,
                                     double step, int decimation = 10) {
  bath.validate();
  detail::check_initial_norm(alpha0);
  if (decimation < 1) throw std::invalid_argument("decimation must be >= 1");
  const long steps = detail::grid_steps(horizon, step);
  detail::warn_if_stiff(h.entries, step);

  const int n = h.sites();
  if (alpha0.size() != n) throw std::invalid_argument("alpha0 has wrong length");
  const Eigen::MatrixXcd gen = Complex(0.0, -1.0) * h.entries.cast<Complex>();
  const double f0 = std::numbers::pi * bath.coupling * bath.width;

  std::vector<double> kernel(steps + 1);
  for (long j = 0; j <= steps; ++j) kernel[j] = f0 * std::exp(-bath.width * step * j);

  std::vector<Complex> s(steps + 1, Complex(0.0, 0.0));
  s[0] = alpha0.sum();

  // memory integral at t_k by history re-summation, O(k) each call
  const auto convolution = [&](long k, Complex s_last) -> Complex {
    if (k == 0) return {0.0, 0.0};
    Complex acc = detail::quadrature_weight(k, k) * kernel[0] * s_last;
    for (long j = 0; j < k; ++j)
      acc += detail::quadrature_weight(k, j) * kernel[k - j] * s[j];
    return step * acc;
  };

  Trajectory traj;
  traj.method = Method::volterra;
  const long stored = steps / decimation + 1 + (steps % decimation != 0 ? 1 : 0);
  traj.amplitudes.resize(n, stored);
  traj.times.reserve(stored);
  long column = 0;
  const auto store = [&](long k, const Eigen::VectorXcd& alpha) {
    if (k % decimation != 0 && k != steps) return;
    detail::check_finite(alpha, Method::volterra, k * step);
    traj.times.push_back(k * step);
    traj.amplitudes.col(column++) = alpha;
  };

  // Taylor startup: derivatives of alpha at t = 0 through the convolution's
  // Leibniz expansion, exact to the scheme's order.
  std::vector<Eigen::VectorXcd> deriv{alpha0};
  for (int m = 0; m < 4; ++m) {
    Complex mem(0.0, 0.0);
    for (int r = 0; r < m; ++r) {
      const double kernel_deriv = f0 * std::pow(-bath.width, r);
      mem += kernel_deriv * deriv[m - 1 - r].sum();
    }
    deriv.push_back(gen * deriv[m] - mem * Eigen::VectorXcd::Ones(n));
  }
  const auto taylor = [&](double t) {
    Eigen::VectorXcd a = deriv[0];
    double weight = 1.0;
    for (int m = 1; m <= 4; ++m) {
      weight *= t / m;
      a += weight * deriv[m];
    }
    return a;
  };

  const long bootstrap = std::min<long>(3, steps);
  std::vector<Eigen::VectorXcd> history(4, Eigen::VectorXcd(n));  // F ring buffer
  Eigen::VectorXcd current = alpha0;
  store(0, current);
  history[0] = gen * current;  // F_0 (memory integral is zero)
  for (long k = 1; k <= bootstrap; ++k) {
    current = taylor(k * step);
    s[k] = current.sum();
    store(k, current);
    history[k % 4] = gen * current - convolution(k, s[k]) * Eigen::VectorXcd::Ones(n);
  }

  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
  for (long k = bootstrap; k < steps; ++k) {
    const Eigen::VectorXcd& f0v = history[k % 4];
    const Eigen::VectorXcd& f1v = history[(k - 1) % 4];
    const Eigen::VectorXcd& f2v = history[(k - 2) % 4];
    const Eigen::VectorXcd& f3v = history[(k - 3) % 4];
    const Eigen::VectorXcd predictor =
        current + (step / 24.0) * (55.0 * f0v - 59.0 * f1v + 37.0 * f2v - 9.0 * f3v);
    const Eigen::VectorXcd f_pred =
        gen * predictor - convolution(k + 1, predictor.sum()) * ones;
    current += (step / 24.0) * (9.0 * f_pred + 19.0 * f0v - 5.0 * f1v + f2v);
    s[k + 1] = current.sum();
    store(k + 1, current);
    history[(k + 1) % 4] = gen * current - convolution(k + 1, s[k + 1]) * ones;
  }

  traj.amplitudes.conservativeResize(n, column);
  return traj;
}

// Classic RK4 on the augmented linear system psi' = -i M psi with
// psi = [alpha; B], B(0) = 0. The lattice block of psi is alpha(t).
inline Trajectory integrate_auxiliary(const HamiltonianMatrix& h,
                                      const SpectralDensityParams& bath,
                                      const Eigen::VectorXcd& alpha0, double horizon,
                                      double step, int decimation = 10) {
  bath.validate();
  detail::check_initial_norm(alpha0);
  if (decimation < 1) throw std::invalid_argument("decimation must be >= 1");
  const long steps = detail::grid_steps(horizon, step);
  detail::warn_if_stiff(h.entries, step);

  const int n = h.sites();
  if (alpha0.size() != n) throw std::invalid_argument("alpha0 has wrong length");
  const AugmentedGenerator aug = build_augmented(h, bath);
  const Eigen::MatrixXcd gen = Complex(0.0, -1.0) * aug.matrix;

  Eigen::VectorXcd psi(n + 1);
  psi << alpha0, Complex(0.0, 0.0);

  Trajectory traj;
  traj.method = Method::auxiliary_ode;
  const long stored = steps / decimation + 1 + (steps % decimation != 0 ? 1 : 0);
  traj.amplitudes.resize(n, stored);
  traj.times.reserve(stored);
  long column = 0;
  const auto store = [&](long k) {
    if (k % decimation != 0 && k != steps) return;
    const Eigen::VectorXcd head = psi.head(n);
    detail::check_finite(head, Method::auxiliary_ode, k * step);
    traj.times.push_back(k * step);
    traj.amplitudes.col(column++) = head;
  };

  store(0);
  Eigen::VectorXcd k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1);
  for (long k = 0; k < steps; ++k) {
    k1.noalias() = gen * psi;
    k2.noalias() = gen * (psi + (step / 2.0) * k1);
    k3.noalias() = gen * (psi + (step / 2.0) * k2);
    k4.noalias() = gen * (psi + step * k3);
    psi += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    store(k + 1);
  }

  traj.amplitudes.conservativeResize(n, column);
  return traj;
}

// Residue-sum evaluation on the same decimated grid as the integrators.
inline Trajectory reconstruct_trajectory(const PoleDecomposition& d, double horizon,
                                         double step, int decimation = 10) {
  if (!d.has_residues())
    throw std::logic_error("reconstruct_trajectory: residues not computed");
  if (decimation < 1) throw std::invalid_argument("decimation must be >= 1");
  const long steps = detail::grid_steps(horizon, step);

  Trajectory traj;
  traj.method = Method::residue_reconstruction;
  std::vector<long> indices;
  for (long k = 0; k <= steps; k += decimation) indices.push_back(k);
  if (indices.back() != steps) indices.push_back(steps);
  traj.amplitudes.resize(d.lattice_sites(), indices.size());
  traj.times.reserve(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    const double t = indices[i] * step;
    traj.times.push_back(t);
    traj.amplitudes.col(i) = reconstruct_amplitudes(d, t);
  }
  return traj;
}

}  // namespace mosaic
