#pragma once

#include "mosaic/bath.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/localization.hpp"
#include "mosaic/model.hpp"
#include "mosaic/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace mosaic {

// Exact linearization of the rational pole condition
//   det[z I - H - Sigma(z) u u^T] = 0,  Sigma(z) = pi eta wc / (z + i wc),
// as one auxiliary lossy mode: the complex-symmetric (N+1) x (N+1) matrix
//   [[ H, g u ], [ g u^T, -i wc ]],  g = sqrt(pi eta wc), u = (1, ..., 1).
// Its N+1 eigenvalues are the dynamical poles, and exp(-i M t) acting on
// [alpha0; 0] is the exact solution of the memory-kernel equation of motion.
struct AugmentedGenerator {
  Eigen::MatrixXcd matrix;
  double coupling = 0.0;  // g
  ModelSpec spec;
  SpectralDensityParams bath;

  int lattice_sites() const { return static_cast<int>(matrix.rows()) - 1; }
};

inline AugmentedGenerator build_augmented(const HamiltonianMatrix& h,
                                          const SpectralDensityParams& bath) {
  bath.validate();
  const int n = h.sites();
  const double g = coupling_scalar(bath);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = h.entries.cast<Complex>();
  m.col(n).head(n).setConstant(g);
  m.row(n).head(n).setConstant(g);
  m(n, n) = Complex(0.0, -bath.width);
  return {std::move(m), g, h.spec, bath};
}

struct PoleDecomposition {
  std::vector<Complex> poles;        // descending real part
  std::vector<bool> steady;          // |Im z| < tol_steady
  std::vector<bool> near_degenerate; // another pole within 1e-8
  int pseudomode = -1;               // pole with dominant auxiliary-slot weight
  double tol_steady = 1e-10;

  Eigen::MatrixXcd modes;     // unconjugated right eigenvectors, column i <-> poles[i]
  Eigen::VectorXcd initial;   // alpha0 behind the attached residue table
  Eigen::MatrixXcd residues;  // N x (N+1): c(n, i)

  int pole_count() const { return static_cast<int>(poles.size()); }
  int lattice_sites() const { return static_cast<int>(modes.rows()) - 1; }
  bool has_residues() const { return residues.size() > 0; }
};

// Spectral data entering the scalar pole function
//   D(z) = (z + i wc) prod_j (z - E_j) - pi eta wc sum_j w_j prod_{k!=j} (z - E_k)
// with w_j = (u^T v_j)^2.
struct PoleProblem {
  Eigen::VectorXd energies;
  Eigen::VectorXd weights;
  SpectralDensityParams bath;
};

inline PoleProblem pole_problem(const EigenSystem& es, const SpectralDensityParams& bath) {
  bath.validate();
  PoleProblem pp;
  pp.energies = es.eigenvalues;
  const Eigen::VectorXd overlaps =
      es.eigenvectors.transpose() * Eigen::VectorXd::Ones(es.sites());
  pp.weights = overlaps.array().square();
  pp.bath = bath;
  return pp;
}

namespace detail {

// Newton step for D(z), evaluated through W(z) = D(z) / prod_j (z - E_j) so
// intermediate magnitudes stay bounded for any N:
//   step = -D/D' = -W / (W sum_j 1/(z - E_j) + W'),
//   W(z)  = (z + i wc) - pi eta wc sum_j w_j / (z - E_j),
//   W'(z) = 1 + pi eta wc sum_j w_j / (z - E_j)^2.
// A non-finite step means z sits on an exactly decoupled eigenvalue, which
// is itself a pole; the caller keeps the current iterate in that case.
inline Complex pole_newton_step(Complex z, const PoleProblem& pp) {
  const double strength = std::numbers::pi * pp.bath.coupling * pp.bath.width;
  Complex w = z + Complex(0.0, pp.bath.width);
  Complex dw = 1.0;
  Complex sum_inv = 0.0;
  for (int j = 0; j < pp.energies.size(); ++j) {
    const Complex inv = 1.0 / (z - pp.energies(j));
    sum_inv += inv;
    w -= strength * pp.weights(j) * inv;
    dw += strength * pp.weights(j) * inv * inv;
  }
  return -w / (w * sum_inv + dw);
}

// Refine until |step| <= 1e-12 (1 + |z|), i.e. |D| <= 1e-12 (1 + |z|) |D'|.
inline Complex refine_pole(Complex z, const PoleProblem& pp, int max_iter = 40) {
  for (int it = 0; it < max_iter; ++it) {
    const Complex step = pole_newton_step(z, pp);
    if (!std::isfinite(std::abs(step))) break;
    z += step;
    if (std::abs(step) <= 1e-12 * (1.0 + std::abs(z))) break;
  }
  return z;
}

inline void sort_descending_real(std::vector<Complex>& z) {
  std::sort(z.begin(), z.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

}  // namespace detail

// Assigns steady flags and identifies the pseudomode pole (the one whose
// eigenvector weight concentrates on the auxiliary slot).
inline void classify_steady(PoleDecomposition& d, double tol_steady = 1e-10) {
  if (!(tol_steady > 0.0)) throw std::domain_error("classify_steady: tol_steady must be > 0");
  d.tol_steady = tol_steady;
  const int m = d.pole_count();
  d.steady.assign(m, false);
  for (int i = 0; i < m; ++i) d.steady[i] = std::abs(d.poles[i].imag()) < tol_steady;

  const int aux = static_cast<int>(d.modes.rows()) - 1;
  int best = -1;
  double best_weight = -1.0;
  for (int i = 0; i < m; ++i) {
    const double weight = std::norm(d.modes(aux, i)) / d.modes.col(i).squaredNorm();
    if (weight > best_weight) {
      best_weight = weight;
      best = i;
    }
  }
  d.pseudomode = best;
}

// All N+1 poles: eigenvalues of the augmented matrix, Newton-refined on the
// scalar pole function, sorted by descending real part. Eigenvectors are
// kept for residue extraction.
inline PoleDecomposition find_poles(const AugmentedGenerator& aug) {
  const int n = aug.lattice_sites();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(aug.matrix, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("find_poles: eigenvalue iteration failed (N = " +
                         std::to_string(n) + ")");

  const EigenSystem es =
      eigendecompose(HamiltonianMatrix{aug.matrix.topLeftCorner(n, n).real(), aug.spec});
  const PoleProblem pp = pole_problem(es, aug.bath);

  std::vector<Complex> refined(n + 1);
  for (int i = 0; i <= n; ++i)
    refined[i] = detail::refine_pole(solver.eigenvalues()(i), pp);

  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (refined[a].real() != refined[b].real()) return refined[a].real() > refined[b].real();
    return refined[a].imag() > refined[b].imag();
  });

  PoleDecomposition d;
  d.poles.resize(n + 1);
  d.modes.resize(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    d.poles[i] = refined[order[i]];
    d.modes.col(i) = solver.eigenvectors().col(order[i]);
  }

  d.near_degenerate.assign(n + 1, false);
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (std::abs(d.poles[i] - d.poles[j]) < 1e-8)
        d.near_degenerate[i] = d.near_degenerate[j] = true;

  classify_steady(d);
  for (const Complex& z : d.poles)
    if (z.imag() > d.tol_steady)
      throw NumericalError("find_poles: growing mode Im z = " + std::to_string(z.imag()));
  return d;
}

// Residues of the amplitude transform at each pole for the initial state
// alpha0, via the unconjugated spectral decomposition of the complex-
// symmetric augmented matrix:
//   c(n, i) = V_i(n) (V_i^T psi0) / (V_i^T V_i),  psi0 = [alpha0; 0].
// The rows of the table satisfy the completeness sum rule
//   sum_i c(n, i) = alpha0(n).
inline void compute_residues(PoleDecomposition& d, const Eigen::VectorXcd& alpha0) {
  const int n = d.lattice_sites();
  if (alpha0.size() != n)
    throw std::invalid_argument("compute_residues: alpha0 has wrong length");
  if (std::abs(alpha0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("compute_residues: alpha0 must be normalized");
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (std::abs(d.poles[i] - d.poles[j]) < 1e-12)
        throw IllConditionedDecomposition(
            "compute_residues: collapsed pole pair; use direct integration");

  Eigen::VectorXcd psi0(n + 1);
  psi0 << alpha0, Complex(0.0, 0.0);

  d.residues.resize(n, n + 1);
  for (int i = 0; i <= n; ++i) {
    const Eigen::VectorXcd v = d.modes.col(i);
    const Complex vv = (v.array() * v.array()).sum();
    if (std::abs(vv) < 1e-10 * v.squaredNorm())
      throw IllConditionedDecomposition(
          "compute_residues: near-defective eigenvector at pole " + std::to_string(i));
    const Complex projection = (v.array() * psi0.array()).sum() / vv;
    d.residues.col(i) = v.head(n) * projection;
  }
  d.initial = alpha0;

  const double defect = (d.residues.rowwise().sum() - alpha0).cwiseAbs().maxCoeff();
  if (defect > 1e-10)
    throw IllConditionedDecomposition("compute_residues: completeness defect " +
                                      std::to_string(defect));
}

// alpha_n(t) = sum_i c(n, i) exp(-i z_i t). Exact for this rational system.
inline Eigen::VectorXcd reconstruct_amplitudes(const PoleDecomposition& d, double t) {
  if (t < 0.0) throw std::invalid_argument("reconstruct_amplitudes: t must be >= 0");
  if (!d.has_residues())
    throw std::logic_error("reconstruct_amplitudes: residues not computed");
  Eigen::VectorXcd phases(d.pole_count());
  for (int i = 0; i < d.pole_count(); ++i)
    phases(i) = std::exp(Complex(0.0, -1.0) * d.poles[i] * t);
  return d.residues * phases;
}

// O(j, i) = |sum_n v_j(n) c(n, i)|^2 with alpha0 = v_j row by row. Values
// may exceed 1; no normalization is applied.
inline Eigen::MatrixXd overlap_matrix(const EigenSystem& es,
                                      const SpectralDensityParams& bath) {
  const HamiltonianMatrix h = build_hamiltonian(es.spec);
  PoleDecomposition d = find_poles(build_augmented(h, bath));
  const int n = es.sites();
  Eigen::MatrixXd overlap(n, n + 1);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXcd level = es.eigenvectors.col(j).cast<Complex>();
    compute_residues(d, level);
    overlap.row(j) = (level.transpose() * d.residues).cwiseAbs2().real();
  }
  return overlap;
}

// Monic ascending coefficients of the degree-(N+1) pole polynomial D(z).
// This is the independent cross-check route for the pole set.
inline std::vector<Complex> pole_polynomial(const EigenSystem& es,
                                            const SpectralDensityParams& bath) {
  bath.validate();
  const PoleProblem pp = pole_problem(es, bath);
  const int n = es.sites();

  // P(z) = prod_j (z - E_j), real coefficients by sequential multiplication
  std::vector<double> p{1.0};
  for (int j = 0; j < n; ++j) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += p[i];
      next[i] -= pp.energies(j) * p[i];
    }
    p = std::move(next);
  }

  // Q(z) = sum_j w_j P(z) / (z - E_j) via synthetic division
  std::vector<double> q(n, 0.0);
  std::vector<double> quotient(n, 0.0);
  for (int j = 0; j < n; ++j) {
    quotient[n - 1] = p[n];
    for (int k = n - 1; k >= 1; --k)
      quotient[k - 1] = p[k] + pp.energies(j) * quotient[k];
    for (int k = 0; k < n; ++k) q[k] += pp.weights(j) * quotient[k];
  }

  const double strength = std::numbers::pi * bath.coupling * bath.width;
  std::vector<Complex> d(n + 2, Complex(0.0, 0.0));
  for (int k = 0; k <= n; ++k) {
    d[k + 1] += p[k];                          // z P(z)
    d[k] += Complex(0.0, bath.width) * p[k];   // i wc P(z)
  }
  for (int k = 0; k < n; ++k) d[k] -= strength * q[k];
  return d;
}

// Companion-matrix roots of the pole polynomial, Newton-refined and sorted
// like find_poles.
inline std::vector<Complex> poles_via_polynomial(const EigenSystem& es,
                                                 const SpectralDensityParams& bath) {
  const PoleProblem pp = pole_problem(es, bath);
  std::vector<Complex> roots = companion_roots(pole_polynomial(es, bath));
  for (Complex& z : roots) z = detail::refine_pole(z, pp);
  detail::sort_descending_real(roots);
  return roots;
}

}  // namespace mosaic
