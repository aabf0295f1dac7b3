#pragma once

#include "mosaic/errors.hpp"
#include "mosaic/model.hpp"
#include "mosaic/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mosaic {

struct EigenSystem {
  Eigen::VectorXd eigenvalues;   // descending: E_0 >= E_1 >= ...
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues(j)
  ModelSpec spec;

  int sites() const { return static_cast<int>(eigenvalues.size()); }
};

// Dense symmetric eigensolve with a fixed ordering convention: eigenvalues
// descending, each eigenvector's first nonzero component made positive.
inline EigenSystem eigendecompose(const HamiltonianMatrix& h) {
  const Eigen::MatrixXd& m = h.entries;
  if (m.rows() != m.cols() || (m - m.transpose()).cwiseAbs().maxCoeff() != 0.0)
    throw std::domain_error("eigendecompose: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecompose: eigenvalue iteration failed");

  const int n = static_cast<int>(m.rows());
  EigenSystem es;
  es.spec = h.spec;
  es.eigenvalues = solver.eigenvalues().reverse();
  es.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(es.eigenvectors(i, j)) > 1e-12) {
        if (es.eigenvectors(i, j) < 0.0) es.eigenvectors.col(j) *= -1.0;
        break;
      }
    }
  }

  const double residual =
      (m * es.eigenvectors - es.eigenvectors * es.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff();
  const double ortho = (es.eigenvectors.transpose() * es.eigenvectors -
                        Eigen::MatrixXd::Identity(n, n))
                           .cwiseAbs()
                           .maxCoeff();
  if (residual > 1e-10 || ortho > 1e-10)
    throw NumericalError("eigendecompose: residual/orthonormality postcondition failed");
  return es;
}

// Inverse participation ratio sum_n |amp_n|^4 of the raw amplitudes. No
// renormalization: a decaying state legitimately drives this to zero.
inline double ipr(const Eigen::VectorXcd& amplitudes) {
  if (amplitudes.size() == 0) throw std::domain_error("ipr: empty amplitude vector");
  return amplitudes.array().abs2().square().sum();
}

inline double ipr(const Eigen::VectorXd& amplitudes) {
  if (amplitudes.size() == 0) throw std::domain_error("ipr: empty amplitude vector");
  return amplitudes.array().square().square().sum();
}

// a_1 = 1, a_2 = E, a_{k+1} = E a_k - a_{k-1}. This recurrence is the
// analytic continuation of the surd form of the mobility-edge condition and
// stays regular through E = +-2.
inline double chebyshev_a(int cell, double energy) {
  if (cell < 1) throw std::domain_error("chebyshev_a: cell must be >= 1");
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 1; k < cell; ++k) {
    const double next = energy * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Value and energy derivative of a_cell, both through the recurrence.
inline std::pair<double, double> chebyshev_a_with_derivative(int cell, double energy) {
  if (cell < 1) throw std::domain_error("chebyshev_a: cell must be >= 1");
  double prev = 0.0, cur = 1.0;
  double dprev = 0.0, dcur = 0.0;
  for (int k = 1; k < cell; ++k) {
    const double next = energy * cur - prev;
    const double dnext = cur + energy * dcur - dprev;
    prev = cur;
    cur = next;
    dprev = dcur;
    dcur = dnext;
  }
  return {cur, dcur};
}

// Ascending polynomial coefficients of a_cell(E), degree cell-1.
inline std::vector<double> chebyshev_a_coefficients(int cell) {
  if (cell < 1) throw std::domain_error("chebyshev_a_coefficients: cell must be >= 1");
  std::vector<double> prev{};      // a_0 = 0
  std::vector<double> cur{1.0};    // a_1 = 1
  for (int k = 1; k < cell; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

namespace detail {

inline std::vector<double> dedupe_sorted_desc(std::vector<double> values, double tol = 1e-8) {
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<double> out;
  for (double v : values) {
    if (out.empty() || std::abs(out.back() - v) > tol) out.push_back(v);
  }
  return out;
}

}  // namespace detail

// Roots of a_cell(E) = 0, the infinite-disorder limit of the mobility edge.
// Closed form 2 cos(m pi / cell), m = 1..cell-1; found here as polynomial
// roots and Newton-polished on the recurrence.
inline std::vector<double> asymptotic_edges(int cell) {
  if (cell < 1) throw std::domain_error("asymptotic_edges: cell must be >= 1");
  if (cell == 1) return {};
  std::vector<double> roots = real_roots(chebyshev_a_coefficients(cell));
  for (double& e : roots) {
    for (int it = 0; it < 60; ++it) {
      const auto [a, da] = chebyshev_a_with_derivative(cell, e);
      if (da == 0.0) break;
      const double step = a / da;
      e -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(e))) break;
    }
  }
  roots = detail::dedupe_sorted_desc(std::move(roots));
  for (double e : roots) {
    if (std::abs(chebyshev_a(cell, e)) > 1e-10)
      throw NumericalError("asymptotic_edges: root fails a_cell(E) = 0");
  }
  return roots;
}

struct MobilityEdgeReport {
  std::vector<double> edges;             // descending
  std::vector<double> asymptotic_edges;  // descending
  int cell = 0;
  double disorder = 0.0;
};

// All real solutions of |Delta a_cell(E)/2| = 1, i.e. a_cell(E) = +-2/Delta.
inline MobilityEdgeReport mobility_edges(int cell, double disorder) {
  if (cell < 1) throw std::domain_error("mobility_edges: cell must be >= 1");
  if (disorder == 0.0)
    throw std::domain_error("mobility_edges: finite edges require nonzero disorder");

  std::vector<double> edges;
  const std::vector<double> base = chebyshev_a_coefficients(cell);
  for (const double target : {2.0 / disorder, -2.0 / disorder}) {
    std::vector<double> shifted = base;
    shifted[0] -= target;
    for (double e : real_roots(shifted)) {
      for (int it = 0; it < 60; ++it) {
        const auto [a, da] = chebyshev_a_with_derivative(cell, e);
        if (da == 0.0) break;
        const double step = (a - target) / da;
        e -= step;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(e))) break;
      }
      edges.push_back(e);
    }
  }
  MobilityEdgeReport report;
  report.edges = detail::dedupe_sorted_desc(std::move(edges));
  report.asymptotic_edges = asymptotic_edges(cell);
  report.cell = cell;
  report.disorder = disorder;
  for (double e : report.edges) {
    if (std::abs(std::abs(disorder * chebyshev_a(cell, e) / 2.0) - 1.0) > 1e-10)
      throw NumericalError("mobility_edges: edge fails its defining equation");
  }
  return report;
}

// GAAH exact edge E_c = sgn(lambda) (2|lambda| - |Delta|) / a.
inline double gaah_mobility_edge(double gaah_a, double hopping, double disorder) {
  if (gaah_a == 0.0)
    throw std::domain_error("gaah_mobility_edge: no finite edge at a = 0");
  const double sign = (hopping > 0.0) ? 1.0 : (hopping < 0.0 ? -1.0 : 0.0);
  return sign * (2.0 * std::abs(hopping) - std::abs(disorder)) / gaah_a;
}

struct LevelIpr {
  int level = 0;  // descending-energy index, 0-based
  double energy = 0.0;
  double ipr = 0.0;
};

inline std::vector<LevelIpr> ipr_spectrum(const ModelSpec& spec) {
  const EigenSystem es = eigendecompose(build_hamiltonian(spec));
  std::vector<LevelIpr> out(es.sites());
  for (int j = 0; j < es.sites(); ++j)
    out[j] = {j, es.eigenvalues(j), ipr(Eigen::VectorXd(es.eigenvectors.col(j)))};
  return out;
}

}  // namespace mosaic
