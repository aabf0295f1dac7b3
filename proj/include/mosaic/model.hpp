#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace mosaic {

enum class ModelKind { mosaic, aah, gaah };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mosaic: return "mosaic";
    case ModelKind::aah: return "aah";
    case ModelKind::gaah: return "gaah";
  }
  return "?";
}

// Golden-ratio conjugate (sqrt(5)-1)/2, the incommensuration ratio used by
// default. Evaluated in floating point, not as a rational approximant.
inline double golden_beta() { return (std::sqrt(5.0) - 1.0) / 2.0; }

// Rational stand-in F_{m-1}/F_m with F_m the smallest Fibonacci number
// >= n_sites. Handy for commensuration studies on Fibonacci-sized rings.
inline double fibonacci_beta(int n_sites) {
  if (n_sites < 1) throw std::domain_error("fibonacci_beta: n_sites must be positive");
  double prev = 1.0;
  double cur = 1.0;
  while (cur < n_sites) {
    const double next = prev + cur;
    prev = cur;
    cur = next;
  }
  return prev / cur;
}

// One chain instance. Sites are labelled 1..sites in every formula and in
// all I/O; `cell` only applies to the mosaic kind and `gaah_a` only to the
// GAAH kind.
struct ModelSpec {
  ModelKind kind = ModelKind::mosaic;
  int sites = 12;        // N
  int cell = 2;          // kappa
  double gaah_a = 0.0;   // a, |a| < 1
  double disorder = 2.0; // Delta
  double phase = 0.0;    // phi
  double hopping = 1.0;  // lambda
  double beta = golden_beta();

  void validate() const {
    if (sites < 2) throw std::domain_error("ModelSpec: need at least 2 sites");
    if (kind == ModelKind::mosaic && (cell < 1 || cell > sites))
      throw std::domain_error("ModelSpec: mosaic cell size must satisfy 1 <= cell <= sites");
    if (kind == ModelKind::gaah && !(std::abs(gaah_a) < 1.0))
      throw std::domain_error("ModelSpec: GAAH parameter must satisfy |a| < 1");
  }
};

// On-site potential at 1-based site n:
//   mosaic: Delta cos(2 pi beta n + phi) where n is a multiple of the cell
//           size, 0 elsewhere
//   aah:    mosaic with cell size 1
//   gaah:   Delta cos(.) / (1 - a cos(.))
// All kinds share one cosine expression, so coincident specs (mosaic cell=1,
// aah, gaah a=0) produce bit-identical values.
inline double onsite_potential(const ModelSpec& spec, int n) {
  spec.validate();
  if (n < 1 || n > spec.sites)
    throw std::out_of_range("onsite_potential: site index outside 1..N");
  const double c = std::cos(2.0 * std::numbers::pi * spec.beta * n + spec.phase);
  switch (spec.kind) {
    case ModelKind::mosaic:
      return (n % spec.cell == 0) ? spec.disorder * c : 0.0;
    case ModelKind::aah:
      return spec.disorder * c;
    case ModelKind::gaah:
      return spec.disorder * c / (1.0 - spec.gaah_a * c);
  }
  throw std::logic_error("onsite_potential: unknown model kind");
}

struct HamiltonianMatrix {
  Eigen::MatrixXd entries;  // N x N, real symmetric
  ModelSpec spec;

  int sites() const { return static_cast<int>(entries.rows()); }
};

// Closed-chain Hamiltonian with periodic boundary conditions: hopping on
// |m - n| = 1 plus the (1, N) corner pair, potential sequence on the
// diagonal.
inline HamiltonianMatrix build_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  const int n = spec.sites;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = onsite_potential(spec, i + 1);
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = spec.hopping;
  h(0, n - 1) = h(n - 1, 0) = spec.hopping;
  return {std::move(h), spec};
}

}  // namespace mosaic
