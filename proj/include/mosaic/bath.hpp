#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace mosaic {

// Lorentzian environment J(w) = eta wc^2 / (w^2 + wc^2) on the full
// frequency line. coupling = 0 is allowed and recovers the closed system.
struct SpectralDensityParams {
  double coupling = 0.1;  // eta
  double width = 1.0;     // omega_c

  void validate() const {
    if (!(coupling >= 0.0))
      throw std::domain_error("SpectralDensityParams: coupling must be >= 0");
    if (!(width > 0.0))
      throw std::domain_error("SpectralDensityParams: width must be > 0");
  }
};

inline double spectral_density(double omega, const SpectralDensityParams& p) {
  p.validate();
  return p.coupling * p.width * p.width / (omega * omega + p.width * p.width);
}

// g = sqrt(pi eta wc), the lattice-pseudomode coupling that reproduces the
// Lorentzian self-energy exactly.
inline double coupling_scalar(const SpectralDensityParams& p) {
  p.validate();
  return std::sqrt(std::numbers::pi * p.coupling * p.width);
}

// Sigma(z) = pi eta wc / (z + i wc): analytic except at the pseudomode point
// z = -i wc. On the real axis Im Sigma(E) < 0, which is why every dynamical
// pole decays.
inline std::complex<double> self_energy(std::complex<double> z,
                                        const SpectralDensityParams& p) {
  p.validate();
  const std::complex<double> denom = z + std::complex<double>(0.0, p.width);
  if (std::abs(denom) == 0.0)
    throw std::domain_error("self_energy: z = -i wc is the bath pole");
  return std::numbers::pi * p.coupling * p.width / denom;
}

// f(tau) = pi eta wc exp(-wc tau), the full-line Fourier transform of J.
// Real for this bath, returned as complex to keep the kernel contract.
inline std::complex<double> memory_kernel(double tau, const SpectralDensityParams& p) {
  p.validate();
  if (tau < 0.0) throw std::domain_error("memory_kernel: causal kernel requires tau >= 0");
  return {std::numbers::pi * p.coupling * p.width * std::exp(-p.width * tau), 0.0};
}

}  // namespace mosaic
