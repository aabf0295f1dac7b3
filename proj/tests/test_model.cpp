#include "mosaic/model.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace mosaic;

namespace {

ModelSpec mosaic_spec(int sites, int cell, double delta, double phi = 0.0) {
  ModelSpec spec;
  spec.kind = ModelKind::mosaic;
  spec.sites = sites;
  spec.cell = cell;
  spec.disorder = delta;
  spec.phase = phi;
  return spec;
}

}  // namespace

TEST_CASE("onsite potential closed forms") {
  const ModelSpec spec = mosaic_spec(12, 2, 2.0);

  SECTION("sites off the sublattice carry no potential") {
    CHECK(onsite_potential(spec, 1) == 0.0);
    CHECK(onsite_potential(spec, 3) == 0.0);
    CHECK(onsite_potential(spec, 11) == 0.0);
  }

  SECTION("occupied site matches the cosine formula") {
    const double expected = 2.0 * std::cos(4.0 * std::numbers::pi * golden_beta());
    CHECK(onsite_potential(spec, 2) == Catch::Approx(expected).margin(0.0));
    // frozen regression constant for the same quantity
    CHECK(onsite_potential(spec, 2) == Catch::Approx(0.17485144943392072).margin(1e-15));
  }

  SECTION("gaah with a = 0 reduces to the plain cosine") {
    ModelSpec gaah = spec;
    gaah.kind = ModelKind::gaah;
    gaah.gaah_a = 0.0;
    for (int n = 1; n <= 12; ++n) {
      const double plain =
          spec.disorder * std::cos(2.0 * std::numbers::pi * spec.beta * n + spec.phase);
      CHECK(onsite_potential(gaah, n) == plain);
    }
  }

  SECTION("domain errors") {
    CHECK_THROWS_AS(onsite_potential(spec, 0), std::out_of_range);
    CHECK_THROWS_AS(onsite_potential(spec, 13), std::out_of_range);
    ModelSpec bad = spec;
    bad.kind = ModelKind::gaah;
    bad.gaah_a = 1.0;
    CHECK_THROWS_AS(onsite_potential(bad, 1), std::domain_error);
    bad.gaah_a = -1.2;
    CHECK_THROWS_AS(onsite_potential(bad, 1), std::domain_error);
  }
}

TEST_CASE("hamiltonian structure") {
  SECTION("zero-disorder ring") {
    const HamiltonianMatrix h = build_hamiltonian(mosaic_spec(4, 2, 0.0));
    CHECK(h.entries.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.entries(0, 1) == 1.0);
    CHECK(h.entries(1, 2) == 1.0);
    CHECK(h.entries(2, 3) == 1.0);
    CHECK(h.entries(3, 0) == 1.0);
    CHECK(h.entries(0, 2) == 0.0);
  }

  SECTION("symmetry and sparsity pattern over random specs") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> real(-3.0, 3.0);
    std::uniform_int_distribution<int> sites(2, 40);
    for (int trial = 0; trial < 30; ++trial) {
      ModelSpec spec;
      spec.sites = sites(rng);
      spec.disorder = real(rng);
      spec.phase = real(rng);
      const int pick = trial % 3;
      if (pick == 0) {
        spec.kind = ModelKind::mosaic;
        spec.cell = 1 + std::uniform_int_distribution<int>(0, spec.sites - 1)(rng);
      } else if (pick == 1) {
        spec.kind = ModelKind::aah;
      } else {
        spec.kind = ModelKind::gaah;
        spec.gaah_a = 0.9 * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      }
      const HamiltonianMatrix h = build_hamiltonian(spec);
      const int n = spec.sites;
      CHECK((h.entries - h.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const bool neighbor = (j == i + 1) || (i == 0 && j == n - 1);
          if (neighbor)
            CHECK(h.entries(i, j) == spec.hopping);
          else
            CHECK(h.entries(i, j) == 0.0);
        }
      }
      if (spec.kind == ModelKind::mosaic) {
        for (int site = 1; site <= n; ++site)
          if (site % spec.cell != 0) CHECK(h.entries(site - 1, site - 1) == 0.0);
      }
    }
  }

  SECTION("alternating odd-site state is a zero mode of the cell-2 ring") {
    const HamiltonianMatrix h = build_hamiltonian(mosaic_spec(12, 2, 2.0));
    const Eigen::VectorXd v = oracles::two_periodic_state(12);
    CHECK((h.entries * v).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("3-periodic states are +-1 eigenvectors of cell-3 rings, any disorder") {
    for (const int n : {12, 18}) {
      for (const double delta : {0.5, 2.0, 7.0, 100.0}) {
        const HamiltonianMatrix h = build_hamiltonian(mosaic_spec(n, 3, delta));
        const Eigen::VectorXd plus = oracles::three_periodic_plus_state(n);
        const Eigen::VectorXd minus = oracles::three_periodic_minus_state(n);
        CHECK((h.entries * plus - plus).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((h.entries * minus + minus).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  SECTION("coincident specs produce bit-identical matrices") {
    ModelSpec m1 = mosaic_spec(16, 1, 1.7, 0.3);
    ModelSpec aah = m1;
    aah.kind = ModelKind::aah;
    ModelSpec gaah = m1;
    gaah.kind = ModelKind::gaah;
    gaah.gaah_a = 0.0;
    const Eigen::MatrixXd a = build_hamiltonian(m1).entries;
    const Eigen::MatrixXd b = build_hamiltonian(aah).entries;
    const Eigen::MatrixXd c = build_hamiltonian(gaah).entries;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("invalid specs are rejected") {
    CHECK_THROWS_AS(build_hamiltonian(mosaic_spec(1, 1, 0.0)), std::domain_error);
    CHECK_THROWS_AS(build_hamiltonian(mosaic_spec(8, 0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(build_hamiltonian(mosaic_spec(8, 9, 0.0)), std::domain_error);
  }
}

TEST_CASE("incommensuration helpers") {
  CHECK(golden_beta() == Catch::Approx(0.6180339887498949).margin(1e-16));
  CHECK(fibonacci_beta(610) == 377.0 / 610.0);
  CHECK(fibonacci_beta(12) == 8.0 / 13.0);
  CHECK(fibonacci_beta(13) == 8.0 / 13.0);
  CHECK_THROWS_AS(fibonacci_beta(0), std::domain_error);
  // the approximant converges to the irrational value
  CHECK(std::abs(fibonacci_beta(10946) - golden_beta()) < 1e-8);
}
