#pragma once

#include "mosaic/dynamics.hpp"
#include "mosaic/laplace.hpp"
#include "mosaic/localization.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace mosaic {

struct IprCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
  double initial_energy = std::numeric_limits<double>::quiet_NaN();

  double initial_ipr() const { return values.empty() ? 0.0 : values.front(); }
};

// Pointwise IPR of the raw (unnormalized) amplitudes along a trajectory.
inline IprCurve ipr_trajectory(const Trajectory& traj, std::string label = {}) {
  IprCurve curve;
  curve.times = traj.times;
  curve.label = std::move(label);
  curve.values.reserve(traj.points());
  for (int i = 0; i < traj.points(); ++i)
    curve.values.push_back(ipr(Eigen::VectorXcd(traj.amplitudes.col(i))));
  return curve;
}

// S(t) = sum_n |alpha_n(t)|^2 per stored time. Monotone decay is not
// implied; non-Markovian backflow is allowed.
inline std::vector<double> survival_probability(const Trajectory& traj) {
  std::vector<double> s;
  s.reserve(traj.points());
  for (int i = 0; i < traj.points(); ++i)
    s.push_back(traj.amplitudes.col(i).squaredNorm());
  return s;
}

struct CrossingReport {
  std::string label_a;
  std::string label_b;
  double initial_ipr_a = 0.0;
  double initial_ipr_b = 0.0;
  bool indistinguishable = false;
  std::vector<double> crossing_times;
  std::vector<std::array<double, 2>> brackets;  // sign-verified grid interval
};

using CurveEvaluator = std::function<double(double)>;

// Locates sign changes of a - b on the shared grid; each bracket is refined
// by bisection when continuous evaluators are supplied, otherwise by linear
// interpolation. Curves within 1e-9 of each other everywhere are reported
// as indistinguishable instead.
inline CrossingReport detect_crossings(const IprCurve& a, const IprCurve& b,
                                       const CurveEvaluator& eval_a = {},
                                       const CurveEvaluator& eval_b = {},
                                       double time_tol = 1e-7) {
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("detect_crossings: mismatched time grids");
  for (size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12)
      throw std::invalid_argument("detect_crossings: mismatched time grids");

  CrossingReport report;
  report.label_a = a.label;
  report.label_b = b.label;
  report.initial_ipr_a = a.initial_ipr();
  report.initial_ipr_b = b.initial_ipr();

  double max_gap = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i)
    max_gap = std::max(max_gap, std::abs(a.values[i] - b.values[i]));
  if (max_gap < 1e-9) {
    report.indistinguishable = true;
    return report;
  }

  const bool continuous = static_cast<bool>(eval_a) && static_cast<bool>(eval_b);
  const auto diff = [&](double t) { return eval_a(t) - eval_b(t); };

  for (size_t i = 0; i + 1 < a.values.size(); ++i) {
    const double d0 = a.values[i] - b.values[i];
    const double d1 = a.values[i + 1] - b.values[i + 1];
    if (!(d0 * d1 < 0.0)) continue;
    double lo = a.times[i], hi = a.times[i + 1];
    double t_star;
    if (continuous) {
      double flo = diff(lo), fhi = diff(hi);
      if (flo * fhi < 0.0) {
        while (hi - lo > time_tol) {
          const double mid = 0.5 * (lo + hi);
          const double fmid = diff(mid);
          if (fmid == 0.0) { lo = hi = mid; break; }
          if (flo * fmid < 0.0) { hi = mid; fhi = fmid; }
          else { lo = mid; flo = fmid; }
        }
        t_star = 0.5 * (lo + hi);
      } else {
        t_star = lo + (hi - lo) * d0 / (d0 - d1);
      }
    } else {
      t_star = lo + (hi - lo) * d0 / (d0 - d1);
    }
    report.crossing_times.push_back(t_star);
    report.brackets.push_back({a.times[i], a.times[i + 1]});
  }
  return report;
}

struct SweepAxis {
  enum class Kind { disorder, sites };
  Kind kind = Kind::disorder;
  std::vector<double> values;
};

inline const char* to_string(SweepAxis::Kind k) {
  return k == SweepAxis::Kind::disorder ? "delta" : "sites";
}

struct SweepPoint {
  double axis_value = 0.0;
  int sites = 0;
  std::vector<Complex> poles;
  std::vector<bool> steady;
  int pseudomode = -1;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
};

// Per-point pole analysis over a disorder or size axis. Points are
// independent work items handed to a small thread pool; failures are
// recorded and the sweep continues.
inline SweepResult pole_sweep(const ModelSpec& base, const SweepAxis& axis,
                              const SpectralDensityParams& bath, int threads = 1) {
  if (axis.values.empty()) throw std::invalid_argument("pole_sweep: empty axis");
  SweepResult result;
  result.axis = axis;
  result.points.resize(axis.values.size());

  std::atomic<size_t> cursor{0};
  const auto worker = [&]() {
    for (size_t i = cursor.fetch_add(1); i < axis.values.size(); i = cursor.fetch_add(1)) {
      SweepPoint& point = result.points[i];
      point.axis_value = axis.values[i];
      try {
        ModelSpec spec = base;
        if (axis.kind == SweepAxis::Kind::disorder) {
          spec.disorder = axis.values[i];
        } else {
          const double raw = axis.values[i];
          if (raw != std::floor(raw) || raw < 2.0)
            throw std::invalid_argument("site count must be an integer >= 2");
          spec.sites = static_cast<int>(raw);
        }
        point.sites = spec.sites;
        const PoleDecomposition d = find_poles(build_augmented(build_hamiltonian(spec), bath));
        point.poles = d.poles;
        point.steady = d.steady;
        point.pseudomode = d.pseudomode;
      } catch (const std::exception& e) {
        point.failed = true;
        point.error = e.what();
      }
    }
  };

  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(axis.values.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> crew;
    crew.reserve(pool);
    for (int i = 0; i < pool; ++i) crew.emplace_back(worker);
    for (auto& t : crew) t.join();
  }
  return result;
}

}  // namespace mosaic
