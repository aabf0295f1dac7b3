// Command-line front end: spectrum | poles | evolve | sweep over a run
// configuration, emitting CSV data plus a JSON manifest per run directory.

#include "mosaic/analysis.hpp"
#include "mosaic/config.hpp"
#include "mosaic/dynamics.hpp"
#include "mosaic/io.hpp"
#include "mosaic/laplace.hpp"
#include "mosaic/localization.hpp"
#include "mosaic/model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOracleGate = 4;

struct CommonOptions {
  std::string config_ref;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 1;
};

class StageTimer {
 public:
  StageTimer(mosaic::RunDirectory& dir, std::string stage)
      : dir_(dir), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    dir_.add_timing(stage_, std::chrono::duration<double, std::milli>(elapsed).count());
  }

 private:
  mosaic::RunDirectory& dir_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

mosaic::RunConfig resolve_config(const CommonOptions& opts) {
  if (opts.config_ref.empty()) throw mosaic::ConfigError("missing --config");
  mosaic::RunConfig cfg = mosaic::load_config(opts.config_ref);
  for (const std::string& assignment : opts.overrides)
    mosaic::apply_override(cfg, assignment);
  return cfg;
}

std::filesystem::path resolve_out_dir(const CommonOptions& opts, const mosaic::RunConfig& cfg,
                                      const std::string& verb) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  std::filesystem::path root = "runs";
  if (const char* env = std::getenv("MOSAICDYN_OUT"); env && *env) root = env;
  return root / (cfg.name + "_" + verb);
}

void maybe_write_plot_stub(mosaic::RunDirectory& dir, const mosaic::RunConfig& cfg) {
  if (!cfg.output.plot_stub) return;
  dir.write_text("plot.py", "plot-stub",
                 "#!/usr/bin/env python3\n"
                 "# Minimal starting point for plotting the CSV artifacts in this\n"
                 "# directory; see manifest.json for the inventory.\n"
                 "import glob\n"
                 "import matplotlib.pyplot as plt\n"
                 "import pandas as pd\n\n"
                 "for path in sorted(glob.glob('*.csv')):\n"
                 "    frame = pd.read_csv(path, comment='#')\n"
                 "    print(path, list(frame.columns))\n"
                 "plt.show()\n");
}

nlohmann::json pole_json(const mosaic::PoleDecomposition& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < d.pole_count(); ++i) {
    rows.push_back({{"index", i + 1},
                    {"re", d.poles[i].real()},
                    {"im", d.poles[i].imag()},
                    {"steady", static_cast<bool>(d.steady[i])},
                    {"pseudomode", i == d.pseudomode}});
  }
  return rows;
}

void write_pole_csv(mosaic::RunDirectory& dir, const std::string& filename,
                    const mosaic::PoleDecomposition& d) {
  dir.write_file(filename, "pole-table-csv", [&](std::ostream& out) {
    out << "index,re_z,im_z,steady,pseudomode\n";
    for (int i = 0; i < d.pole_count(); ++i) {
      out << (i + 1) << ',' << mosaic::format_sci(d.poles[i].real()) << ','
          << mosaic::format_sci(d.poles[i].imag()) << ',' << (d.steady[i] ? 1 : 0) << ','
          << (i == d.pseudomode ? 1 : 0) << '\n';
    }
  });
}

void write_trajectory_csv(mosaic::RunDirectory& dir, const std::string& filename,
                          const mosaic::Trajectory& traj) {
  dir.write_file(filename, "trajectory-csv", [&](std::ostream& out) {
    out << "# method: " << mosaic::to_string(traj.method) << '\n';
    out << "t";
    for (int n = 1; n <= traj.sites(); ++n) out << ",re_alpha_" << n << ",im_alpha_" << n;
    out << ",survival,ipr\n";
    for (int i = 0; i < traj.points(); ++i) {
      out << mosaic::format_sci(traj.times[i]);
      for (int n = 0; n < traj.sites(); ++n) {
        out << ',' << mosaic::format_sci(traj.amplitudes(n, i).real()) << ','
            << mosaic::format_sci(traj.amplitudes(n, i).imag());
      }
      const Eigen::VectorXcd col = traj.amplitudes.col(i);
      out << ',' << mosaic::format_sci(col.squaredNorm()) << ','
          << mosaic::format_sci(mosaic::ipr(col)) << '\n';
    }
  });
}

int cmd_spectrum(const CommonOptions& opts) {
  const mosaic::RunConfig cfg = resolve_config(opts);
  mosaic::RunDirectory dir(resolve_out_dir(opts, cfg, "spectrum"));

  {
    StageTimer timer(dir, "spectrum");
    const std::vector<mosaic::LevelIpr> spectrum = mosaic::ipr_spectrum(cfg.model);
    dir.write_file("spectrum.csv", "ipr-spectrum-csv", [&](std::ostream& out) {
      out << "j,E_j,IPR_j\n";
      for (const auto& level : spectrum)
        out << level.level << ',' << mosaic::format_sci(level.energy) << ','
            << mosaic::format_sci(level.ipr) << '\n';
    });
  }
  {
    StageTimer timer(dir, "mobility_edges");
    nlohmann::json edges;
    edges["model"] = mosaic::to_string(cfg.model.kind);
    edges["delta"] = cfg.model.disorder;
    std::vector<double> finite, asymptotic;
    if (cfg.model.kind == mosaic::ModelKind::mosaic && cfg.model.cell >= 2 &&
        cfg.model.disorder != 0.0) {
      const auto report = mosaic::mobility_edges(cfg.model.cell, cfg.model.disorder);
      finite = report.edges;
      asymptotic = report.asymptotic_edges;
      edges["kappa"] = cfg.model.cell;
    } else if (cfg.model.kind == mosaic::ModelKind::gaah && cfg.model.gaah_a != 0.0) {
      finite.push_back(
          mosaic::gaah_mobility_edge(cfg.model.gaah_a, cfg.model.hopping, cfg.model.disorder));
      edges["a"] = cfg.model.gaah_a;
    }
    edges["edges"] = finite;
    edges["asymptotic_edges"] = asymptotic;
    dir.write_json("mobility_edges.json", "mobility-edge-json", edges);
  }
  maybe_write_plot_stub(dir, cfg);
  dir.finalize(cfg, "spectrum");
  std::cout << "spectrum: wrote " << dir.path().string() << "\n";
  return kExitOk;
}

int cmd_poles(const CommonOptions& opts) {
  const mosaic::RunConfig cfg = resolve_config(opts);
  mosaic::RunDirectory dir(resolve_out_dir(opts, cfg, "poles"));

  const mosaic::HamiltonianMatrix h = mosaic::build_hamiltonian(cfg.model);
  mosaic::PoleDecomposition decomp;
  {
    StageTimer timer(dir, "find_poles");
    decomp = mosaic::find_poles(mosaic::build_augmented(h, cfg.bath));
    mosaic::classify_steady(decomp, cfg.analysis.tol_steady);
  }
  write_pole_csv(dir, "poles.csv", decomp);
  {
    StageTimer timer(dir, "overlap");
    const mosaic::EigenSystem es = mosaic::eigendecompose(h);
    const Eigen::MatrixXd overlap = mosaic::overlap_matrix(es, cfg.bath);
    dir.write_file("overlap.csv", "overlap-matrix-csv", [&](std::ostream& out) {
      out << "j,E_j";
      for (int i = 1; i <= overlap.cols(); ++i) out << ",o_" << i;
      out << '\n';
      for (int j = 0; j < overlap.rows(); ++j) {
        out << j << ',' << mosaic::format_sci(es.eigenvalues(j));
        for (int i = 0; i < overlap.cols(); ++i) out << ',' << mosaic::format_sci(overlap(j, i));
        out << '\n';
      }
    });
  }
  maybe_write_plot_stub(dir, cfg);
  dir.finalize(cfg, "poles");
  std::cout << "poles: wrote " << dir.path().string() << "\n";
  return kExitOk;
}

struct InitialState {
  std::string label;
  Eigen::VectorXcd amplitudes;
  double energy = std::numeric_limits<double>::quiet_NaN();
};

std::vector<InitialState> select_initial_states(const mosaic::RunConfig& cfg,
                                                const mosaic::EigenSystem& es) {
  using Initial = mosaic::RunConfig::Analysis::Initial;
  std::vector<InitialState> states;
  const auto level_state = [&](int j) {
    if (j < 0 || j >= es.sites())
      throw mosaic::ConfigError("analysis.initial level " + std::to_string(j) +
                                " outside 0.." + std::to_string(es.sites() - 1));
    return InitialState{"E_" + std::to_string(j),
                        es.eigenvectors.col(j).cast<mosaic::Complex>(), es.eigenvalues(j)};
  };
  switch (cfg.analysis.initial) {
    case Initial::all:
      for (int j = 0; j < es.sites(); ++j) states.push_back(level_state(j));
      break;
    case Initial::levels:
      for (int j : cfg.analysis.levels) states.push_back(level_state(j));
      break;
    case Initial::vector: {
      Eigen::VectorXcd v(cfg.analysis.state.size());
      for (size_t i = 0; i < cfg.analysis.state.size(); ++i) v(i) = cfg.analysis.state[i];
      if (v.size() != es.sites())
        throw mosaic::ConfigError("analysis.initial vector length does not match model.sites");
      const double norm = v.norm();
      if (norm == 0.0) throw mosaic::ConfigError("analysis.initial vector is zero");
      states.push_back({"custom", v / norm, std::numeric_limits<double>::quiet_NaN()});
      break;
    }
  }
  return states;
}

int cmd_evolve(const CommonOptions& opts, bool oracle_check) {
  const mosaic::RunConfig cfg = resolve_config(opts);
  mosaic::RunDirectory dir(resolve_out_dir(opts, cfg, "evolve"));

  const mosaic::HamiltonianMatrix h = mosaic::build_hamiltonian(cfg.model);
  const mosaic::EigenSystem es = mosaic::eigendecompose(h);
  mosaic::PoleDecomposition decomp =
      mosaic::find_poles(mosaic::build_augmented(h, cfg.bath));
  mosaic::classify_steady(decomp, cfg.analysis.tol_steady);

  const std::vector<InitialState> states = select_initial_states(cfg, es);
  const double horizon = cfg.dynamics.horizon;
  const double step = cfg.dynamics.step;
  const int decimation = cfg.dynamics.decimation;

  struct StateResult {
    mosaic::IprCurve curve;
    std::optional<mosaic::PoleDecomposition> residues;  // per-state copy
    double sup_rec_vs_aux = 0.0;
    double sup_vol_vs_aux = 0.0;
    bool reconstruction_ok = true;
    std::string note;
  };
  std::vector<StateResult> results(states.size());
  std::mutex decomp_mutex;

  std::atomic<size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (size_t i = cursor.fetch_add(1); i < states.size(); i = cursor.fetch_add(1)) {
      if (failed.load()) return;
      try {
        const InitialState& state = states[i];
        StateResult& res = results[i];

        mosaic::PoleDecomposition local;
        {
          const std::lock_guard<std::mutex> lock(decomp_mutex);
          local = decomp;
        }
        mosaic::Trajectory rec;
        try {
          mosaic::compute_residues(local, state.amplitudes);
          rec = mosaic::reconstruct_trajectory(local, horizon, step, decimation);
          res.residues = local;
        } catch (const mosaic::IllConditionedDecomposition& e) {
          res.reconstruction_ok = false;
          res.note = e.what();
        }
        const mosaic::Trajectory aux =
            mosaic::integrate_auxiliary(h, cfg.bath, state.amplitudes, horizon, step, decimation);
        const mosaic::Trajectory vol =
            mosaic::integrate_volterra(h, cfg.bath, state.amplitudes, horizon, step, decimation);

        res.sup_vol_vs_aux = (vol.amplitudes - aux.amplitudes).cwiseAbs().maxCoeff();
        if (res.reconstruction_ok)
          res.sup_rec_vs_aux = (rec.amplitudes - aux.amplitudes).cwiseAbs().maxCoeff();

        const mosaic::Trajectory& curve_source = res.reconstruction_ok ? rec : aux;
        res.curve = mosaic::ipr_trajectory(curve_source, state.label);
        res.curve.initial_energy = state.energy;

        if (res.reconstruction_ok)
          write_trajectory_csv(dir, "trajectory_" + state.label + "_reconstruction.csv", rec);
        write_trajectory_csv(dir, "trajectory_" + state.label + "_auxiliary.csv", aux);
        write_trajectory_csv(dir, "trajectory_" + state.label + "_volterra.csv", vol);

        const std::vector<double> survival = mosaic::survival_probability(curve_source);
        dir.write_file("ipr_" + state.label + ".csv", "ipr-curve-csv", [&](std::ostream& out) {
          out << "# initial state: " << state.label << '\n';
          out << "t,ipr,ipr_normalized,survival\n";
          for (size_t k = 0; k < res.curve.times.size(); ++k) {
            const double s = survival[k];
            const double normalized = s > 0.0 ? res.curve.values[k] / (s * s) : 0.0;
            out << mosaic::format_sci(res.curve.times[k]) << ','
                << mosaic::format_sci(res.curve.values[k]) << ','
                << mosaic::format_sci(normalized) << ',' << mosaic::format_sci(s) << '\n';
          }
        });
      } catch (const std::exception& e) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        failure = e.what();
      }
    }
  };

  {
    StageTimer timer(dir, "evolve");
    const int pool = std::max(1, std::min<int>(opts.threads, static_cast<int>(states.size())));
    if (pool == 1) {
      worker();
    } else {
      std::vector<std::thread> crew;
      for (int i = 0; i < pool; ++i) crew.emplace_back(worker);
      for (auto& t : crew) t.join();
    }
  }
  if (failed.load()) throw mosaic::NumericalError("evolve: " + failure);

  // pairwise crossing reports over the IPR curves
  nlohmann::json crossings = nlohmann::json::array();
  {
    StageTimer timer(dir, "crossings");
    for (size_t a = 0; a < results.size(); ++a) {
      for (size_t b = a + 1; b < results.size(); ++b) {
        mosaic::CurveEvaluator eval_a, eval_b;
        if (results[a].residues && results[b].residues) {
          const mosaic::PoleDecomposition* da = &*results[a].residues;
          const mosaic::PoleDecomposition* db = &*results[b].residues;
          eval_a = [da](double t) { return mosaic::ipr(mosaic::reconstruct_amplitudes(*da, t)); };
          eval_b = [db](double t) { return mosaic::ipr(mosaic::reconstruct_amplitudes(*db, t)); };
        }
        const mosaic::CrossingReport report =
            mosaic::detect_crossings(results[a].curve, results[b].curve, eval_a, eval_b);
        crossings.push_back({{"pair", {report.label_a, report.label_b}},
                             {"t_star", report.crossing_times},
                             {"ipr0_a", report.initial_ipr_a},
                             {"ipr0_b", report.initial_ipr_b},
                             {"indistinguishable", report.indistinguishable}});
      }
    }
    dir.write_json("crossings.json", "crossing-report-json", crossings);
  }

  nlohmann::json oracle = nlohmann::json::array();
  bool gate_failed = false;
  for (size_t i = 0; i < results.size(); ++i) {
    const StateResult& res = results[i];
    const bool rec_ok = !res.reconstruction_ok || res.sup_rec_vs_aux < cfg.analysis.oracle_tol;
    const bool vol_ok = res.sup_vol_vs_aux < cfg.analysis.volterra_tol;
    if (!(rec_ok && vol_ok)) gate_failed = true;
    oracle.push_back({{"state", states[i].label},
                      {"sup_reconstruction_vs_auxiliary", res.sup_rec_vs_aux},
                      {"sup_volterra_vs_auxiliary", res.sup_vol_vs_aux},
                      {"reconstruction_available", res.reconstruction_ok},
                      {"note", res.note}});
  }
  dir.write_json("oracle.json", "oracle-comparison-json", oracle);

  maybe_write_plot_stub(dir, cfg);
  dir.finalize(cfg, "evolve");
  std::cout << "evolve: wrote " << dir.path().string() << "\n";
  if (oracle_check && gate_failed) {
    std::cerr << "evolve: oracle check failed; see oracle.json\n";
    return kExitOracleGate;
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const mosaic::RunConfig cfg = resolve_config(opts);
  if (cfg.sweep.axis.empty() || cfg.sweep.values.empty())
    throw mosaic::ConfigError("sweep needs sweep.axis and a nonempty sweep.values list");
  mosaic::RunDirectory dir(resolve_out_dir(opts, cfg, "sweep"));

  mosaic::SweepAxis axis;
  axis.kind = cfg.sweep.axis == "delta" ? mosaic::SweepAxis::Kind::disorder
                                        : mosaic::SweepAxis::Kind::sites;
  axis.values = cfg.sweep.values;

  mosaic::SweepResult sweep;
  {
    StageTimer timer(dir, "sweep");
    sweep = mosaic::pole_sweep(cfg.model, axis, cfg.bath, opts.threads);
  }

  dir.write_file("sweep.csv", "pole-sweep-csv", [&](std::ostream& out) {
    out << "axis,value,sites,pole_index,re_z,im_z,steady,pseudomode\n";
    for (const mosaic::SweepPoint& point : sweep.points) {
      if (point.failed) continue;
      for (size_t i = 0; i < point.poles.size(); ++i) {
        out << mosaic::to_string(axis.kind) << ',' << mosaic::format_sci(point.axis_value) << ','
            << point.sites << ',' << (i + 1) << ',' << mosaic::format_sci(point.poles[i].real())
            << ',' << mosaic::format_sci(point.poles[i].imag()) << ',' << (point.steady[i] ? 1 : 0)
            << ',' << (static_cast<int>(i) == point.pseudomode ? 1 : 0) << '\n';
      }
    }
  });

  nlohmann::json failures = nlohmann::json::array();
  for (const mosaic::SweepPoint& point : sweep.points)
    if (point.failed) failures.push_back({{"value", point.axis_value}, {"error", point.error}});
  if (!failures.empty()) dir.write_json("sweep_failures.json", "sweep-failure-json", failures);

  maybe_write_plot_stub(dir, cfg);
  dir.finalize(cfg, "sweep");
  std::cout << "sweep: wrote " << dir.path().string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative quasiperiodic-lattice dynamics: poles, residues, IPR"};
  app.require_subcommand(1);

  CommonOptions opts;
  bool oracle_check = false;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_ref,
                    "Bundled config name or path to a config file")
        ->required();
    sub->add_option("--set", opts.overrides, "Override: key=value (repeatable)");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--threads", opts.threads, "Worker threads for independent jobs");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "Eigenvalues, per-level IPR, mobility edges");
  CLI::App* poles = app.add_subcommand("poles", "Dynamical poles and level/pole overlaps");
  CLI::App* evolve = app.add_subcommand("evolve", "Trajectories, IPR curves, crossing reports");
  CLI::App* sweep = app.add_subcommand("sweep", "Pole tables along a delta or sites axis");
  add_common(spectrum);
  add_common(poles);
  add_common(evolve);
  add_common(sweep);
  evolve->add_flag("--oracle-check", oracle_check,
                   "Exit nonzero if reconstruction and direct integration disagree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(opts);
    if (poles->parsed()) return cmd_poles(opts);
    if (evolve->parsed()) return cmd_evolve(opts, oracle_check);
    if (sweep->parsed()) return cmd_sweep(opts);
  } catch (const mosaic::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
