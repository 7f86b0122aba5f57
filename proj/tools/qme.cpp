#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qme/error.hpp"
#include "qme/experiment.hpp"

using namespace qme;

namespace {

struct Overrides {
  std::optional<int> chi;
  std::optional<double> dt;
  std::optional<double> tmax;
  std::optional<double> cutoff;
  std::optional<int> sweeps;
  std::optional<std::string> engine;
  std::optional<std::string> out;
  bool resume = false;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--chi", o.chi, "Maximal bond dimension");
  app->add_option("--dt", o.dt, "Time step");
  app->add_option("--tmax", o.tmax, "Final time");
  app->add_option("--cutoff", o.cutoff, "Relative singular-value cutoff");
  app->add_option("--sweeps", o.sweeps, "DMRG sweeps");
  app->add_option("--engine", o.engine, "ed or mps")->check(CLI::IsMember({"ed", "mps"}));
  app->add_option("--out", o.out, "Output directory");
  app->add_flag("--resume", o.resume, "Continue from MPS checkpoints in the output directory");
}

// Engine flags apply to the evolution; --chi/--sweeps/--cutoff set the DMRG
// settings for the ground command.
ExperimentConfig load(const std::string& path, const Overrides& o, bool ground) {
  nlohmann::json j;
  {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open configuration " + path);
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  nlohmann::json eng = j.value("engine", nlohmann::json::object());
  nlohmann::json ssb = j.value("ssb", nlohmann::json::object());
  if (o.chi) (ground ? ssb : eng)["chi"] = *o.chi;
  if (o.cutoff) (ground ? ssb : eng)["cutoff"] = *o.cutoff;
  if (o.sweeps) (ground ? ssb : eng)["sweeps"] = *o.sweeps;
  if (o.dt) eng["dt"] = *o.dt;
  if (o.tmax) eng["t_max"] = *o.tmax;
  if (o.engine) eng["type"] = *o.engine;
  if (o.resume) eng["resume"] = true;
  if (o.out) j["output"]["dir"] = *o.out;
  if (!eng.empty()) j["engine"] = eng;
  if (!ssb.empty()) j["ssb"] = ssb;
  return config_from_json(j);
}

void print_report(const MpembaReport& r) {
  std::printf("r0 = %.6g\nverdict = %s\n", r.r0, to_string(r.verdict).c_str());
  if (r.tau_m) std::printf("tau_M = %.6g\n", *r.tau_m);
  if (r.swapped) std::printf("note: inputs swapped so that the first state starts more asymmetric\n");
  std::printf("horizon = %.6g\n", r.horizon);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Mpemba effect simulations of long-range spin chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config;
  Overrides ov;
  int workers = 0;
  int terms = 0;

  auto* fit = app.add_subcommand("fit", "Exponential-sum fit and MPO fidelity report");
  fit->add_option("config", config, "Experiment configuration (JSON)")->required();
  fit->add_option("--terms", terms, "Number of exponentials");
  fit->add_option("--out", ov.out, "Output directory");

  auto* quench = app.add_subcommand("quench", "Time evolution of the configured initial states");
  quench->add_option("config", config, "Experiment configuration (JSON)")->required();
  add_overrides(quench, ov);

  auto* ground = app.add_subcommand("ground", "DMRG ground state and SSB diagnostics");
  ground->add_option("config", config, "Experiment configuration (JSON)")->required();
  add_overrides(ground, ov);

  auto* scan = app.add_subcommand("scan", "Mpemba verdicts over a parameter grid");
  scan->add_option("config", config, "Experiment configuration (JSON)")->required();
  scan->add_option("--workers", workers, "Parallel workers (default: QME_WORKERS or all cores)");
  add_overrides(scan, ov);

  std::vector<std::string> traj;
  std::string measure = "u1_asym";
  MpembaOptions mo;
  std::optional<std::string> report_path;
  auto* mpemba = app.add_subcommand("mpemba", "Crossing analysis of two stored trajectories");
  mpemba->add_option("trajectories", traj, "Two trajectory CSV files")->required()->expected(2);
  mpemba->add_option("--measure", measure, "Observable to compare")
      ->check(CLI::IsMember({"u1_asym", "su2_asym", "trace_dist"}));
  mpemba->add_option("--horizon", mo.horizon, "Ignore samples after this time");
  mpemba->add_option("--floor", mo.eps_floor, "Asymmetry floor");
  mpemba->add_option("--consecutive", mo.consecutive, "Samples below 1 required to confirm");
  mpemba->add_option("--report", report_path, "Write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      ExperimentConfig c = load(config, ov, false);
      if (terms > 0) c.engine.terms = terms;
      const auto out = run_fit(c);
      std::printf("sup residual %.3e, MPO bond dimension %d\n", out["fit"]["sup_residual"].get<double>(),
                  out["mpo_bond_dimension"].get<int>());
      if (out["fit"]["warning"].get<bool>()) std::fprintf(stderr, "warning: fit residual above threshold\n");
      return 0;
    }
    if (*quench) {
      const ExperimentConfig c = load(config, ov, false);
      double next = 0.0;
      const QuenchResult r = run_quench(c, [&](double t) {
        if (t + 1e-9 >= next) {
          std::fprintf(stderr, "t = %.3f\n", t);
          next = std::floor(t + 1e-9) + 1.0;
        }
      });
      write_quench_outputs(c, r);
      if (r.report) print_report(*r.report);
      if (r.stopped_early) std::printf("stopped early: verdict fixed\n");
      std::printf("outputs in %s\n", c.output_dir.c_str());
      if (!r.error.empty()) {
        std::fprintf(stderr, "engine failure (partial trajectories kept): %s\n", r.error.c_str());
        return 2;
      }
      return 0;
    }
    if (*ground) {
      const ExperimentConfig c = load(config, ov, true);
      const auto out = run_ground(c);
      std::printf("E0 = %.12g (converged: %s)\n", out["ground"]["energy"].get<double>(),
                  out["ground"]["converged"].get<bool>() ? "yes" : "no");
      if (out.contains("ssb")) {
        const auto& s = out["ssb"];
        std::printf("SSB: %s (c_eff = %.4f, ES flag = %s)\n",
                    s["verdict"].get<std::string>() == "ssb" ? "yes" : "no", s["c_eff"].get<double>(),
                    s["es_flag"].get<bool>() ? "true" : "false");
      }
      std::printf("outputs in %s\n", c.output_dir.c_str());
      return 0;
    }
    if (*scan) {
      const ExperimentConfig c = load(config, ov, false);
      const ScanResult r = run_scan(c, workers);
      write_scan_outputs(c, r);
      std::printf("%zu points, %d failed; outputs in %s\n", r.points.size(), r.failures, c.output_dir.c_str());
      return r.failures > 0 ? 2 : 0;
    }
    if (*mpemba) {
      TrajectoryRecord recs[2];
      for (int k = 0; k < 2; ++k) {
        std::ifstream is(traj[k]);
        if (!is) throw ConfigError("cannot open " + traj[k]);
        recs[k] = read_trajectory_csv(is);
      }
      const MpembaReport r = mpemba_from_trajectories(recs[0], recs[1], measure, mo);
      print_report(r);
      if (report_path) {
        std::ofstream os(*report_path);
        os << to_json(r).dump(2) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
