#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qme/dmrg.hpp"
#include "qme/ed.hpp"
#include "qme/model.hpp"
#include "qme/mpemba.hpp"
#include "qme/states.hpp"
#include "qme/trajectory.hpp"

namespace qme {

inline constexpr const char* kVersion = "0.1.0";

enum class Engine { Ed, Mps };

struct EngineConfig {
  Engine engine = Engine::Ed;
  int chi = 100;
  double dt = 0.05;
  double t_max = 20.0;  // 10 by default for models with the field
  double cutoff = 1e-12;
  int sweeps = 10;
  int krylov_dim = 10;
  double krylov_tol = 1e-12;
  int terms = 8;  // exponentials in the MPO fit
  EdLimits limits;
  /// Save MPS checkpoints every this many steps (0 = never).
  int checkpoint_every = 0;
  bool resume = false;
};

struct AnalysisConfig {
  int window_size = 4;
  int window_first = -1;  // -1: centred window
  bool su2 = true;
  bool trace_distance = false;
  /// Series used for the Mpemba ratio: u1_asym, su2_asym or trace_dist.
  std::string measure = "u1_asym";
  double eps_floor = 1e-6;
  int consecutive = 3;
  /// Ratio horizon; defaults to the evolution time.
  std::optional<double> horizon;
  /// Stop paired evolutions once the verdict cannot change.
  bool early_stop = false;
  double prethermal_band = 0.1;
};

struct GridConfig {
  std::vector<double> jz;
  std::vector<double> alpha;
  std::vector<double> hz;
  std::vector<int> n;
  bool by_field() const { return hz.size() > 1 && jz.size() <= 1; }
};

struct SsbConfig {
  bool enabled = false;
  int n1 = 64;
  int n2 = 72;
  int chi = 100;
  int sweeps = 10;
  double cutoff = 1e-14;
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<InitialStateSpec> states;
  EngineConfig engine;
  AnalysisConfig analysis;
  std::optional<GridConfig> grid;
  SsbConfig ssb;
  std::string output_dir = "out";

  /// ConfigError on inconsistent settings.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

struct QuenchResult {
  std::vector<TrajectoryRecord> trajectories;
  std::optional<MpembaReport> report;  // present for a pair of states
  std::vector<std::optional<ThermalState>> thermal;
  bool stopped_early = false;
  std::string error;  // engine failure; trajectories hold the partial record
};

using ProgressFn = std::function<void(double t)>;

/// Evolves every configured state with the chosen engine and records the
/// observables; with two states also runs the Mpemba analysis.
QuenchResult run_quench(const ExperimentConfig& c, const ProgressFn& progress = {});

/// Trajectory CSVs, ratio curve and manifest into c.output_dir.
void write_quench_outputs(const ExperimentConfig& c, const QuenchResult& r);

/// Manifest common to all outputs: config echo, version and tolerances.
nlohmann::json base_manifest(const ExperimentConfig& c, const std::string& command);

struct SsbReport {
  int n1 = 0, n2 = 0;
  double s1 = 0.0, s2 = 0.0;
  bool shifted1 = false, shifted2 = false;
  double e1 = 0.0, e2 = 0.0;
  double c_eff = 0.0;
  bool c_eff_deviates = false;  // |c_eff - 1| > 10%
  SsbDiagnosis es;              // larger system, comparison bond
  bool converged = false;
};

nlohmann::json to_json(const SsbReport& r);

/// Ground states of the prethermal generator of `model` at two sizes.
SsbReport ssb_diagnostics(const ModelSpec& model, int n1, int n2, const DmrgOptions& opts, int terms = 8);

struct ScanResult {
  std::vector<ScanPointResult> points;
  std::vector<ContourPoint> contour;
  int failures = 0;
};

ScanResult run_scan(const ExperimentConfig& c, int workers = 0);
void write_scan_outputs(const ExperimentConfig& c, const ScanResult& r);

/// Fit table plus fidelity report for the configured model.
nlohmann::json run_fit(const ExperimentConfig& c);

/// DMRG ground state of the configured model (and SSB diagnostics when
/// enabled); writes ground.json.
nlohmann::json run_ground(const ExperimentConfig& c);

/// Mpemba analysis of two stored trajectories.
MpembaReport mpemba_from_trajectories(const TrajectoryRecord& a, const TrajectoryRecord& b,
                                      const std::string& measure, const MpembaOptions& opts);

}  // namespace qme
