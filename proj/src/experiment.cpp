#include "qme/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "qme/error.hpp"
#include "qme/longrange.hpp"
#include "qme/mps.hpp"
#include "qme/tdvp.hpp"

namespace qme {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& block) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + block);
}

double number_or_inf(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") throw ConfigError("expected a number or \"inf\"");
    return std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

json inf_or_number(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

std::string engine_name(Engine e) { return e == Engine::Ed ? "ed" : "mps"; }

Engine parse_engine(const std::string& s) {
  if (s == "ed") return Engine::Ed;
  if (s == "mps" || s == "tdvp") return Engine::Mps;
  throw ConfigError("unknown engine '" + s + "' (expected ed or mps)");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<double> time_grid(double dt, double t_max) {
  const long steps = std::lround(t_max / dt);
  std::vector<double> t(steps + 1);
  for (long k = 0; k <= steps; ++k) t[k] = k * dt;
  return t;
}

int window_start(const ExperimentConfig& c) {
  return c.analysis.window_first >= 0 ? c.analysis.window_first
                                      : central_window(c.model.n, c.analysis.window_size);
}

MpembaOptions mpemba_options(const ExperimentConfig& c) {
  MpembaOptions o;
  o.eps_floor = c.analysis.eps_floor;
  o.consecutive = c.analysis.consecutive;
  o.horizon = c.analysis.horizon.value_or(c.engine.t_max);
  return o;
}

std::vector<cplx> sigma_plus_dense(const VectorXc& psi, int n) {
  const Eigen::Matrix2cd op = pauli::plus().cast<cplx>();
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) out[i] = site_expectation(psi, i, op);
  return out;
}

void run_ed(const ExperimentConfig& c, QuenchResult& res, const ProgressFn& progress) {
  const ModelSpec& m = c.model;
  const EdLimits& lim = c.engine.limits;
  const SparseMatrixD h = build_sparse_hamiltonian(m, lim);
  std::optional<SparseMatrixD> d_op;
  if (m.variant != Variant::DEffective) d_op = build_sparse_hamiltonian(m.prethermal_generator(), lim);
  std::optional<Spectrum> spectrum;
  if (c.analysis.trace_distance) spectrum = diagonalize(MatrixXd(h));
  const std::vector<double> grid = time_grid(c.engine.dt, c.engine.t_max);
  const int first = window_start(c);
  EvolutionOptions eo;
  eo.krylov_tol = std::min(1e-10, c.engine.krylov_tol * 100);

  for (std::size_t k = 0; k < c.states.size(); ++k) {
    const VectorXc psi0 = build_dense_state(c.states[k]);
    TrajectoryRecord& rec = res.trajectories[k];
    std::optional<MatrixXc> thermal_rdm;
    if (spectrum) {
      const ThermalState th = solve_effective_temperature(*spectrum, expectation(h, psi0));
      thermal_rdm = thermal_reduced_density_matrix(*spectrum, th, first, c.analysis.window_size);
      rec.manifest["thermal"] = {{"beta", th.beta},           {"target_energy", th.target_energy},
                                 {"energy", th.energy},       {"residual", th.residual},
                                 {"saturated", th.saturated}};
      if (th.saturated) rec.warning = true;
      res.thermal[k] = th;
    }
    const ObservableRecorder recorder(c.analysis.window_size, c.analysis.su2, thermal_rdm);
    auto observe = [&](double t, const VectorXc& psi) {
      Snapshot s;
      s.t = t;
      s.rdm = reduced_density_matrix(psi, first, c.analysis.window_size);
      s.energy = expectation(h, psi);
      s.norm = psi.norm();
      if (d_op) s.d_expect = expectation(*d_op, psi);
      s.sigma_plus = sigma_plus_dense(psi, m.n);
      recorder.record(rec, s);
      if (progress) progress(t);
    };
    evolve_exact(psi0, h, grid, observe, spectrum ? &*spectrum : nullptr, eo);
  }
}

std::string checkpoint_path(const ExperimentConfig& c, std::size_t k) {
  return (fs::path(c.output_dir) / ("checkpoint_" + std::to_string(k) + ".qmps")).string();
}

std::string trajectory_path(const ExperimentConfig& c, std::size_t k) {
  return (fs::path(c.output_dir) / ("trajectory_" + std::to_string(k) + ".csv")).string();
}

void write_csv_file(const std::string& path, const TrajectoryRecord& rec) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw ResourceError("cannot write " + tmp);
    write_trajectory_csv(os, rec);
  }
  fs::rename(tmp, path);
}

void run_mps(const ExperimentConfig& c, QuenchResult& res, const ProgressFn& progress) {
  const ModelSpec& m = c.model;
  const Mpo h = build_model_mpo(m, c.engine.terms);
  std::optional<Mpo> d_mpo;
  if (m.variant != Variant::DEffective) d_mpo = build_model_mpo(m.prethermal_generator(), c.engine.terms);
  TdvpOptions to;
  to.dt = c.engine.dt;
  to.chi_max = c.engine.chi;
  to.cutoff = c.engine.cutoff;
  to.krylov_dim = c.engine.krylov_dim;
  to.krylov_tol = c.engine.krylov_tol;

  const std::size_t ns = c.states.size();
  const int first = window_start(c);
  const long steps = std::lround(c.engine.t_max / c.engine.dt);
  std::vector<std::unique_ptr<Tdvp>> engines;
  std::vector<double> prior_trunc(ns, 0.0);
  std::vector<bool> prior_saturated(ns, false);
  for (std::size_t k = 0; k < ns; ++k) {
    Mps<cplx> psi;
    double t0 = 0.0;
    if (c.engine.resume && fs::exists(checkpoint_path(c, k)) && fs::exists(trajectory_path(c, k))) {
      json meta;
      psi = load_checkpoint(checkpoint_path(c, k), &meta);
      t0 = meta.at("t").get<double>();
      prior_trunc[k] = meta.value("trunc_err", 0.0);
      prior_saturated[k] = meta.value("saturation_warning", false);
      std::ifstream is(trajectory_path(c, k));
      TrajectoryRecord rec = read_trajectory_csv(is);
      TrajectoryRecord kept;
      kept.manifest = res.trajectories[k].manifest;
      for (std::size_t i = 0; i < rec.size() && rec.times[i] <= t0 + 1e-9; ++i) {
        std::vector<std::pair<std::string, double>> row;
        for (const auto& name : rec.names) row.emplace_back(name, rec.series.at(name)[i]);
        kept.append(rec.times[i], row);
      }
      kept.manifest["resumed_from"] = t0;
      res.trajectories[k] = std::move(kept);
    } else {
      psi = to_complex(Mps<double>::product(site_amplitudes(c.states[k])));
    }
    engines.push_back(std::make_unique<Tdvp>(std::move(psi), h, to, t0));
  }
  for (std::size_t k = 1; k < ns; ++k)
    if (std::abs(engines[k]->time() - engines[0]->time()) > 1e-9)
      throw ConfigError("checkpoints of the states are at different times; remove them to restart");

  const ObservableRecorder recorder(c.analysis.window_size, c.analysis.su2);
  auto record = [&](std::size_t k) {
    const Tdvp& td = *engines[k];
    const LocalMeasurements lm = measure_local(td.state(), first, c.analysis.window_size);
    Snapshot s;
    s.t = td.time();
    s.rdm = lm.rdm;
    s.sigma_plus = lm.sigma_plus;
    s.energy = td.energy();
    s.norm = td.norm();
    if (d_mpo) s.d_expect = mpo_expectation(td.state(), *d_mpo);
    s.max_bond = td.state().max_bond();
    s.trunc_err = prior_trunc[k] + td.truncation_error();
    recorder.record(res.trajectories[k], s);
  };

  std::optional<CrossingMonitor> monitor;
  if (ns == 2) monitor.emplace(mpemba_options(c));
  auto feed_monitor = [&]() {
    if (!monitor) return;
    const double t = res.trajectories[0].times.back();
    monitor->push(t, res.trajectories[0].get(c.analysis.measure).back(),
                  res.trajectories[1].get(c.analysis.measure).back());
  };

  const bool resumed = res.trajectories[0].size() > 0;
  if (resumed) {
    if (monitor)
      for (std::size_t i = 0; i < res.trajectories[0].size(); ++i)
        monitor->push(res.trajectories[0].times[i], res.trajectories[0].get(c.analysis.measure)[i],
                      res.trajectories[1].get(c.analysis.measure)[i]);
  } else {
    for (std::size_t k = 0; k < ns; ++k) record(k);
    feed_monitor();
  }

  auto save_checkpoints = [&]() {
    fs::create_directories(c.output_dir);
    for (std::size_t k = 0; k < ns; ++k) {
      json meta = {{"t", engines[k]->time()},
                   {"trunc_err", prior_trunc[k] + engines[k]->truncation_error()},
                   {"saturation_warning", prior_saturated[k] || engines[k]->saturation_warning()},
                   {"state", to_json(c.states[k])}};
      save_checkpoint(checkpoint_path(c, k), engines[k]->state(), meta);
      write_csv_file(trajectory_path(c, k), res.trajectories[k]);
    }
  };

  const long start = std::lround(engines[0]->time() / c.engine.dt);
  try {
    for (long step = start; step < steps; ++step) {
      if (monitor && c.analysis.early_stop && monitor->decided()) {
        res.stopped_early = true;
        break;
      }
      for (std::size_t k = 0; k < ns; ++k) {
        engines[k]->step();
        record(k);
      }
      feed_monitor();
      if (progress) progress(engines[0]->time());
      if (c.engine.checkpoint_every > 0 && ((step + 1) % c.engine.checkpoint_every == 0 || step + 1 == steps))
        save_checkpoints();
    }
    if (res.stopped_early && c.engine.checkpoint_every > 0) save_checkpoints();
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  for (std::size_t k = 0; k < ns; ++k) {
    TrajectoryRecord& rec = res.trajectories[k];
    const bool saturated = prior_saturated[k] || engines[k]->saturation_warning();
    rec.manifest["saturation_warning"] = saturated;
    rec.manifest["one_site_reached"] = engines[k]->one_site();
    rec.manifest["krylov_matvecs"] = engines[k]->krylov_stats().matvecs;
    rec.manifest["mpo_bond_dimension"] = h.bond_dimension();
    if (saturated) rec.warning = true;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& s : states)
    if (s.n != model.n) throw ConfigError("state chain length differs from the model");
  const auto& a = analysis;
  if (a.window_size < 1 || a.window_size > kMaxSubsystem || a.window_size > model.n)
    throw ConfigError("analysis.window_size must be in [1, min(6, n)]");
  if (a.window_first >= 0 && a.window_first + a.window_size > model.n)
    throw ConfigError("analysis window extends past the chain");
  if (a.measure != "u1_asym" && a.measure != "su2_asym" && a.measure != "trace_dist")
    throw ConfigError("analysis.measure must be u1_asym, su2_asym or trace_dist");
  if (a.measure == "su2_asym" && !a.su2) throw ConfigError("su2_asym measure needs analysis.su2");
  if (a.measure == "trace_dist" && !a.trace_distance)
    throw ConfigError("trace_dist measure needs analysis.trace_distance");
  if (a.trace_distance && engine.engine != Engine::Ed)
    throw ConfigError("the thermal reference is only available with the ed engine");
  if (a.consecutive < 1) throw ConfigError("analysis.consecutive must be >= 1");
  if (!(a.eps_floor > 0.0)) throw ConfigError("analysis.eps_floor must be positive");
  const auto& e = engine;
  if (!(e.dt > 0.0)) throw ConfigError("engine.dt must be positive");
  if (!(e.t_max >= 0.0)) throw ConfigError("engine.t_max must be non-negative");
  if (e.chi < 1) throw ConfigError("engine.chi must be >= 1");
  if (e.terms < 1) throw ConfigError("engine.terms must be >= 1");
  if (e.krylov_dim < 2) throw ConfigError("engine.krylov_dim must be >= 2");
  if (e.engine == Engine::Ed) {
    if (model.n > e.limits.sparse_cap)
      throw ConfigError("chain too long for exact evolution; use the mps engine");
    if (a.trace_distance && model.n > e.limits.dense_cap)
      throw ConfigError("thermal reference needs full diagonalisation (n <= dense_cap)");
  }
  if (ssb.n1 < 2 || ssb.n2 <= ssb.n1) throw ConfigError("ssb sizes need 2 <= n1 < n2");
  if (grid) {
    for (double al : grid->alpha)
      if (al < 0.0) throw ConfigError("grid alpha must be non-negative");
    for (int n : grid->n)
      if (n < 2) throw ConfigError("grid n must be >= 2");
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(j, {"model", "states", "engine", "analysis", "grid", "ssb", "output"}, "configuration");
  ExperimentConfig c;
  if (!j.contains("model")) throw ConfigError("configuration needs a model block");
  c.model = model_from_json(j.at("model"));
  // Default evolution time: 20 for the XXZ generator, 10 with the field.
  if (c.model.variant != Variant::DEffective) c.engine.t_max = 10.0;
  try {
    if (j.contains("states")) {
      if (!j.at("states").is_array()) throw ConfigError("states must be an array");
      for (const auto& s : j.at("states")) c.states.push_back(state_from_json(s, c.model.n));
    }
    if (j.contains("engine")) {
      const json& e = j.at("engine");
      reject_unknown(e,
                     {"type", "chi", "dt", "t_max", "cutoff", "sweeps", "krylov_dim", "krylov_tol", "terms",
                      "sparse_cap", "dense_cap", "checkpoint_every", "resume"},
                     "engine");
      if (e.contains("type")) c.engine.engine = parse_engine(e.at("type").get<std::string>());
      read(e, "chi", c.engine.chi);
      read(e, "dt", c.engine.dt);
      read(e, "t_max", c.engine.t_max);
      read(e, "cutoff", c.engine.cutoff);
      read(e, "sweeps", c.engine.sweeps);
      read(e, "krylov_dim", c.engine.krylov_dim);
      read(e, "krylov_tol", c.engine.krylov_tol);
      read(e, "terms", c.engine.terms);
      read(e, "sparse_cap", c.engine.limits.sparse_cap);
      read(e, "dense_cap", c.engine.limits.dense_cap);
      read(e, "checkpoint_every", c.engine.checkpoint_every);
      read(e, "resume", c.engine.resume);
    }
    if (j.contains("analysis")) {
      const json& a = j.at("analysis");
      reject_unknown(a,
                     {"window_size", "window_first", "su2", "trace_distance", "measure", "eps_floor",
                      "consecutive", "horizon", "early_stop", "prethermal_band"},
                     "analysis");
      read(a, "window_size", c.analysis.window_size);
      read(a, "window_first", c.analysis.window_first);
      read(a, "su2", c.analysis.su2);
      read(a, "trace_distance", c.analysis.trace_distance);
      read(a, "measure", c.analysis.measure);
      read(a, "eps_floor", c.analysis.eps_floor);
      read(a, "consecutive", c.analysis.consecutive);
      if (a.contains("horizon")) c.analysis.horizon = a.at("horizon").get<double>();
      read(a, "early_stop", c.analysis.early_stop);
      read(a, "prethermal_band", c.analysis.prethermal_band);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      reject_unknown(g, {"jz", "alpha", "hz", "n"}, "grid");
      GridConfig grid;
      if (g.contains("jz")) grid.jz = g.at("jz").get<std::vector<double>>();
      if (g.contains("alpha"))
        for (const auto& v : g.at("alpha")) grid.alpha.push_back(number_or_inf(v));
      if (g.contains("hz")) grid.hz = g.at("hz").get<std::vector<double>>();
      if (g.contains("n")) grid.n = g.at("n").get<std::vector<int>>();
      c.grid = grid;
    }
    if (j.contains("ssb")) {
      const json& s = j.at("ssb");
      reject_unknown(s, {"enabled", "n1", "n2", "chi", "sweeps", "cutoff"}, "ssb");
      read(s, "enabled", c.ssb.enabled);
      read(s, "n1", c.ssb.n1);
      read(s, "n2", c.ssb.n2);
      read(s, "chi", c.ssb.chi);
      read(s, "sweeps", c.ssb.sweeps);
      read(s, "cutoff", c.ssb.cutoff);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      reject_unknown(o, {"dir"}, "output");
      read(o, "dir", c.output_dir);
    }
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json states = json::array();
  for (const auto& s : c.states) states.push_back(to_json(s));
  json j = {{"model", to_json(c.model)},
            {"states", states},
            {"engine",
             {{"type", engine_name(c.engine.engine)},
              {"chi", c.engine.chi},
              {"dt", c.engine.dt},
              {"t_max", c.engine.t_max},
              {"cutoff", c.engine.cutoff},
              {"sweeps", c.engine.sweeps},
              {"krylov_dim", c.engine.krylov_dim},
              {"krylov_tol", c.engine.krylov_tol},
              {"terms", c.engine.terms},
              {"sparse_cap", c.engine.limits.sparse_cap},
              {"dense_cap", c.engine.limits.dense_cap},
              {"checkpoint_every", c.engine.checkpoint_every},
              {"resume", c.engine.resume}}},
            {"analysis",
             {{"window_size", c.analysis.window_size},
              {"window_first", c.analysis.window_first},
              {"su2", c.analysis.su2},
              {"trace_distance", c.analysis.trace_distance},
              {"measure", c.analysis.measure},
              {"eps_floor", c.analysis.eps_floor},
              {"consecutive", c.analysis.consecutive},
              {"early_stop", c.analysis.early_stop},
              {"prethermal_band", c.analysis.prethermal_band}}},
            {"ssb",
             {{"enabled", c.ssb.enabled},
              {"n1", c.ssb.n1},
              {"n2", c.ssb.n2},
              {"chi", c.ssb.chi},
              {"sweeps", c.ssb.sweeps},
              {"cutoff", c.ssb.cutoff}}},
            {"output", {{"dir", c.output_dir}}}};
  if (c.analysis.horizon) j["analysis"]["horizon"] = *c.analysis.horizon;
  if (c.grid) {
    json alpha = json::array();
    for (double a : c.grid->alpha) alpha.push_back(inf_or_number(a));
    j["grid"] = {{"jz", c.grid->jz}, {"alpha", alpha}, {"hz", c.grid->hz}, {"n", c.grid->n}};
  }
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open configuration " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

json base_manifest(const ExperimentConfig& c, const std::string& command) {
  return {{"command", command},
          {"version", kVersion},
          {"config", to_json(c)},
          {"tolerances",
           {{"krylov_tol", c.engine.krylov_tol},
            {"truncation_cutoff", c.engine.cutoff},
            {"dmrg_cutoff", c.ssb.cutoff},
            {"eps_floor", c.analysis.eps_floor},
            {"entropy_eigenvalue_floor", 1e-14}}}};
}

QuenchResult run_quench(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  if (c.states.empty()) throw ConfigError("quench needs at least one state");
  QuenchResult res;
  res.trajectories.resize(c.states.size());
  res.thermal.resize(c.states.size());
  for (std::size_t k = 0; k < c.states.size(); ++k) res.trajectories[k].manifest["state"] = to_json(c.states[k]);
  if (c.engine.engine == Engine::Ed) {
    try {
      run_ed(c, res, progress);
    } catch (const ConfigError&) {
      throw;
    } catch (const DomainError&) {
      throw;
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  } else {
    run_mps(c, res, progress);
  }
  if (c.states.size() == 2 && res.trajectories[0].size() > 0 &&
      res.trajectories[0].size() == res.trajectories[1].size()) {
    res.report = detect_mpemba(res.trajectories[0].times, res.trajectories[0].get(c.analysis.measure),
                               res.trajectories[1].get(c.analysis.measure), mpemba_options(c));
  }
  return res;
}

void write_quench_outputs(const ExperimentConfig& c, const QuenchResult& r) {
  fs::create_directories(c.output_dir);
  json manifest = base_manifest(c, "quench");
  json states = json::array();
  for (std::size_t k = 0; k < r.trajectories.size(); ++k) {
    write_csv_file(trajectory_path(c, k), r.trajectories[k]);
    json entry = r.trajectories[k].manifest;
    entry["file"] = fs::path(trajectory_path(c, k)).filename().string();
    entry["warning"] = r.trajectories[k].warning;
    entry["samples"] = r.trajectories[k].size();
    const TrajectoryRecord& rec = r.trajectories[k];
    if (rec.has("d_expect") && rec.size() > 1) {
      try {
        const PrethermalDiagnostic pd =
            prethermal_diagnostic(rec.times, rec.get("d_expect"), c.analysis.prethermal_band);
        entry["prethermal"] = {{"departed", pd.departed}, {"band", pd.band}};
        if (pd.departure_time) entry["prethermal"]["departure_time"] = *pd.departure_time;
      } catch (const DomainError& e) {
        entry["prethermal"] = {{"error", e.what()}};
      }
    }
    states.push_back(entry);
  }
  manifest["states"] = states;
  manifest["stopped_early"] = r.stopped_early;
  if (!r.error.empty()) manifest["error"] = r.error;
  if (r.report) {
    manifest["mpemba"] = to_json(*r.report);
    manifest["mpemba"]["measure"] = c.analysis.measure;
    std::ofstream os(fs::path(c.output_dir) / "ratio.csv");
    TrajectoryRecord ratio;
    for (std::size_t i = 0; i < r.report->curve.t.size(); ++i)
      ratio.append(r.report->curve.t[i], {{"ratio", r.report->curve.r[i]}});
    write_trajectory_csv(os, ratio);
  }
  std::ofstream os(fs::path(c.output_dir) / "manifest.json");
  os << manifest.dump(2) << "\n";
}

json to_json(const SsbReport& r) {
  return {{"n1", r.n1},
          {"n2", r.n2},
          {"s1", r.s1},
          {"s2", r.s2},
          {"shifted1", r.shifted1},
          {"shifted2", r.shifted2},
          {"e1", r.e1},
          {"e2", r.e2},
          {"c_eff", r.c_eff},
          {"c_eff_deviates", r.c_eff_deviates},
          {"es_flag", r.es.flag},
          {"es_levels", r.es.levels},
          {"es_gap12", r.es.gap12},
          {"es_gap13", r.es.gap13},
          {"converged", r.converged}};
}

SsbReport ssb_diagnostics(const ModelSpec& model, int n1, int n2, const DmrgOptions& opts, int terms) {
  if (n1 < 2 || n2 <= n1) throw DomainError("ssb sizes need 2 <= n1 < n2");
  SsbReport rep;
  rep.n1 = n1;
  rep.n2 = n2;
  rep.converged = true;
  EntanglementData larger;
  for (int pass = 0; pass < 2; ++pass) {
    ModelSpec m = model;
    m.n = pass == 0 ? n1 : n2;
    const DmrgResult g = dmrg_ground_state(build_model_mpo(m, terms), opts);
    const EntanglementData e = half_chain_entropy(g.state, pass == 0 ? n2 : n1);
    rep.converged = rep.converged && g.converged;
    if (pass == 0) {
      rep.s1 = e.entropy;
      rep.shifted1 = e.shifted;
      rep.e1 = g.energy;
    } else {
      rep.s2 = e.entropy;
      rep.shifted2 = e.shifted;
      rep.e2 = g.energy;
      larger = e;
    }
  }
  rep.c_eff = central_charge_estimate(rep.s1, n1, rep.s2, n2);
  rep.c_eff_deviates = std::abs(rep.c_eff - 1.0) > 0.1;
  rep.es = entanglement_spectrum_ssb_flag(larger);
  return rep;
}

namespace {

DmrgOptions dmrg_options(const ExperimentConfig& c) {
  DmrgOptions o;
  o.chi_max = c.ssb.chi;
  o.sweeps = c.ssb.sweeps;
  o.cutoff = c.ssb.cutoff;
  return o;
}

ModelSpec model_at(const ModelSpec& base, const GridPoint& p) {
  ModelSpec m = base;
  m.jz = p.jz;
  m.hz = p.hz;
  m.n = p.n;
  if (std::isinf(p.alpha)) {
    m.nearest_neighbor = true;
    m.alpha = p.alpha;
  } else {
    m.nearest_neighbor = false;
    m.alpha = p.alpha;
  }
  return m;
}

std::string point_label(const GridPoint& p) {
  return "jz" + format_number(p.jz) + "_alpha" + (std::isinf(p.alpha) ? "inf" : format_number(p.alpha)) + "_hz" +
         format_number(p.hz) + "_n" + std::to_string(p.n);
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

ScanResult run_scan(const ExperimentConfig& c, int workers) {
  c.validate();
  if (!c.grid) throw ConfigError("scan needs a grid block");
  if (c.states.size() != 2) throw ConfigError("scan needs exactly two states");
  const GridConfig& g = *c.grid;
  const auto or_default = [](const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; };
  const std::vector<double> jzs = or_default(g.jz, c.model.jz);
  const std::vector<double> alphas =
      or_default(g.alpha, c.model.nearest_neighbor ? std::numeric_limits<double>::infinity() : c.model.alpha);
  const std::vector<double> hzs = or_default(g.hz, c.model.hz);
  const std::vector<int> ns = g.n.empty() ? std::vector<int>{c.model.n} : g.n;
  std::vector<GridPoint> points;
  for (double jz : jzs)
    for (double hz : hzs)
      for (double a : alphas)
        for (int n : ns) points.push_back({jz, a, hz, n});

  const PointEvaluator eval = [&c](const GridPoint& p) {
    ExperimentConfig pc = c;
    pc.model = model_at(c.model, p);
    for (auto& s : pc.states) s.n = p.n;
    pc.grid.reset();
    pc.analysis.early_stop = true;
    pc.output_dir = (fs::path(c.output_dir) / "points" / point_label(p)).string();
    ScanPointResult out;
    out.point = p;
    QuenchResult q = run_quench(pc, {});
    write_quench_outputs(pc, q);
    if (!q.error.empty()) throw ConsistencyError(q.error);
    out.report = q.report;
    if (c.ssb.enabled) {
      const SsbReport s =
          ssb_diagnostics(pc.model.prethermal_generator(), c.ssb.n1, c.ssb.n2, dmrg_options(c), c.engine.terms);
      out.c_eff = s.c_eff;
      out.ssb_flag = s.es.flag;
      std::ofstream os(fs::path(pc.output_dir) / "ssb.json");
      os << to_json(s).dump(2) << "\n";
    }
    return out;
  };

  ScanResult res;
  res.points = phase_scan(points, eval, workers);
  for (const auto& p : res.points)
    if (!p.error.empty()) ++res.failures;
  res.contour = alpha_m_contour(res.points, g.by_field());
  return res;
}

void write_scan_outputs(const ExperimentConfig& c, const ScanResult& r) {
  fs::create_directories(c.output_dir);
  {
    std::ofstream os(fs::path(c.output_dir) / "scan.csv");
    os << "J_z,alpha,h_z,N,verdict,tau_M,r0,c_eff,ssb_flag\n";
    for (const auto& p : r.points) {
      os << format_number(p.point.jz) << ',' << (std::isinf(p.point.alpha) ? "inf" : format_number(p.point.alpha))
         << ',' << format_number(p.point.hz) << ',' << p.point.n << ',';
      if (!p.error.empty() || !p.report) {
        os << "error,,,";
      } else {
        os << to_string(p.report->verdict) << ',' << optional_cell(p.report->tau_m) << ','
           << format_number(p.report->r0) << ',';
      }
      os << optional_cell(p.c_eff) << ',' << (p.ssb_flag ? (*p.ssb_flag ? "true" : "false") : "") << '\n';
    }
  }
  const bool by_field = c.grid && c.grid->by_field();
  {
    std::ofstream os(fs::path(c.output_dir) / "contour.csv");
    os << (by_field ? "h_z" : "J_z") << ",alpha_not_crossed,alpha_crossed,alpha_M\n";
    for (const auto& cp : r.contour)
      os << format_number(cp.coordinate) << ',' << optional_cell(cp.summary.alpha_not_crossed) << ','
         << optional_cell(cp.summary.alpha_crossed) << ',' << optional_cell(cp.summary.alpha_m) << '\n';
  }
  json manifest = base_manifest(c, "scan");
  json errors = json::array();
  for (const auto& p : r.points)
    if (!p.error.empty()) errors.push_back({{"point", point_label(p.point)}, {"error", p.error}});
  manifest["failures"] = r.failures;
  manifest["errors"] = errors;
  json caveats = json::array();
  for (const auto& cp : r.contour)
    if (!cp.summary.caveat.empty()) caveats.push_back(cp.summary.caveat);
  manifest["caveats"] = caveats;
  std::ofstream os(fs::path(c.output_dir) / "manifest.json");
  os << manifest.dump(2) << "\n";
}

json run_fit(const ExperimentConfig& c) {
  c.validate();
  const ModelSpec& m = c.model;
  json out = base_manifest(c, "fit");
  ExponentialFit fit = (m.nearest_neighbor || m.n < 3) ? ExponentialFit::nearest_neighbor(m.n)
                                                      : fit_power_law(m.alpha, m.n, c.engine.terms);
  const FidelityReport rep = mpo_fidelity_report(fit, m);
  const Mpo mpo = assemble_longrange_mpo(fit, m);
  out["fit"] = {{"alpha", inf_or_number(m.nearest_neighbor ? std::numeric_limits<double>::infinity() : m.alpha)},
                {"n", m.n},
                {"terms", fit.terms()},
                {"amplitudes", fit.amplitudes},
                {"rates", fit.rates},
                {"sup_residual", fit.sup_residual},
                {"rms_residual", fit.rms_residual},
                {"warning", fit.warning}};
  out["fidelity"] = {{"max_error", rep.max_error},
                     {"threshold", rep.threshold},
                     {"flagged_distances", rep.flagged},
                     {"energy_bound_per_site", rep.energy_bound_per_site}};
  out["mpo_bond_dimension"] = mpo.bond_dimension();
  fs::create_directories(c.output_dir);
  std::ofstream table(fs::path(c.output_dir) / "fit_table.txt");
  write_fit_table(table, fit);
  std::ofstream os(fs::path(c.output_dir) / "fit.json");
  os << out.dump(2) << "\n";
  return out;
}

json run_ground(const ExperimentConfig& c) {
  c.validate();
  const DmrgOptions opts = dmrg_options(c);
  const DmrgResult g = dmrg_ground_state(build_model_mpo(c.model, c.engine.terms), opts);
  const EntanglementData half = entanglement_entropy(g.state, c.model.n / 2);
  const SsbDiagnosis es = entanglement_spectrum_ssb_flag(half);
  json out = base_manifest(c, "ground");
  out["ground"] = {{"energy", g.energy},
                   {"energy_per_site", g.energy / c.model.n},
                   {"sweep_energies", g.sweep_energies},
                   {"sweep_max_bond", g.sweep_max_bond},
                   {"max_discarded", g.max_discarded},
                   {"converged", g.converged},
                   {"eigensolver_converged", g.eigensolver_converged},
                   {"half_chain_entropy", half.entropy},
                   {"es_levels", es.levels},
                   {"es_flag", es.flag}};
  if (c.ssb.enabled) {
    const SsbReport s = ssb_diagnostics(c.model, c.ssb.n1, c.ssb.n2, opts, c.engine.terms);
    out["ssb"] = to_json(s);
    out["ssb"]["verdict"] = (s.c_eff_deviates && s.es.flag) ? "ssb" : "no_ssb";
  }
  fs::create_directories(c.output_dir);
  std::ofstream os(fs::path(c.output_dir) / "ground.json");
  os << out.dump(2) << "\n";
  return out;
}

MpembaReport mpemba_from_trajectories(const TrajectoryRecord& a, const TrajectoryRecord& b,
                                      const std::string& measure, const MpembaOptions& opts) {
  if (!a.has(measure) || !b.has(measure)) throw ConfigError("trajectory lacks observable " + measure);
  if (a.times.size() != b.times.size()) throw DomainError("trajectories are sampled on different grids");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-9) throw DomainError("trajectories are sampled on different grids");
  return detect_mpemba(a.times, a.get(measure), b.get(measure), opts);
}

}  // namespace qme
