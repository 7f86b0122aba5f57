#include "qme/mpemba.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "qme/error.hpp"

namespace qme {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Crossed:
      return "crossed";
    case Verdict::NotCrossed:
      return "not_crossed";
    case Verdict::SymmetryRestoredSecond:
      return "symmetry_restored_second_state";
  }
  return "?";
}

nlohmann::json to_json(const MpembaReport& r) {
  nlohmann::json j{{"r0", r.r0},
                   {"verdict", to_string(r.verdict)},
                   {"horizon", r.horizon},
                   {"swapped", r.swapped},
                   {"last_valid_ratio", r.last_valid_ratio},
                   {"last_valid_time", r.last_valid_time}};
  j["tau_m"] = r.tau_m ? nlohmann::json(*r.tau_m) : nlohmann::json(nullptr);
  if (r.decided_at) j["decided_at"] = *r.decided_at;
  return j;
}

CrossingMonitor::CrossingMonitor(const MpembaOptions& opts) : opts_(opts) {
  if (opts_.consecutive < 1) throw DomainError("crossing confirmation needs at least one sample");
}

void CrossingMonitor::push(double t, double s1, double s2) {
  if (t > opts_.horizon) return;
  if (!started_) {
    if (s1 < s2) rep_.swapped = true;
    if (rep_.swapped) std::swap(s1, s2);
    if (s2 < opts_.eps_floor) throw DomainError("second state is already symmetric at the first sample");
    if (s1 == s2) throw DomainError("asymmetry ratio equals 1 at the first sample; states are not ordered");
    started_ = true;
    rep_.r0 = s1 / s2;
  } else {
    if (t <= rep_.curve.t.back()) throw DomainError("samples must have increasing times");
    if (rep_.swapped) std::swap(s1, s2);
  }
  rep_.horizon = t;
  rep_.curve.t.push_back(t);
  const bool floored = s2 < opts_.eps_floor;
  rep_.curve.floored.push_back(floored);
  if (floored) {
    rep_.curve.r.push_back(std::numeric_limits<double>::quiet_NaN());
    if (!decided_) rep_.verdict = Verdict::SymmetryRestoredSecond;
    decided_ = true;
    return;
  }
  // A restored first state counts as below 1 regardless of the exact ratio.
  const double r = s1 < opts_.eps_floor ? std::min(s1 / s2, 1.0 - 1e-15) : s1 / s2;
  rep_.curve.r.push_back(r);
  // After the verdict the curve keeps growing but the report is frozen.
  if (decided_) return;
  rep_.last_valid_ratio = r;
  rep_.last_valid_time = t;
  const std::size_t k = rep_.curve.r.size() - 1;
  if (r < 1.0) {
    if (below_ == 0) {
      const double t0 = rep_.curve.t[k - 1], r0 = rep_.curve.r[k - 1];
      candidate_tau_ = t0 + (r0 - 1.0) / (r0 - r) * (t - t0);
    }
    if (++below_ >= opts_.consecutive) {
      rep_.verdict = Verdict::Crossed;
      rep_.tau_m = candidate_tau_;
      rep_.decided_at = t;
      decided_ = true;
    }
  } else {
    below_ = 0;
    candidate_tau_.reset();
  }
}

MpembaReport CrossingMonitor::report() const {
  if (!started_) throw DomainError("no samples supplied");
  return rep_;
}

MpembaReport detect_mpemba(const std::vector<double>& t, const std::vector<double>& s1,
                           const std::vector<double>& s2, const MpembaOptions& opts) {
  if (t.empty() || t.size() != s1.size() || t.size() != s2.size())
    throw DomainError("asymmetry series must share a non-empty time grid");
  CrossingMonitor mon(opts);
  for (std::size_t k = 0; k < t.size(); ++k) mon.push(t[k], s1[k], s2[k]);
  return mon.report();
}

AlphaScanSummary mpemba_time_vs_alpha(std::vector<AlphaEntry> entries) {
  AlphaScanSummary s;
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  s.entries = std::move(entries);
  for (const auto& e : s.entries) {
    s.horizon = std::max(s.horizon, e.report.horizon);
    if (e.report.verdict != Verdict::Crossed) s.alpha_not_crossed = e.alpha;
  }
  for (const auto& e : s.entries)
    if (e.report.verdict == Verdict::Crossed && (!s.alpha_not_crossed || e.alpha > *s.alpha_not_crossed)) {
      s.alpha_crossed = e.alpha;
      break;
    }
  if (s.alpha_not_crossed && s.alpha_crossed) s.alpha_m = 0.5 * (*s.alpha_not_crossed + *s.alpha_crossed);
  s.caveat = "not_crossed means no confirmed crossing up to t = " + std::to_string(s.horizon) +
             "; alpha_M is bounded by the evolution horizon";
  return s;
}

int default_workers() {
  if (const char* env = std::getenv("QME_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ScanPointResult> phase_scan(const std::vector<GridPoint>& grid, const PointEvaluator& eval, int workers) {
  std::vector<ScanPointResult> results(grid.size());
  if (workers <= 0) workers = default_workers();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        results[i] = eval(grid[i]);
      } catch (const std::exception& e) {
        results[i] = ScanPointResult{};
        results[i].error = e.what();
      }
      results[i].point = grid[i];
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

std::vector<ContourPoint> alpha_m_contour(const std::vector<ScanPointResult>& results, bool by_field) {
  std::map<double, std::vector<AlphaEntry>> rows;
  for (const auto& r : results) {
    if (!r.report) continue;
    rows[by_field ? r.point.hz : r.point.jz].push_back({r.point.alpha, *r.report});
  }
  std::vector<ContourPoint> out;
  for (auto& [coord, entries] : rows) out.push_back({coord, mpemba_time_vs_alpha(std::move(entries))});
  return out;
}

PrethermalDiagnostic prethermal_diagnostic(const std::vector<double>& t, const std::vector<double>& d, double band) {
  if (t.size() != d.size() || d.empty()) throw DomainError("D(t) series must match its time grid");
  if (std::abs(d[0]) < 1e-12) throw DomainError("D(0) vanishes; cannot normalise");
  PrethermalDiagnostic p;
  p.band = band;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double r = d[k] / d[0];
    p.ratio.push_back(r);
    if (!p.departed && std::abs(r - 1.0) > band) {
      p.departed = true;
      p.departure_time = t[k];
    }
  }
  return p;
}

}  // namespace qme
