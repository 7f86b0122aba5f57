#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qme {

enum class Verdict { Crossed, NotCrossed, SymmetryRestoredSecond };

std::string to_string(Verdict v);

struct MpembaOptions {
  /// Asymmetries below this are treated as restored.
  double eps_floor = 1e-6;
  /// Samples that must stay below 1 to confirm a crossing.
  int consecutive = 3;
  /// Samples after this time are ignored.
  double horizon = std::numeric_limits<double>::infinity();
};

struct RatioCurve {
  std::vector<double> t;
  std::vector<double> r;         // NaN where the denominator is below the floor
  std::vector<bool> floored;     // denominator below the floor
};

struct MpembaReport {
  double r0 = 0.0;
  Verdict verdict = Verdict::NotCrossed;
  std::optional<double> tau_m;
  double horizon = 0.0;  // last time considered
  /// Sample time at which a crossing was confirmed.
  std::optional<double> decided_at;
  /// Inputs were supplied in reverse order and swapped.
  bool swapped = false;
  double last_valid_ratio = 0.0;
  double last_valid_time = 0.0;
  RatioCurve curve;
};

nlohmann::json to_json(const MpembaReport& r);

/// Streaming form of the detector; lets paired evolutions stop early.
class CrossingMonitor {
 public:
  explicit CrossingMonitor(const MpembaOptions& opts = {});
  /// Samples must arrive with increasing t; the first fixes the ordering.
  void push(double t, double s1, double s2);
  /// Crossing confirmed or second state restored: later samples extend the
  /// ratio curve but cannot change the verdict.
  bool decided() const { return decided_; }
  MpembaReport report() const;

 private:
  MpembaOptions opts_;
  MpembaReport rep_;
  bool started_ = false;
  bool decided_ = false;
  int below_ = 0;
  std::optional<double> candidate_tau_;
};

/// Ratio curve of asymmetry series s1/s2 and crossing analysis. If
/// s1(0) < s2(0) the inputs are swapped (noted in the report). DomainError
/// when r(0) = 1, when the second state is symmetric at t = 0, or on
/// mismatched grids.
MpembaReport detect_mpemba(const std::vector<double>& t, const std::vector<double>& s1,
                           const std::vector<double>& s2, const MpembaOptions& opts = {});

struct AlphaEntry {
  double alpha = 0.0;
  MpembaReport report;
};

struct AlphaScanSummary {
  std::vector<AlphaEntry> entries;  // ascending alpha
  /// Largest alpha without a confirmed crossing and the smallest crossed
  /// alpha above it; alpha_m is their midpoint when both exist.
  std::optional<double> alpha_not_crossed;
  std::optional<double> alpha_crossed;
  std::optional<double> alpha_m;
  double horizon = 0.0;
  std::string caveat;
};

AlphaScanSummary mpemba_time_vs_alpha(std::vector<AlphaEntry> entries);

struct GridPoint {
  double jz = 0.0;
  double alpha = 0.0;
  double hz = 0.0;
  int n = 0;
};

struct ScanPointResult {
  GridPoint point;
  std::optional<MpembaReport> report;
  std::optional<double> c_eff;
  std::optional<bool> ssb_flag;
  std::string error;  // empty on success
};

using PointEvaluator = std::function<ScanPointResult(const GridPoint&)>;

/// Worker count from QME_WORKERS, else the hardware concurrency.
int default_workers();

/// Evaluates every point on a pool of `workers` threads. Exceptions are
/// recorded in the point's error field. Results keep the input order.
std::vector<ScanPointResult> phase_scan(const std::vector<GridPoint>& grid, const PointEvaluator& eval,
                                        int workers = 0);

struct ContourPoint {
  double coordinate = 0.0;  // J_z or h_z of the row
  AlphaScanSummary summary;
};

/// alpha_M per row of the grid; `by_field` groups rows by h_z instead of J_z.
std::vector<ContourPoint> alpha_m_contour(const std::vector<ScanPointResult>& results, bool by_field);

struct PrethermalDiagnostic {
  std::vector<double> ratio;  // D(t)/D(0)
  bool departed = false;
  std::optional<double> departure_time;
  double band = 0.1;
};

/// DomainError when |D(0)| is below 1e-12.
PrethermalDiagnostic prethermal_diagnostic(const std::vector<double>& t, const std::vector<double>& d,
                                           double band = 0.1);

}  // namespace qme
