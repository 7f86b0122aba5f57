#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qme/asymmetry.hpp"
#include "qme/linalg.hpp"

namespace qme {

/// Time series of named observables sampled on a common grid.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::string> names;  // first-seen order
  std::map<std::string, std::vector<double>> series;
  nlohmann::json manifest = nlohmann::json::object();
  bool warning = false;

  void append(double t, const std::vector<std::pair<std::string, double>>& values);
  bool has(const std::string& name) const { return series.count(name) != 0; }
  const std::vector<double>& get(const std::string& name) const;
  std::size_t size() const { return times.size(); }
};

/// Long format with header "t,observable,value", 12 significant digits.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);
TrajectoryRecord read_trajectory_csv(std::istream& is);

/// Quantities measured on a state at one time.
struct Snapshot {
  double t = 0.0;
  MatrixXc rdm;  // subsystem window
  double energy = 0.0;
  double norm = 1.0;
  std::optional<double> d_expect;
  std::vector<cplx> sigma_plus;
  std::optional<int> max_bond;
  std::optional<double> trunc_err;
};

/// Turns snapshots into trajectory rows: u1_asym, su2_asym, trace_dist,
/// energy, norm, d_expect, sigmap_re:<i>, sigmap_im:<i>, max_bond, trunc_err.
class ObservableRecorder {
 public:
  ObservableRecorder(int window_size, bool su2, std::optional<MatrixXc> thermal_rdm = std::nullopt);
  void record(TrajectoryRecord& rec, const Snapshot& s) const;

 private:
  ChargeDecomposition u1_;
  std::optional<ChargeDecomposition> su2_;
  std::optional<MatrixXc> thermal_;
};

/// First site of the centred window of `count` sites.
int central_window(int n, int count);

std::string format_number(double v);

}  // namespace qme
