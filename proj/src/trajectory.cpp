#include "qme/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "qme/error.hpp"

namespace qme {

void TrajectoryRecord::append(double t, const std::vector<std::pair<std::string, double>>& values) {
  const std::size_t idx = times.size();
  times.push_back(t);
  for (const auto& [name, v] : values) {
    auto [it, inserted] = series.try_emplace(name);
    if (inserted) names.push_back(name);
    // Series that skipped earlier samples are padded with NaN.
    it->second.resize(idx, std::numeric_limits<double>::quiet_NaN());
    it->second.push_back(v);
  }
}

const std::vector<double>& TrajectoryRecord::get(const std::string& name) const {
  auto it = series.find(name);
  if (it == series.end()) throw DomainError("trajectory has no observable '" + name + "'");
  return it->second;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "t,observable,value\n";
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    const std::string t = format_number(rec.times[k]);
    for (const auto& name : rec.names) {
      const auto& s = rec.series.at(name);
      if (k < s.size() && !std::isnan(s[k])) os << t << ',' << name << ',' << format_number(s[k]) << '\n';
    }
  }
}

TrajectoryRecord read_trajectory_csv(std::istream& is) {
  TrajectoryRecord rec;
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,observable,value", 0) != 0)
    throw ConfigError("trajectory CSV header missing");
  std::vector<std::pair<std::string, double>> row;
  double current = std::numeric_limits<double>::quiet_NaN();
  auto flush = [&] {
    if (!row.empty()) rec.append(current, row);
    row.clear();
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) throw ConfigError("malformed trajectory row: " + line);
    const double t = std::stod(line.substr(0, a));
    if (t != current) {
      flush();
      current = t;
    }
    row.emplace_back(line.substr(a + 1, b - a - 1), std::stod(line.substr(b + 1)));
  }
  flush();
  return rec;
}

ObservableRecorder::ObservableRecorder(int window_size, bool su2, std::optional<MatrixXc> thermal_rdm)
    : u1_(build_u1_projectors(window_size)), thermal_(std::move(thermal_rdm)) {
  if (su2) su2_ = build_su2_projectors(window_size);
  if (thermal_ && thermal_->rows() != (1 << window_size))
    throw DomainError("thermal reference does not match the subsystem window");
}

void ObservableRecorder::record(TrajectoryRecord& rec, const Snapshot& s) const {
  std::vector<std::pair<std::string, double>> row;
  row.emplace_back("u1_asym", entanglement_asymmetry(s.rdm, u1_));
  if (su2_) row.emplace_back("su2_asym", entanglement_asymmetry(s.rdm, *su2_));
  if (thermal_) row.emplace_back("trace_dist", trace_distance(s.rdm, *thermal_));
  row.emplace_back("energy", s.energy);
  row.emplace_back("norm", s.norm);
  if (s.d_expect) row.emplace_back("d_expect", *s.d_expect);
  for (std::size_t i = 0; i < s.sigma_plus.size(); ++i) {
    row.emplace_back("sigmap_re:" + std::to_string(i), s.sigma_plus[i].real());
    row.emplace_back("sigmap_im:" + std::to_string(i), s.sigma_plus[i].imag());
  }
  if (s.max_bond) row.emplace_back("max_bond", *s.max_bond);
  if (s.trunc_err) row.emplace_back("trunc_err", *s.trunc_err);
  rec.append(s.t, row);
}

int central_window(int n, int count) {
  if (count > n) throw DomainError("window larger than the chain");
  return (n - count) / 2;
}

}  // namespace qme
