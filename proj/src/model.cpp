#include "qme/model.hpp"

#include <cmath>
#include <limits>

#include "qme/error.hpp"

namespace qme {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::XyzFull:
      return "XYZ_full";
    case Variant::DEffective:
      return "D_effective";
    case Variant::DPlusField:
      return "D_plus_field";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "XYZ_full" || s == "xyz") return Variant::XyzFull;
  if (s == "D_effective" || s == "xxz" || s == "D") return Variant::DEffective;
  if (s == "D_plus_field") return Variant::DPlusField;
  throw ConfigError("unknown model variant '" + s + "'");
}

void ModelSpec::validate() const {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (n < 1) throw DomainError("site count must be >= 1");
}

std::array<double, 3> ModelSpec::axis_couplings() const {
  if (variant == Variant::XyzFull) return {jx, jy, jz};
  const double transverse = 0.5 * (jx + jy);
  return {transverse, transverse, jz};
}

double ModelSpec::field() const { return variant == Variant::DEffective ? 0.0 : hz; }

ModelSpec ModelSpec::prethermal_generator() const {
  ModelSpec d = *this;
  d.variant = Variant::DEffective;
  return d;
}

double kac_norm(double alpha, int n) {
  if (n < 2) throw DomainError("Kac norm undefined for fewer than two sites");
  // Ordered pairs at distance d: 2(N-d).
  double sum = 0.0;
  for (int d = n - 1; d >= 1; --d) sum += 2.0 * (n - d) * std::pow(static_cast<double>(d), -alpha);
  return sum / (n - 1);
}

CouplingTable build_coupling_table(const ModelSpec& spec) {
  spec.validate();
  CouplingTable table;
  table.axis_scale = spec.axis_couplings();
  table.field = spec.field();
  if (spec.n < 2) {
    table.norm = std::numeric_limits<double>::quiet_NaN();
    return table;
  }
  table.weights.assign(spec.n - 1, 0.0);
  if (spec.nearest_neighbor) {
    table.norm = 2.0;
    table.weights[0] = 0.5;
    return table;
  }
  table.norm = kac_norm(spec.alpha, spec.n);
  for (int d = 1; d < spec.n; ++d)
    table.weights[d - 1] = std::pow(static_cast<double>(d), -spec.alpha) / table.norm;
  return table;
}

double energy_density_tilted_product(double theta, double jx, double jz) {
  const double s = std::sin(2.0 * theta);
  const double c = std::cos(2.0 * theta);
  return 0.5 * (jx * s * s + jz * c * c);
}

double energy_density_tilted_neel(double phi, double alpha, double jx, double jz) {
  const double s = std::sin(2.0 * phi);
  const double c = std::cos(2.0 * phi);
  return std::pow(2.0, -(2.0 + alpha)) *
         (jx * s * s + jz * (1.0 + c * (c - 2.0 + std::pow(2.0, 1.0 + alpha))));
}

double normalized_energy_density(double e, double e_min, double e_max) {
  if (!(e_min < e_max)) throw DomainError("normalized energy density needs E_min < E_max");
  constexpr double tol = 1e-9;
  if (e < e_min - tol || e > e_max + tol)
    throw ConsistencyError("energy lies outside the supplied spectrum bounds");
  return (e - e_min) / (e_max - e_min);
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["jx"] = spec.jx;
  j["jy"] = spec.jy;
  j["jz"] = spec.jz;
  j["hz"] = spec.hz;
  if (spec.nearest_neighbor)
    j["alpha"] = "inf";
  else
    j["alpha"] = spec.alpha;
  j["n"] = spec.n;
  j["variant"] = to_string(spec.variant);
  j["boundary"] = "open";
  return j;
}

ModelSpec model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model block must be an object");
  ModelSpec spec;
  try {
    spec.jx = j.value("jx", spec.jx);
    spec.jy = j.value("jy", spec.jy);
    spec.jz = j.value("jz", spec.jz);
    spec.hz = j.value("hz", spec.hz);
    if (j.contains("alpha")) {
      const auto& a = j.at("alpha");
      if (a.is_string()) {
        if (a.get<std::string>() != "inf") throw ConfigError("alpha must be a number or \"inf\"");
        spec.nearest_neighbor = true;
        spec.alpha = std::numeric_limits<double>::infinity();
      } else {
        spec.alpha = a.get<double>();
      }
    }
    if (!j.contains("n")) throw ConfigError("model block needs 'n'");
    spec.n = j.at("n").get<int>();
    spec.variant = parse_variant(j.value("variant", std::string("XYZ_full")));
    if (j.value("boundary", std::string("open")) != "open")
      throw ConfigError("only open boundaries are supported");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model block: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

}  // namespace qme
