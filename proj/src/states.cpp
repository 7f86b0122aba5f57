#include "qme/states.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "qme/asymmetry.hpp"
#include "qme/error.hpp"

namespace qme {

std::string to_string(StateFamily f) {
  return f == StateFamily::TiltedProduct ? "tilted_product" : "tilted_neel";
}

StateFamily parse_family(const std::string& s) {
  if (s == "tilted_product" || s == "product") return StateFamily::TiltedProduct;
  if (s == "tilted_neel" || s == "neel") return StateFamily::TiltedNeel;
  throw ConfigError("unknown state family '" + s + "'");
}

void InitialStateSpec::validate() const {
  if (n < 1) throw DomainError("state needs at least one site");
  if (!(angle >= -1e-15 && angle <= std::numbers::pi / 2 + 1e-15))
    throw DomainError("tilt angle must lie in [0, pi/2]");
  if (family == StateFamily::TiltedNeel && n % 2 != 0)
    throw DomainError("tilted Neel state needs an even number of sites");
}

std::vector<Eigen::Vector2d> site_amplitudes(const InitialStateSpec& spec) {
  spec.validate();
  const Eigen::Vector2d up(1.0, 0.0);
  const Eigen::Vector2d tilted(std::cos(spec.angle), -std::sin(spec.angle));
  std::vector<Eigen::Vector2d> sites(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    if (spec.family == StateFamily::TiltedProduct)
      sites[i] = tilted;
    else
      sites[i] = (i % 2 == 0) ? up : tilted;
  }
  return sites;
}

VectorXc product_state_vector(const std::vector<Eigen::Vector2d>& sites) {
  const int n = static_cast<int>(sites.size());
  if (n > 30) throw ResourceError("dense product state limited to 30 sites");
  VectorXc psi(Eigen::Index{1} << n);
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    double amp = 1.0;
    for (int i = 0; i < n && amp != 0.0; ++i) amp *= sites[i]((x >> i) & 1);
    psi(x) = amp;
  }
  return psi;
}

VectorXc build_dense_state(const InitialStateSpec& spec) { return product_state_vector(site_amplitudes(spec)); }

VectorXc build_tilted_product(double theta, int n) {
  return build_dense_state({StateFamily::TiltedProduct, theta, n});
}

VectorXc build_tilted_neel(double phi, int n) { return build_dense_state({StateFamily::TiltedNeel, phi, n}); }

double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(c));
  if (s.empty()) throw ConfigError("empty angle");
  const auto pos = s.find("pi");
  try {
    if (pos == std::string::npos) return std::stod(s);
    std::string before = s.substr(0, pos);
    std::string after = s.substr(pos + 2);
    if (!before.empty() && before.back() == '*') before.pop_back();
    double value = std::numbers::pi;
    if (!before.empty()) value *= (before == "-" ? -1.0 : std::stod(before));
    if (!after.empty()) {
      if (after[0] == '/')
        value /= std::stod(after.substr(1));
      else if (after[0] == '*')
        value *= std::stod(after.substr(1));
      else
        throw ConfigError("cannot parse angle '" + text + "'");
    }
    return value;
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse angle '" + text + "'");
  }
}

double angle_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_angle(j.get<std::string>());
  throw ConfigError("angle must be a number or a string such as \"pi/4\"");
}

nlohmann::json to_json(const InitialStateSpec& spec) {
  return {{"family", to_string(spec.family)}, {"angle", spec.angle}, {"n", spec.n}};
}

InitialStateSpec state_from_json(const nlohmann::json& j, int default_n) {
  if (!j.is_object()) throw ConfigError("state entry must be an object");
  InitialStateSpec spec;
  try {
    spec.family = parse_family(j.value("family", std::string("tilted_product")));
    if (!j.contains("angle")) throw ConfigError("state entry needs 'angle'");
    spec.angle = angle_from_json(j.at("angle"));
    spec.n = j.contains("n") ? j.at("n").get<int>() : default_n;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("state entry: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

MonotonicityResult initial_asymmetry_monotonicity_check(StateFamily family, const std::vector<double>& angles,
                                                        int n_a, int n) {
  if (n < 0) n = n_a + (family == StateFamily::TiltedNeel && n_a % 2 ? 1 : 0);
  if (n_a < 1 || n_a > n) throw DomainError("subsystem must fit inside the chain");
  const ChargeDecomposition u1 = build_u1_projectors(n_a);
  MonotonicityResult res;
  for (double a : angles) {
    if (!(a >= 0.0 && a <= std::numbers::pi / 4 + 1e-15))
      throw DomainError("monotonicity check expects angles in [0, pi/4]");
    auto sites = site_amplitudes({family, a, n});
    sites.resize(n_a);
    const VectorXc psi = product_state_vector(sites);
    const MatrixXc rho = psi * psi.adjoint();
    const double s = entanglement_asymmetry(rho, u1);
    if (!res.asymmetry.empty() && s < res.asymmetry.back() - 1e-12) res.non_decreasing = false;
    res.asymmetry.push_back(s);
  }
  return res;
}

}  // namespace qme
