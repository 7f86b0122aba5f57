#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "qme/linalg.hpp"

namespace qme {

enum class StateFamily { TiltedProduct, TiltedNeel };

std::string to_string(StateFamily f);
StateFamily parse_family(const std::string& s);

struct InitialStateSpec {
  StateFamily family = StateFamily::TiltedProduct;
  double angle = 0.0;  // theta for products, phi for Neel states
  int n = 1;

  /// DomainError on angle outside [0, pi/2], n < 1 or odd n for Neel states.
  void validate() const;
};

/// Per-site amplitudes (up, down). Tilted products use exp(i theta sigma^y)|up>
/// = cos(theta)|up> - sin(theta)|down>; Neel states tilt every second site
/// starting from the second.
std::vector<Eigen::Vector2d> site_amplitudes(const InitialStateSpec& spec);

/// Dense vector of a product state, bit i of the index = site i (0 = up).
VectorXc product_state_vector(const std::vector<Eigen::Vector2d>& sites);

VectorXc build_dense_state(const InitialStateSpec& spec);
VectorXc build_tilted_product(double theta, int n);
VectorXc build_tilted_neel(double phi, int n);

/// Accepts plain numbers and multiples of pi: "pi/4", "3pi/8", "0.5*pi", "pi".
double parse_angle(const std::string& text);
double angle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const InitialStateSpec& spec);
/// Keys: family, angle, n (n may be supplied by the caller as a default).
InitialStateSpec state_from_json(const nlohmann::json& j, int default_n = -1);

struct MonotonicityResult {
  std::vector<double> asymmetry;  // U(1) asymmetry at t = 0, one per angle
  bool non_decreasing = true;
};

/// U(1) asymmetry of the first `n_a` sites of an `n`-site chain at t = 0 for
/// each angle in [0, pi/4], and whether the sequence is non-decreasing.
MonotonicityResult initial_asymmetry_monotonicity_check(StateFamily family,
                                                        const std::vector<double>& angles,
                                                        int n_a, int n = -1);

}  // namespace qme
