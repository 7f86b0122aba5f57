#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

namespace qme {

/// Hamiltonian family.
///  - XyzFull:    (1/N_kac) sum_{i<j} sum_nu J_nu |i-j|^-alpha s^nu_i s^nu_j + h_z sum_i s^z_i
///  - DEffective: the U(1)-symmetric prethermal generator, x/y couplings replaced
///                by (J_x + J_y)/2 and no field
///  - DPlusField: DEffective + h_z sum_i s^z_i
enum class Variant { XyzFull, DEffective, DPlusField };

enum class Boundary { Open };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ModelSpec {
  double jx = -1.0;
  double jy = -1.0;
  double jz = -0.75;
  double hz = 0.0;
  double alpha = 2.0;
  /// alpha -> infinity: only nearest-neighbour bonds with weight 1/2.
  bool nearest_neighbor = false;
  int n = 2;
  Variant variant = Variant::XyzFull;
  Boundary boundary = Boundary::Open;

  /// Throws DomainError on alpha < 0 or n < 1.
  void validate() const;

  /// Per-axis coupling scale after applying the variant rule.
  std::array<double, 3> axis_couplings() const;

  /// Field entering the Hamiltonian (0 for DEffective).
  double field() const;

  /// The D operator of this model: DEffective with the same couplings.
  ModelSpec prethermal_generator() const;
};

/// (1/(N-1)) sum_{i != j} |i-j|^-alpha over ordered pairs. DomainError for n < 2.
double kac_norm(double alpha, int n);

/// Normalised weights w(d) = 1/(N_kac d^alpha) for d = 1..N-1.
struct CouplingTable {
  double norm = 0.0;
  std::vector<double> weights;  // weights[d-1] = w(d)
  std::array<double, 3> axis_scale{};
  double field = 0.0;

  int sites() const { return static_cast<int>(weights.size()) + 1; }
  double weight(int distance) const { return weights.at(distance - 1); }
};

CouplingTable build_coupling_table(const ModelSpec& spec);

/// Thermodynamic-limit energy per site of the uniformly tilted product state
/// under the XXZ generator.
double energy_density_tilted_product(double theta, double jx, double jz);

/// Thermodynamic-limit energy per site of the tilted Neel state.
double energy_density_tilted_neel(double phi, double alpha, double jx, double jz);

/// (E - E_min)/(E_max - E_min). Values outside [0, 1] by more than 1e-9 in
/// energy are rejected with ConsistencyError rather than clamped.
double normalized_energy_density(double e, double e_min, double e_max);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

}  // namespace qme
