#pragma once

#include <cstdint>
#include <vector>

#include "qme/krylov.hpp"
#include "qme/mps.hpp"

namespace qme {

struct DmrgOptions {
  int chi_max = 200;
  /// Bond-dimension cap per sweep (capped by chi_max); empty gives the ramp
  /// 16, 32, 64, ... up to chi_max.
  std::vector<int> chi_schedule;
  double cutoff = 1e-14;
  int sweeps = 10;
  EigsOptions eigs{20, 300, 1e-14};
  int initial_chi = 8;
  std::uint64_t seed = 7;
  /// Converged when the last two sweep energies differ by less than this
  /// (relative to max(1, |E|)).
  double convergence_tol = 1e-9;
};

struct DmrgResult {
  Mps<double> state;
  double energy = 0.0;
  std::vector<double> sweep_energies;
  std::vector<int> sweep_max_bond;
  double max_discarded = 0.0;
  bool converged = false;
  /// Every local eigensolve of the last sweep met its tolerance.
  bool eigensolver_converged = false;
};

/// Two-site DMRG from a random real initial state (or `initial`).
DmrgResult dmrg_ground_state(const Mpo& mpo, const DmrgOptions& opts = {}, const Mps<double>* initial = nullptr);

}  // namespace qme
