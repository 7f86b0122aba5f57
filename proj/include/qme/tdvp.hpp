#pragma once

#include <vector>

#include "qme/krylov.hpp"
#include "qme/mps.hpp"

namespace qme {

struct TdvpOptions {
  double dt = 0.05;
  int chi_max = 100;
  double cutoff = 1e-12;
  int krylov_dim = 10;
  double krylov_tol = 1e-12;
  /// Grow bonds with two-site sweeps until every bond holds
  /// min(chi_max, 2^min(b, N-b)) states, then switch to one-site sweeps.
  bool two_site_warmup = true;
};

/// Second-order symmetric TDVP integrator on a finite chain.
class Tdvp {
 public:
  Tdvp(Mps<cplx> state, const Mpo& h, const TdvpOptions& opts, double t0 = 0.0);

  /// Advances the state by one time step dt.
  void step();

  double time() const { return t_; }
  long steps() const { return steps_; }
  const Mps<cplx>& state() const { return psi_; }
  bool one_site() const { return one_site_; }
  /// <H> from the effective Hamiltonian at the orthogonality centre.
  double energy() const;
  double norm() const { return psi_.norm(); }
  /// Discarded weight summed over all truncations so far.
  double truncation_error() const { return discarded_; }
  /// Some truncation was forced by chi_max above the cutoff, or the one-site
  /// phase started with a bond capped at chi_max.
  bool saturation_warning() const { return saturated_; }
  KrylovStats krylov_stats() const { return stats_; }

 private:
  void sweep_two_site(double half);
  void sweep_one_site(double half);
  void evolve_site(int i, double tau);
  void check_saturation();

  Mps<cplx> psi_;
  EnvCache<cplx> env_;
  std::vector<LocalMpo> pair_;
  TdvpOptions opts_;
  double t_ = 0.0;
  long steps_ = 0;
  bool one_site_ = false;
  double discarded_ = 0.0;
  bool saturated_ = false;
  std::vector<double> smallest_kept_;  // relative weight of the last kept Schmidt value per bond
  KrylovStats stats_;
};

}  // namespace qme
