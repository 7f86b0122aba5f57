#include "qme/dmrg.hpp"

#include <algorithm>
#include <cmath>

#include "qme/error.hpp"

namespace qme {

namespace {

int sweep_chi(const DmrgOptions& opts, int sweep) {
  if (!opts.chi_schedule.empty()) {
    const int idx = std::min<int>(sweep, static_cast<int>(opts.chi_schedule.size()) - 1);
    return std::min(opts.chi_max, opts.chi_schedule[idx]);
  }
  const int ramp = sweep < 20 ? 16 << sweep : opts.chi_max;
  return std::min(opts.chi_max, ramp);
}

}  // namespace

DmrgResult dmrg_ground_state(const Mpo& mpo, const DmrgOptions& opts, const Mps<double>* initial) {
  const int n = mpo.n();
  if (n < 2) throw DomainError("DMRG needs at least two sites");
  DmrgResult res;
  res.state = initial ? *initial : Mps<double>::random(n, std::max(1, opts.initial_chi), opts.seed);
  if (res.state.n() != n) throw DomainError("initial state and operator lengths differ");
  Mps<double>& psi = res.state;
  psi.move_center(0);
  psi.normalize();
  EnvCache<double> env;
  env.build(psi, mpo);
  std::vector<LocalMpo> pair(n - 1);
  for (int i = 0; i + 1 < n; ++i) pair[i] = merge_sites(env.w[i], env.w[i + 1]);

  double energy = 0.0;
  for (int sweep = 0; sweep < std::max(1, opts.sweeps); ++sweep) {
    const Truncation trunc{sweep_chi(opts, sweep), opts.cutoff};
    bool all_converged = true;
    auto solve = [&](int i, bool move_right) {
      Tensor3<double> theta = merge_pair(psi.sites[i], psi.sites[i + 1]);
      Tensor3<double> in = theta, out;
      LinearMap<double> h = [&](const VectorXd& x, VectorXd& y) {
        in.data = x;
        apply_heff(env.left[i], pair[i], env.right[i + 1], in, out);
        y = out.data;
      };
      const auto eig = lowest_eigenpair<double>(h, theta.data, opts.eigs);
      all_converged = all_converged && eig.converged;
      energy = eig.value;
      theta.data = eig.vector;
      const SplitInfo info = split_pair(theta, move_right, trunc, psi.sites[i], psi.sites[i + 1]);
      res.max_discarded = std::max(res.max_discarded, info.discarded);
    };
    for (int i = 0; i + 1 < n; ++i) {
      solve(i, true);
      psi.center = i + 1;
      env.left[i + 1] = update_left_env(env.left[i], psi.sites[i], env.w[i]);
    }
    for (int i = n - 2; i >= 0; --i) {
      solve(i, false);
      psi.center = i;
      env.right[i] = update_right_env(env.right[i + 1], psi.sites[i + 1], env.w[i + 1]);
    }
    res.sweep_energies.push_back(energy);
    res.sweep_max_bond.push_back(psi.max_bond());
    res.eigensolver_converged = all_converged;
  }
  psi.normalize();
  res.energy = energy;
  const auto& e = res.sweep_energies;
  res.converged = e.size() >= 2 &&
                  std::abs(e[e.size() - 1] - e[e.size() - 2]) <= opts.convergence_tol * std::max(1.0, std::abs(energy));
  return res;
}

}  // namespace qme
