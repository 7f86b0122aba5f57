#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "qme/model.hpp"

namespace qme {

/// f(n) = sum_k a_k exp(b_k n) approximating 1/(n+1)^alpha on n in [0, N-2].
struct ExponentialFit {
  double alpha = 0.0;
  int n = 0;  // chain length the fit domain was built for
  std::vector<double> amplitudes;  // a_k
  std::vector<double> rates;       // b_k < 0; -inf marks a pure nearest-neighbour channel
  double sup_residual = 0.0;
  double rms_residual = 0.0;
  bool warning = false;  // sup residual above the warn threshold

  int terms() const { return static_cast<int>(amplitudes.size()); }
  double evaluate(double x) const;
  /// exp(b_k), the per-site transfer weight of channel k.
  double decay(int k) const;

  /// One channel with f(0) = 1 and f(n > 0) = 0.
  static ExponentialFit nearest_neighbor(int n);
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double best_sup) : std::runtime_error(what), best_sup_(best_sup) {}
  double best_sup_residual() const { return best_sup_; }

 private:
  double best_sup_;
};

struct FitOptions {
  double warn_sup = 1e-3;
  double fail_sup = 1e-2;
};

/// Least-squares fit of a K-term exponential sum to arbitrary samples
/// target[n], n = 0..size-1. Decay rates start log-spaced in [1/size, 1],
/// amplitudes come from a linear solve at fixed rates, then all parameters
/// are refined jointly. The K-term result is the best (in sup norm) of a
/// fresh fit and the extension of the (K-1)-term fit, so the recorded sup
/// residual is non-increasing in K.
ExponentialFit fit_exponential_sum(std::span<const double> target, int terms,
                                   const FitOptions& opts = {});

/// Fit to 1/d^alpha for d = 1..N-1 placed on n = d-1.
ExponentialFit fit_power_law(double alpha, int n, int terms, const FitOptions& opts = {});

/// Sparse site tensor of a matrix-product operator. Entry (row, col) holds the
/// 2x2 operator op(s', s) acting ket s -> s'. All operators are real: the y
/// channels carry i*sigma^y with the coupling sign flipped.
struct MpoEntry {
  int row = 0;
  int col = 0;
  Eigen::Matrix2d op;
};

struct MpoSite {
  int dl = 1;
  int dr = 1;
  std::vector<MpoEntry> entries;
};

struct Mpo {
  std::vector<MpoSite> sites;
  int n() const { return static_cast<int>(sites.size()); }
  /// Largest internal bond dimension.
  int bond_dimension() const;
};

/// Operator reproducing sum_{i<j} sum_nu (J_nu/N_kac) f(|i-j|-1) s^nu_i s^nu_j + h sum_i s^z_i
/// with bulk bond dimension 2 + 3K. Uses the variant rules of ModelSpec.
/// `spec.nearest_neighbor` ignores `fit` and uses a single zero-decay channel.
Mpo assemble_longrange_mpo(const ExponentialFit& fit, const ModelSpec& spec);

/// Convenience: K-term fit on the chain length of `spec` followed by assembly.
Mpo build_model_mpo(const ModelSpec& spec, int terms = 8);

/// Couplings w(d) = f(d-1)/N_kac for building dense reference operators.
CouplingTable fitted_coupling_table(const ExponentialFit& fit, const ModelSpec& spec);

/// Dense contraction of an MPO (small N only). Basis index bit i = site i.
Eigen::MatrixXd mpo_to_dense(const Mpo& mpo);

struct FidelityReport {
  std::vector<double> distance_error;  // |f(d-1) - d^-alpha|, index d-1
  std::vector<int> flagged;            // distances above threshold
  double max_error = 0.0;
  double threshold = 0.0;
  /// sum_d err(d) * (N-d)/N * sum_nu |J_nu| / N_kac
  double energy_bound_per_site = 0.0;
};

FidelityReport mpo_fidelity_report(const ExponentialFit& fit, const ModelSpec& spec,
                                   double threshold = 1e-4);

void write_fit_table(std::ostream& os, const ExponentialFit& fit);
ExponentialFit read_fit_table(std::istream& is);

}  // namespace qme
