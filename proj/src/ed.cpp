#include "qme/ed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qme/error.hpp"
#include "qme/krylov.hpp"

namespace qme {

namespace {

void check_cap(int n, int cap, const char* what) {
  if (n < 1) throw DomainError("chain needs at least one site");
  if (n > cap)
    throw ResourceError(std::string(what) + " limited to " + std::to_string(cap) + " sites (got " +
                        std::to_string(n) + ")");
}

double symmetry_defect(const SparseMatrixD& h) {
  const SparseMatrixD diff = h - SparseMatrixD(h.transpose());
  double m = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

SparseMatrixD build_sparse_hamiltonian(const CouplingTable& table, int n, const EdLimits& limits) {
  check_cap(n, limits.sparse_cap, "sparse Hamiltonian");
  if (n > 1 && table.sites() != n) throw DomainError("coupling table does not match the chain length");
  const Eigen::Index dim = Eigen::Index{1} << n;
  const double jx = table.axis_scale[0], jy = table.axis_scale[1], jz = table.axis_scale[2];
  const double h = table.field;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (1 + n * (n - 1) / 2));
  for (Eigen::Index x = 0; x < dim; ++x) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const double zi = ((x >> i) & 1) ? -1.0 : 1.0;
      diag += h * zi;
      for (int j = i + 1; j < n; ++j) {
        const double zj = ((x >> j) & 1) ? -1.0 : 1.0;
        const double w = table.weight(j - i);
        diag += w * jz * zi * zj;
        // sigma^x sigma^x + sigma^y sigma^y flips both spins with amplitude J_x - J_y z_i z_j.
        const double off = w * (jx - jy * zi * zj);
        if (off != 0.0) triplets.emplace_back(x ^ ((Eigen::Index{1} << i) | (Eigen::Index{1} << j)), x, off);
      }
    }
    if (diag != 0.0) triplets.emplace_back(x, x, diag);
  }
  SparseMatrixD out(dim, dim);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

SparseMatrixD build_sparse_hamiltonian(const ModelSpec& spec, const EdLimits& limits) {
  return build_sparse_hamiltonian(build_coupling_table(spec), spec.n, limits);
}

MatrixXd build_dense_hamiltonian(const CouplingTable& table, int n, const EdLimits& limits) {
  check_cap(n, limits.dense_cap, "dense Hamiltonian");
  return MatrixXd(build_sparse_hamiltonian(table, n, limits));
}

MatrixXd build_dense_hamiltonian(const ModelSpec& spec, const EdLimits& limits) {
  return build_dense_hamiltonian(build_coupling_table(spec), spec.n, limits);
}

void apply(const SparseMatrixD& h, const VectorXc& x, VectorXc& y) {
  y.resize(h.rows());
  for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
    cplx acc = 0.0;
    for (SparseMatrixD::InnerIterator it(h, r); it; ++it) acc += it.value() * x(it.col());
    y(r) = acc;
  }
}

double expectation(const SparseMatrixD& h, const VectorXc& psi) {
  VectorXc hp;
  apply(h, psi, hp);
  return psi.dot(hp).real() / psi.squaredNorm();
}

Spectrum diagonalize(const MatrixXd& h) {
  if (h.rows() != h.cols()) throw DomainError("Hamiltonian must be square");
  if (hermiticity_defect(h) > 1e-12) throw DomainError("Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw ConsistencyError("dense diagonalisation failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

std::pair<double, double> spectrum_bounds(const SparseMatrixD& h) {
  const Eigen::Index dim = h.rows();
  if (dim <= 64) {
    const Spectrum s = diagonalize(MatrixXd(h));
    return {s.values(0), s.values(dim - 1)};
  }
  EigsOptions opts;
  opts.max_dim = 40;
  opts.tol = 1e-12;
  VectorXd start = VectorXd::LinSpaced(dim, 1.0, 2.0);
  LinearMap<double> lower = [&](const VectorXd& x, VectorXd& y) { y.noalias() = h * x; };
  LinearMap<double> upper = [&](const VectorXd& x, VectorXd& y) { y.noalias() = -(h * x); };
  const auto lo = lowest_eigenpair<double>(lower, start, opts);
  const auto hi = lowest_eigenpair<double>(upper, start, opts);
  return {lo.value, -hi.value};
}

std::pair<double, double> spectrum_bounds(const ModelSpec& spec, const EdLimits& limits) {
  if (spec.n <= std::min(limits.dense_cap, 10)) {
    const Spectrum s = diagonalize(build_dense_hamiltonian(spec, limits));
    return {s.values(0), s.values(s.values.size() - 1)};
  }
  return spectrum_bounds(build_sparse_hamiltonian(spec, limits));
}

VectorXc evolve_spectral(const Spectrum& spec, const VectorXc& psi, double t) {
  const VectorXd re = spec.vectors.transpose() * psi.real();
  const VectorXd im = spec.vectors.transpose() * psi.imag();
  VectorXc c(re.size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c(k) = cplx(re(k), im(k)) * std::exp(cplx(0.0, -spec.values(k) * t));
  VectorXc out(psi.size());
  out.real() = spec.vectors * c.real();
  out.imag() = spec.vectors * c.imag();
  return out;
}

void evolve_exact(const VectorXc& psi0, const SparseMatrixD& h, const std::vector<double>& t_grid,
                  const std::function<void(double, const VectorXc&)>& observe, const Spectrum* spectral,
                  const EvolutionOptions& opts) {
  if (h.rows() != psi0.size()) throw DomainError("state and Hamiltonian dimensions differ");
  if (symmetry_defect(h) > 1e-12) throw DomainError("Hamiltonian is not Hermitian");
  if (spectral && spectral->values.size() != psi0.size())
    throw DomainError("spectral decomposition does not match the state");
  LinearMap<cplx> map = [&](const VectorXc& x, VectorXc& y) { apply(h, x, y); };
  KrylovOptions kopts;
  kopts.max_dim = opts.krylov_dim;
  kopts.tol = opts.krylov_tol;
  VectorXc psi = psi0;
  double t_prev = 0.0;
  for (double t : t_grid) {
    if (t < t_prev) throw DomainError("time grid must be ascending and non-negative");
    if (spectral)
      psi = evolve_spectral(*spectral, psi0, t);
    else if (t > t_prev)
      psi = expm_krylov(map, psi, t - t_prev, kopts);
    t_prev = t;
    observe(t, psi);
  }
}

MatrixXc reduced_density_matrix(const VectorXc& psi, int first, int count) {
  const Eigen::Index dim = psi.size();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw DomainError("state dimension is not a power of two");
  if (first < 0 || count < 1 || first + count > n) throw DomainError("window lies outside the chain");
  const Eigen::Index low = Eigen::Index{1} << first;
  const Eigen::Index mid = Eigen::Index{1} << count;
  const Eigen::Index high = dim / (low * mid);
  MatrixXc rho = MatrixXc::Zero(mid, mid);
  for (Eigen::Index b = 0; b < high; ++b) {
    Eigen::Map<const MatrixXc> m(psi.data() + b * low * mid, low, mid);
    rho.noalias() += m.transpose() * m.conjugate();
  }
  return rho;
}

cplx site_expectation(const VectorXc& psi, int site, const Eigen::Matrix2cd& op) {
  const Eigen::Index bit = Eigen::Index{1} << site;
  if (bit >= psi.size()) throw DomainError("site outside the chain");
  cplx acc = 0.0;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    const int s = (x & bit) ? 1 : 0;
    for (int sp = 0; sp < 2; ++sp) {
      const cplx c = op(sp, s);
      if (c == 0.0) continue;
      const Eigen::Index xp = sp ? (x | bit) : (x & ~bit);
      acc += std::conj(psi(xp)) * c * psi(x);
    }
  }
  return acc;
}

namespace {

VectorXd boltzmann_weights(const VectorXd& e, double beta) {
  const double shift = beta >= 0.0 ? e.minCoeff() : e.maxCoeff();
  VectorXd w = (-beta * (e.array() - shift)).exp().matrix();
  return w / w.sum();
}

}  // namespace

double thermal_energy(const VectorXd& energies, double beta) { return boltzmann_weights(energies, beta).dot(energies); }

ThermalState solve_effective_temperature(const Spectrum& spec, double energy, double tol) {
  const VectorXd& e = spec.values;
  const double e_min = e.minCoeff(), e_max = e.maxCoeff();
  if (!(energy > e_min && energy < e_max))
    throw DomainError("target energy lies outside the open spectral interval; no temperature solves it");
  ThermalState th;
  th.target_energy = energy;
  auto finish = [&](double beta) {
    th.beta = beta;
    th.weights = boltzmann_weights(e, beta);
    th.energy = th.weights.dot(e);
    th.residual = std::abs(th.energy - energy);
    return th;
  };
  const double u0 = e.mean();
  if (std::abs(u0 - energy) < tol) return finish(0.0);
  const double sign = energy < u0 ? 1.0 : -1.0;
  // f(b) = U(sign*b) - E changes sign once on b >= 0.
  auto f = [&](double b) { return sign * (thermal_energy(e, sign * b) - energy); };
  constexpr double kMaxBeta = 1e8;
  double lo = 0.0, hi = 1.0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxBeta) {
      th.saturated = true;
      return finish(sign * kMaxBeta);
    }
  }
  double best = hi, best_res = std::abs(f(hi));
  for (int it = 0; it < 500 && best_res >= tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (std::abs(fm) < best_res) {
      best_res = std::abs(fm);
      best = mid;
    }
    (fm > 0.0 ? lo : hi) = mid;
  }
  return finish(sign * best);
}

MatrixXc thermal_reduced_density_matrix(const Spectrum& spec, const ThermalState& th, int first, int count) {
  if (th.weights.size() != spec.values.size()) throw DomainError("thermal weights do not match the spectrum");
  const double pmax = th.weights.maxCoeff();
  MatrixXc rho;
  for (Eigen::Index k = 0; k < th.weights.size(); ++k) {
    const double p = th.weights(k);
    if (p < 1e-18 * pmax) continue;
    const VectorXc v = spec.vectors.col(k).cast<cplx>();
    MatrixXc r = reduced_density_matrix(v, first, count);
    if (rho.size() == 0) rho = MatrixXc::Zero(r.rows(), r.cols());
    rho += p * r;
  }
  return rho;
}

}  // namespace qme
