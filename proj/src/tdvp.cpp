#include "qme/tdvp.hpp"

#include <algorithm>

#include "qme/error.hpp"

namespace qme {

Tdvp::Tdvp(Mps<cplx> state, const Mpo& h, const TdvpOptions& opts, double t0)
    : psi_(std::move(state)), opts_(opts), t_(t0) {
  if (psi_.n() != h.n()) throw DomainError("state and Hamiltonian lengths differ");
  if (!(opts_.dt > 0.0)) throw DomainError("time step must be positive");
  psi_.move_center(0);
  env_.build(psi_, h);
  for (int i = 0; i + 1 < psi_.n(); ++i) pair_.push_back(merge_sites(env_.w[i], env_.w[i + 1]));
  one_site_ = !opts_.two_site_warmup;
  smallest_kept_.assign(psi_.n() + 1, 0.0);
  check_saturation();
}

void Tdvp::check_saturation() {
  if (one_site_) return;
  const int n = psi_.n();
  for (int b = 1; b < n; ++b) {
    const int e = std::min(b, n - b);
    const int full = e >= 30 ? opts_.chi_max : std::min(opts_.chi_max, 1 << e);
    if (psi_.bond_dim(b) < full) return;
  }
  one_site_ = true;
  // Bonds frozen at chi_max while still carrying weight above the cutoff.
  for (int b = 1; b < n; ++b) {
    const int e = std::min(b, n - b);
    if ((e >= 30 || opts_.chi_max < (1 << e)) && psi_.bond_dim(b) == opts_.chi_max &&
        smallest_kept_[b] > opts_.cutoff)
      saturated_ = true;
  }
}

void Tdvp::evolve_site(int i, double tau) {
  Tensor3<cplx>& a = psi_.sites[i];
  Tensor3<cplx> in = a, out;
  LinearMap<cplx> h = [&](const VectorXc& x, VectorXc& y) {
    in.data = x;
    apply_heff(env_.left[i], env_.w[i], env_.right[i], in, out);
    y = out.data;
  };
  KrylovOptions k{opts_.krylov_dim, opts_.krylov_tol};
  a.data = expm_krylov(h, a.data, tau, k, &stats_);
}

void Tdvp::sweep_one_site(double half) {
  const int n = psi_.n();
  KrylovOptions k{opts_.krylov_dim, opts_.krylov_tol};
  auto evolve_bond = [&](const Env<cplx>& l, const Env<cplx>& r, Mat<cplx>& c) {
    LinearMap<cplx> h = [&](const VectorXc& x, VectorXc& y) {
      Mat<cplx> in = Eigen::Map<const Mat<cplx>>(x.data(), c.rows(), c.cols()), out;
      apply_heff0(l, r, in, out);
      y = Eigen::Map<const VectorXc>(out.data(), out.size());
    };
    VectorXc v = Eigen::Map<const VectorXc>(c.data(), c.size());
    v = expm_krylov(h, v, -half, k, &stats_);
    c = Eigen::Map<const Mat<cplx>>(v.data(), c.rows(), c.cols());
  };
  for (int i = 0; i < n; ++i) {
    evolve_site(i, half);
    if (i == n - 1) break;
    Tensor3<cplx>& a = psi_.sites[i];
    Eigen::HouseholderQR<Mat<cplx>> qr(a.left());
    const Eigen::Index rows = a.left().rows(), k_dim = std::min<Eigen::Index>(rows, a.dr);
    Mat<cplx> q = qr.householderQ() * Mat<cplx>::Identity(rows, k_dim);
    Mat<cplx> r = qr.matrixQR().topRows(k_dim).template triangularView<Eigen::Upper>();
    Tensor3<cplx> na(a.dl, a.d, static_cast<int>(k_dim));
    na.left() = q;
    a = std::move(na);
    env_.left[i + 1] = update_left_env(env_.left[i], a, env_.w[i]);
    evolve_bond(env_.left[i + 1], env_.right[i], r);
    Tensor3<cplx>& b = psi_.sites[i + 1];
    Tensor3<cplx> nb(static_cast<int>(k_dim), b.d, b.dr);
    nb.right().noalias() = r * b.right();
    b = std::move(nb);
    psi_.center = i + 1;
  }
  for (int i = n - 1; i >= 0; --i) {
    evolve_site(i, half);
    if (i == 0) break;
    Tensor3<cplx>& b = psi_.sites[i];
    const Eigen::Index rows = Eigen::Index{b.d} * b.dr, k_dim = std::min<Eigen::Index>(rows, b.dl);
    Eigen::HouseholderQR<Mat<cplx>> qr(b.right().transpose());
    Mat<cplx> q = qr.householderQ() * Mat<cplx>::Identity(rows, k_dim);
    Mat<cplx> r = qr.matrixQR().topRows(k_dim).template triangularView<Eigen::Upper>();
    Tensor3<cplx> nb(static_cast<int>(k_dim), b.d, b.dr);
    nb.right() = q.transpose();
    b = std::move(nb);
    env_.right[i - 1] = update_right_env(env_.right[i], b, env_.w[i]);
    // Bond matrix C with psi = ... A_{i-1} C B_i ...
    Mat<cplx> c = r.transpose();
    evolve_bond(env_.left[i], env_.right[i - 1], c);
    Tensor3<cplx>& a = psi_.sites[i - 1];
    Tensor3<cplx> na(a.dl, a.d, static_cast<int>(k_dim));
    na.left().noalias() = a.left() * c;
    a = std::move(na);
    psi_.center = i - 1;
  }
}

void Tdvp::sweep_two_site(double half) {
  const int n = psi_.n();
  const Truncation trunc{opts_.chi_max, opts_.cutoff};
  KrylovOptions k{opts_.krylov_dim, opts_.krylov_tol};
  auto evolve_pair = [&](int i, bool move_right) {
    Tensor3<cplx> theta = merge_pair(psi_.sites[i], psi_.sites[i + 1]);
    Tensor3<cplx> in = theta, out;
    LinearMap<cplx> h = [&](const VectorXc& x, VectorXc& y) {
      in.data = x;
      apply_heff(env_.left[i], pair_[i], env_.right[i + 1], in, out);
      y = out.data;
    };
    theta.data = expm_krylov(h, theta.data, half, k, &stats_);
    VectorXd sv;
    const SplitInfo info = split_pair(theta, move_right, trunc, psi_.sites[i], psi_.sites[i + 1], &sv);
    smallest_kept_[i + 1] = sv.size() > 0 ? sv(sv.size() - 1) * sv(sv.size() - 1) / sv.squaredNorm() : 0.0;
    discarded_ += info.discarded;
    saturated_ = saturated_ || info.chi_limited;
  };
  for (int i = 0; i + 1 < n; ++i) {
    evolve_pair(i, true);
    psi_.center = i + 1;
    env_.left[i + 1] = update_left_env(env_.left[i], psi_.sites[i], env_.w[i]);
    if (i + 2 < n) evolve_site(i + 1, -half);
  }
  for (int i = n - 2; i >= 0; --i) {
    evolve_pair(i, false);
    psi_.center = i;
    env_.right[i] = update_right_env(env_.right[i + 1], psi_.sites[i + 1], env_.w[i + 1]);
    if (i > 0) evolve_site(i, -half);
  }
}

void Tdvp::step() {
  const double half = 0.5 * opts_.dt;
  if (psi_.n() == 1) {
    evolve_site(0, opts_.dt);
  } else if (one_site_) {
    sweep_one_site(half);
  } else {
    sweep_two_site(half);
    check_saturation();
  }
  t_ += opts_.dt;
  ++steps_;
}

double Tdvp::energy() const {
  const int c = psi_.center;
  const Tensor3<cplx>& a = psi_.sites[c];
  Tensor3<cplx> out;
  apply_heff(env_.left[c], env_.w[c], env_.right[c], a, out);
  return std::real(a.data.dot(out.data)) / a.data.squaredNorm();
}

}  // namespace qme
