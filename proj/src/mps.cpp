#include "qme/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "qme/error.hpp"

namespace qme {

namespace {

template <typename T>
using MapMat = Eigen::Map<Mat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const Mat<T>>;

template <typename T>
void qr_right(Mps<T>& m, int i) {
  Tensor3<T>& a = m.sites[i];
  const Eigen::Index rows = Eigen::Index{a.dl} * a.d, cols = a.dr;
  const Eigen::Index k = std::min(rows, cols);
  Eigen::HouseholderQR<Mat<T>> qr(a.left());
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(rows, k);
  Mat<T> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  Tensor3<T> na(a.dl, a.d, static_cast<int>(k));
  na.left() = q;
  Tensor3<T>& b = m.sites[i + 1];
  Tensor3<T> nb(static_cast<int>(k), b.d, b.dr);
  nb.right().noalias() = r * b.right();
  a = std::move(na);
  b = std::move(nb);
}

template <typename T>
void lq_left(Mps<T>& m, int i) {
  Tensor3<T>& b = m.sites[i];
  const Eigen::Index rows = Eigen::Index{b.d} * b.dr, cols = b.dl;
  const Eigen::Index k = std::min(rows, cols);
  Eigen::HouseholderQR<Mat<T>> qr(b.right().transpose());
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(rows, k);
  Mat<T> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  Tensor3<T> nb(static_cast<int>(k), b.d, b.dr);
  nb.right() = q.transpose();
  Tensor3<T>& a = m.sites[i - 1];
  Tensor3<T> na(a.dl, a.d, static_cast<int>(k));
  na.left().noalias() = a.left() * r.transpose();
  a = std::move(na);
  b = std::move(nb);
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_identity_multiple(const MatrixXd& op) {
  const double c = op(0, 0);
  return (op - c * MatrixXd::Identity(op.rows(), op.cols())).cwiseAbs().maxCoeff() == 0.0;
}

// Y += op acting on the physical index of X, both (dl*d x dr) with row l + dl*s.
template <typename T>
void accumulate_op(Mat<T>& y, const Mat<T>& x, const LocalMpo::Entry& e, int dl, int d) {
  if (e.identity_multiple) {
    const double c = e.op(0, 0);
    if (c != 0.0) y.noalias() += c * x;
    return;
  }
  for (int sp = 0; sp < d; ++sp)
    for (int s = 0; s < d; ++s) {
      const double c = e.op(sp, s);
      if (c != 0.0) y.middleRows(Eigen::Index{sp} * dl, dl).noalias() += c * x.middleRows(Eigen::Index{s} * dl, dl);
    }
}

}  // namespace

template <typename T>
int Mps<T>::bond_dim(int b) const {
  if (b <= 0 || b >= n()) return 1;
  return sites[b].dl;
}

template <typename T>
int Mps<T>::max_bond() const {
  int m = 1;
  for (int b = 1; b < n(); ++b) m = std::max(m, bond_dim(b));
  return m;
}

template <typename T>
Mps<T> Mps<T>::product(const std::vector<Eigen::Vector2d>& amplitudes) {
  Mps<T> m;
  for (const auto& a : amplitudes) {
    const double nrm = a.norm();
    if (nrm == 0.0) throw DomainError("product state site has zero norm");
    Tensor3<T> t(1, 2, 1);
    t.data(0) = a(0) / nrm;
    t.data(1) = a(1) / nrm;
    m.sites.push_back(std::move(t));
  }
  m.center = 0;
  return m;
}

template <typename T>
Mps<T> Mps<T>::random(int n, int chi, std::uint64_t seed) {
  if (n < 1) throw DomainError("state needs at least one site");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto dim = [&](int b) {
    const int e = std::min(b, n - b);
    return e >= 20 ? chi : std::min(chi, 1 << e);
  };
  Mps<T> m;
  for (int i = 0; i < n; ++i) {
    Tensor3<T> t(dim(i), 2, dim(i + 1));
    for (Eigen::Index k = 0; k < t.data.size(); ++k) {
      if constexpr (std::is_same_v<T, double>)
        t.data(k) = gauss(rng);
      else
        t.data(k) = T(gauss(rng), gauss(rng));
    }
    m.sites.push_back(std::move(t));
  }
  m.center = n - 1;
  m.canonicalize(0);
  m.normalize();
  return m;
}

template <typename T>
void Mps<T>::canonicalize(int c) {
  if (c < 0 || c >= n()) throw DomainError("centre outside the chain");
  for (int i = 0; i < c; ++i) qr_right(*this, i);
  for (int i = n() - 1; i > c; --i) lq_left(*this, i);
  center = c;
}

template <typename T>
void Mps<T>::move_center(int to) {
  if (to < 0 || to >= n()) throw DomainError("centre outside the chain");
  while (center < to) qr_right(*this, center++);
  while (center > to) lq_left(*this, center--);
}

template <typename T>
double Mps<T>::norm() const {
  return sites[center].data.norm();
}

template <typename T>
void Mps<T>::normalize() {
  const double nrm = norm();
  if (nrm == 0.0) throw ConsistencyError("state has zero norm");
  sites[center].data /= nrm;
}

template <typename T>
T Mps<T>::overlap(const Mps& other) const {
  if (n() != other.n()) throw DomainError("overlap of states with different lengths");
  Mat<T> e = Mat<T>::Ones(1, 1);
  for (int i = 0; i < n(); ++i) {
    const Tensor3<T>& a = sites[i];
    const Tensor3<T>& b = other.sites[i];
    Mat<T> t(Eigen::Index{a.dl} * a.d, b.dr);
    MapMat<T>(t.data(), a.dl, Eigen::Index{b.d} * b.dr).noalias() = e * b.right();
    e = a.left().adjoint() * t;
  }
  return e(0, 0);
}

template <typename T>
Vec<T> Mps<T>::to_dense() const {
  if (n() > 24) throw ResourceError("dense MPS contraction limited to 24 sites");
  Mat<T> psi = Mat<T>::Ones(1, 1);
  for (int i = 0; i < n(); ++i) {
    const Tensor3<T>& a = sites[i];
    const Eigen::Index rows = psi.rows();
    Mat<T> next(rows * 2, a.dr);
    for (int s = 0; s < 2; ++s) {
      Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>> slice(a.data.data() + a.dl * s, a.dl, a.dr,
                                                               Eigen::OuterStride<>(a.dl * a.d));
      next.middleRows(s * rows, rows).noalias() = psi * slice;
    }
    psi = std::move(next);
  }
  return psi.col(0);
}

template <typename T>
Mps<cplx> to_complex(const Mps<T>& m) {
  Mps<cplx> out;
  out.center = m.center;
  for (const auto& t : m.sites) {
    Tensor3<cplx> c(t.dl, t.d, t.dr);
    c.data = t.data.template cast<cplx>();
    out.sites.push_back(std::move(c));
  }
  return out;
}

template <typename T>
double gauge_defect(const Mps<T>& m) {
  double worst = 0.0;
  for (int i = 0; i < m.n(); ++i) {
    const Tensor3<T>& a = m.sites[i];
    if (i < m.center) {
      const Mat<T> g = a.left().adjoint() * a.left();
      worst = std::max(worst, (g - Mat<T>::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    } else if (i > m.center) {
      const Mat<T> g = a.right() * a.right().adjoint();
      worst = std::max(worst, (g - Mat<T>::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

LocalMpo to_local(const MpoSite& w) {
  LocalMpo out;
  out.dl = w.dl;
  out.dr = w.dr;
  out.d = 2;
  for (const auto& e : w.entries) {
    MatrixXd op = e.op;
    out.entries.push_back({e.row, e.col, op, is_identity_multiple(op)});
  }
  return out;
}

LocalMpo merge_sites(const LocalMpo& a, const LocalMpo& b) {
  if (a.dr != b.dl) throw DomainError("MPO bond mismatch");
  std::map<std::pair<int, int>, MatrixXd> acc;
  for (const auto& ea : a.entries)
    for (const auto& eb : b.entries) {
      if (ea.col != eb.row) continue;
      MatrixXd op = kron(eb.op, ea.op);
      auto [it, inserted] = acc.try_emplace({ea.row, eb.col}, op);
      if (!inserted) it->second += op;
    }
  LocalMpo out;
  out.dl = a.dl;
  out.dr = b.dr;
  out.d = a.d * b.d;
  for (auto& [key, op] : acc) {
    if (op.cwiseAbs().maxCoeff() == 0.0) continue;
    out.entries.push_back({key.first, key.second, op, is_identity_multiple(op)});
  }
  return out;
}

template <typename T>
Env<T> boundary_env() {
  return {Mat<T>::Ones(1, 1)};
}

template <typename T>
Env<T> update_left_env(const Env<T>& l, const Tensor3<T>& a, const LocalMpo& w) {
  const int dl = a.dl, d = a.d, dr = a.dr;
  std::vector<Mat<T>> t(w.dl), y(w.dr);
  for (const auto& e : w.entries) {
    if (t[e.row].size() == 0) {
      t[e.row].resize(Eigen::Index{dl} * d, dr);
      MapMat<T>(t[e.row].data(), dl, Eigen::Index{d} * dr).noalias() = l[e.row] * a.right();
    }
    if (y[e.col].size() == 0) y[e.col] = Mat<T>::Zero(Eigen::Index{dl} * d, dr);
    accumulate_op(y[e.col], t[e.row], e, dl, d);
  }
  Env<T> out(w.dr);
  for (int c = 0; c < w.dr; ++c) {
    if (y[c].size() == 0)
      out[c] = Mat<T>::Zero(dr, dr);
    else
      out[c].noalias() = a.left().adjoint() * y[c];
  }
  return out;
}

template <typename T>
Env<T> update_right_env(const Env<T>& r, const Tensor3<T>& b, const LocalMpo& w) {
  const int dl = b.dl, d = b.d, dr = b.dr;
  std::vector<Mat<T>> t(w.dr), y(w.dl);
  for (const auto& e : w.entries) {
    if (t[e.col].size() == 0) t[e.col].noalias() = b.left() * r[e.col].transpose();
    if (y[e.row].size() == 0) y[e.row] = Mat<T>::Zero(Eigen::Index{dl} * d, dr);
    accumulate_op(y[e.row], t[e.col], e, dl, d);
  }
  Env<T> out(w.dl);
  for (int c = 0; c < w.dl; ++c) {
    if (y[c].size() == 0)
      out[c] = Mat<T>::Zero(dl, dl);
    else
      out[c].noalias() = b.right().conjugate() * CMapMat<T>(y[c].data(), dl, Eigen::Index{d} * dr).transpose();
  }
  return out;
}

template <typename T>
void apply_heff(const Env<T>& l, const LocalMpo& w, const Env<T>& r, const Tensor3<T>& in, Tensor3<T>& out) {
  const int dl = in.dl, d = in.d, dr = in.dr;
  std::vector<Mat<T>> x(w.dr), y(w.dl);
  for (const auto& e : w.entries) {
    if (x[e.col].size() == 0) x[e.col].noalias() = in.left() * r[e.col].transpose();
    if (y[e.row].size() == 0) y[e.row] = Mat<T>::Zero(Eigen::Index{dl} * d, dr);
    accumulate_op(y[e.row], x[e.col], e, dl, d);
  }
  if (out.dl != dl || out.d != d || out.dr != dr) out = Tensor3<T>(dl, d, dr);
  auto o = out.right();
  o.setZero();
  for (int c = 0; c < w.dl; ++c)
    if (y[c].size() != 0) o.noalias() += l[c] * CMapMat<T>(y[c].data(), dl, Eigen::Index{d} * dr);
}

template <typename T>
void apply_heff0(const Env<T>& l, const Env<T>& r, const Mat<T>& in, Mat<T>& out) {
  out = Mat<T>::Zero(in.rows(), in.cols());
  Mat<T> tmp;
  for (std::size_t w = 0; w < l.size(); ++w) {
    tmp.noalias() = in * r[w].transpose();
    out.noalias() += l[w] * tmp;
  }
}

template <typename T>
void EnvCache<T>::build(const Mps<T>& m, const Mpo& mpo) {
  const int n = m.n();
  if (mpo.n() != n) throw DomainError("state and operator lengths differ");
  w.clear();
  for (const auto& s : mpo.sites) w.push_back(to_local(s));
  left.assign(n, {});
  right.assign(n, {});
  left[0] = boundary_env<T>();
  right[n - 1] = boundary_env<T>();
  for (int i = 0; i < m.center; ++i) left[i + 1] = update_left_env(left[i], m.sites[i], w[i]);
  for (int i = n - 1; i > m.center; --i) right[i - 1] = update_right_env(right[i], m.sites[i], w[i]);
}

template <typename T>
double mpo_expectation(const Mps<T>& m, const Mpo& mpo) {
  if (mpo.n() != m.n()) throw DomainError("state and operator lengths differ");
  Env<T> e = boundary_env<T>();
  for (int i = 0; i < m.n(); ++i) e = update_left_env(e, m.sites[i], to_local(mpo.sites[i]));
  const double nrm2 = std::real(m.overlap(m));
  return std::real(e[0](0, 0)) / nrm2;
}

template <typename T>
Tensor3<T> merge_pair(const Tensor3<T>& a, const Tensor3<T>& b) {
  Tensor3<T> theta(a.dl, a.d * b.d, b.dr);
  MapMat<T>(theta.data.data(), Eigen::Index{a.dl} * a.d, Eigen::Index{b.d} * b.dr).noalias() = a.left() * b.right();
  return theta;
}

template <typename T>
SplitInfo split_pair(const Tensor3<T>& theta, bool move_right, const Truncation& trunc, Tensor3<T>& a,
                     Tensor3<T>& b, VectorXd* singular_values) {
  const int dl = theta.dl, dr = theta.dr;
  if (theta.d != 4) throw DomainError("split expects a merged pair");
  CMapMat<T> mat(theta.data.data(), Eigen::Index{dl} * 2, Eigen::Index{2} * dr);
  Eigen::BDCSVD<Mat<T>> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  VectorXd s = svd.singularValues();
  const double total = s.squaredNorm();
  SplitInfo info;
  int keep = static_cast<int>(s.size());
  if (total > 0.0) {
    double tail = 0.0;
    while (keep > 1 && tail + s(keep - 1) * s(keep - 1) <= trunc.cutoff * total) {
      tail += s(keep - 1) * s(keep - 1);
      --keep;
    }
  } else {
    keep = 1;
  }
  if (keep > trunc.chi_max) {
    keep = std::max(1, trunc.chi_max);
    info.chi_limited = true;
  }
  double kept_weight = s.head(keep).squaredNorm();
  info.discarded = total > 0.0 ? std::max(0.0, 1.0 - kept_weight / total) : 0.0;
  if (info.chi_limited && info.discarded <= trunc.cutoff) info.chi_limited = false;
  info.kept = keep;
  // Rescale so the norm is unchanged by truncation.
  VectorXd sk = s.head(keep);
  if (kept_weight > 0.0) sk *= std::sqrt(total / kept_weight);
  a = Tensor3<T>(dl, 2, keep);
  b = Tensor3<T>(keep, 2, dr);
  if (move_right) {
    a.left() = svd.matrixU().leftCols(keep);
    b.right().noalias() = sk.asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
  } else {
    a.left().noalias() = svd.matrixU().leftCols(keep) * sk.asDiagonal();
    b.right() = svd.matrixV().leftCols(keep).adjoint();
  }
  if (singular_values) *singular_values = sk;
  return info;
}

template <typename T>
EntanglementData entanglement_entropy(const Mps<T>& m, int bond) {
  if (bond < 1 || bond >= m.n()) throw DomainError("bond outside [1, N-1]");
  Mps<T> c = m;
  c.move_center(bond);
  const Tensor3<T>& t = c.sites[bond];
  Eigen::BDCSVD<Mat<T>> svd(t.right());
  VectorXd p = svd.singularValues().array().square().matrix();
  p /= p.sum();
  EntanglementData e;
  e.bond = bond;
  e.spectrum.assign(p.data(), p.data() + p.size());
  std::sort(e.spectrum.begin(), e.spectrum.end(), std::greater<>());
  e.entropy = entropy_of_spectrum(p);
  return e;
}

int comparison_bond(int n, int partner_n, bool shift_correction) {
  const int b = n / 2;
  const int pb = partner_n / 2;
  if (shift_correction && n < partner_n && (b % 2) != (pb % 2)) return b + 1;
  return b;
}

template <typename T>
EntanglementData half_chain_entropy(const Mps<T>& m, int partner_n, bool shift_correction) {
  const int bond = comparison_bond(m.n(), partner_n, shift_correction);
  EntanglementData e = entanglement_entropy(m, bond);
  e.shifted = bond != m.n() / 2;
  return e;
}

double central_charge_estimate(double s1, int n1, double s2, int n2) {
  if (n1 == n2 || n1 < 1 || n2 < 1) throw DomainError("central charge needs two distinct positive sizes");
  return 6.0 * (s2 - s1) / std::log(static_cast<double>(n2) / n1);
}

SsbDiagnosis entanglement_spectrum_ssb_flag(const EntanglementData& e, double ratio, double floor) {
  SsbDiagnosis d;
  const double missing = -std::log(floor);
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = k < e.spectrum.size() ? e.spectrum[k] : 0.0;
    d.levels.push_back(p > floor ? -std::log(p) : missing);
  }
  std::sort(d.levels.begin(), d.levels.end());
  d.gap12 = d.levels[1] - d.levels[0];
  d.gap13 = d.levels[2] - d.levels[0];
  d.flag = d.gap12 < ratio * d.gap13;
  return d;
}

namespace {

template <typename T>
MatrixXc window_rdm(const Mps<T>& m, int first, int count) {
  Tensor3<T> psi = m.sites[first];
  int dphys = 2;
  for (int j = 1; j < count; ++j) {
    const Tensor3<T>& b = m.sites[first + j];
    Tensor3<T> next(psi.dl, dphys * 2, b.dr);
    MapMat<T>(next.data.data(), Eigen::Index{psi.dl} * dphys, Eigen::Index{2} * b.dr).noalias() =
        MapMat<T>(psi.data.data(), Eigen::Index{psi.dl} * dphys, psi.dr) * b.right();
    psi = std::move(next);
    dphys *= 2;
  }
  Mat<T> acc = Mat<T>::Zero(dphys, dphys);
  const Eigen::Index block = Eigen::Index{psi.dl} * dphys;
  for (int r = 0; r < psi.dr; ++r) {
    CMapMat<T> mr(psi.data.data() + r * block, psi.dl, dphys);
    acc.noalias() += mr.transpose() * mr.conjugate();
  }
  MatrixXc rho = acc.template cast<cplx>();
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw ConsistencyError("reduced density matrix has non-positive trace");
  return rho / tr;
}

template <typename T>
cplx centre_expectation(const Tensor3<T>& c, const Eigen::Matrix2cd& op) {
  cplx acc = 0.0;
  double nrm = 0.0;
  for (int r = 0; r < c.dr; ++r)
    for (int l = 0; l < c.dl; ++l) {
      const cplx a0 = c(l, 0, r), a1 = c(l, 1, r);
      acc += std::conj(a0) * (op(0, 0) * a0 + op(0, 1) * a1) + std::conj(a1) * (op(1, 0) * a0 + op(1, 1) * a1);
      nrm += std::norm(a0) + std::norm(a1);
    }
  return acc / nrm;
}

}  // namespace

template <typename T>
MatrixXc mps_reduced_density_matrix(const Mps<T>& m, int first, int count) {
  if (count > 6) throw ResourceError("reduced density matrix window limited to 6 sites");
  if (first < 0 || count < 1 || first + count > m.n()) throw DomainError("window lies outside the chain");
  Mps<T> c = m;
  c.move_center(first);
  return window_rdm(c, first, count);
}

template <typename T>
std::vector<cplx> site_expectations(const Mps<T>& m, const Eigen::Matrix2cd& op) {
  Mps<T> c = m;
  c.move_center(0);
  std::vector<cplx> out(m.n());
  for (int i = 0; i < m.n(); ++i) {
    c.move_center(i);
    out[i] = centre_expectation(c.sites[i], op);
  }
  return out;
}

LocalMeasurements measure_local(const Mps<cplx>& m, int first, int count) {
  if (count > 6) throw ResourceError("reduced density matrix window limited to 6 sites");
  if (first < 0 || count < 1 || first + count > m.n()) throw DomainError("window lies outside the chain");
  Mps<cplx> c = m;
  c.move_center(0);
  LocalMeasurements out;
  out.sigma_plus.resize(m.n());
  const Eigen::Matrix2cd plus = pauli::plus().cast<cplx>();
  for (int i = 0; i < m.n(); ++i) {
    c.move_center(i);
    out.sigma_plus[i] = centre_expectation(c.sites[i], plus);
    if (i == first) out.rdm = window_rdm(c, first, count);
  }
  return out;
}

namespace {
constexpr char kMagic[8] = {'Q', 'M', 'E', 'M', 'P', 'S', '0', '1'};

template <typename V>
void put(std::ostream& os, const V& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& is) {
  V v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!is) throw ConfigError("truncated checkpoint");
  return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const Mps<cplx>& m, const nlohmann::json& metadata) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write checkpoint " + path);
    os.write(kMagic, sizeof(kMagic));
    const std::string meta = metadata.dump();
    put<std::uint64_t>(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put<std::int32_t>(os, m.n());
    put<std::int32_t>(os, m.center);
    for (const auto& t : m.sites) {
      put<std::int32_t>(os, t.dl);
      put<std::int32_t>(os, t.d);
      put<std::int32_t>(os, t.dr);
      os.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(cplx)));
    }
    if (!os) throw ConfigError("failed writing checkpoint " + path);
  }
  std::rename(tmp.c_str(), path.c_str());
}

Mps<cplx> load_checkpoint(const std::string& path, nlohmann::json* metadata) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ConfigError("not a state checkpoint: " + path);
  const auto meta_len = get<std::uint64_t>(is);
  if (meta_len > (1u << 26)) throw ConfigError("corrupt checkpoint metadata");
  std::string meta(meta_len, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (metadata) *metadata = nlohmann::json::parse(meta);
  Mps<cplx> m;
  const int n = get<std::int32_t>(is);
  m.center = get<std::int32_t>(is);
  if (n < 1 || m.center < 0 || m.center >= n) throw ConfigError("corrupt checkpoint header");
  for (int i = 0; i < n; ++i) {
    const int dl = get<std::int32_t>(is), d = get<std::int32_t>(is), dr = get<std::int32_t>(is);
    if (dl < 1 || d < 1 || dr < 1 || Eigen::Index{dl} * d * dr > (Eigen::Index{1} << 28))
      throw ConfigError("corrupt checkpoint tensor");
    Tensor3<cplx> t(dl, d, dr);
    is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(cplx)));
    if (!is) throw ConfigError("truncated checkpoint");
    m.sites.push_back(std::move(t));
  }
  return m;
}

#define QME_INSTANTIATE(T)                                                                                    \
  template class Mps<T>;                                                                                      \
  template Mps<cplx> to_complex(const Mps<T>&);                                                               \
  template double gauge_defect(const Mps<T>&);                                                                \
  template Env<T> boundary_env<T>();                                                                          \
  template Env<T> update_left_env(const Env<T>&, const Tensor3<T>&, const LocalMpo&);                         \
  template Env<T> update_right_env(const Env<T>&, const Tensor3<T>&, const LocalMpo&);                        \
  template void apply_heff(const Env<T>&, const LocalMpo&, const Env<T>&, const Tensor3<T>&, Tensor3<T>&);    \
  template void apply_heff0(const Env<T>&, const Env<T>&, const Mat<T>&, Mat<T>&);                           \
  template struct EnvCache<T>;                                                                                \
  template double mpo_expectation(const Mps<T>&, const Mpo&);                                                 \
  template Tensor3<T> merge_pair(const Tensor3<T>&, const Tensor3<T>&);                                       \
  template SplitInfo split_pair(const Tensor3<T>&, bool, const Truncation&, Tensor3<T>&, Tensor3<T>&,         \
                                VectorXd*);                                                                   \
  template EntanglementData entanglement_entropy(const Mps<T>&, int);                                         \
  template EntanglementData half_chain_entropy(const Mps<T>&, int, bool);                                     \
  template MatrixXc mps_reduced_density_matrix(const Mps<T>&, int, int);                                      \
  template std::vector<cplx> site_expectations(const Mps<T>&, const Eigen::Matrix2cd&);

QME_INSTANTIATE(double)
QME_INSTANTIATE(cplx)

}  // namespace qme
