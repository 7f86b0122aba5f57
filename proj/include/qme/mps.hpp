#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qme/linalg.hpp"
#include "qme/longrange.hpp"

namespace qme {

/// Rank-3 site tensor A(l, s, r) stored at l + dl * (s + d * r).
template <typename T>
struct Tensor3 {
  int dl = 1;
  int d = 2;
  int dr = 1;
  Vec<T> data;

  Tensor3() : data(Vec<T>::Zero(2)) {}
  Tensor3(int dl_, int d_, int dr_) : dl(dl_), d(d_), dr(dr_), data(Vec<T>::Zero(Eigen::Index{dl_} * d_ * dr_)) {}

  T& operator()(int l, int s, int r) { return data(l + dl * (s + d * r)); }
  T operator()(int l, int s, int r) const { return data(l + dl * (s + d * r)); }

  /// (dl*d) x dr view, row index l + dl*s.
  Eigen::Map<Mat<T>> left() { return {data.data(), Eigen::Index{dl} * d, dr}; }
  Eigen::Map<const Mat<T>> left() const { return {data.data(), Eigen::Index{dl} * d, dr}; }
  /// dl x (d*dr) view, column index s + d*r.
  Eigen::Map<Mat<T>> right() { return {data.data(), dl, Eigen::Index{d} * dr}; }
  Eigen::Map<const Mat<T>> right() const { return {data.data(), dl, Eigen::Index{d} * dr}; }
};

/// Open-boundary matrix-product state with physical dimension 2.
template <typename T>
class Mps {
 public:
  std::vector<Tensor3<T>> sites;
  int center = 0;  // orthogonality centre

  int n() const { return static_cast<int>(sites.size()); }
  /// Bond b sits between sites b-1 and b (b in [1, n-1]); b = 0 and b = n are trivial.
  int bond_dim(int b) const;
  int max_bond() const;

  static Mps product(const std::vector<Eigen::Vector2d>& amplitudes);
  /// Random state with the given bond dimension, right-canonical, centre 0.
  static Mps random(int n, int chi, std::uint64_t seed);

  /// Brings the state into mixed-canonical form with the centre at `c`.
  void canonicalize(int c);
  /// QR/LQ moves without truncation; assumes the state is already in
  /// mixed-canonical form.
  void move_center(int to);
  /// Norm from the centre tensor (valid in mixed-canonical form).
  double norm() const;
  void normalize();

  /// Full overlap contraction, independent of gauge.
  T overlap(const Mps& other) const;

  /// Dense amplitudes (n <= 24), bit i = site i.
  Vec<T> to_dense() const;
};

template <typename T>
Mps<cplx> to_complex(const Mps<T>& m);

/// Largest violation of the gauge conditions around the centre.
template <typename T>
double gauge_defect(const Mps<T>& m);

/// Keep the smallest number of singular values whose discarded weight
/// (relative to the total) stays below `cutoff`, at most chi_max.
struct Truncation {
  int chi_max = 100;
  double cutoff = 1e-12;
};

struct SplitInfo {
  double discarded = 0.0;  // relative discarded weight
  int kept = 0;
  bool chi_limited = false;  // chi_max forced discarding above the cutoff
};

/// Environment: one (bra x ket) matrix per MPO bond index.
template <typename T>
using Env = std::vector<Mat<T>>;

/// MPO site with dynamic local dimension (merged sites use d = 4).
struct LocalMpo {
  int dl = 1;
  int dr = 1;
  int d = 2;
  struct Entry {
    int row;
    int col;
    MatrixXd op;
    bool identity_multiple;  // op = c * I
  };
  std::vector<Entry> entries;
};

LocalMpo to_local(const MpoSite& w);
/// Merged two-site operator with combined index c = s1 + 2 * s2.
LocalMpo merge_sites(const LocalMpo& a, const LocalMpo& b);

template <typename T>
Env<T> boundary_env();
template <typename T>
Env<T> update_left_env(const Env<T>& l, const Tensor3<T>& a, const LocalMpo& w);
template <typename T>
Env<T> update_right_env(const Env<T>& r, const Tensor3<T>& b, const LocalMpo& w);

/// out = H_eff in for a site (or merged pair) between environments l and r.
template <typename T>
void apply_heff(const Env<T>& l, const LocalMpo& w, const Env<T>& r, const Tensor3<T>& in, Tensor3<T>& out);
/// Zero-site (bond) effective Hamiltonian.
template <typename T>
void apply_heff0(const Env<T>& l, const Env<T>& r, const Mat<T>& in, Mat<T>& out);

/// Environments cached along the chain for sweeping algorithms.
template <typename T>
struct EnvCache {
  std::vector<LocalMpo> w;
  std::vector<Env<T>> left;   // left[i]: sites < i
  std::vector<Env<T>> right;  // right[i]: sites > i
  /// Builds all environments for a state with its centre at `m.center`.
  void build(const Mps<T>& m, const Mpo& mpo);
};

/// <psi|O|psi> / <psi|psi> for an MPO.
template <typename T>
double mpo_expectation(const Mps<T>& m, const Mpo& mpo);

/// Merge sites i, i+1 into a d = 4 tensor.
template <typename T>
Tensor3<T> merge_pair(const Tensor3<T>& a, const Tensor3<T>& b);

/// SVD split of a merged pair. `move_right` puts the singular values on the
/// right tensor, otherwise on the left one.
template <typename T>
SplitInfo split_pair(const Tensor3<T>& theta, bool move_right, const Truncation& trunc, Tensor3<T>& a,
                     Tensor3<T>& b, VectorXd* singular_values = nullptr);

struct EntanglementData {
  int bond = 0;
  std::vector<double> spectrum;  // Schmidt weights lambda_k^2, descending
  double entropy = 0.0;
  bool shifted = false;
};

/// Schmidt decomposition at `bond` (left part holds `bond` sites).
template <typename T>
EntanglementData entanglement_entropy(const Mps<T>& m, int bond);

/// Half-chain bond for a system of n sites compared against one of
/// partner_n sites: n/2, or n/2 + 1 when the two half-chain bonds differ in
/// parity and this is the smaller system.
int comparison_bond(int n, int partner_n, bool shift_correction = true);

template <typename T>
EntanglementData half_chain_entropy(const Mps<T>& m, int partner_n, bool shift_correction = true);

/// c_eff = 6 (S2 - S1) / ln(N2 / N1)
double central_charge_estimate(double s1, int n1, double s2, int n2);

struct SsbDiagnosis {
  bool flag = false;
  std::vector<double> levels;  // lowest entanglement energies -ln(lambda^2)
  double gap12 = 0.0;
  double gap13 = 0.0;
};

/// Gap-ratio test (xi2 - xi1) < ratio * (xi3 - xi1). Missing levels sit at
/// -ln(floor).
SsbDiagnosis entanglement_spectrum_ssb_flag(const EntanglementData& e, double ratio = 0.1,
                                            double floor = 1e-14);

/// Reduced density matrix of sites [first, first + count), count <= 6.
template <typename T>
MatrixXc mps_reduced_density_matrix(const Mps<T>& m, int first, int count);

/// <op_i> on every site.
template <typename T>
std::vector<cplx> site_expectations(const Mps<T>& m, const Eigen::Matrix2cd& op);

struct LocalMeasurements {
  MatrixXc rdm;
  std::vector<cplx> sigma_plus;
};

/// One gauge sweep computing the window RDM and <sigma^+_i> together.
LocalMeasurements measure_local(const Mps<cplx>& m, int first, int count);

/// Binary checkpoint: magic, metadata JSON, raw tensor data.
void save_checkpoint(const std::string& path, const Mps<cplx>& m, const nlohmann::json& metadata);
Mps<cplx> load_checkpoint(const std::string& path, nlohmann::json* metadata = nullptr);

}  // namespace qme
