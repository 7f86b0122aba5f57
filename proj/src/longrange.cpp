#include "qme/longrange.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "qme/error.hpp"
#include "qme/linalg.hpp"

namespace qme {

double ExponentialFit::evaluate(double x) const {
  double f = 0.0;
  for (int k = 0; k < terms(); ++k) {
    if (std::isinf(rates[k]))
      f += (x == 0.0) ? amplitudes[k] : 0.0;
    else
      f += amplitudes[k] * std::exp(rates[k] * x);
  }
  return f;
}

double ExponentialFit::decay(int k) const {
  return std::isinf(rates[k]) ? 0.0 : std::exp(rates[k]);
}

ExponentialFit ExponentialFit::nearest_neighbor(int n) {
  ExponentialFit fit;
  fit.alpha = std::numeric_limits<double>::infinity();
  fit.n = n;
  fit.amplitudes = {1.0};
  fit.rates = {-std::numeric_limits<double>::infinity()};
  return fit;
}

namespace {

// Parameters x = (a_1..a_K, u_1..u_K) with b_k = -exp(u_k).
struct ExpSumResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::span<const double> target;
  int k;

  int inputs() const { return 2 * k; }
  int values() const { return static_cast<int>(target.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    for (int n = 0; n < values(); ++n) {
      double f = 0.0;
      for (int j = 0; j < k; ++j) f += x(j) * std::exp(-std::exp(x(k + j)) * n);
      fvec(n) = f - target[n];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    for (int n = 0; n < values(); ++n) {
      for (int j = 0; j < k; ++j) {
        const double b = -std::exp(x(k + j));
        const double e = std::exp(b * n);
        jac(n, j) = e;
        jac(n, k + j) = x(j) * n * e * b;
      }
    }
    return 0;
  }
};

struct Candidate {
  std::vector<double> a;
  std::vector<double> b;
  double sup = std::numeric_limits<double>::infinity();
  double rms = std::numeric_limits<double>::infinity();
};

void score(Candidate& c, std::span<const double> target) {
  double sup = 0.0, sq = 0.0;
  for (std::size_t n = 0; n < target.size(); ++n) {
    double f = 0.0;
    for (std::size_t j = 0; j < c.a.size(); ++j) f += c.a[j] * std::exp(c.b[j] * static_cast<double>(n));
    const double r = f - target[n];
    if (!std::isfinite(r)) {
      c.sup = c.rms = std::numeric_limits<double>::infinity();
      return;
    }
    sup = std::max(sup, std::abs(r));
    sq += r * r;
  }
  c.sup = sup;
  c.rms = std::sqrt(sq / static_cast<double>(target.size()));
}

std::vector<double> linear_amplitudes(std::span<const double> target, const std::vector<double>& rates) {
  const int m = static_cast<int>(target.size());
  const int k = static_cast<int>(rates.size());
  Eigen::MatrixXd basis(m, k);
  Eigen::VectorXd y(m);
  for (int n = 0; n < m; ++n) {
    y(n) = target[n];
    for (int j = 0; j < k; ++j) basis(n, j) = std::exp(rates[j] * n);
  }
  Eigen::VectorXd a = basis.colPivHouseholderQr().solve(y);
  return {a.data(), a.data() + k};
}

// Joint refinement; falls back to the input if the optimiser produces junk.
Candidate refine(const Candidate& start, std::span<const double> target) {
  const int k = static_cast<int>(start.a.size());
  // Number of free parameters may not exceed the sample count.
  const int active = std::min(k, static_cast<int>(target.size()) / 2);
  Candidate out = start;
  score(out, target);
  if (active == 0) return out;
  Eigen::VectorXd x(2 * active);
  for (int j = 0; j < active; ++j) {
    x(j) = start.a[j];
    x(active + j) = std::log(-start.b[j]);
  }
  // Residual against what the inactive tail does not already cover.
  std::vector<double> reduced(target.begin(), target.end());
  for (std::size_t n = 0; n < reduced.size(); ++n)
    for (int j = active; j < k; ++j) reduced[n] -= start.a[j] * std::exp(start.b[j] * static_cast<double>(n));
  ExpSumResidual functor{reduced, active};
  Eigen::LevenbergMarquardt<ExpSumResidual> lm(functor);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.gtol = 0.0;
  lm.parameters.maxfev = 4000 * (2 * active + 1);
  lm.minimize(x);
  Candidate c = start;
  for (int j = 0; j < active; ++j) {
    c.a[j] = x(j);
    c.b[j] = -std::exp(x(active + j));
  }
  score(c, target);
  if (c.sup < out.sup) out = c;
  return out;
}

Candidate fresh_candidate(std::span<const double> target, int k) {
  const double m = static_cast<double>(target.size()) + 1.0;
  Candidate c;
  c.b.resize(k);
  for (int j = 0; j < k; ++j) {
    // Log-spaced decay rates between 1/N and 1.
    const double frac = (k == 1) ? 0.5 : static_cast<double>(j) / (k - 1);
    c.b[j] = -std::pow(m, frac - 1.0);
  }
  c.a = linear_amplitudes(target, c.b);
  score(c, target);
  return refine(c, target);
}

}  // namespace

ExponentialFit fit_exponential_sum(std::span<const double> target, int terms, const FitOptions& opts) {
  if (terms < 1) throw DomainError("exponential fit needs at least one term");
  if (target.empty()) throw DomainError("exponential fit needs a non-empty target");
  Candidate best;
  for (int k = 1; k <= terms; ++k) {
    Candidate c = fresh_candidate(target, k);
    if (k > 1) {
      Candidate ext = best;
      const double fastest = *std::min_element(ext.b.begin(), ext.b.end());
      ext.a.push_back(0.0);
      ext.b.push_back(2.0 * fastest);
      score(ext, target);
      if (ext.sup < c.sup) c = ext;
      Candidate ext_refined = refine(ext, target);
      if (ext_refined.sup < c.sup) c = ext_refined;
    }
    best = c;
  }
  ExponentialFit fit;
  fit.amplitudes = best.a;
  fit.rates = best.b;
  fit.sup_residual = best.sup;
  fit.rms_residual = best.rms;
  fit.warning = best.sup > opts.warn_sup;
  if (!(best.sup <= opts.fail_sup)) {
    std::ostringstream msg;
    msg << "exponential fit did not reach sup residual " << opts.fail_sup << " (best " << best.sup << ")";
    throw FitError(msg.str(), best.sup);
  }
  return fit;
}

ExponentialFit fit_power_law(double alpha, int n, int terms, const FitOptions& opts) {
  if (n < 3) throw DomainError("power-law fit needs N >= 3");
  if (!(alpha > 0.0)) throw DomainError("power-law fit needs alpha > 0");
  std::vector<double> target(n - 1);
  for (int d = 1; d < n; ++d) target[d - 1] = std::pow(static_cast<double>(d), -alpha);
  ExponentialFit fit = fit_exponential_sum(target, terms, opts);
  fit.alpha = alpha;
  fit.n = n;
  return fit;
}

int Mpo::bond_dimension() const {
  int d = 1;
  for (const auto& s : sites) d = std::max({d, s.dl, s.dr});
  return d;
}

Mpo assemble_longrange_mpo(const ExponentialFit& fit_in, const ModelSpec& spec) {
  spec.validate();
  const ExponentialFit fit = spec.nearest_neighbor ? ExponentialFit::nearest_neighbor(spec.n) : fit_in;
  if (!spec.nearest_neighbor && spec.n > 2 && fit.n < spec.n)
    throw DomainError("fit domain does not cover the chain length");
  const int k = fit.terms();
  const int dim = 2 + 3 * k;
  const int last = dim - 1;
  const double norm = spec.n >= 2 ? (spec.nearest_neighbor ? 2.0 : kac_norm(spec.alpha, spec.n)) : 1.0;
  const auto j = spec.axis_couplings();
  const double coupling[3] = {j[0] / norm, -j[1] / norm, j[2] / norm};
  const Eigen::Matrix2d ops[3] = {pauli::x(), pauli::iy(), pauli::z()};
  const double h = spec.field();

  std::vector<MpoEntry> bulk;
  bulk.push_back({0, 0, pauli::identity()});
  bulk.push_back({last, last, pauli::identity()});
  if (h != 0.0) bulk.push_back({0, last, h * pauli::z()});
  for (int axis = 0; axis < 3; ++axis) {
    for (int t = 0; t < k; ++t) {
      const int ch = 1 + axis * k + t;
      const double open = coupling[axis] * fit.amplitudes[t];
      if (open != 0.0) bulk.push_back({0, ch, open * ops[axis]});
      const double lambda = fit.decay(t);
      if (lambda != 0.0) bulk.push_back({ch, ch, lambda * pauli::identity()});
      bulk.push_back({ch, last, ops[axis]});
    }
  }

  Mpo mpo;
  mpo.sites.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    MpoSite& site = mpo.sites[i];
    const bool first = (i == 0), final = (i == spec.n - 1);
    site.dl = first ? 1 : dim;
    site.dr = final ? 1 : dim;
    for (const auto& e : bulk) {
      if (first && e.row != 0) continue;
      if (final && e.col != last) continue;
      site.entries.push_back({first ? 0 : e.row, final ? 0 : e.col, e.op});
    }
  }
  return mpo;
}

Mpo build_model_mpo(const ModelSpec& spec, int terms) {
  // Two sites have a single distance, reproduced exactly by one channel.
  if (spec.nearest_neighbor || spec.n < 3) return assemble_longrange_mpo(ExponentialFit::nearest_neighbor(spec.n), spec);
  return assemble_longrange_mpo(fit_power_law(spec.alpha, spec.n, terms), spec);
}

CouplingTable fitted_coupling_table(const ExponentialFit& fit, const ModelSpec& spec) {
  CouplingTable table = build_coupling_table(spec);
  if (spec.nearest_neighbor) return table;
  for (int d = 1; d < spec.n; ++d) table.weights[d - 1] = fit.evaluate(d - 1.0) / table.norm;
  return table;
}

namespace {

Eigen::VectorXd mpo_apply(const Mpo& mpo, const Eigen::VectorXd& v) {
  const int n = mpo.n();
  const Eigen::Index size = v.size();
  std::vector<Eigen::VectorXd> cur(1, v);
  for (int i = 0; i < n; ++i) {
    const MpoSite& site = mpo.sites[i];
    std::vector<Eigen::VectorXd> next(site.dr, Eigen::VectorXd::Zero(size));
    const Eigen::Index bit = Eigen::Index{1} << i;
    for (const auto& e : site.entries) {
      const Eigen::VectorXd& in = cur[e.row];
      Eigen::VectorXd& out = next[e.col];
      for (Eigen::Index x = 0; x < size; ++x) {
        if (in(x) == 0.0) continue;
        const int s = (x & bit) ? 1 : 0;
        for (int sp = 0; sp < 2; ++sp) {
          const double c = e.op(sp, s);
          if (c == 0.0) continue;
          const Eigen::Index xp = sp ? (x | bit) : (x & ~bit);
          out(xp) += c * in(x);
        }
      }
    }
    cur = std::move(next);
  }
  return cur[0];
}

}  // namespace

Eigen::MatrixXd mpo_to_dense(const Mpo& mpo) {
  const int n = mpo.n();
  if (n > 14) throw ResourceError("dense MPO contraction limited to 14 sites");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd out(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) out.col(c) = mpo_apply(mpo, Eigen::VectorXd::Unit(dim, c));
  return out;
}

FidelityReport mpo_fidelity_report(const ExponentialFit& fit, const ModelSpec& spec, double threshold) {
  FidelityReport rep;
  rep.threshold = threshold;
  const int n = spec.n;
  if (n < 2) return rep;
  const double norm = spec.nearest_neighbor ? 2.0 : kac_norm(spec.alpha, n);
  const auto j = spec.axis_couplings();
  const double coupling = (std::abs(j[0]) + std::abs(j[1]) + std::abs(j[2])) / norm;
  rep.distance_error.resize(n - 1);
  for (int d = 1; d < n; ++d) {
    const double exact = spec.nearest_neighbor ? (d == 1 ? 1.0 : 0.0) : std::pow(static_cast<double>(d), -spec.alpha);
    const double err = std::abs(fit.evaluate(d - 1.0) - exact);
    rep.distance_error[d - 1] = err;
    rep.max_error = std::max(rep.max_error, err);
    if (err > threshold) rep.flagged.push_back(d);
    rep.energy_bound_per_site += err * coupling * static_cast<double>(n - d) / n;
  }
  return rep;
}

void write_fit_table(std::ostream& os, const ExponentialFit& fit) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  os << "# exponential-sum fit of d^-alpha on n = d-1\n";
  os << "alpha " << fit.alpha << "\n";
  os << "n " << fit.n << "\n";
  os << "terms " << fit.terms() << "\n";
  os << "sup_residual " << fit.sup_residual << "\n";
  os << "rms_residual " << fit.rms_residual << "\n";
  os << "k a_k b_k\n";
  for (int k = 0; k < fit.terms(); ++k) os << k + 1 << " " << fit.amplitudes[k] << " " << fit.rates[k] << "\n";
  os.flags(flags);
  os.precision(prec);
}

ExponentialFit read_fit_table(std::istream& is) {
  ExponentialFit fit;
  std::string line;
  int terms = -1;
  bool in_table = false;
  auto number = [](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (in_table) {
      std::string a, b;
      ls >> a >> b;
      if (a.empty() || b.empty()) throw ConfigError("malformed fit table row: " + line);
      fit.amplitudes.push_back(number(a));
      fit.rates.push_back(number(b));
      continue;
    }
    std::string value;
    ls >> value;
    if (key == "alpha")
      fit.alpha = number(value);
    else if (key == "n")
      fit.n = std::stoi(value);
    else if (key == "terms")
      terms = std::stoi(value);
    else if (key == "sup_residual")
      fit.sup_residual = number(value);
    else if (key == "rms_residual")
      fit.rms_residual = number(value);
    else if (key == "k")
      in_table = true;
    else
      throw ConfigError("unknown fit table key '" + key + "'");
  }
  if (terms < 0 || fit.terms() != terms) throw ConfigError("fit table term count mismatch");
  return fit;
}

}  // namespace qme
