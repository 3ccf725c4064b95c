#include "cvtk/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cvtk/errors.hpp"

namespace cvtk::fock {

namespace {

constexpr Complex kI(0.0, 1.0);

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void require_cutoff(int cutoff, const char* who) {
  if (cutoff < 1) throw InputError(std::string(who) + ": cutoff must be >= 1");
}

void require_tail(double deficit, double budget, int cutoff, const char* who) {
  if (deficit > budget) {
    std::ostringstream os;
    os << who << ": cutoff " << cutoff << " discards probability " << deficit
       << " (budget " << budget << "); raise the cutoff";
    throw NumericalError(os.str());
  }
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<int> checked_modes(std::span<const int> modes, int n_modes, const char* who) {
  std::vector<int> out(modes.begin(), modes.end());
  std::set<int> seen;
  for (int m : out) {
    if (m < 0 || m >= n_modes)
      throw InputError(std::string(who) + ": mode " + std::to_string(m) + " out of range");
    if (!seen.insert(m).second)
      throw InputError(std::string(who) + ": mode " + std::to_string(m) + " repeated");
  }
  return out;
}

// Digit of `mode` in a flat index (mode 0 slowest).
int digit(int index, int mode, int n_modes, int levels) {
  return (index / ipow(levels, n_modes - 1 - mode)) % levels;
}

SparseC to_sparse(const Mat& m) { return m.cast<Complex>().sparseView(); }

SparseC identity_sparse(int n) {
  SparseC id(n, n);
  id.setIdentity();
  return id;
}

SparseC full_generator(const Gate& gate, std::span<const int> targets, int n_modes, int levels) {
  const auto [a_dense, ad_dense] = ladder_ops(levels - 1);
  const SparseC a1 = on_mode(to_sparse(a_dense), targets[0], n_modes, levels);
  const SparseC a1d = SparseC(a1.adjoint());
  switch (gate.kind) {
    case GateKind::Displacement: {
      const Complex alpha(0.5 * gate.p1, 0.5 * gate.p2);
      return SparseC(alpha * a1d - std::conj(alpha) * a1);
    }
    case GateKind::Squeezer:
      return SparseC((0.5 * gate.p1) * (a1 * a1 - a1d * a1d));
    case GateKind::Rotation:
      return SparseC((-kI * gate.p1) * (a1d * a1));
    case GateKind::BeamSplitter:
    case GateKind::TwoModeSqueezer: {
      const SparseC a2 = on_mode(to_sparse(a_dense), targets[1], n_modes, levels);
      const SparseC a2d = SparseC(a2.adjoint());
      if (gate.kind == GateKind::BeamSplitter)
        return SparseC(Complex(gate.p1) * (a1 * a2d - a1d * a2));
      return SparseC(Complex(gate.p1) * (a1 * a2 - a1d * a2d));
    }
  }
  throw InputError("generator: unsupported gate");
}

double norm1(const SparseC& g) {
  double best = 0.0;
  for (int k = 0; k < g.outerSize(); ++k) {
    double s = 0.0;
    for (SparseC::InnerIterator it(g, k); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

template <typename Dense>
Dense expm_apply(const SparseC& g, const Dense& v) {
  // ||G||_1 / steps <= 2.
  const int steps = std::max(1, static_cast<int>(std::ceil(0.5 * norm1(g))));
  const double scale = 1.0 / steps;
  Dense out = v;
  for (int s = 0; s < steps; ++s) {
    Dense term = out;
    Dense acc = out;
    for (int k = 1; k <= 200; ++k) {
      term = (g * term) * (scale / k);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    out = std::move(acc);
  }
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

int Gate::arity() const {
  return (kind == GateKind::BeamSplitter || kind == GateKind::TwoModeSqueezer) ? 2 : 1;
}

FockDensity to_density(const FockPure& psi) {
  return {psi.cutoff, psi.n_modes, psi.amp * psi.amp.adjoint(), psi.deficit};
}

FockPure tensor(const FockPure& a, const FockPure& b) {
  if (a.cutoff != b.cutoff) throw InputError("tensor: cutoffs differ");
  FockPure out;
  out.cutoff = a.cutoff;
  out.n_modes = a.n_modes + b.n_modes;
  out.amp = Eigen::kroneckerProduct(a.amp, b.amp).eval();
  out.deficit = 1.0 - (1.0 - a.deficit) * (1.0 - b.deficit);
  return out;
}

FockDensity tensor(const FockDensity& a, const FockDensity& b) {
  if (a.cutoff != b.cutoff) throw InputError("tensor: cutoffs differ");
  FockDensity out;
  out.cutoff = a.cutoff;
  out.n_modes = a.n_modes + b.n_modes;
  out.rho = Eigen::kroneckerProduct(a.rho, b.rho).eval();
  out.deficit = 1.0 - (1.0 - a.deficit) * (1.0 - b.deficit);
  return out;
}

std::pair<Mat, Mat> ladder_ops(int cutoff) {
  require_cutoff(cutoff, "ladder_ops");
  Mat a = Mat::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Mat ad = a.transpose();
  return {std::move(a), std::move(ad)};
}

FockPure vacuum(int n_modes, int cutoff) {
  require_cutoff(cutoff, "vacuum");
  if (n_modes < 1) throw InputError("vacuum: n_modes must be >= 1");
  FockPure psi;
  psi.cutoff = cutoff;
  psi.n_modes = n_modes;
  psi.amp = CVec::Zero(ipow(cutoff + 1, n_modes));
  psi.amp(0) = 1.0;
  return psi;
}

FockPure number_state(int n, int cutoff) {
  require_cutoff(cutoff, "number_state");
  if (n < 0 || n > cutoff) throw InputError("number_state: n must lie in [0, cutoff]");
  FockPure psi = vacuum(1, cutoff);
  psi.amp(0) = 0.0;
  psi.amp(n) = 1.0;
  return psi;
}

FockPure coherent(Complex alpha, int cutoff, double budget) {
  require_cutoff(cutoff, "coherent");
  FockPure psi;
  psi.cutoff = cutoff;
  psi.amp = CVec(cutoff + 1);
  psi.amp(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= cutoff; ++n) psi.amp(n) = psi.amp(n - 1) * alpha / std::sqrt(double(n));
  psi.deficit = std::max(0.0, 1.0 - psi.amp.squaredNorm());
  require_tail(psi.deficit, budget, cutoff, "coherent");
  return psi;
}

FockPure squeezed_vacuum(double r, int cutoff, double budget) {
  require_cutoff(cutoff, "squeezed_vacuum");
  FockPure psi;
  psi.cutoff = cutoff;
  psi.amp = CVec::Zero(cutoff + 1);
  const double t = std::tanh(r);
  double c = 1.0 / std::sqrt(std::cosh(r));
  psi.amp(0) = c;
  for (int n = 1; 2 * n <= cutoff; ++n) {
    c *= -t * std::sqrt((2.0 * n - 1.0) / (2.0 * n));
    psi.amp(2 * n) = c;
  }
  psi.deficit = std::max(0.0, 1.0 - psi.amp.squaredNorm());
  require_tail(psi.deficit, budget, cutoff, "squeezed_vacuum");
  return psi;
}

FockPure tmsv(double r, int cutoff, double budget) {
  require_cutoff(cutoff, "tmsv");
  const int d = cutoff + 1;
  FockPure psi;
  psi.cutoff = cutoff;
  psi.n_modes = 2;
  psi.amp = CVec::Zero(d * d);
  const double t = std::tanh(r);
  double c = 1.0 / std::cosh(r);
  for (int n = 0; n <= cutoff; ++n) {
    psi.amp(n * d + n) = c;
    c *= -t;
  }
  psi.deficit = std::max(0.0, 1.0 - psi.amp.squaredNorm());
  require_tail(psi.deficit, budget, cutoff, "tmsv");
  return psi;
}

FockDensity thermal(double nbar, int cutoff, double budget) {
  require_cutoff(cutoff, "thermal");
  if (!(nbar >= 0.0)) throw InputError("thermal: nbar must be >= 0");
  FockDensity rho;
  rho.cutoff = cutoff;
  rho.rho = CMat::Zero(cutoff + 1, cutoff + 1);
  const double q = nbar / (1.0 + nbar);
  double w = 1.0 / (1.0 + nbar);
  double total = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    rho.rho(n, n) = w;
    total += w;
    w *= q;
  }
  rho.deficit = std::max(0.0, 1.0 - total);
  require_tail(rho.deficit, budget, cutoff, "thermal");
  return rho;
}

SparseC on_mode(const SparseC& op, int mode, int n_modes, int levels) {
  if (mode < 0 || mode >= n_modes) throw InputError("on_mode: mode out of range");
  if (op.rows() != levels || op.cols() != levels) throw InputError("on_mode: operator size mismatch");
  const SparseC left = identity_sparse(ipow(levels, mode));
  const SparseC right = identity_sparse(ipow(levels, n_modes - 1 - mode));
  SparseC tmp = Eigen::kroneckerProduct(op, right);
  return Eigen::kroneckerProduct(left, tmp);
}

SparseC generator(const Gate& gate, int cutoff) {
  require_cutoff(cutoff, "generator");
  const int targets[2] = {0, 1};
  return full_generator(gate, std::span<const int>(targets, gate.arity()), gate.arity(), cutoff + 1);
}

CMat gaussian_unitary_matrix(const Gate& gate, int cutoff) {
  return CMat(generator(gate, cutoff)).exp();
}

CVec expm_action(const SparseC& g, const CVec& v) {
  if (g.cols() != v.size()) throw InputError("expm_action: dimension mismatch");
  return expm_apply(g, v);
}

FockPure apply_gate(const Gate& gate, std::span<const int> targets, const FockPure& psi) {
  const auto t = checked_modes(targets, psi.n_modes, "apply_gate");
  if (static_cast<int>(t.size()) != gate.arity()) throw InputError("apply_gate: wrong number of targets");
  FockPure out = psi;
  out.amp = expm_apply(full_generator(gate, t, psi.n_modes, psi.levels()), psi.amp);
  return out;
}

FockDensity apply_gate(const Gate& gate, std::span<const int> targets, const FockDensity& rho) {
  const auto t = checked_modes(targets, rho.n_modes, "apply_gate");
  if (static_cast<int>(t.size()) != gate.arity()) throw InputError("apply_gate: wrong number of targets");
  const SparseC g = full_generator(gate, t, rho.n_modes, rho.levels());
  FockDensity out = rho;
  const CMat x = expm_apply(g, rho.rho);       // U rho
  out.rho = expm_apply(g, CMat(x.adjoint()));  // U (U rho)^dag = U rho U^dag
  return out;
}

std::vector<Mat> loss_kraus(double T, int cutoff) {
  require_cutoff(cutoff, "loss_kraus");
  if (!(T >= 0.0 && T <= 1.0)) throw InputError("loss_kraus: requires 0 <= T <= 1");
  std::vector<Mat> ks;
  for (int k = 0; k <= cutoff; ++k) {
    Mat e = Mat::Zero(cutoff + 1, cutoff + 1);
    for (int n = k; n <= cutoff; ++n)
      e(n - k, n) = std::exp(0.5 * log_binomial(n, k)) * std::pow(T, 0.5 * (n - k)) *
                    std::pow(1.0 - T, 0.5 * k);
    ks.push_back(std::move(e));
  }
  return ks;
}

std::vector<Mat> amplifier_kraus(double G, int cutoff) {
  require_cutoff(cutoff, "amplifier_kraus");
  if (!(G >= 1.0)) throw InputError("amplifier_kraus: requires G >= 1");
  std::vector<Mat> ks;
  for (int k = 0; k <= cutoff; ++k) {
    Mat a = Mat::Zero(cutoff + 1, cutoff + 1);
    for (int n = 0; n + k <= cutoff; ++n)
      a(n + k, n) = std::exp(0.5 * log_binomial(n + k, k)) * std::pow(G, -0.5 * (n + 1)) *
                    std::pow(1.0 - 1.0 / G, 0.5 * k);
    ks.push_back(std::move(a));
  }
  return ks;
}

FockDensity apply_kraus(const std::vector<Mat>& kraus, int mode, const FockDensity& rho) {
  if (mode < 0 || mode >= rho.n_modes) throw InputError("apply_kraus: mode out of range");
  FockDensity out = rho;
  out.rho = CMat::Zero(rho.rho.rows(), rho.rho.cols());
  for (const Mat& k : kraus) {
    const SparseC kf = on_mode(to_sparse(k), mode, rho.n_modes, rho.levels());
    const CMat left = kf * rho.rho;
    out.rho += (kf * CMat(left.adjoint())).adjoint();
  }
  out.deficit = std::max(0.0, 1.0 - out.rho.trace().real());
  return out;
}

FockDensity apply_phase_insensitive(double tau, double mu, int mode, const FockDensity& rho) {
  if (!(tau >= 0.0) || !(mu >= std::abs(tau - 1.0) - 1e-12))
    throw InputError("apply_phase_insensitive: requires tau >= 0 and mu >= |tau - 1|");
  const double g = 0.5 * (mu + tau + 1.0);
  const double t = std::min(1.0, tau / g);
  FockDensity out = apply_kraus(loss_kraus(t, rho.cutoff), mode, rho);
  if (g > 1.0) out = apply_kraus(amplifier_kraus(g, rho.cutoff), mode, out);
  return out;
}

double laguerre(int n, double y) {
  if (n < 0) throw InputError("laguerre: n must be >= 0");
  double l0 = 1.0;
  if (n == 0) return l0;
  double l1 = 1.0 - y;
  for (int k = 1; k < n; ++k) {
    const double l2 = ((2.0 * k + 1.0 - y) * l1 - k * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

double number_wigner(int n, double x, double p) {
  if (n < 0) throw InputError("number_wigner: n must be >= 0");
  const double y = x * x + p * p;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign / (2.0 * std::numbers::pi) * laguerre(n, y) * std::exp(-0.5 * y);
}

Vec wavefunctions(int cutoff, double x) {
  if (cutoff < 0) throw InputError("wavefunctions: cutoff must be >= 0");
  // phi_n(y) normalized Hermite functions, y = x / sqrt2; psi_n = phi_n / 2^{1/4}.
  const double y = x / std::numbers::sqrt2;
  Vec out(cutoff + 1);
  const double scale = std::pow(2.0, -0.25);
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
  out(0) = scale * cur;
  for (int n = 1; n <= cutoff; ++n) {
    const double next = std::sqrt(2.0 / n) * y * cur - std::sqrt((n - 1.0) / n) * prev;
    prev = cur;
    cur = next;
    out(n) = scale * cur;
  }
  return out;
}

double wavefunction(int n, double x) {
  if (n < 0) throw InputError("wavefunction: n must be >= 0");
  return wavefunctions(n, x)(n);
}

std::vector<Mat> photodetect_povm(double eta, int cutoff) {
  require_cutoff(cutoff, "photodetect_povm");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("photodetect_povm: requires 0 <= eta <= 1");
  std::vector<Mat> povm;
  for (int n = 0; n <= cutoff; ++n) {
    Mat pi = Mat::Zero(cutoff + 1, cutoff + 1);
    for (int m = n; m <= cutoff; ++m)
      pi(m, m) = std::exp(log_binomial(m, n)) * std::pow(eta, n) * std::pow(1.0 - eta, m - n);
    povm.push_back(std::move(pi));
  }
  return povm;
}

std::vector<double> photodetect_probabilities(const FockDensity& rho, double eta) {
  if (rho.n_modes != 1) throw InputError("photodetect_probabilities: single-mode state required");
  std::vector<double> p;
  for (const Mat& pi : photodetect_povm(eta, rho.cutoff))
    p.push_back((pi.cast<Complex>() * rho.rho).trace().real());
  return p;
}

std::vector<double> photodetect_dilation(const FockDensity& rho, double eta) {
  if (rho.n_modes != 1) throw InputError("photodetect_dilation: single-mode state required");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("photodetect_dilation: requires 0 <= eta <= 1");
  const int d = rho.levels();
  const SparseC g = generator({GateKind::BeamSplitter, std::acos(std::sqrt(eta))}, rho.cutoff);
  // Columns: B|m, 0>, m = 0 .. cutoff. B conserves total photon number, so the
  // truncated evolution of these inputs is exact.
  CMat phi = CMat::Zero(d * d, d);
  for (int m = 0; m < d; ++m) phi(m * d, m) = 1.0;
  phi = expm_apply(g, phi);
  const CMat out = phi * rho.rho * phi.adjoint();
  std::vector<double> p(d, 0.0);
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k) p[l] += out(l * d + k, l * d + k).real();
  return p;
}

SchmidtResult schmidt(const FockPure& psi) {
  if (psi.n_modes != 2) throw InputError("schmidt: two-mode pure state required");
  const int d = psi.levels();
  const CMat coeff = Eigen::Map<const CMat>(psi.amp.data(), d, d).transpose();
  Eigen::JacobiSVD<CMat> svd(coeff, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SchmidtResult res;
  for (int j = 0; j < d; ++j) res.coefficients.push_back(svd.singularValues()(j) * svd.singularValues()(j));
  res.u = svd.matrixU();
  res.v = svd.matrixV().conjugate();
  return res;
}

double entropy_of(const std::vector<double>& p, LogBase base) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * log_base(x, base);
  return s;
}

double vn_entropy(const FockDensity& rho, LogBase base) {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho.rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("vn_entropy: eigen-decomposition failed");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  for (double e : ev)
    if (e < -1e-8) {
      std::ostringstream os;
      os << "vn_entropy: density matrix has eigenvalue " << e;
      throw NumericalError(os.str());
    }
  return entropy_of(ev, base);
}

FockDensity partial_trace_fock(const FockDensity& rho, std::span<const int> keep) {
  auto k = checked_modes(keep, rho.n_modes, "partial_trace_fock");
  if (k.empty()) throw InputError("partial_trace_fock: keep set is empty");
  std::sort(k.begin(), k.end());
  std::vector<int> traced;
  for (int m = 0; m < rho.n_modes; ++m)
    if (!std::binary_search(k.begin(), k.end(), m)) traced.push_back(m);
  const int d = rho.levels();
  const int dim = static_cast<int>(rho.rho.rows());
  const int dk = ipow(d, static_cast<int>(k.size()));

  std::vector<int> keep_idx(dim), trace_idx(dim);
  for (int i = 0; i < dim; ++i) {
    int ki = 0, ti = 0;
    for (int m : k) ki = ki * d + digit(i, m, rho.n_modes, d);
    for (int m : traced) ti = ti * d + digit(i, m, rho.n_modes, d);
    keep_idx[i] = ki;
    trace_idx[i] = ti;
  }
  FockDensity out;
  out.cutoff = rho.cutoff;
  out.n_modes = static_cast<int>(k.size());
  out.deficit = rho.deficit;
  out.rho = CMat::Zero(dk, dk);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      if (trace_idx[i] == trace_idx[j]) out.rho(keep_idx[i], keep_idx[j]) += rho.rho(i, j);
  return out;
}

FockDensity partial_trace_fock(const FockDensity& rho, std::initializer_list<int> keep) {
  return partial_trace_fock(rho, std::span<const int>(keep.begin(), keep.size()));
}

FockDensity partial_trace_fock(const FockPure& psi, std::span<const int> keep) {
  auto k = checked_modes(keep, psi.n_modes, "partial_trace_fock");
  if (k.empty()) throw InputError("partial_trace_fock: keep set is empty");
  std::sort(k.begin(), k.end());
  std::vector<int> traced;
  for (int m = 0; m < psi.n_modes; ++m)
    if (!std::binary_search(k.begin(), k.end(), m)) traced.push_back(m);
  const int d = psi.levels();
  const int dim = static_cast<int>(psi.amp.size());
  const int dk = ipow(d, static_cast<int>(k.size()));
  const int dt = ipow(d, static_cast<int>(traced.size()));
  // Coefficient matrix psi(kept, traced); rho_kept = M M^dag.
  CMat coeff = CMat::Zero(dk, dt);
  for (int i = 0; i < dim; ++i) {
    int ki = 0, ti = 0;
    for (int m : k) ki = ki * d + digit(i, m, psi.n_modes, d);
    for (int m : traced) ti = ti * d + digit(i, m, psi.n_modes, d);
    coeff(ki, ti) = psi.amp(i);
  }
  FockDensity out;
  out.cutoff = psi.cutoff;
  out.n_modes = static_cast<int>(k.size());
  out.deficit = psi.deficit;
  out.rho = coeff * coeff.adjoint();
  return out;
}

FockDensity partial_transpose_fock(const FockDensity& rho, std::span<const int> transposed) {
  const auto t = checked_modes(transposed, rho.n_modes, "partial_transpose_fock");
  const int d = rho.levels();
  const int dim = static_cast<int>(rho.rho.rows());
  std::vector<int> stride;
  for (int m : t) stride.push_back(ipow(d, rho.n_modes - 1 - m));
  FockDensity out = rho;
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      int ii = i, jj = j;
      for (std::size_t q = 0; q < t.size(); ++q) {
        const int di = (i / stride[q]) % d;
        const int dj = (j / stride[q]) % d;
        ii += (dj - di) * stride[q];
        jj += (di - dj) * stride[q];
      }
      out.rho(ii, jj) = rho.rho(i, j);
    }
  return out;
}

double trace_norm_hermitian(const CMat& h) {
  const int dim = static_cast<int>(h.rows());
  UnionFind uf(dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < j; ++i)
      if (h(i, j) != Complex(0.0) || h(j, i) != Complex(0.0)) uf.unite(i, j);
  std::vector<std::vector<int>> groups(dim);
  for (int i = 0; i < dim; ++i) groups[uf.find(i)].push_back(i);
  double norm = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const auto n = static_cast<Eigen::Index>(g.size());
    CMat block(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) block(a, b) = h(g[a], g[b]);
    Eigen::SelfAdjointEigenSolver<CMat> es(block, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("trace_norm_hermitian: eigen-decomposition failed");
    norm += es.eigenvalues().cwiseAbs().sum();
  }
  return norm;
}

double log_negativity_fock(const FockDensity& rho, std::span<const int> transposed, LogBase base) {
  if (transposed.empty()) throw InputError("log_negativity_fock: transposed set is empty");
  return log_base(trace_norm_hermitian(partial_transpose_fock(rho, transposed).rho), base);
}

double trace_distance(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputError("trace_distance: shape mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double mean_photon_number(const FockDensity& rho, int mode) {
  if (mode < 0 || mode >= rho.n_modes) throw InputError("mean_photon_number: mode out of range");
  const int d = rho.levels();
  double n = 0.0;
  for (int i = 0; i < rho.rho.rows(); ++i) n += digit(i, mode, rho.n_modes, d) * rho.rho(i, i).real();
  return n;
}

OnOffFock on_off_probabilities(const FockDensity& rho, int measured) {
  if (rho.n_modes < 2) throw InputError("on_off_probabilities: need at least two modes");
  if (measured < 0 || measured >= rho.n_modes) throw InputError("on_off_probabilities: mode out of range");
  const int d = rho.levels();
  const int dim = static_cast<int>(rho.rho.rows());
  std::vector<int> rest;
  for (int m = 0; m < rho.n_modes; ++m)
    if (m != measured) rest.push_back(m);
  const FockDensity reduced = partial_trace_fock(rho, rest);

  FockDensity off;
  off.cutoff = rho.cutoff;
  off.n_modes = rho.n_modes - 1;
  off.rho = CMat::Zero(reduced.rho.rows(), reduced.rho.cols());
  std::vector<int> rest_idx(dim, -1);
  for (int i = 0; i < dim; ++i) {
    if (digit(i, measured, rho.n_modes, d) != 0) continue;
    int r = 0;
    for (int m : rest) r = r * d + digit(i, m, rho.n_modes, d);
    rest_idx[i] = r;
  }
  for (int j = 0; j < dim; ++j) {
    if (rest_idx[j] < 0) continue;
    for (int i = 0; i < dim; ++i)
      if (rest_idx[i] >= 0) off.rho(rest_idx[i], rest_idx[j]) = rho.rho(i, j);
  }

  OnOffFock res;
  res.p_off = off.rho.trace().real();
  res.p_on = rho.rho.trace().real() - res.p_off;
  FockDensity on = reduced;
  on.rho -= off.rho;
  if (res.p_off > 0.0) {
    off.rho /= res.p_off;
    res.off_state = std::move(off);
  }
  if (res.p_on > 1e-14) {
    on.rho /= res.p_on;
    res.on_state = std::move(on);
  } else {
    res.p_on = std::max(0.0, res.p_on);
  }
  return res;
}

OnOffFock on_off_probabilities(const FockPure& psi, int measured) {
  if (psi.n_modes < 2) throw InputError("on_off_probabilities: need at least two modes");
  if (measured < 0 || measured >= psi.n_modes) throw InputError("on_off_probabilities: mode out of range");
  const int d = psi.levels();
  std::vector<int> rest;
  for (int m = 0; m < psi.n_modes; ++m)
    if (m != measured) rest.push_back(m);
  const FockDensity reduced = partial_trace_fock(psi, rest);

  FockPure off;
  off.cutoff = psi.cutoff;
  off.n_modes = psi.n_modes - 1;
  off.amp = CVec::Zero(reduced.rho.rows());
  for (int i = 0; i < psi.amp.size(); ++i) {
    if (digit(i, measured, psi.n_modes, d) != 0) continue;
    int r = 0;
    for (int m : rest) r = r * d + digit(i, m, psi.n_modes, d);
    off.amp(r) = psi.amp(i);
  }

  OnOffFock res;
  res.p_off = off.amp.squaredNorm();
  res.p_on = psi.amp.squaredNorm() - res.p_off;
  FockDensity off_rho = to_density(off);
  FockDensity on = reduced;
  on.rho -= off_rho.rho;
  if (res.p_off > 0.0) {
    off_rho.rho /= res.p_off;
    res.off_state = std::move(off_rho);
  }
  if (res.p_on > 1e-14) {
    on.rho /= res.p_on;
    res.on_state = std::move(on);
  } else {
    res.p_on = std::max(0.0, res.p_on);
  }
  return res;
}

HomodyneFock homodyne_fock(const FockDensity& rho, int measured, double phi, double x0) {
  if (rho.n_modes < 2) throw InputError("homodyne_fock: need at least two modes");
  if (measured < 0 || measured >= rho.n_modes) throw InputError("homodyne_fock: mode out of range");
  const int d = rho.levels();
  const int dim = static_cast<int>(rho.rho.rows());
  const Vec psi = wavefunctions(rho.cutoff, x0);
  // <x0| R(phi) on the measured mode, R(phi) = exp(-i phi a^dag a).
  std::vector<Complex> bra(d);
  for (int n = 0; n < d; ++n) bra[n] = psi(n) * std::exp(Complex(0.0, -phi * n));

  std::vector<int> rest;
  for (int m = 0; m < rho.n_modes; ++m)
    if (m != measured) rest.push_back(m);
  const int dr = ipow(d, static_cast<int>(rest.size()));
  std::vector<int> rest_idx(dim), meas(dim);
  for (int i = 0; i < dim; ++i) {
    int r = 0;
    for (int m : rest) r = r * d + digit(i, m, rho.n_modes, d);
    rest_idx[i] = r;
    meas[i] = digit(i, measured, rho.n_modes, d);
  }
  HomodyneFock res;
  res.conditional.cutoff = rho.cutoff;
  res.conditional.n_modes = rho.n_modes - 1;
  res.conditional.rho = CMat::Zero(dr, dr);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      res.conditional.rho(rest_idx[i], rest_idx[j]) +=
          bra[meas[i]] * rho.rho(i, j) * std::conj(bra[meas[j]]);
  res.density = res.conditional.rho.trace().real();
  if (res.density > 0.0) res.conditional.rho /= res.density;
  return res;
}

double quadrature_density_fock(const FockDensity& rho, double x) {
  if (rho.n_modes != 1) throw InputError("quadrature_density_fock: single-mode state required");
  const Vec psi = wavefunctions(rho.cutoff, x);
  return (psi.cast<Complex>().transpose() * rho.rho * psi.cast<Complex>())(0, 0).real();
}

HomodyneMoments homodyne_moments(const FockDensity& rho, Complex alpha_lo) {
  if (rho.n_modes != 1) throw InputError("homodyne_moments: single-mode signal required");
  // Smallest local-oscillator cutoff whose coherent tail is negligible.
  int lo_cutoff = std::max(4, static_cast<int>(std::ceil(std::norm(alpha_lo) + 12.0 * std::abs(alpha_lo) + 20.0)));
  const FockPure lo = coherent(alpha_lo, lo_cutoff, 1e-15);

  const int ds = rho.levels();
  const int dc = lo.levels();
  const auto [a_s, ad_s] = ladder_ops(rho.cutoff);
  const auto [c_m, cd_m] = ladder_ops(lo_cutoff);
  const SparseC a = Eigen::kroneckerProduct(to_sparse(a_s), identity_sparse(dc));
  const SparseC c = Eigen::kroneckerProduct(identity_sparse(ds), to_sparse(c_m));
  const SparseC ad = SparseC(a.adjoint());
  const SparseC cd = SparseC(c.adjoint());
  const SparseC nd = SparseC(ad * c + cd * a);
  const SparseC nd2 = SparseC(nd * nd);

  const CMat lo_rho = lo.amp * lo.amp.adjoint();
  const CMat joint = Eigen::kroneckerProduct(rho.rho, lo_rho).eval();
  auto expect = [&](const SparseC& op) { return (op * joint).trace().real(); };

  HomodyneMoments m;
  m.mean_nd = expect(nd);
  m.second_nd = expect(nd2);
  m.var_nd = m.second_nd - m.mean_nd * m.mean_nd;

  const double phi = std::arg(alpha_lo);
  const SparseC as = to_sparse(a_s);
  const SparseC ads = SparseC(as.adjoint());
  const SparseC xphi = SparseC(std::exp(Complex(0.0, -phi)) * as + std::exp(Complex(0.0, phi)) * ads);
  const SparseC xphi2 = SparseC(xphi * xphi);
  m.mean_xphi = (xphi * rho.rho).trace().real();
  m.second_xphi = (xphi2 * rho.rho).trace().real();
  m.mean_n = (SparseC(ads * as) * rho.rho).trace().real();
  return m;
}

}  // namespace cvtk::fock
