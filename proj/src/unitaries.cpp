#include "cvtk/unitaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "cvtk/errors.hpp"

namespace cvtk {

namespace {

Mat z_matrix() {
  Mat z = Mat::Identity(2, 2);
  z(1, 1) = -1.0;
  return z;
}

void require_same_modes(const SymplecticOp& a, const SymplecticOp& b, const char* who) {
  if (a.S.rows() != b.S.rows()) {
    std::ostringstream os;
    os << who << ": mode count mismatch (" << a.n_modes() << " vs " << b.n_modes() << ")";
    throw InputError(os.str());
  }
}

void require_op_shape(const SymplecticOp& op, const char* who) {
  const auto n = op.S.rows();
  if (n == 0 || n % 2 != 0 || op.S.cols() != n || op.d.size() != n)
    throw InputError(std::string(who) + ": malformed SymplecticOp (S must be 2N x 2N, d length 2N)");
}

// Largest-magnitude component made positive; fixes the eigenvector sign.
void canonical_sign(Eigen::Ref<Vec> v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
}

}  // namespace

SymplecticOp SymplecticOp::identity(int n_modes) {
  if (n_modes < 1) throw InputError("identity: n_modes must be >= 1");
  return {Vec::Zero(2 * n_modes), Mat::Identity(2 * n_modes, 2 * n_modes)};
}

double symplectic_residual(const Mat& S) {
  if (S.rows() == 0 || S.rows() % 2 != 0 || S.cols() != S.rows())
    throw InputError("symplectic_residual: matrix must be square with even size");
  const Mat om = omega_matrix(static_cast<int>(S.rows() / 2));
  return (S * om * S.transpose() - om).cwiseAbs().maxCoeff();
}

bool is_symplectic(const Mat& S, double tol) { return symplectic_residual(S) <= tol; }

SymplecticOp displacement(double x, double p) {
  SymplecticOp op = SymplecticOp::identity(1);
  op.d << x, p;
  return op;
}

SymplecticOp squeezer(double r) {
  SymplecticOp op = SymplecticOp::identity(1);
  op.S(0, 0) = std::exp(-r);
  op.S(1, 1) = std::exp(r);
  return op;
}

SymplecticOp rotation(double theta) {
  SymplecticOp op = SymplecticOp::identity(1);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  op.S << c, s, -s, c;
  return op;
}

SymplecticOp beam_splitter(double beta) {
  SymplecticOp op = SymplecticOp::identity(2);
  const double c = std::cos(beta);
  const double s = std::sin(beta);
  const Mat id = Mat::Identity(2, 2);
  op.S.block(0, 0, 2, 2) = c * id;
  op.S.block(0, 2, 2, 2) = -s * id;
  op.S.block(2, 0, 2, 2) = s * id;
  op.S.block(2, 2, 2, 2) = c * id;
  return op;
}

SymplecticOp two_mode_squeezer(double r) {
  SymplecticOp op = SymplecticOp::identity(2);
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  const Mat id = Mat::Identity(2, 2);
  const Mat z = z_matrix();
  op.S.block(0, 0, 2, 2) = ch * id;
  op.S.block(0, 2, 2, 2) = -sh * z;
  op.S.block(2, 0, 2, 2) = -sh * z;
  op.S.block(2, 2, 2, 2) = ch * id;
  return op;
}

SymplecticOp embed(const SymplecticOp& op, int n_modes, std::span<const int> targets) {
  require_op_shape(op, "embed");
  if (static_cast<int>(targets.size()) != op.n_modes()) {
    std::ostringstream os;
    os << "embed: op acts on " << op.n_modes() << " mode(s) but " << targets.size()
       << " target(s) given";
    throw InputError(os.str());
  }
  std::set<int> seen;
  for (int t : targets) {
    if (t < 0 || t >= n_modes)
      throw InputError("embed: target mode " + std::to_string(t) + " out of range");
    if (!seen.insert(t).second)
      throw InputError("embed: target mode " + std::to_string(t) + " repeated");
  }
  SymplecticOp out = SymplecticOp::identity(n_modes);
  const auto idx = quadrature_indices(targets);
  const auto k = static_cast<Eigen::Index>(idx.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    out.d(idx[i]) = op.d(i);
    for (Eigen::Index j = 0; j < k; ++j) out.S(idx[i], idx[j]) = op.S(i, j);
  }
  return out;
}

SymplecticOp embed(const SymplecticOp& op, int n_modes, std::initializer_list<int> targets) {
  return embed(op, n_modes, std::span<const int>(targets.begin(), targets.size()));
}

GaussianState apply(const SymplecticOp& op, const GaussianState& state, double tol) {
  require_op_shape(op, "apply");
  if (op.n_modes() != state.n_modes()) {
    std::ostringstream os;
    os << "apply: op acts on " << op.n_modes() << " mode(s), state has " << state.n_modes();
    throw InputError(os.str());
  }
  const double res = symplectic_residual(op.S);
  if (res > tol) {
    std::ostringstream os;
    os << "apply: S is not symplectic (max |S Omega S^T - Omega| = " << res << ")";
    throw InputError(os.str());
  }
  return {op.S * state.mean() + op.d, op.S * state.cov() * op.S.transpose()};
}

SymplecticOp compose(const SymplecticOp& op2, const SymplecticOp& op1) {
  require_op_shape(op1, "compose");
  require_op_shape(op2, "compose");
  require_same_modes(op2, op1, "compose");
  return {op2.S * op1.d + op2.d, op2.S * op1.S};
}

SymplecticOp inverse(const SymplecticOp& op) {
  require_op_shape(op, "inverse");
  const Mat om = omega_matrix(op.n_modes());
  const Mat s_inv = -om * op.S.transpose() * om;
  return {-s_inv * op.d, s_inv};
}

bool is_passive(const SymplecticOp& op, double tol) {
  require_op_shape(op, "is_passive");
  const auto n = op.S.rows();
  const double orth = (op.S.transpose() * op.S - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  return op.d.norm() <= tol && orth <= tol;
}

WilliamsonDecomposition williamson(const Mat& V) {
  const auto dim = V.rows();
  if (dim == 0 || dim % 2 != 0 || V.cols() != dim)
    throw InputError("williamson: V must be square with even size");
  if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, V.cwiseAbs().maxCoeff()))
    throw InputError("williamson: V is not symmetric");
  const int n = static_cast<int>(dim / 2);
  const Mat vs = 0.5 * (V + V.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> es(vs);
  if (es.info() != Eigen::Success) throw NumericalError("williamson: eigen-decomposition of V failed");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "williamson: V is not positive definite (min eigenvalue " << es.eigenvalues().minCoeff()
       << ")";
    throw PhysicalityError(os.str());
  }
  const Mat root = es.operatorSqrt();
  const Mat inv_root = es.operatorInverseSqrt();

  // i V^{-1/2} Omega V^{-1/2} is Hermitian with eigenvalues +-1/nu.
  const Mat a = inv_root * omega_matrix(n) * inv_root;
  const CMat h = Complex(0.0, 1.0) * a.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMat> hs(h);
  if (hs.info() != Eigen::Success)
    throw NumericalError("williamson: Hermitian eigen-decomposition failed");

  // Ascending eigenvalues: the last n are +1/nu in descending-nu order.
  Mat o(dim, dim);
  std::vector<double> nu(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Index col = dim - n + j;
    const double lam = hs.eigenvalues()(col);
    if (!(lam > 0.0)) throw NumericalError("williamson: spectrum does not pair into +-1/nu");
    nu[j] = 1.0 / lam;
    const CVec u = hs.eigenvectors().col(col);
    o.col(2 * j) = std::sqrt(2.0) * u.imag();
    o.col(2 * j + 1) = std::sqrt(2.0) * u.real();
  }

  // Fix the U(k) freedom inside each degenerate group: choose the unitary that
  // brings the group's columns closest to the matching identity columns.
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && std::abs(nu[end] - nu[start]) <= 1e-8 * nu[start]) ++end;
    const int k = end - start;
    const Mat m = o.block(2 * start, 2 * start, 2 * k, 2 * k);
    CMat mc(k, k);
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        const auto b = m.block(2 * j, 2 * l, 2, 2);
        mc(j, l) = Complex(0.5 * (b(0, 0) + b(1, 1)), 0.5 * (b(0, 1) - b(1, 0)));
      }
    Eigen::JacobiSVD<CMat> svd(mc, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMat u = svd.matrixV() * svd.matrixU().adjoint();
    Mat ur(2 * k, 2 * k);
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        ur(2 * j, 2 * l) = u(j, l).real();
        ur(2 * j, 2 * l + 1) = u(j, l).imag();
        ur(2 * j + 1, 2 * l) = -u(j, l).imag();
        ur(2 * j + 1, 2 * l + 1) = u(j, l).real();
      }
    o.middleCols(2 * start, 2 * k) = (o.middleCols(2 * start, 2 * k) * ur).eval();
    start = end;
  }

  Vec d_inv_root(dim);
  for (int j = 0; j < n; ++j) d_inv_root(2 * j) = d_inv_root(2 * j + 1) = 1.0 / std::sqrt(nu[j]);
  WilliamsonDecomposition out;
  out.W = root * o * d_inv_root.asDiagonal();
  out.spectrum = std::move(nu);
  return out;
}

WilliamsonDecomposition williamson_standard_form(double a, double b, double c) {
  const double disc = (a + b) * (a + b) - 4.0 * c * c;
  if (!(a > 0.0) || !(b > 0.0) || !(disc > 0.0))
    throw InputError("williamson_standard_form: requires a, b > 0 and (a+b)^2 > 4c^2");
  const double s = std::sqrt(disc);
  const double wp = std::sqrt(0.5 * ((a + b) / s + 1.0));
  const double wm = std::copysign(std::sqrt(std::max(0.0, 0.5 * ((a + b) / s - 1.0))), c);
  const Mat id = Mat::Identity(2, 2);
  const Mat z = z_matrix();
  WilliamsonDecomposition out;
  out.W = Mat(4, 4);
  out.W << wp * id, wm * z, wm * z, wp * id;
  out.spectrum = {0.5 * (s - (b - a)), 0.5 * (s + (b - a))};
  return out;
}

Mat squeeze_block(const std::vector<double>& r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Mat q = Mat::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    q(2 * j, 2 * j) = std::exp(-r[j]);
    q(2 * j + 1, 2 * j + 1) = std::exp(r[j]);
  }
  return q;
}

EulerDecomposition euler_decompose(const Mat& S) {
  const double res = symplectic_residual(S);
  if (res > kSymplecticTol) {
    std::ostringstream os;
    os << "euler_decompose: S is not symplectic (max |S Omega S^T - Omega| = " << res << ")";
    throw InputError(os.str());
  }
  const auto dim = S.rows();
  const int n = static_cast<int>(dim / 2);
  const Mat om = omega_matrix(n);

  // Polar factor P = (S S^T)^{1/2}; its eigenvalues come in pairs (mu, 1/mu).
  Eigen::SelfAdjointEigenSolver<Mat> es(S * S.transpose());
  if (es.info() != Eigen::Success) throw NumericalError("euler_decompose: eigen-decomposition failed");
  const Mat p = es.operatorSqrt();

  Mat k = Mat::Zero(dim, dim);
  int filled = 0;
  for (Eigen::Index i = dim - 1; i >= 0 && filled < n; --i) {
    const double mu = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    if (mu <= 1.0 + 1e-7) break;
    Vec v = es.eigenvectors().col(i);
    canonical_sign(v);
    k.col(2 * filled) = om * v;
    k.col(2 * filled + 1) = v;
    ++filled;
  }

  // Unsqueezed subspace: symplectic Gram-Schmidt seeded by unit vectors,
  // p-quadratures first, largest residual wins (ties to the lowest index).
  while (filled < n) {
    Vec best;
    double best_norm = -1.0;
    for (int j = 0; j < n; ++j) {
      for (int q : {2 * j + 1, 2 * j}) {
        Vec w = Vec::Unit(dim, q);
        const auto used = k.leftCols(2 * filled);
        w -= used * (used.transpose() * w);
        w -= used * (used.transpose() * w);
        const double nw = w.norm();
        if (nw > best_norm + 1e-12) {
          best_norm = nw;
          best = w / nw;
        }
      }
    }
    if (best_norm < 1e-6) throw NumericalError("euler_decompose: symplectic Gram-Schmidt stalled");
    k.col(2 * filled) = om * best;
    k.col(2 * filled + 1) = best;
    ++filled;
  }

  const Mat dk = k.transpose() * p * k;
  std::vector<double> r(n);
  for (int j = 0; j < n; ++j) r[j] = 0.5 * std::log(dk(2 * j + 1, 2 * j + 1) / dk(2 * j, 2 * j));

  std::vector<double> neg(n);
  std::transform(r.begin(), r.end(), neg.begin(), [](double x) { return -x; });
  EulerDecomposition out;
  out.L = squeeze_block(neg) * k.transpose() * S;
  out.K = std::move(k);
  out.squeeze_params = std::move(r);
  return out;
}

}  // namespace cvtk
