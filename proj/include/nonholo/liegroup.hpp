#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/system.hpp"

namespace nonholo {

/// so(3) hat map: hat(v) w = v x w.
inline Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

inline Eigen::Vector3d unhat(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

/// Rank <= 2 element a b^T - b a^T of so(n).  For n=3: wedge(a,b) = hat(b x a).
inline Mat wedge(const Vec& a, const Vec& b) {
  return a * b.transpose() - b * a.transpose();
}

/// Killing-type pairing <X, Y> = -1/2 tr(X Y) on so(n); for hats of vectors
/// it reduces to the Euclidean dot product.
inline double killing_pair(const Mat& x, const Mat& y) {
  return -0.5 * (x * y).trace();
}

inline double killing_norm(const Mat& x) {
  return std::sqrt(std::max(0.0, killing_pair(x, x)));
}

/// Ad_g xi = g xi g^{-1}, re-skewed against roundoff.
inline Mat adjoint(const Mat& g, const Mat& xi) {
  Mat out = g * xi * g.transpose();
  return 0.5 * (out - out.transpose().eval());
}

/// Nearest special-orthogonal matrix (polar factor via SVD).  Throws if the
/// input is orientation reversing or singular.
inline Mat reorthonormalize(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() <= 0.0)
    throw OrientationError("matrix is not orientation preserving");
  return r;
}

/// exp: so(n) -> SO(n).  Rodrigues for n=3, scaling-and-squaring series
/// otherwise; the result is snapped back to SO(n).
inline Mat exp_map(const Mat& xi) {
  const int n = int(xi.rows());
  if (n == 3) {
    const Eigen::Vector3d v = unhat(xi);
    const double th = v.norm();
    Eigen::Matrix3d out;
    if (th < 1e-12) {
      out = Eigen::Matrix3d::Identity() + hat(v) + 0.5 * hat(v) * hat(v);
    } else {
      const Eigen::Matrix3d K = hat(v / th);
      out = Eigen::Matrix3d::Identity() + std::sin(th) * K +
            (1.0 - std::cos(th)) * K * K;
    }
    return reorthonormalize(out);
  }
  // scale so the series argument has norm <= 1/2, then square back
  int squarings = 0;
  double scale = xi.norm();
  while (scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Mat t = xi / std::pow(2.0, squarings);
  Mat term = Mat::Identity(n, n);
  Mat sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = (term * t / double(k)).eval();
    sum += term;
    if (term.norm() < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return reorthonormalize(sum);
}

/// Number of independent entries of so(n).
inline int son_dim(int n) { return n * (n - 1) / 2; }

/// Killing-orthonormal basis of so(n): wedge(e_i, e_j) for i < j in
/// lexicographic order.
inline std::vector<Mat> son_basis(int n) {
  std::vector<Mat> basis;
  basis.reserve(son_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Mat e = Mat::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = -1.0;
      basis.push_back(e);
    }
  return basis;
}

/// Coordinates of xi in son_basis order: c_(i,j) = xi(i,j), i < j.
inline Vec son_vectorize(const Mat& xi) {
  const int n = int(xi.rows());
  Vec v(son_dim(n));
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) v[idx++] = xi(i, j);
  return v;
}

inline Mat son_unvectorize(const Vec& v, int n) {
  Mat xi = Mat::Zero(n, n);
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      xi(i, j) = v[idx];
      xi(j, i) = -v[idx];
      ++idx;
    }
  return xi;
}

/// Left-invariant inertia operator I: so(n) -> so(n), symmetric positive
/// definite with respect to killing_pair.  Stored either in the classical
/// mass-matrix form I(W) = J W + W J (J symmetric positive definite n x n)
/// or as an arbitrary SPD coefficient matrix in son_basis coordinates.
class SonInertia {
 public:
  static SonInertia from_J(const Mat& J) {
    SonInertia out;
    out.n_ = int(J.rows());
    if (J.cols() != out.n_) throw std::invalid_argument("J must be square");
    if ((J - J.transpose()).norm() > 1e-12 * (1.0 + J.norm()))
      throw std::invalid_argument("J must be symmetric");
    out.J_ = 0.5 * (J + J.transpose());
    out.assemble([&](const Mat& w) { return Mat(out.J_ * w + w * out.J_); });
    return out;
  }

  static SonInertia from_coeffs(int n, const Mat& M) {
    SonInertia out;
    out.n_ = n;
    const int d = son_dim(n);
    if (M.rows() != d || M.cols() != d)
      throw std::invalid_argument("coefficient matrix has wrong size");
    if ((M - M.transpose()).norm() > 1e-12 * (1.0 + M.norm()))
      throw std::invalid_argument("coefficient matrix must be symmetric");
    out.M_ = 0.5 * (M + M.transpose());
    out.llt_.compute(out.M_);
    if (out.llt_.info() != Eigen::Success)
      throw std::invalid_argument("inertia operator is not positive definite");
    return out;
  }

  int n() const { return n_; }
  bool has_J() const { return J_.size() > 0; }
  const Mat& J() const { return J_; }
  const Mat& coeff_matrix() const { return M_; }

  Mat apply(const Mat& w) const {
    if (has_J()) return J_ * w + w * J_;
    return son_unvectorize(M_ * son_vectorize(w), n_);
  }

  Mat solve(const Mat& k) const {
    return son_unvectorize(llt_.solve(son_vectorize(k)), n_);
  }

 private:
  SonInertia() = default;

  template <typename Op>
  void assemble(Op&& op) {
    const int d = son_dim(n_);
    M_.resize(d, d);
    const auto basis = son_basis(n_);
    for (int c = 0; c < d; ++c) M_.col(c) = son_vectorize(op(basis[c]));
    M_ = 0.5 * (M_ + M_.transpose().eval());
    llt_.compute(M_);
    if (llt_.info() != Eigen::Success)
      throw std::invalid_argument("inertia operator is not positive definite");
  }

  int n_ = 0;
  Mat J_;  // empty when constructed from coefficients
  Mat M_;  // son-basis coefficient matrix (always assembled)
  Eigen::LLT<Mat> llt_;
};

/// 3x3 vector-inertia tensor of an so(3) operator: the matrix of I in the
/// basis hat(e_i), so that I(hat(v)) = hat(I3 v).  For I(W) = JW + WJ this is
/// the classical I3 = tr(J) Id - J.
inline Eigen::Matrix3d vector_inertia(const SonInertia& inertia) {
  if (inertia.n() != 3)
    throw std::invalid_argument("vector_inertia needs an so(3) operator");
  Eigen::Matrix3d out;
  for (int j = 0; j < 3; ++j) {
    const Eigen::Matrix3d img = inertia.apply(hat(Eigen::Vector3d::Unit(j)));
    for (int i = 0; i < 3; ++i)
      out(i, j) = killing_pair(hat(Eigen::Vector3d::Unit(i)), img);
  }
  return out;
}

}  // namespace nonholo
