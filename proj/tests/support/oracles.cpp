#include "oracles.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace acyl::testing {

namespace {

using quad = __float128;

struct QuadMat {
  Index rows, cols;
  std::vector<quad> v;
  QuadMat(Index r, Index c) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), quad(0)) {}
  quad& operator()(Index i, Index j) { return v[static_cast<std::size_t>(i * cols + j)]; }
};

// Solves lhs * X = rhs by Gaussian elimination with partial pivoting.
QuadMat solve(QuadMat lhs, QuadMat rhs) {
  const Index n = lhs.rows, m = rhs.cols;
  auto mag = [](quad v) { return v < 0 ? -v : v; };
  for (Index col = 0; col < n; ++col) {
    Index piv = col;
    for (Index r = col + 1; r < n; ++r) {
      if (mag(lhs(r, col)) > mag(lhs(piv, col))) piv = r;
    }
    if (piv != col) {
      for (Index j = 0; j < n; ++j) std::swap(lhs(col, j), lhs(piv, j));
      for (Index j = 0; j < m; ++j) std::swap(rhs(col, j), rhs(piv, j));
    }
    for (Index r = col + 1; r < n; ++r) {
      const quad f = lhs(r, col) / lhs(col, col);
      if (f == 0) continue;
      for (Index j = col; j < n; ++j) lhs(r, j) -= f * lhs(col, j);
      for (Index j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
    }
  }
  for (Index col = n - 1; col >= 0; --col) {
    for (Index j = 0; j < m; ++j) {
      quad s = rhs(col, j);
      for (Index k = col + 1; k < n; ++k) s -= lhs(col, k) * rhs(k, j);
      rhs(col, j) = s / lhs(col, col);
    }
  }
  return rhs;
}

QuadMat to_quad(const Mat& a) {
  QuadMat q(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) q(i, j) = quad(a(i, j));
  return q;
}

QuadMat multiply(QuadMat& a, QuadMat& b) {
  QuadMat c(a.rows, b.cols);
  for (Index i = 0; i < a.rows; ++i)
    for (Index j = 0; j < b.cols; ++j) {
      quad s = 0;
      for (Index k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

QuadMat transpose(QuadMat& a) {
  QuadMat t(a.cols, a.rows);
  for (Index i = 0; i < a.rows; ++i)
    for (Index j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

Mat to_double(QuadMat& q) {
  Mat out(q.rows, q.cols);
  for (Index i = 0; i < q.rows; ++i)
    for (Index j = 0; j < q.cols; ++j) out(i, j) = static_cast<double>(q(i, j));
  return out;
}

QuadMat identity(Index n) {
  QuadMat q(n, n);
  for (Index i = 0; i < n; ++i) q(i, i) = 1;
  return q;
}

}  // namespace

Mat tikhonov_pinv_quad(const Mat& a, double eps) {
  QuadMat aq = to_quad(a);
  QuadMat at = transpose(aq);
  QuadMat lhs = multiply(at, aq);
  for (Index i = 0; i < lhs.rows; ++i) lhs(i, i) += quad(eps);
  QuadMat x = solve(lhs, at);
  return to_double(x);
}

double min_form_on_fiber(const Mat& q, const Mat& c, const Vec& y) {
  Eigen::FullPivLU<Mat> lu(c);
  const Vec xp = lu.solve(y);
  const Mat z = lu.kernel();
  if (lu.rank() == c.cols()) return xp.dot(q * xp);
  // x = xp + Z w, minimize (xp + Z w)^T Q (xp + Z w).
  const Mat h = z.transpose() * q * z;
  const Vec g = z.transpose() * q * xp;
  const Vec w = -h.completeOrthogonalDecomposition().solve(g);
  const Vec x = xp + z * w;
  return x.dot(q * x);
}

Mat inflated_image(const Mat& q, const Mat& c, double eps) {
  QuadMat qe = to_quad(q);
  for (Index i = 0; i < qe.rows; ++i) qe(i, i) += quad(eps);
  QuadMat cq = to_quad(c);
  QuadMat ct = transpose(cq);
  QuadMat x = solve(qe, ct);
  QuadMat s = multiply(cq, x);
  QuadMat r = solve(s, identity(c.rows()));
  return to_double(r);
}

Vec sample_in_cylinder(Gen& g, const Mat& q, bool boundary, double spread) {
  const Index n = q.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  const double tol = 1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Vec x = Vec::Zero(n);
  Vec range_part = Vec::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Vec v = es.eigenvectors().col(i);
    if (es.eigenvalues()(i) > tol) {
      range_part += g.normal() * v;
    } else {
      x += g.uniform(-spread, spread) * v;
    }
  }
  const double val = range_part.dot(q * range_part);
  if (val > 0.0) {
    const Index k = (es.eigenvalues().array() > tol).count();
    const double r = boundary ? 1.0 : std::pow(g.uniform(0.0, 1.0), 1.0 / static_cast<double>(k));
    range_part *= r / std::sqrt(val);
  }
  return x + range_part;
}

double scalar_certificate(double lambda, double b, double g, double alpha) {
  // [(-2 lambda + alpha) p, p b; p b, -alpha g] < 0 with p > 0
  //   <=> alpha < 2 lambda and p < alpha (2 lambda - alpha) g / b^2.
  if (alpha <= 0.0 || alpha >= 2.0 * lambda) return 0.0;
  return alpha * (2.0 * lambda - alpha) * g / (b * b);
}

double scalar_bound(double lambda, double b, double g) { return b * b / (g * lambda * lambda); }

}  // namespace acyl::testing
