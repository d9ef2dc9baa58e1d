#include "hpds/matrix_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hpds/errors.hpp"

namespace hpds {

double RankTolerance::threshold(Eigen::Index rows, Eigen::Index cols,
                                double sigma_max) const {
  const double eps = std::numeric_limits<double>::epsilon();
  const double v =
      value.value_or(static_cast<double>(std::max(rows, cols)) * eps);
  return mode == Mode::kRelative ? v * sigma_max : v;
}

namespace {

void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite())
    throw NumericError(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace

CompactSvd compact_svd(const Matrix& m, const RankTolerance& tol) {
  require_finite(m, "compact_svd");
  CompactSvd out;
  if (m.size() == 0 || m.isZero(0.0)) {
    out.U = Matrix(m.rows(), 0);
    out.S = Vector(0);
    out.V = Matrix(m.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = tol.threshold(m.rows(), m.cols(), s(0));
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  out.U = svd.matrixU().leftCols(r);
  out.S = s.head(r);
  out.V = svd.matrixV().leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index arg = 0;
    out.U.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.U(arg, j) < 0) {
      out.U.col(j) *= -1.0;
      out.V.col(j) *= -1.0;
    }
  }
  return out;
}

Eigen::Index numerical_rank(const Matrix& m, const RankTolerance& tol) {
  return compact_svd(m, tol).rank();
}

Matrix pinv(const Matrix& m, const RankTolerance& tol) {
  const CompactSvd svd = compact_svd(m, tol);
  return svd.V * svd.S.cwiseInverse().asDiagonal() * svd.U.transpose();
}

Matrix orthonormal_basis(const Matrix& m, const RankTolerance& tol) {
  return compact_svd(m, tol).U;
}

namespace {

void require_orthonormal(const Matrix& u, const char* who) {
  if (u.cols() == 0) return;
  const Matrix gram = u.transpose() * u;
  const double dev =
      (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-8)
    throw ArgumentError(std::string(who) +
                        ": input columns are not orthonormal (deviation " +
                        std::to_string(dev) + ")");
}

}  // namespace

double max_principal_angle(const Matrix& u1, const Matrix& u2) {
  require_orthonormal(u1, "max_principal_angle");
  require_orthonormal(u2, "max_principal_angle");
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols())
    throw ShapeError("max_principal_angle: bases have different shapes");
  if (u1.cols() == 0) return 0.0;
  // sin of the largest angle = ||(I - U1 U1^T) U2||_2, accurate for small angles.
  const Matrix residual = u2 - u1 * (u1.transpose() * u2);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const double s = std::min(1.0, svd.singularValues()(0));
  return std::asin(s);
}

bool subspace_equal(const Matrix& u1, const Matrix& u2, double tol) {
  require_orthonormal(u1, "subspace_equal");
  require_orthonormal(u2, "subspace_equal");
  if (u1.rows() != u2.rows()) return false;
  if (u1.cols() != u2.cols()) return false;
  return max_principal_angle(u1, u2) <= tol;
}

Matrix least_squares(const Matrix& a, const Matrix& b, const RankTolerance& tol) {
  if (a.rows() != b.rows())
    throw ShapeError("least_squares: A has " + std::to_string(a.rows()) +
                     " rows, B has " + std::to_string(b.rows()));
  return pinv(a, tol) * b;
}

}  // namespace hpds
