#pragma once

#include <optional>

#include <Eigen/Dense>

namespace hpds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Threshold below which singular values are treated as zero.
struct RankTolerance {
  enum class Mode { kRelative, kAbsolute };

  Mode mode = Mode::kRelative;
  // Unset means the default max(rows, cols) * machine epsilon (relative).
  std::optional<double> value;

  static RankTolerance relative(double v) { return {Mode::kRelative, v}; }
  static RankTolerance absolute(double v) { return {Mode::kAbsolute, v}; }

  // Absolute cutoff for a rows x cols matrix with largest singular value sigma_max.
  double threshold(Eigen::Index rows, Eigen::Index cols, double sigma_max) const;
};

// U (m x r), S (r, descending, positive), V (n x r).
struct CompactSvd {
  Matrix U;
  Vector S;
  Matrix V;

  Eigen::Index rank() const { return S.size(); }
  Matrix reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

// Thin SVD truncated at the tolerance. Each column of U is signed so that
// its largest-magnitude entry (first on ties) is positive.
CompactSvd compact_svd(const Matrix& m, const RankTolerance& tol = {});

Eigen::Index numerical_rank(const Matrix& m, const RankTolerance& tol = {});

// Moore-Penrose pseudo-inverse via compact_svd.
Matrix pinv(const Matrix& m, const RankTolerance& tol = {});

// Orthonormal basis of col(m) (the U factor of compact_svd).
Matrix orthonormal_basis(const Matrix& m, const RankTolerance& tol = {});

// Both inputs must have orthonormal columns. True iff the ranks agree and the
// largest principal angle is at most tol (radians).
bool subspace_equal(const Matrix& u1, const Matrix& u2, double tol);

// Largest principal angle between col(u1) and col(u2); both orthonormal and
// of equal column count.
double max_principal_angle(const Matrix& u1, const Matrix& u2);

// Minimum-norm minimiser of ||A X - B||_F.
Matrix least_squares(const Matrix& a, const Matrix& b,
                     const RankTolerance& tol = {});

}  // namespace hpds
