// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace jetedmd {

using Complex = std::complex<double>;

/// SVD-based Moore-Penrose pseudo-inverse. Singular values below
/// rel_tol * sigma_max are truncated; rel_tol = 0 selects the default
/// max(rows, cols) * machine epsilon.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double rel_tol = 0.0);
Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& m, double rel_tol = 0.0);

struct PinvResult {
  Eigen::MatrixXd matrix;
  Eigen::Index rank = 0;       // retained singular values
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
};
PinvResult pinv_with_rank(const Eigen::MatrixXd& m, double rel_tol = 0.0);

/// Two-sided eigendecomposition. Columns of `right` are right eigenvectors;
/// columns of `left` satisfy left_i^* A = lambda_i left_i^* and
/// left_i^* right_j = delta_ij whenever the right-vector matrix is
/// invertible. Pairs are sorted by (Re desc, Im desc).
struct EigenSystem {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
  double residual = 0.0;          // ||A R - R diag(values)|| / max(1, ||A||)
  double vector_condition = 0.0;  // condition number of the right-vector matrix
  bool near_defective = false;    // vector_condition above threshold
};

EigenSystem eig(const Eigen::MatrixXcd& a);
EigenSystem eig(const Eigen::MatrixXd& a);

/// Threshold on the right-vector condition number beyond which a matrix is
/// flagged near-defective (reported, not fatal).
inline constexpr double kDefectiveConditionThreshold = 1e12;

/// Matrix logarithm through the eigendecomposition functional calculus. The
/// default is the principal branch (Im log in (-pi, pi]); branch_offsets[j]
/// adds 2 pi i k_j to the log of the j-th eigenvalue in the sorted order.
/// Throws NumericalError on (near-)zero eigenvalues or an eigenvector matrix
/// too ill-conditioned to trust.
Eigen::MatrixXcd matrix_log(const Eigen::MatrixXcd& m,
                            std::span<const int> branch_offsets = {});

/// Matrix exponential through the same eigendecomposition route.
Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& m);

/// Hausdorff distance between two nonempty finite sets under |.| on C.
double hausdorff(std::span<const Complex> a, std::span<const Complex> b);

/// sigma_max / sigma_min; +inf when sigma_min = 0.
double cond(const Eigen::MatrixXd& m);
double cond(const Eigen::MatrixXcd& m);

/// Deterministic spectrum ordering used everywhere: real part descending,
/// then imaginary part descending.
void sort_spectrum(Eigen::VectorXcd& values);
std::vector<Complex> sorted_spectrum(const Eigen::VectorXcd& values);

}  // namespace jetedmd
