// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "jetedmd/multiindex.hpp"

namespace jetedmd {

enum class KernelKind { Exponential, Gaussian };

/// A positive definite kernel on R^d. The exponential kernel
/// k(x,y) = exp((x-b)^T (y-b) / sigma^2) carries a center b; the Gaussian
/// kernel k(x,y) = exp(-|x-y|^2 / 2 sigma^2) does not.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double sigma = 1.0;
  Eigen::VectorXd center;  // b; exponential kernels only

  static KernelSpec exponential(double sigma, Eigen::VectorXd center);
  static KernelSpec gaussian(double sigma);
};

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y);

/// Diagonal Gram matrix of an intrinsic-observable basis; entry i is
/// alpha^(i)!.
struct GramMatrix {
  Eigen::VectorXd diagonal;

  Eigen::Index size() const { return diagonal.size(); }
  Eigen::MatrixXd dense() const { return diagonal.asDiagonal(); }
};

/// The orthogonal basis v_{p,1}, ..., v_{p,r_n} of the intrinsic-observable
/// space V_{p,n}, in graded order:
///   exponential: v_i(x) = ((x-p)^a / sigma^|a|) exp((p-b)^T (2x-p-b) / 2s^2)
///   Gaussian:    v_i(x) = ((x-p)^a / sigma^|a|) exp(-|x-p|^2 / 2s^2)
/// with a = alpha^(i) and s = sigma. Both families are real on real points;
/// feature vectors store the complex conjugate of the evaluations.
class ObservableBasis {
 public:
  ObservableBasis(KernelSpec kernel, Eigen::VectorXd base_point, int order);

  int dim() const { return static_cast<int>(p_.size()); }
  int order() const { return order_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(table_.size()); }
  const GradedOrder& order_table() const { return table_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::VectorXd& base_point() const { return p_; }

  /// (conj(v_i(x)))_i, length r_n.
  Eigen::VectorXd feature_vector(const Eigen::VectorXd& x) const;

  /// Componentwise partial derivative d/dx_axis of feature_vector (0-based
  /// axis), in closed form.
  Eigen::VectorXd feature_derivative(int axis, const Eigen::VectorXd& x) const;

  /// Feature matrix V_n^X: column j is feature_vector(X.col(j)).
  Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& X) const;

  /// Holomorphic extension of the basis functions at a complex point; used by
  /// the Gauss-Hermite quadrature cross-check.
  Eigen::VectorXcd feature_vector_complex(const Eigen::VectorXcd& z) const;

 private:
  KernelSpec kernel_;
  Eigen::VectorXd p_;
  int order_ = 0;
  GradedOrder table_;
};

GramMatrix gram(const ObservableBasis& basis);

/// Matrix of H-inner products <v_{p_i,s}, v_{p_j,t}> between two bases sharing
/// one kernel, size r_{m_i} x r_{m_j}. Real for the implemented kernels.
struct CrossGram {
  Eigen::MatrixXd values;
};

struct CrossGramOptions {
  /// When set, the closed-form result is validated against Gauss-Hermite
  /// quadrature and a NumericalError is raised beyond `quadrature_tol`.
  bool quadrature_check = false;
  int quadrature_nodes = 64;
  double quadrature_tol = 1e-8;
};

CrossGram cross_gram(const ObservableBasis& bi, const ObservableBasis& bj,
                     const CrossGramOptions& opts = {});

/// Independent quadrature evaluation of the cross-Gram (test oracle): the
/// Bargmann-space integral of each per-coordinate factor on a tensor
/// Gauss-Hermite rule.
Eigen::MatrixXd cross_gram_quadrature(const ObservableBasis& bi,
                                      const ObservableBasis& bj, int nodes);

/// Nodes and weights of the N-point Gauss-Hermite rule for weight exp(-t^2),
/// computed by Golub-Welsch.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermiteRule gauss_hermite(int n);

struct ProjectionErrorResult {
  double value = 0.0;
  /// False when the tail series hit the iteration cap and the single-term
  /// upper bound was used instead (reduced precision).
  bool series_converged = true;
};

/// Minimal approximation error E_{p,n}(x) = || k_x - pi_n k_x ||_H in closed
/// form: prefactor(x) * sqrt(sum_{m>n} (|x-p|^2/sigma^2)^m / m!). The
/// Gaussian prefactor is exp(-|x-p|^2/2sigma^2), the form consistent with the
/// Gram-based identity E^2 = k(x,x) - v(x)^* G^{-1} v(x).
double projection_error(const ObservableBasis& basis, const Eigen::VectorXd& x);
ProjectionErrorResult projection_error_detail(const ObservableBasis& basis,
                                              const Eigen::VectorXd& x);

/// Coefficients c with G c = v(x), i.e. pi_n k_x = sum_i c_i v_i.
Eigen::VectorXd projection_coefficients(const ObservableBasis& basis,
                                        const Eigen::VectorXd& x);

}  // namespace jetedmd
