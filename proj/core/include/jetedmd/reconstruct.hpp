// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "jetedmd/estimator.hpp"

namespace jetedmd {

enum class ReconstructedKind { DiscreteMap, VectorField };

/// A data-driven model of the dynamical system, evaluable at any point.
/// Exponential-kernel models read component i as the (i+1)-th entry of
/// sigma * coef * v_{p,m}(x) plus an offset; Gaussian-kernel vector fields use
/// the quadratic form (d/dx_i v(x))^T sigma^2 G^{-1} A v(x).
class ReconstructedMap {
 public:
  enum class Rule { ExpComponent, GaussQuadratic };

  ReconstructedMap(ReconstructedKind kind, Rule rule, ObservableBasis basis,
                   Eigen::MatrixXd coef, Eigen::VectorXd offset);

  ReconstructedKind kind() const { return kind_; }
  Rule rule() const { return rule_; }
  const ObservableBasis& basis() const { return basis_; }
  const Eigen::MatrixXd& coefficients() const { return coef_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  int dim() const { return basis_.dim(); }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

 private:
  ReconstructedKind kind_;
  Rule rule_;
  ObservableBasis basis_;
  Eigen::MatrixXd coef_;
  Eigen::VectorXd offset_;
};

/// Discrete-map reconstruction: shift the outputs so x_0 becomes a fixed
/// point, estimate with the exponential kernel centered at x_0, and read the
/// degree-one rows back off.
ReconstructedMap reconstruct_discrete(double sigma, int m, int n,
                                      const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& y0,
                                      const SnapshotData& data,
                                      double pinv_rel_tol = 0.0,
                                      bool allow_rank_deficient = false);

/// Vector-field reconstruction from velocity data, exponential or Gaussian
/// kernel.
ReconstructedMap reconstruct_field(double sigma, KernelKind kernel_kind, int m,
                                   int n, const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& y0,
                                   const SnapshotData& data,
                                   double pinv_rel_tol = 0.0,
                                   bool allow_rank_deficient = false);

/// Vector-field reconstruction from flow samples via the matrix logarithm,
/// exponential kernel centered at a known equilibrium p. The additive
/// constant defaults to zero so the model vanishes at p; `offset_override`
/// replaces it.
ReconstructedMap reconstruct_field_from_flow(
    double sigma, int m, int n, const Eigen::VectorXd& equilibrium,
    const SnapshotData& data, std::span<const int> branch_offsets = {},
    double pinv_rel_tol = 0.0, bool allow_rank_deficient = false,
    const std::optional<Eigen::VectorXd>& offset_override = std::nullopt);

/// Iterates a discrete model for `steps` steps, or integrates a vector-field
/// model with fixed-step RK4 over [0, horizon] at step dt. Returns the state
/// at every step, d x (steps+1). Aborts with the step index when the state
/// leaves the finite range.
Eigen::MatrixXd predict_trajectory(const ReconstructedMap& model,
                                   const Eigen::VectorXd& x0, int steps,
                                   double dt = 0.0);

}  // namespace jetedmd
