// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/reconstruct.hpp"

#include <cmath>

#include "jetedmd/errors.hpp"

namespace jetedmd {

ReconstructedMap::ReconstructedMap(ReconstructedKind kind, Rule rule,
                                   ObservableBasis basis, Eigen::MatrixXd coef,
                                   Eigen::VectorXd offset)
    : kind_(kind),
      rule_(rule),
      basis_(std::move(basis)),
      coef_(std::move(coef)),
      offset_(std::move(offset)) {
  if (basis_.order() < 1) {
    throw ConfigError("ReconstructedMap: m >= 1 required to read components back");
  }
  if (coef_.rows() != basis_.size() || coef_.cols() != basis_.size()) {
    throw ConfigError("ReconstructedMap: coefficient matrix size mismatch");
  }
  if (offset_.size() != basis_.base_point().size()) {
    throw ConfigError("ReconstructedMap: offset dimension mismatch");
  }
}

Eigen::VectorXd ReconstructedMap::evaluate(const Eigen::VectorXd& x) const {
  const int d = dim();
  const double sigma = basis_.kernel().sigma;
  const Eigen::VectorXd v = basis_.feature_vector(x);
  Eigen::VectorXd out(d);
  if (rule_ == Rule::ExpComponent) {
    // Degree-one monomials occupy positions 2..d+1 of the graded order; the
    // (i+1)-th component of sigma * coef * v(x) is the i-th coordinate.
    const Eigen::VectorXd w = sigma * (coef_ * v);
    for (int i = 0; i < d; ++i) out(i) = w(i + 1) + offset_(i);
  } else {
    const Eigen::VectorXd av = coef_ * v;  // coef already carries sigma^2 G^-1 A
    for (int i = 0; i < d; ++i) {
      out(i) = basis_.feature_derivative(i, x).dot(av) + offset_(i);
    }
  }
  return out;
}

ReconstructedMap reconstruct_discrete(double sigma, int m, int n,
                                      const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& y0,
                                      const SnapshotData& data,
                                      double pinv_rel_tol,
                                      bool allow_rank_deficient) {
  data.validate();
  if (data.kind == SnapshotKind::Velocity) {
    throw ConfigError("reconstruct_discrete: expects map snapshot pairs");
  }
  if (x0.size() != data.dim() || y0.size() != data.dim()) {
    throw ConfigError("reconstruct_discrete: anchor dimension mismatch");
  }
  // Shift outputs so that x0 is a fixed point of the shifted map.
  SnapshotData shifted = data;
  shifted.kind = SnapshotKind::DiscreteMap;
  shifted.t_s = 0.0;
  shifted.y.colwise() += (x0 - y0);
  EstimatorConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.base_point = x0;
  cfg.kernel = KernelSpec::exponential(sigma, x0);
  cfg.pinv_rel_tol = pinv_rel_tol;
  cfg.allow_rank_deficient = allow_rank_deficient;
  const OperatorEstimate est = jet_edmd_discrete(cfg, shifted);
  ObservableBasis basis(cfg.kernel, x0, m);
  return ReconstructedMap(ReconstructedKind::DiscreteMap,
                          ReconstructedMap::Rule::ExpComponent, std::move(basis),
                          est.matrix.real(), y0);
}

ReconstructedMap reconstruct_field(double sigma, KernelKind kernel_kind, int m,
                                   int n, const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& y0,
                                   const SnapshotData& data, double pinv_rel_tol,
                                   bool allow_rank_deficient) {
  data.validate();
  if (data.kind != SnapshotKind::Velocity) {
    throw ConfigError("reconstruct_field: expects velocity data");
  }
  if (x0.size() != data.dim() || y0.size() != data.dim()) {
    throw ConfigError("reconstruct_field: anchor dimension mismatch");
  }
  SnapshotData shifted = data;
  shifted.y.colwise() -= y0;
  EstimatorConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.base_point = x0;
  cfg.kernel = kernel_kind == KernelKind::Exponential
                   ? KernelSpec::exponential(sigma, x0)
                   : KernelSpec::gaussian(sigma);
  cfg.pinv_rel_tol = pinv_rel_tol;
  cfg.allow_rank_deficient = allow_rank_deficient;
  const OperatorEstimate est = jet_edmd_generator(cfg, shifted);
  ObservableBasis basis(cfg.kernel, x0, m);
  if (kernel_kind == KernelKind::Exponential) {
    return ReconstructedMap(ReconstructedKind::VectorField,
                            ReconstructedMap::Rule::ExpComponent,
                            std::move(basis), est.matrix.real(), y0);
  }
  // Gaussian rule: (d/dx_i v(x))^T sigma^2 (G^g)^-1 A v(x) + y0_i.
  const Eigen::VectorXd g = gram(basis).diagonal;
  const Eigen::MatrixXd coef =
      sigma * sigma * g.cwiseInverse().asDiagonal() * est.matrix.real();
  return ReconstructedMap(ReconstructedKind::VectorField,
                          ReconstructedMap::Rule::GaussQuadratic, std::move(basis),
                          coef, y0);
}

ReconstructedMap reconstruct_field_from_flow(
    double sigma, int m, int n, const Eigen::VectorXd& equilibrium,
    const SnapshotData& data, std::span<const int> branch_offsets,
    double pinv_rel_tol, bool allow_rank_deficient,
    const std::optional<Eigen::VectorXd>& offset_override) {
  data.validate();
  if (data.kind != SnapshotKind::FlowSample) {
    throw ConfigError("reconstruct_field_from_flow: expects flow samples");
  }
  if (equilibrium.size() != data.dim()) {
    throw ConfigError("reconstruct_field_from_flow: equilibrium dimension mismatch");
  }
  EstimatorConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.base_point = equilibrium;
  cfg.kernel = KernelSpec::exponential(sigma, equilibrium);
  cfg.pinv_rel_tol = pinv_rel_tol;
  cfg.allow_rank_deficient = allow_rank_deficient;
  const OperatorEstimate est = generator_from_flow(cfg, data, branch_offsets);
  ObservableBasis basis(cfg.kernel, equilibrium, m);
  // F_i(x) = (i+1)-th component of sigma G^-1 A v(x); the constant defaults to
  // zero so the reconstructed field vanishes at the equilibrium.
  const Eigen::VectorXd g = gram(basis).diagonal;
  const Eigen::MatrixXd coef = g.cwiseInverse().asDiagonal() * est.matrix.real();
  const Eigen::VectorXd offset =
      offset_override.value_or(Eigen::VectorXd::Zero(data.dim()));
  if (offset.size() != data.dim()) {
    throw ConfigError("reconstruct_field_from_flow: offset dimension mismatch");
  }
  return ReconstructedMap(ReconstructedKind::VectorField,
                          ReconstructedMap::Rule::ExpComponent, std::move(basis),
                          coef, offset);
}

Eigen::MatrixXd predict_trajectory(const ReconstructedMap& model,
                                   const Eigen::VectorXd& x0, int steps,
                                   double dt) {
  if (x0.size() != model.dim()) {
    throw ConfigError("predict_trajectory: initial point dimension mismatch");
  }
  if (steps < 0) throw ConfigError("predict_trajectory: steps must be >= 0");
  const bool continuous = model.kind() == ReconstructedKind::VectorField;
  if (continuous && !(dt > 0.0)) {
    throw ConfigError("predict_trajectory: vector fields require dt > 0");
  }
  Eigen::MatrixXd out(model.dim(), steps + 1);
  Eigen::VectorXd z = x0;
  out.col(0) = z;
  for (int s = 1; s <= steps; ++s) {
    if (continuous) {
      const Eigen::VectorXd k1 = model.evaluate(z);
      const Eigen::VectorXd k2 = model.evaluate(z + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = model.evaluate(z + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = model.evaluate(z + dt * k3);
      z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      z = model.evaluate(z);
    }
    if (!z.allFinite()) {
      throw NumericalError("predict_trajectory: non-finite state at step " +
                           std::to_string(s));
    }
    out.col(s) = z;
  }
  return out;
}

}  // namespace jetedmd
