// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/estimator.hpp"

#include <cmath>

#include "jetedmd/errors.hpp"
#include "jetedmd/spectral.hpp"

namespace jetedmd {

void SnapshotData::validate() const {
  if (x.rows() < 1) throw ConfigError("SnapshotData: dimension must be >= 1");
  if (x.cols() < 1) throw ConfigError("SnapshotData: need at least one sample");
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw ConfigError("SnapshotData: X and Y shapes differ");
  }
  if (kind == SnapshotKind::FlowSample && !(t_s > 0.0)) {
    throw ConfigError("SnapshotData: flow samples require t_s > 0");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw ConfigError("SnapshotData: non-finite entries");
  }
}

void EstimatorConfig::validate(int data_dim) const {
  if (m < 0 || n < 0) throw ConfigError("EstimatorConfig: m, n must be >= 0");
  if (m > n) throw ConfigError("EstimatorConfig: m <= n is required");
  if (base_point.size() != data_dim) {
    throw ConfigError("EstimatorConfig: base point dimension mismatch");
  }
}

namespace {

struct Regression {
  Eigen::MatrixXd pinv_vx;  // N x r_n
  Eigen::Index rank = 0;
  Eigen::Index rows = 0;
  double cond = 0.0;
  std::vector<std::string> warnings;
};

// Least-squares factor shared by the discrete and generator paths: the
// pseudo-inverse of V_n^X plus its rank diagnostics.
Regression input_features(const EstimatorConfig& cfg, const SnapshotData& data) {
  data.validate();
  cfg.validate(data.dim());
  const Eigen::Index n_samples = data.count();
  const auto r_n = static_cast<Eigen::Index>(dimension(data.dim(), cfg.n));
  Regression reg;
  reg.rows = r_n;
  if (r_n > n_samples) {
    const std::string msg = "r_n = " + std::to_string(r_n) + " exceeds N = " +
                            std::to_string(n_samples);
    if (!cfg.allow_rank_deficient) {
      throw ConfigError("estimator: " + msg +
                        " (set allow_rank_deficient to run underdetermined)");
    }
    reg.warnings.push_back("underdetermined regression: " + msg);
  }
  const ObservableBasis basis_n(cfg.kernel, cfg.base_point, cfg.n);
  const Eigen::MatrixXd vx = basis_n.feature_matrix(data.x);
  PinvResult pr = pinv_with_rank(vx, cfg.pinv_rel_tol);
  reg.rank = pr.rank;
  reg.cond = pr.sigma_min_kept > 0.0 ? pr.sigma_max / pr.sigma_min_kept : 0.0;
  if (pr.rank < std::min(r_n, n_samples)) {
    const std::string msg = "feature matrix numerical rank " +
                            std::to_string(pr.rank) + " below " +
                            std::to_string(std::min(r_n, n_samples));
    if (!cfg.allow_rank_deficient) throw NumericalError("estimator: " + msg);
    reg.warnings.push_back(msg);
  }
  reg.pinv_vx = std::move(pr.matrix);  // N x r_n
  return reg;
}

}  // namespace

Eigen::MatrixXcd edmd_full(const EstimatorConfig& cfg, const SnapshotData& data,
                           FeatureScaling scaling) {
  if (data.kind == SnapshotKind::Velocity) {
    throw ConfigError("edmd_full: expects map or flow snapshot pairs");
  }
  if (scaling == FeatureScaling::Orthogonal) {
    Regression reg = input_features(cfg, data);
    const ObservableBasis basis_m(cfg.kernel, cfg.base_point, cfg.m);
    const Eigen::MatrixXd vy = basis_m.feature_matrix(data.y);
    const Eigen::MatrixXd c0 = vy * reg.pinv_vx;
    return c0.cast<Complex>();
  }
  data.validate();
  cfg.validate(data.dim());
  const ObservableBasis basis_n(cfg.kernel, cfg.base_point, cfg.n);
  const ObservableBasis basis_m(cfg.kernel, cfg.base_point, cfg.m);
  const Eigen::VectorXd inv_sqrt_n = gram(basis_n).diagonal.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd inv_sqrt_m = gram(basis_m).diagonal.cwiseSqrt().cwiseInverse();
  if (static_cast<Eigen::Index>(dimension(data.dim(), cfg.n)) > data.count() &&
      !cfg.allow_rank_deficient) {
    throw ConfigError("edmd_full: r_n exceeds N (set allow_rank_deficient)");
  }
  const Eigen::MatrixXd vx = inv_sqrt_n.asDiagonal() * basis_n.feature_matrix(data.x);
  const Eigen::MatrixXd vy = inv_sqrt_m.asDiagonal() * basis_m.feature_matrix(data.y);
  const Eigen::MatrixXd c0 = vy * pinv(vx, cfg.pinv_rel_tol);
  return c0.cast<Complex>();
}

namespace {

OperatorEstimate make_estimate(const EstimatorConfig& cfg, const SnapshotData& data,
                               OperatorKind kind, const Regression& reg,
                               const Eigen::MatrixXd& full) {
  const auto r_m = static_cast<Eigen::Index>(dimension(data.dim(), cfg.m));
  OperatorEstimate est;
  est.matrix = full.topLeftCorner(r_m, r_m).cast<Complex>();
  est.config = cfg;
  est.kind = kind;
  est.sample_count = data.count();
  est.data_kind = data.kind;
  est.feature_rank = reg.rank;
  est.feature_rows = reg.rows;
  est.feature_cond = reg.cond;
  est.warnings = reg.warnings;
  return est;
}

}  // namespace

OperatorEstimate jet_edmd_discrete(const EstimatorConfig& cfg,
                                   const SnapshotData& data) {
  if (data.kind == SnapshotKind::Velocity) {
    throw ConfigError("jet_edmd_discrete: expects map or flow snapshot pairs");
  }
  Regression reg = input_features(cfg, data);
  const ObservableBasis basis_m(cfg.kernel, cfg.base_point, cfg.m);
  const Eigen::MatrixXd vy = basis_m.feature_matrix(data.y);
  const Eigen::MatrixXd full = vy * reg.pinv_vx;
  return make_estimate(cfg, data, OperatorKind::PerronFrobenius, reg, full);
}

OperatorEstimate jet_edmd_generator(const EstimatorConfig& cfg,
                                    const SnapshotData& data) {
  if (data.kind != SnapshotKind::Velocity) {
    throw ConfigError("jet_edmd_generator: expects velocity data");
  }
  Regression reg = input_features(cfg, data);
  const ObservableBasis basis_m(cfg.kernel, cfg.base_point, cfg.m);
  const auto r_m = static_cast<Eigen::Index>(dimension(data.dim(), cfg.m));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(r_m, data.count());
  for (Eigen::Index j = 0; j < data.count(); ++j) {
    for (int axis = 0; axis < data.dim(); ++axis) {
      w.col(j).noalias() +=
          data.y(axis, j) * basis_m.feature_derivative(axis, data.x.col(j));
    }
  }
  const Eigen::MatrixXd full = w * reg.pinv_vx;
  return make_estimate(cfg, data, OperatorKind::Generator, reg, full);
}

OperatorEstimate generator_from_flow(const EstimatorConfig& cfg,
                                     const SnapshotData& data,
                                     std::span<const int> branch_offsets) {
  if (data.kind != SnapshotKind::FlowSample) {
    throw ConfigError("generator_from_flow: expects flow samples with t_s");
  }
  OperatorEstimate est = jet_edmd_discrete(cfg, data);
  const EigenSystem es = eig(est.matrix);
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const double im = std::abs(std::arg(es.values(j)));
    if (im > 0.95 * M_PI) {
      est.warnings.push_back(
          "log eigenvalue " + std::to_string(j) + " within 5% of the branch cut" +
          " (Im = " + std::to_string(std::arg(es.values(j))) + ")");
    }
  }
  est.matrix = matrix_log(est.matrix, branch_offsets) / data.t_s;
  est.kind = OperatorKind::Generator;
  return est;
}

std::vector<int> branch_offsets_from_jacobian(const OperatorEstimate& c_hat,
                                              const Eigen::MatrixXd& jacobian,
                                              double t_s) {
  if (!(t_s > 0.0)) throw ConfigError("branch_offsets_from_jacobian: t_s > 0 required");
  const Spectrum theory =
      theoretical_spectrum(jacobian, c_hat.config.m, SpectrumMode::Generator);
  const EigenSystem es = eig(c_hat.matrix);
  std::vector<int> offsets(static_cast<std::size_t>(es.values.size()), 0);
  const double two_pi = 2.0 * M_PI;
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const Complex principal(std::log(std::abs(es.values(j))), std::arg(es.values(j)));
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (const Complex& mu : theory.values) {
      const Complex target = t_s * mu;
      // Offset k moving the principal log closest to this theoretical value.
      const double kreal = (target.imag() - principal.imag()) / two_pi;
      for (int k : {static_cast<int>(std::floor(kreal)),
                    static_cast<int>(std::ceil(kreal))}) {
        const Complex cand = principal + Complex(0.0, two_pi * k);
        const double dist = std::abs(cand - target);
        if (dist < best) {
          best = dist;
          best_k = k;
        }
      }
    }
    offsets[static_cast<std::size_t>(j)] = best_k;
  }
  return offsets;
}

std::vector<Complex> kdmd_eigenvalues(const KernelSpec& kernel,
                                      const SnapshotData& data) {
  data.validate();
  if (data.kind == SnapshotKind::Velocity) {
    throw ConfigError("kdmd_eigenvalues: expects map or flow snapshot pairs");
  }
  const Eigen::Index n = data.count();
  Eigen::MatrixXd kxx(n, n), kyx(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kxx(i, j) = kernel_value(kernel, data.x.col(i), data.x.col(j));
      kyx(i, j) = kernel_value(kernel, data.y.col(i), data.x.col(j));
    }
  }
  const Eigen::MatrixXd m = pinv(kxx) * kyx;
  const EigenSystem es = eig(m);
  return sorted_spectrum(es.values);
}

Eigen::MatrixXcd gram_conjugated(const OperatorEstimate& estimate) {
  const ObservableBasis basis(estimate.config.kernel, estimate.config.base_point,
                              estimate.config.m);
  const Eigen::VectorXd g = gram(basis).diagonal;
  const Eigen::VectorXcd gi = g.cwiseInverse().cast<Complex>();
  const Eigen::VectorXcd gc = g.cast<Complex>();
  return gi.asDiagonal() * estimate.matrix * gc.asDiagonal();
}

}  // namespace jetedmd
