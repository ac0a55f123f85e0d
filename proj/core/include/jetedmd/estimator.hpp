// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jetedmd/numerics.hpp"
#include "jetedmd/rkhs.hpp"

namespace jetedmd {

enum class SnapshotKind { DiscreteMap, Velocity, FlowSample };

/// N input points X and their outputs Y: images f(x_i) (DiscreteMap),
/// velocities F(x_i) (Velocity), or flow samples phi^{T_s}(x_i) (FlowSample,
/// with sampling period t_s). Column = point.
struct SnapshotData {
  Eigen::MatrixXd x;  // d x N
  Eigen::MatrixXd y;  // d x N
  SnapshotKind kind = SnapshotKind::DiscreteMap;
  double t_s = 0.0;   // FlowSample only

  int dim() const { return static_cast<int>(x.rows()); }
  Eigen::Index count() const { return x.cols(); }
  void validate() const;
};

struct EstimatorConfig {
  int m = 0;
  int n = 0;
  Eigen::VectorXd base_point;  // the designated fixed/equilibrium point p
  KernelSpec kernel;
  double pinv_rel_tol = 0.0;   // 0 selects the numerics default
  /// Permits r_n > N and rank-deficient feature matrices (needed by KDMD-style
  /// runs and flow reconstruction at large n); the deficiency is still
  /// reported in the estimate diagnostics.
  bool allow_rank_deficient = false;

  void validate(int data_dim) const;
};

enum class OperatorKind { PerronFrobenius, Generator };

/// A truncated estimate (C-hat or A-hat) with its full provenance.
struct OperatorEstimate {
  Eigen::MatrixXcd matrix;  // r_m x r_m
  EstimatorConfig config;
  OperatorKind kind = OperatorKind::PerronFrobenius;
  Eigen::Index sample_count = 0;
  SnapshotKind data_kind = SnapshotKind::DiscreteMap;
  // Diagnostics from the feature-matrix least squares.
  Eigen::Index feature_rank = 0;
  Eigen::Index feature_rows = 0;
  double feature_cond = 0.0;
  std::vector<std::string> warnings;
};

/// Feature convention: the algorithms run on the orthogonal basis of the
/// kernel propositions (Gram = diag(alpha!)); the orthonormal rescaling
/// v_i / sqrt(alpha_i!) is the convention of the theory sections and is what
/// makes the underdetermined (r_n > N) spectrum agree with kernel DMD. The
/// two are similar, so JetEDMD spectra do not depend on the choice.
enum class FeatureScaling { Orthogonal, Orthonormal };

/// Full (untruncated) regression matrix C_0 = V_m^Y pinv(V_n^X) of size
/// r_m x r_n; with m = n this is the transpose-convention EDMD matrix.
Eigen::MatrixXcd edmd_full(const EstimatorConfig& cfg, const SnapshotData& data,
                           FeatureScaling scaling = FeatureScaling::Orthogonal);

/// Leading r_m x r_m block of edmd_full: the JetEDMD estimate of the
/// Perron-Frobenius matrix.
OperatorEstimate jet_edmd_discrete(const EstimatorConfig& cfg,
                                   const SnapshotData& data);

/// Generator estimate from velocity data:
/// A-hat = leading block of W pinv(V_n^X) with
/// W = sum_i [ y_{i,j} d/dx_i v_m(x_j) ]_j.
OperatorEstimate jet_edmd_generator(const EstimatorConfig& cfg,
                                    const SnapshotData& data);

/// Generator from flow samples: A-hat = (1/T_s) log C-hat, with per-eigenvalue
/// branch offsets (sorted order) for the matrix logarithm. Warns when a log
/// lands within 5% of the branch cut.
OperatorEstimate generator_from_flow(const EstimatorConfig& cfg,
                                     const SnapshotData& data,
                                     std::span<const int> branch_offsets = {});

/// Branch offsets matching each principal-log eigenvalue of c_hat to the
/// nearest theoretical generator eigenvalue alpha^T mu (mu from the Jacobian
/// at p) modulo 2 pi i / T_s.
std::vector<int> branch_offsets_from_jacobian(const OperatorEstimate& c_hat,
                                              const Eigen::MatrixXd& jacobian,
                                              double t_s);

/// Eigenvalues of pinv(K_XX) K_YX, the kernel-DMD matrix.
std::vector<Complex> kdmd_eigenvalues(const KernelSpec& kernel,
                                      const SnapshotData& data);

/// The similar matrix G_m^-1 C-hat G_m (the convention converging to the
/// representation matrix itself rather than its Gram conjugate); shares the
/// spectrum of the raw estimate.
Eigen::MatrixXcd gram_conjugated(const OperatorEstimate& estimate);

}  // namespace jetedmd
