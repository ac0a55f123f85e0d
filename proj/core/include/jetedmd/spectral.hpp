// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "jetedmd/estimator.hpp"

namespace jetedmd {

enum class SpectrumOrigin { Estimated, Theoretical };
enum class SpectrumMode { Discrete, Generator };

struct Spectrum {
  std::vector<Complex> values;  // deterministic order (Re desc, Im desc)
  SpectrumOrigin origin = SpectrumOrigin::Estimated;
};

/// {lambda^alpha : |alpha| <= m} (Discrete) or {alpha^T mu : |alpha| <= m}
/// (Generator) for the eigenvalues lambda/mu of the Jacobian J, with
/// multiplicity; size r_m.
Spectrum theoretical_spectrum(const Eigen::MatrixXd& jacobian, int m,
                              SpectrumMode mode);

Spectrum estimate_spectrum(const OperatorEstimate& estimate);

/// Shared context of one Algorithm-3/4 assembly: bases over the fixed points,
/// their cross-Gram blocks and the H blocks solving the stacked system.
struct EigenfunctionAssembly {
  std::vector<ObservableBasis> bases;
  std::vector<std::vector<Eigen::MatrixXd>> gram_blocks;  // G^{ij}
  std::vector<std::vector<Eigen::MatrixXd>> h_blocks;     // H^{ij}
  double stacked_gram_cond = 0.0;
  double h_pinv_rel_tol = 0.0;
};

/// One estimated eigenpair attached to fixed point `point_index`:
/// right (Perron-Frobenius) eigenfunction  w(x) = v_{p_i}(x)^* (G^{ii})^-1 w
/// left (extended-Koopman) eigenfunction   u(x) = sum_j v_{p_j}(x)^* H^{ji} u.
struct EigenfunctionField {
  Complex eigenvalue;
  int point_index = 0;
  Eigen::VectorXcd right_coeffs;  // w
  Eigen::VectorXcd left_coeffs;   // u
  double pair_residual = 0.0;     // || u^* C - gamma u^* || / || C ||
  bool defective_flag = false;
  std::shared_ptr<const EigenfunctionAssembly> assembly;

  Complex evaluate_right(const Eigen::VectorXd& x) const;
  Complex evaluate_left(const Eigen::VectorXd& x) const;
};

struct AssemblyOptions {
  /// Truncation tolerance for the pseudo-inverse of the stacked Gram; 0 keeps
  /// the numerics default. Surfaced because truncation visibly changes the
  /// assembled eigenfunctions on ill-conditioned multi-point setups.
  double h_pinv_rel_tol = 0.0;
};

/// Algorithm-3/4 eigenfunction assembly across fixed points. One estimate per
/// fixed point, all sharing a kernel; estimates may come from the discrete or
/// the generator path.
std::vector<EigenfunctionField> assemble_eigenfunctions(
    const std::vector<OperatorEstimate>& estimates,
    const AssemblyOptions& opts = {});

enum class FieldSide { Right, Left };

/// Axis-aligned rectangular grid; node (i_1, ..., i_d) has coordinate
/// lo_c + i_c (hi_c - lo_c)/(count_c - 1), last axis fastest (row-major).
struct GridSpec {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> count;

  Eigen::Index total() const;
  Eigen::VectorXd node(Eigen::Index flat) const;
  void validate(int dim) const;
};

/// Pointwise evaluation of the selected eigenfunction on every grid node,
/// row-major.
Eigen::VectorXcd evaluate_field(const EigenfunctionField& field,
                                const GridSpec& grid,
                                FieldSide side = FieldSide::Left);

/// Export normalization: scales so the largest-modulus entry is 1 and rotates
/// its phase to the positive real axis. No-op on all-zero input.
void normalize_field_values(Eigen::VectorXcd& values);

}  // namespace jetedmd
