// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/spectral.hpp"

#include <cmath>

#include "jetedmd/errors.hpp"

namespace jetedmd {

Spectrum theoretical_spectrum(const Eigen::MatrixXd& jacobian, int m,
                              SpectrumMode mode) {
  if (jacobian.rows() != jacobian.cols() || jacobian.rows() < 1) {
    throw ConfigError("theoretical_spectrum: Jacobian must be square");
  }
  const int d = static_cast<int>(jacobian.rows());
  const Eigen::VectorXcd mu = eig(Eigen::MatrixXcd(jacobian.cast<Complex>())).values;
  const GradedOrder order = graded_enumerate(d, m);
  Eigen::VectorXcd values(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const MultiIndex& alpha = order[i];
    Complex v = (mode == SpectrumMode::Discrete) ? Complex(1.0, 0.0)
                                                 : Complex(0.0, 0.0);
    for (int c = 0; c < d; ++c) {
      if (mode == SpectrumMode::Discrete) {
        for (int k = 0; k < alpha[c]; ++k) v *= mu(c);
      } else {
        v += static_cast<double>(alpha[c]) * mu(c);
      }
    }
    values(static_cast<Eigen::Index>(i)) = v;
  }
  Spectrum s;
  s.values = sorted_spectrum(values);
  s.origin = SpectrumOrigin::Theoretical;
  return s;
}

Spectrum estimate_spectrum(const OperatorEstimate& estimate) {
  Spectrum s;
  s.values = sorted_spectrum(eig(estimate.matrix).values);
  s.origin = SpectrumOrigin::Estimated;
  return s;
}

Eigen::Index GridSpec::total() const {
  Eigen::Index t = 1;
  for (int c : count) t *= c;
  return t;
}

void GridSpec::validate(int dim) const {
  if (lo.size() != dim || hi.size() != dim ||
      static_cast<int>(count.size()) != dim) {
    throw ConfigError("GridSpec: dimension mismatch");
  }
  for (int c = 0; c < dim; ++c) {
    if (count[static_cast<std::size_t>(c)] < 1) {
      throw ConfigError("GridSpec: counts must be >= 1");
    }
    if (!(lo(c) <= hi(c))) throw ConfigError("GridSpec: lo <= hi required");
  }
}

Eigen::VectorXd GridSpec::node(Eigen::Index flat) const {
  const int d = static_cast<int>(count.size());
  Eigen::VectorXd x(d);
  Eigen::Index rem = flat;
  for (int c = d - 1; c >= 0; --c) {
    const int n = count[static_cast<std::size_t>(c)];
    const Eigen::Index i = rem % n;
    rem /= n;
    x(c) = (n == 1) ? lo(c)
                    : lo(c) + static_cast<double>(i) * (hi(c) - lo(c)) /
                                  static_cast<double>(n - 1);
  }
  return x;
}

std::vector<EigenfunctionField> assemble_eigenfunctions(
    const std::vector<OperatorEstimate>& estimates, const AssemblyOptions& opts) {
  if (estimates.empty()) {
    throw ConfigError("assemble_eigenfunctions: need at least one estimate");
  }
  const KernelSpec& kernel = estimates.front().config.kernel;
  for (const auto& e : estimates) {
    const KernelSpec& k = e.config.kernel;
    const bool same = k.kind == kernel.kind && k.sigma == kernel.sigma &&
                      k.center.size() == kernel.center.size() &&
                      (k.center.size() == 0 || k.center == kernel.center);
    if (!same) {
      throw ConfigError("assemble_eigenfunctions: estimates must share a kernel");
    }
  }
  const auto r = estimates.size();
  auto assembly = std::make_shared<EigenfunctionAssembly>();
  assembly->h_pinv_rel_tol = opts.h_pinv_rel_tol;
  assembly->bases.reserve(r);
  for (const auto& e : estimates) {
    assembly->bases.emplace_back(e.config.kernel, e.config.base_point, e.config.m);
  }
  // Cross-Gram blocks, then the stacked solve for the H blocks.
  Eigen::Index total = 0;
  std::vector<Eigen::Index> offset(r + 1, 0);
  for (std::size_t i = 0; i < r; ++i) {
    offset[i] = total;
    total += assembly->bases[i].size();
  }
  offset[r] = total;
  Eigen::MatrixXd stacked(total, total);
  assembly->gram_blocks.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    assembly->gram_blocks[i].resize(r);
    for (std::size_t j = 0; j < r; ++j) {
      Eigen::MatrixXd g = cross_gram(assembly->bases[i], assembly->bases[j]).values;
      stacked.block(offset[i], offset[j], assembly->bases[i].size(),
                    assembly->bases[j].size()) = g;
      assembly->gram_blocks[i][j] = std::move(g);
    }
  }
  assembly->stacked_gram_cond = cond(stacked);
  Eigen::MatrixXd block_diag = Eigen::MatrixXd::Zero(total, total);
  for (std::size_t i = 0; i < r; ++i) {
    block_diag.block(offset[i], offset[i], assembly->bases[i].size(),
                     assembly->bases[i].size()) = assembly->gram_blocks[i][i];
  }
  const Eigen::MatrixXd h = pinv(stacked, opts.h_pinv_rel_tol) * block_diag;
  assembly->h_blocks.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    assembly->h_blocks[i].resize(r);
    for (std::size_t j = 0; j < r; ++j) {
      assembly->h_blocks[i][j] = h.block(offset[i], offset[j],
                                         assembly->bases[i].size(),
                                         assembly->bases[j].size());
    }
  }
  std::vector<EigenfunctionField> fields;
  for (std::size_t i = 0; i < r; ++i) {
    const EigenSystem es = eig(estimates[i].matrix);
    const double cnorm = std::max(1.0, estimates[i].matrix.norm());
    for (Eigen::Index l = 0; l < es.values.size(); ++l) {
      EigenfunctionField f;
      f.eigenvalue = es.values(l);
      f.point_index = static_cast<int>(i);
      f.right_coeffs = es.right.col(l);
      f.left_coeffs = es.left.col(l);
      f.pair_residual = (f.left_coeffs.adjoint() * estimates[i].matrix -
                         es.values(l) * f.left_coeffs.adjoint())
                            .norm() /
                        cnorm;
      f.defective_flag = es.near_defective;
      f.assembly = assembly;
      fields.push_back(std::move(f));
    }
  }
  return fields;
}

Complex EigenfunctionField::evaluate_right(const Eigen::VectorXd& x) const {
  const auto i = static_cast<std::size_t>(point_index);
  const ObservableBasis& basis = assembly->bases[i];
  const Eigen::VectorXcd v = basis.feature_vector(x).cast<Complex>();
  // v(x)^* (G^{ii})^{-1} w with the diagonal same-point Gram; Eigen's dot
  // conjugates its first argument, matching the v(x)^* convention.
  const Eigen::VectorXcd scaled =
      assembly->gram_blocks[i][i].diagonal().cwiseInverse().cast<Complex>().asDiagonal() *
      right_coeffs;
  return v.dot(scaled);
}

Complex EigenfunctionField::evaluate_left(const Eigen::VectorXd& x) const {
  const auto i = static_cast<std::size_t>(point_index);
  Complex acc(0.0, 0.0);
  for (std::size_t j = 0; j < assembly->bases.size(); ++j) {
    const Eigen::VectorXcd v = assembly->bases[j].feature_vector(x).cast<Complex>();
    // sum_j v_{p_j}(x)^* H^{ji} u
    acc += v.dot(assembly->h_blocks[j][i].cast<Complex>() * left_coeffs);
  }
  return acc;
}

void normalize_field_values(Eigen::VectorXcd& values) {
  if (values.size() == 0) return;
  Eigen::Index peak = 0;
  values.cwiseAbs().maxCoeff(&peak);
  const double amp = std::abs(values(peak));
  if (amp == 0.0) return;
  values *= std::conj(values(peak)) / (amp * amp);
}

Eigen::VectorXcd evaluate_field(const EigenfunctionField& field,
                                const GridSpec& grid, FieldSide side) {
  grid.validate(field.assembly->bases[static_cast<std::size_t>(field.point_index)].dim());
  const Eigen::Index total = grid.total();
  Eigen::VectorXcd out(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    const Eigen::VectorXd x = grid.node(i);
    out(i) = (side == FieldSide::Right) ? field.evaluate_right(x)
                                        : field.evaluate_left(x);
  }
  return out;
}

}  // namespace jetedmd
