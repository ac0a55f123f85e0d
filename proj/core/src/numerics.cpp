// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jetedmd/errors.hpp"

namespace jetedmd {

namespace {

template <typename Matrix>
Matrix pinv_impl(const Matrix& m, double rel_tol, Eigen::Index* rank_out,
                 double* smax_out, double* smin_kept_out) {
  if (m.size() == 0) throw ConfigError("pinv: empty matrix");
  if (rel_tol < 0.0) throw ConfigError("pinv: rel_tol must be >= 0");
  // Jacobi is the accurate choice for the small/medium blocks here; BDC takes
  // over for larger panels (feature matrices with thousands of samples).
  const bool small = std::min(m.rows(), m.cols()) <= 16;
  Eigen::VectorXd sv;
  Matrix u, v;
  if (small) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("pinv: SVD failed");
    sv = svd.singularValues();
    u = svd.matrixU();
    v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("pinv: SVD failed");
    sv = svd.singularValues();
    u = svd.matrixU();
    v = svd.matrixV();
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol_factor =
      rel_tol > 0.0 ? rel_tol
                    : static_cast<double>(std::max(m.rows(), m.cols())) * eps;
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = tol_factor * smax;
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  Eigen::Index rank = 0;
  double smin_kept = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) {
      inv_sv(i) = 1.0 / sv(i);
      smin_kept = sv(i);
      ++rank;
    }
  }
  if (rank_out) *rank_out = rank;
  if (smax_out) *smax_out = smax;
  if (smin_kept_out) *smin_kept_out = smin_kept;
  return v * inv_sv.asDiagonal() * u.adjoint();
}

}  // namespace

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double rel_tol) {
  return pinv_impl(m, rel_tol, nullptr, nullptr, nullptr);
}

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& m, double rel_tol) {
  return pinv_impl(m, rel_tol, nullptr, nullptr, nullptr);
}

PinvResult pinv_with_rank(const Eigen::MatrixXd& m, double rel_tol) {
  PinvResult r;
  r.matrix = pinv_impl(m, rel_tol, &r.rank, &r.sigma_max, &r.sigma_min_kept);
  return r;
}

void sort_spectrum(Eigen::VectorXcd& values) {
  std::vector<Complex> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = v[static_cast<std::size_t>(i)];
}

std::vector<Complex> sorted_spectrum(const Eigen::VectorXcd& values) {
  Eigen::VectorXcd v = values;
  sort_spectrum(v);
  return std::vector<Complex>(v.data(), v.data() + v.size());
}

EigenSystem eig(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw ConfigError("eig: matrix must be square");
  if (a.size() == 0) throw ConfigError("eig: empty matrix");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig: eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  // Deterministic order: (Re desc, Im desc).
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  const Eigen::VectorXcd raw = solver.eigenvalues();
  std::sort(perm.begin(), perm.end(), [&](Eigen::Index i, Eigen::Index j) {
    if (raw(i).real() != raw(j).real()) return raw(i).real() > raw(j).real();
    return raw(i).imag() > raw(j).imag();
  });
  EigenSystem out;
  out.values.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = raw(perm[static_cast<std::size_t>(i)]);
    out.right.col(i) = solver.eigenvectors().col(perm[static_cast<std::size_t>(i)]);
  }
  out.vector_condition = cond(out.right);
  out.near_defective = !(out.vector_condition < kDefectiveConditionThreshold);
  // Rows of right^-1 are the biorthogonal left eigenvectors; fall back to the
  // pseudo-inverse when the vector matrix is numerically singular.
  Eigen::MatrixXcd right_inv;
  if (out.near_defective) {
    right_inv = pinv(out.right);
  } else {
    right_inv = out.right.partialPivLu().solve(
        Eigen::MatrixXcd::Identity(n, n));
  }
  out.left = right_inv.adjoint();
  const double anorm = std::max(1.0, a.norm());
  out.residual = (a * out.right - out.right * out.values.asDiagonal()).norm() / anorm;
  return out;
}

EigenSystem eig(const Eigen::MatrixXd& a) {
  return eig(Eigen::MatrixXcd(a.cast<Complex>()));
}

Eigen::MatrixXcd matrix_log(const Eigen::MatrixXcd& m,
                            std::span<const int> branch_offsets) {
  if (m.rows() != m.cols()) throw ConfigError("matrix_log: matrix must be square");
  if (!branch_offsets.empty() &&
      static_cast<Eigen::Index>(branch_offsets.size()) != m.rows()) {
    throw ConfigError("matrix_log: branch_offsets size must match matrix order");
  }
  const EigenSystem es = eig(m);
  const double scale = std::max(m.norm(), 1.0);
  if (es.vector_condition > 1e14) {
    throw NumericalError(
        "matrix_log: eigenvector matrix condition number too large (" +
        std::to_string(es.vector_condition) + "); matrix may be defective");
  }
  Eigen::VectorXcd logs(es.values.size());
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const Complex lam = es.values(j);
    if (std::abs(lam) < 1e-300 || std::abs(lam) < 1e-15 * scale) {
      throw NumericalError("matrix_log: eigenvalue at or near zero");
    }
    const int k = branch_offsets.empty() ? 0 : branch_offsets[static_cast<std::size_t>(j)];
    logs(j) = Complex(std::log(std::abs(lam)),
                      std::arg(lam) + 2.0 * M_PI * static_cast<double>(k));
  }
  return es.right * logs.asDiagonal() *
         es.right.partialPivLu().solve(Eigen::MatrixXcd::Identity(m.rows(), m.rows()));
}

Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ConfigError("matrix_exp: matrix must be square");
  const EigenSystem es = eig(m);
  if (es.vector_condition > 1e14) {
    throw NumericalError("matrix_exp: eigenvector matrix condition number too large");
  }
  const Eigen::VectorXcd exps = es.values.array().exp();
  return es.right * exps.asDiagonal() *
         es.right.partialPivLu().solve(Eigen::MatrixXcd::Identity(m.rows(), m.rows()));
}

double hausdorff(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() || b.empty()) throw ConfigError("hausdorff: sets must be nonempty");
  auto directed = [](std::span<const Complex> s, std::span<const Complex> t) {
    double worst = 0.0;
    for (const Complex& x : s) {
      double best = std::numeric_limits<double>::infinity();
      for (const Complex& y : t) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

namespace {

template <typename Matrix>
double cond_impl(const Matrix& m) {
  if (m.size() == 0) throw ConfigError("cond: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}  // namespace

double cond(const Eigen::MatrixXd& m) { return cond_impl(m); }
double cond(const Eigen::MatrixXcd& m) { return cond_impl(m); }

}  // namespace jetedmd
