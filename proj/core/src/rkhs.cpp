// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/rkhs.hpp"

#include <cmath>

#include "jetedmd/errors.hpp"

namespace jetedmd {

namespace {

constexpr double kTailRelTol = 1e-18;
constexpr int kTailMaxTerms = 500;

Eigen::MatrixXd binomial_table(int n) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    c(i, 0) = 1.0;
    for (int j = 1; j <= i; ++j) {
      c(i, j) = c(i - 1, j - 1) + ((j <= i - 1) ? c(i - 1, j) : 0.0);
    }
  }
  return c;
}

}  // namespace

KernelSpec KernelSpec::exponential(double sigma, Eigen::VectorXd center) {
  if (sigma <= 0.0) throw ConfigError("KernelSpec: sigma must be positive");
  if (center.size() == 0) {
    throw ConfigError("KernelSpec: exponential kernel requires a center");
  }
  return KernelSpec{KernelKind::Exponential, sigma, std::move(center)};
}

KernelSpec KernelSpec::gaussian(double sigma) {
  if (sigma <= 0.0) throw ConfigError("KernelSpec: sigma must be positive");
  return KernelSpec{KernelKind::Gaussian, sigma, Eigen::VectorXd()};
}

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ConfigError("kernel_value: dimension mismatch");
  const double s2 = k.sigma * k.sigma;
  if (k.kind == KernelKind::Exponential) {
    if (k.center.size() != x.size()) {
      throw ConfigError("kernel_value: kernel center dimension mismatch");
    }
    return std::exp((x - k.center).dot(y - k.center) / s2);
  }
  return std::exp(-(x - y).squaredNorm() / (2.0 * s2));
}

ObservableBasis::ObservableBasis(KernelSpec kernel, Eigen::VectorXd base_point,
                                 int order)
    : kernel_(std::move(kernel)), p_(std::move(base_point)), order_(order) {
  if (p_.size() < 1) throw ConfigError("ObservableBasis: base point is empty");
  if (order_ < 0) throw ConfigError("ObservableBasis: order must be >= 0");
  if (kernel_.sigma <= 0.0) throw ConfigError("ObservableBasis: sigma must be positive");
  if (kernel_.kind == KernelKind::Exponential) {
    if (kernel_.center.size() != p_.size()) {
      throw ConfigError("ObservableBasis: exponential center dimension mismatch");
    }
  } else if (kernel_.center.size() != 0) {
    throw ConfigError("ObservableBasis: Gaussian kernels carry no center");
  }
  table_ = graded_enumerate(dim(), order_);
}

Eigen::VectorXd ObservableBasis::feature_vector(const Eigen::VectorXd& x) const {
  if (x.size() != p_.size()) throw ConfigError("feature_vector: dimension mismatch");
  const int d = dim();
  const double sigma = kernel_.sigma;
  // Scaled powers ((x_c - p_c)/sigma)^e.
  Eigen::MatrixXd pw(order_ + 1, d);
  for (int c = 0; c < d; ++c) {
    const double s = (x(c) - p_(c)) / sigma;
    pw(0, c) = 1.0;
    for (int e = 1; e <= order_; ++e) pw(e, c) = pw(e - 1, c) * s;
  }
  double efac;
  if (kernel_.kind == KernelKind::Exponential) {
    const Eigen::VectorXd pb = p_ - kernel_.center;
    efac = std::exp(pb.dot(2.0 * x - p_ - kernel_.center) / (2.0 * sigma * sigma));
  } else {
    efac = std::exp(-(x - p_).squaredNorm() / (2.0 * sigma * sigma));
  }
  Eigen::VectorXd out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const MultiIndex& a = table_[static_cast<std::size_t>(i)];
    double m = 1.0;
    for (int c = 0; c < d; ++c) m *= pw(a[c], c);
    out(i) = m * efac;
  }
  return out;
}

Eigen::VectorXd ObservableBasis::feature_derivative(int axis,
                                                    const Eigen::VectorXd& x) const {
  if (axis < 0 || axis >= dim()) throw ConfigError("feature_derivative: bad axis");
  if (x.size() != p_.size()) throw ConfigError("feature_derivative: dimension mismatch");
  const int d = dim();
  const double sigma = kernel_.sigma;
  Eigen::MatrixXd pw(order_ + 1, d);
  for (int c = 0; c < d; ++c) {
    const double s = (x(c) - p_(c)) / sigma;
    pw(0, c) = 1.0;
    for (int e = 1; e <= order_; ++e) pw(e, c) = pw(e - 1, c) * s;
  }
  double efac;
  double dlog;  // d/dx_axis of the exponential factor's log
  if (kernel_.kind == KernelKind::Exponential) {
    const Eigen::VectorXd pb = p_ - kernel_.center;
    efac = std::exp(pb.dot(2.0 * x - p_ - kernel_.center) / (2.0 * sigma * sigma));
    dlog = pb(axis) / (sigma * sigma);
  } else {
    efac = std::exp(-(x - p_).squaredNorm() / (2.0 * sigma * sigma));
    dlog = -(x(axis) - p_(axis)) / (sigma * sigma);
  }
  Eigen::VectorXd out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const MultiIndex& a = table_[static_cast<std::size_t>(i)];
    double mono = 1.0;
    double mono_minus = (a[axis] >= 1) ? 1.0 : 0.0;  // (x-p)^(a - e_axis) scaled
    for (int c = 0; c < d; ++c) {
      mono *= pw(a[c], c);
      if (a[axis] >= 1) mono_minus *= pw(c == axis ? a[c] - 1 : a[c], c);
    }
    out(i) = efac * (static_cast<double>(a[axis]) * mono_minus / sigma + dlog * mono);
  }
  return out;
}

Eigen::MatrixXd ObservableBasis::feature_matrix(const Eigen::MatrixXd& X) const {
  if (X.rows() != p_.size()) throw ConfigError("feature_matrix: dimension mismatch");
  Eigen::MatrixXd V(size(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) V.col(j) = feature_vector(X.col(j));
  return V;
}

Eigen::VectorXcd ObservableBasis::feature_vector_complex(
    const Eigen::VectorXcd& z) const {
  if (z.size() != p_.size()) throw ConfigError("feature_vector_complex: dimension mismatch");
  using C = std::complex<double>;
  const int d = dim();
  const double sigma = kernel_.sigma;
  Eigen::MatrixXcd pw(order_ + 1, d);
  for (int c = 0; c < d; ++c) {
    const C s = (z(c) - p_(c)) / sigma;
    pw(0, c) = C(1.0, 0.0);
    for (int e = 1; e <= order_; ++e) pw(e, c) = pw(e - 1, c) * s;
  }
  C logfac(0.0, 0.0);
  if (kernel_.kind == KernelKind::Exponential) {
    for (int c = 0; c < d; ++c) {
      const double pb = p_(c) - kernel_.center(c);
      logfac += pb * (2.0 * z(c) - p_(c) - kernel_.center(c));
    }
  } else {
    for (int c = 0; c < d; ++c) {
      const C w = z(c) - p_(c);
      logfac -= w * w;
    }
  }
  const C efac = std::exp(logfac / (2.0 * sigma * sigma));
  Eigen::VectorXcd out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const MultiIndex& a = table_[static_cast<std::size_t>(i)];
    C m(1.0, 0.0);
    for (int c = 0; c < d; ++c) m *= pw(a[c], c);
    out(i) = m * efac;
  }
  return out;
}

GramMatrix gram(const ObservableBasis& basis) {
  const GradedOrder& table = basis.order_table();
  Eigen::VectorXd diag(static_cast<Eigen::Index>(table.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const MultiIndex& a = table[i];
    // Exact up to 20!, floating point beyond.
    diag(static_cast<Eigen::Index>(i)) =
        (a.degree() <= 20) ? static_cast<double>(mi_factorial(a))
                           : mi_factorial_double(a);
  }
  return GramMatrix{std::move(diag)};
}

namespace {

// Per-coordinate table of 1-D inner products
//   g[a][b] = < (w-pc)^a/s^a * e_{pc}, (w-qc)^b/s^b * e_{qc} >
// in the 1-D exponential-kernel space H(sigma, bc), where e_{pc} is the
// kernel-section exponential factor attached to base point pc. Built from the
// derivative recurrence for D(j,l) = d_s^j d_t^l exp(sigma^2 s t) evaluated at
// s=(pc-bc)/sigma^2, t=(qc-bc)/sigma^2, pre-scaled so the (0,0) entry is
// exp(-(pc-qc)^2/2sigma^2).
Eigen::MatrixXd cross_gram_1d(double pc, double qc, double bc, double sigma,
                              int na, int nb, const Eigen::MatrixXd& binom) {
  const double s2 = sigma * sigma;
  const double dp = pc - bc;
  const double dq = qc - bc;
  Eigen::MatrixXd D(na + 1, nb + 1);
  D(0, 0) = std::exp(-(pc - qc) * (pc - qc) / (2.0 * s2));
  for (int l = 1; l <= nb; ++l) D(0, l) = dp * D(0, l - 1);
  for (int j = 1; j <= na; ++j) {
    for (int l = 0; l <= nb; ++l) {
      D(j, l) = dq * D(j - 1, l) + (l > 0 ? s2 * l * D(j - 1, l - 1) : 0.0);
    }
  }
  Eigen::MatrixXd g(na + 1, nb + 1);
  Eigen::VectorXd bp(na + 1), bq(nb + 1);  // (bc-pc)^k, (bc-qc)^k
  bp(0) = 1.0;
  for (int k = 1; k <= na; ++k) bp(k) = bp(k - 1) * (bc - pc);
  bq(0) = 1.0;
  for (int k = 1; k <= nb; ++k) bq(k) = bq(k - 1) * (bc - qc);
  for (int a = 0; a <= na; ++a) {
    for (int b = 0; b <= nb; ++b) {
      double acc = 0.0;
      for (int u = 0; u <= a; ++u) {
        double rowacc = 0.0;
        for (int v = 0; v <= b; ++v) {
          rowacc += binom(b, v) * bq(b - v) * D(u, v);
        }
        acc += binom(a, u) * bp(a - u) * rowacc;
      }
      g(a, b) = acc / (std::pow(sigma, a) * std::pow(sigma, b));
    }
  }
  return g;
}

void require_shared_kernel(const ObservableBasis& bi, const ObservableBasis& bj) {
  const KernelSpec& ki = bi.kernel();
  const KernelSpec& kj = bj.kernel();
  const bool same = ki.kind == kj.kind && ki.sigma == kj.sigma &&
                    ki.center.size() == kj.center.size() &&
                    (ki.center.size() == 0 || ki.center == kj.center);
  if (!same || bi.dim() != bj.dim()) {
    throw ConfigError("cross_gram: bases must share one kernel and dimension");
  }
}

}  // namespace

CrossGram cross_gram(const ObservableBasis& bi, const ObservableBasis& bj,
                     const CrossGramOptions& opts) {
  require_shared_kernel(bi, bj);
  const int d = bi.dim();
  const double sigma = bi.kernel().sigma;
  const int na = bi.order();
  const int nb = bj.order();
  // The Gaussian space is isometric to the exponential space with b = 0 and
  // the isometry maps basis functions to basis functions, so one 1-D kernel
  // covers both kinds.
  std::vector<Eigen::MatrixXd> g1d;
  g1d.reserve(static_cast<std::size_t>(d));
  const Eigen::MatrixXd binom = binomial_table(std::max(na, nb));
  for (int c = 0; c < d; ++c) {
    const double bc =
        bi.kernel().kind == KernelKind::Exponential ? bi.kernel().center(c) : 0.0;
    g1d.push_back(cross_gram_1d(bi.base_point()(c), bj.base_point()(c), bc, sigma,
                                na, nb, binom));
  }
  const GradedOrder& ta = bi.order_table();
  const GradedOrder& tb = bj.order_table();
  Eigen::MatrixXd out(bi.size(), bj.size());
  for (Eigen::Index s = 0; s < bi.size(); ++s) {
    const MultiIndex& a = ta[static_cast<std::size_t>(s)];
    for (Eigen::Index t = 0; t < bj.size(); ++t) {
      const MultiIndex& b = tb[static_cast<std::size_t>(t)];
      double v = 1.0;
      for (int c = 0; c < d; ++c) v *= g1d[static_cast<std::size_t>(c)](a[c], b[c]);
      out(s, t) = v;
    }
  }
  if (opts.quadrature_check) {
    const Eigen::MatrixXd q = cross_gram_quadrature(bi, bj, opts.quadrature_nodes);
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    const double diff = (out - q).cwiseAbs().maxCoeff();
    if (diff > opts.quadrature_tol * scale) {
      throw NumericalError("cross_gram: quadrature cross-check disagrees (" +
                           std::to_string(diff / scale) + " relative)");
    }
  }
  return CrossGram{std::move(out)};
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("gauss_hermite: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success) {
    throw NumericalError("gauss_hermite: Golub-Welsch eigensolve failed");
  }
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights =
      std::sqrt(M_PI) * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

Eigen::MatrixXd cross_gram_quadrature(const ObservableBasis& bi,
                                      const ObservableBasis& bj, int nodes) {
  require_shared_kernel(bi, bj);
  const int d = bi.dim();
  const double sigma = bi.kernel().sigma;
  const GaussHermiteRule rule = gauss_hermite(nodes);
  // The Bargmann integral of the exponential-kernel space factorizes per
  // coordinate for product functions: each factor is
  //   (1/pi) int h_a(b + sigma(u+iw)) conj(h_b(...)) e^{-u^2-w^2} du dw.
  // Gaussian bases are handled through the unitary map onto the b = 0
  // exponential space, which sends basis functions to basis functions.
  using C = std::complex<double>;
  const int na = bi.order();
  const int nb = bj.order();
  std::vector<Eigen::MatrixXcd> g1d;
  for (int c = 0; c < d; ++c) {
    const double bc =
        bi.kernel().kind == KernelKind::Exponential ? bi.kernel().center(c) : 0.0;
    const double pc = bi.base_point()(c);
    const double qc = bj.base_point()(c);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(na + 1, nb + 1);
    Eigen::VectorXcd ha(na + 1), hb(nb + 1);
    for (int iu = 0; iu < nodes; ++iu) {
      for (int iw = 0; iw < nodes; ++iw) {
        const C z(bc + sigma * rule.nodes(iu), sigma * rule.nodes(iw));
        const double wgt = rule.weights(iu) * rule.weights(iw) / M_PI;
        const C ep = std::exp((pc - bc) * (2.0 * z - pc - bc) / (2.0 * sigma * sigma));
        const C eq = std::exp((qc - bc) * (2.0 * z - qc - bc) / (2.0 * sigma * sigma));
        ha(0) = ep;
        for (int a = 1; a <= na; ++a) ha(a) = ha(a - 1) * (z - pc) / sigma;
        hb(0) = eq;
        for (int b = 1; b <= nb; ++b) hb(b) = hb(b - 1) * (z - qc) / sigma;
        acc.noalias() += wgt * ha * hb.conjugate().transpose();
      }
    }
    g1d.push_back(std::move(acc));
  }
  const GradedOrder& ta = bi.order_table();
  const GradedOrder& tb = bj.order_table();
  Eigen::MatrixXd out(bi.size(), bj.size());
  for (Eigen::Index s = 0; s < bi.size(); ++s) {
    const MultiIndex& a = ta[static_cast<std::size_t>(s)];
    for (Eigen::Index t = 0; t < bj.size(); ++t) {
      const MultiIndex& b = tb[static_cast<std::size_t>(t)];
      C v(1.0, 0.0);
      for (int c = 0; c < d; ++c) v *= g1d[static_cast<std::size_t>(c)](a[c], b[c]);
      out(s, t) = v.real();
    }
  }
  return out;
}

ProjectionErrorResult projection_error_detail(const ObservableBasis& basis,
                                              const Eigen::VectorXd& x) {
  if (x.size() != basis.base_point().size()) {
    throw ConfigError("projection_error: dimension mismatch");
  }
  const double sigma = basis.kernel().sigma;
  const double t = (x - basis.base_point()).squaredNorm() / (sigma * sigma);
  const int n = basis.order();
  if (t == 0.0) return {0.0, true};
  double pref_log;
  if (basis.kernel().kind == KernelKind::Exponential) {
    pref_log = ((x - basis.kernel().center).squaredNorm() -
                (x - basis.base_point()).squaredNorm()) /
               (2.0 * sigma * sigma);
  } else {
    pref_log = -(x - basis.base_point()).squaredNorm() / (2.0 * sigma * sigma);
  }
  // tail = sum_{m>n} t^m/m!, summed from the leading term in log space.
  const double lead_log = (n + 1) * std::log(t) - std::lgamma(n + 2.0);
  double bracket = 1.0;
  double term = 1.0;
  bool converged = false;
  for (int k = 1; k <= kTailMaxTerms; ++k) {
    term *= t / (n + 1 + k);
    bracket += term;
    if (term < kTailRelTol * bracket) {
      converged = true;
      break;
    }
  }
  double tail_log;
  if (converged) {
    tail_log = lead_log + std::log(bracket);
  } else {
    // Single-term upper bound tail <= t^{n+1}/(n+1)! * e^t.
    tail_log = lead_log + t;
  }
  return {std::exp(pref_log + 0.5 * tail_log), converged};
}

double projection_error(const ObservableBasis& basis, const Eigen::VectorXd& x) {
  return projection_error_detail(basis, x).value;
}

Eigen::VectorXd projection_coefficients(const ObservableBasis& basis,
                                        const Eigen::VectorXd& x) {
  const GramMatrix g = gram(basis);
  return basis.feature_vector(x).cwiseQuotient(g.diagonal);
}

}  // namespace jetedmd
