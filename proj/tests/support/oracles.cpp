// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace jetedmd::testing {

TruncPoly::TruncPoly(int dim, int max_deg)
    : dim_(dim), max_deg_(max_deg), table_(graded_enumerate(dim, max_deg)) {
  coef_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table_.size()));
}

TruncPoly TruncPoly::constant(int dim, int max_deg, double c) {
  TruncPoly p(dim, max_deg);
  p.coef_(0) = c;
  return p;
}

TruncPoly TruncPoly::variable(int dim, int max_deg, int axis) {
  TruncPoly p(dim, max_deg);
  p.set_coeff(MultiIndex::unit(dim, axis), 1.0);
  return p;
}

double TruncPoly::coeff(const MultiIndex& alpha) const {
  if (alpha.degree() > max_deg_) return 0.0;
  return coef_(static_cast<Eigen::Index>(table_.index_of(alpha)));
}

void TruncPoly::set_coeff(const MultiIndex& alpha, double c) {
  coef_(static_cast<Eigen::Index>(table_.index_of(alpha))) = c;
}

TruncPoly TruncPoly::operator+(const TruncPoly& other) const {
  TruncPoly out = *this;
  out.coef_ += other.coef_;
  return out;
}

TruncPoly TruncPoly::operator-(const TruncPoly& other) const {
  TruncPoly out = *this;
  out.coef_ -= other.coef_;
  return out;
}

TruncPoly TruncPoly::operator*(double s) const {
  TruncPoly out = *this;
  out.coef_ *= s;
  return out;
}

TruncPoly TruncPoly::operator*(const TruncPoly& other) const {
  if (dim_ != other.dim_ || max_deg_ != other.max_deg_) {
    throw std::invalid_argument("TruncPoly: incompatible operands");
  }
  TruncPoly out(dim_, max_deg_);
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const double a = coef_(static_cast<Eigen::Index>(i));
    if (a == 0.0) continue;
    const MultiIndex& ai = table_[i];
    for (std::size_t j = 0; j < table_.size(); ++j) {
      const double b = other.coef_(static_cast<Eigen::Index>(j));
      if (b == 0.0) continue;
      const MultiIndex& bj = table_[j];
      if (ai.degree() + bj.degree() > max_deg_) continue;
      std::vector<int> sum(static_cast<std::size_t>(dim_));
      for (int c = 0; c < dim_; ++c) sum[static_cast<std::size_t>(c)] = ai[c] + bj[c];
      const MultiIndex m(std::move(sum));
      out.coef_(static_cast<Eigen::Index>(table_.index_of(m))) += a * b;
    }
  }
  return out;
}

TruncPoly TruncPoly::pow(int k) const {
  TruncPoly out = constant(dim_, max_deg_, 1.0);
  for (int i = 0; i < k; ++i) out = out * (*this);
  return out;
}

TruncPoly TruncPoly::derivative(int axis) const {
  TruncPoly out(dim_, max_deg_);
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const double a = coef_(static_cast<Eigen::Index>(i));
    if (a == 0.0) continue;
    const MultiIndex& ai = table_[i];
    if (ai[axis] == 0) continue;
    std::vector<int> down = ai.exponents();
    down[static_cast<std::size_t>(axis)] -= 1;
    const MultiIndex m(std::move(down));
    out.coef_(static_cast<Eigen::Index>(table_.index_of(m))) +=
        a * static_cast<double>(ai[axis]);
  }
  return out;
}

TruncPoly TruncPoly::shifted(const Eigen::VectorXd& p) const {
  // q(z + p) via per-term expansion of prod (z_i + p_i)^gamma_i.
  TruncPoly out(dim_, max_deg_);
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const double a = coef_(static_cast<Eigen::Index>(i));
    if (a == 0.0) continue;
    const MultiIndex& gamma = table_[i];
    TruncPoly term = constant(dim_, max_deg_, a);
    for (int c = 0; c < dim_; ++c) {
      TruncPoly axis_poly(dim_, max_deg_);
      axis_poly.set_coeff(MultiIndex::zero(dim_), p(c));
      axis_poly.set_coeff(MultiIndex::unit(dim_, c), 1.0);
      for (int e = 0; e < gamma[c]; ++e) term = term * axis_poly;
    }
    out.coef_ += term.coef_;
  }
  return out;
}

double TruncPoly::evaluate(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const double a = coef_(static_cast<Eigen::Index>(i));
    if (a == 0.0) continue;
    acc += a * monomial_eval(table_[i], std::span<const double>(x.data(),
                                                                static_cast<std::size_t>(x.size())));
  }
  return acc;
}

Eigen::MatrixXd pushforward_limit(const std::vector<TruncPoly>& f,
                                  const Eigen::VectorXd& p, double sigma, int m) {
  const int d = static_cast<int>(f.size());
  const int max_deg = f.front().max_deg();
  // g_i(z) = f_i(z + p) - p_i has g(0) = 0 when p is a fixed point.
  std::vector<TruncPoly> g;
  for (int i = 0; i < d; ++i) {
    g.push_back(f[static_cast<std::size_t>(i)].shifted(p) -
                TruncPoly::constant(d, max_deg, p(i)));
  }
  const GradedOrder order = graded_enumerate(d, m);
  const auto r = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd out(r, r);
  for (Eigen::Index s = 0; s < r; ++s) {
    const MultiIndex& alpha = order[static_cast<std::size_t>(s)];
    TruncPoly prod = TruncPoly::constant(d, max_deg, 1.0);
    for (int c = 0; c < d; ++c) {
      for (int e = 0; e < alpha[c]; ++e) prod = prod * g[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index t = 0; t < r; ++t) {
      const MultiIndex& beta = order[static_cast<std::size_t>(t)];
      out(s, t) = prod.coeff(beta) *
                  std::pow(sigma, beta.degree() - alpha.degree());
    }
  }
  return out;
}

Eigen::MatrixXd generator_limit(const std::vector<TruncPoly>& field,
                                const Eigen::VectorXd& p, double sigma, int m,
                                const Eigen::VectorXd& b) {
  const int d = static_cast<int>(field.size());
  const int max_deg = field.front().max_deg();
  std::vector<TruncPoly> f_shift;
  for (const TruncPoly& fi : field) f_shift.push_back(fi.shifted(p));
  const GradedOrder order = graded_enumerate(d, m);
  const auto r = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd out(r, r);
  for (Eigen::Index s = 0; s < r; ++s) {
    const MultiIndex& alpha = order[static_cast<std::size_t>(s)];
    TruncPoly mono(d, max_deg);
    mono.set_coeff(alpha, 1.0);
    TruncPoly applied(d, max_deg);
    for (int c = 0; c < d; ++c) {
      applied = applied + f_shift[static_cast<std::size_t>(c)] * mono.derivative(c);
      const double drift = (p(c) - b(c)) / (sigma * sigma);
      if (drift != 0.0) {
        applied = applied + f_shift[static_cast<std::size_t>(c)] * mono * drift;
      }
    }
    for (Eigen::Index t = 0; t < r; ++t) {
      const MultiIndex& beta = order[static_cast<std::size_t>(t)];
      out(s, t) = applied.coeff(beta) *
                  std::pow(sigma, beta.degree() - alpha.degree());
    }
  }
  return out;
}

Eigen::MatrixXd ricker_taylor_matrix(double r, int m) {
  // Series of f(x) = x e^{r(x-1)} = e^{-r} sum_k r^k x^{k+1} / k!.
  const int deg = m;
  TruncPoly f(1, deg);
  double rk = std::exp(-r);  // e^{-r} r^k / k!
  for (int k = 0; k + 1 <= deg; ++k) {
    std::vector<int> e{k + 1};
    f.set_coeff(MultiIndex(e), rk);
    rk *= r / static_cast<double>(k + 1);
  }
  Eigen::MatrixXd out(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    const TruncPoly fi = f.pow(i);
    for (int j = 0; j <= m; ++j) {
      std::vector<int> e{j};
      out(i, j) = fi.coeff(MultiIndex(e));
    }
  }
  return out;
}

double projection_error_gram(const ObservableBasis& basis, const Eigen::VectorXd& x) {
  const Eigen::VectorXd v = basis.feature_vector(x);
  const Eigen::VectorXd g = gram(basis).diagonal;
  const double kxx = kernel_value(basis.kernel(), x, x);
  const double proj = v.cwiseQuotient(g).dot(v);
  const double diff = kxx - proj;
  return diff > 0.0 ? std::sqrt(diff) : 0.0;
}

std::vector<TruncPoly> quadratic_map_polys(int max_deg) {
  const TruncPoly x = TruncPoly::variable(2, max_deg, 0);
  const TruncPoly y = TruncPoly::variable(2, max_deg, 1);
  return {x * x - y * y + x - y, x * y * 2.0 + x + y};
}

std::vector<TruncPoly> van_der_pol_polys(double mu, int max_deg) {
  const TruncPoly x = TruncPoly::variable(2, max_deg, 0);
  const TruncPoly y = TruncPoly::variable(2, max_deg, 1);
  return {y, (TruncPoly::constant(2, max_deg, 1.0) - x * x) * y * mu - x};
}

std::vector<TruncPoly> duffing_polys(double alpha, double beta, double delta,
                                     int max_deg) {
  const TruncPoly x = TruncPoly::variable(2, max_deg, 0);
  const TruncPoly y = TruncPoly::variable(2, max_deg, 1);
  return {y, y * (-delta) - x * alpha - x * x * x * beta};
}

std::vector<TruncPoly> lorenz_polys(int max_deg) {
  const TruncPoly x = TruncPoly::variable(3, max_deg, 0);
  const TruncPoly y = TruncPoly::variable(3, max_deg, 1);
  const TruncPoly z = TruncPoly::variable(3, max_deg, 2);
  return {(y - x) * 10.0, x * 28.0 - x * z - y, x * y - z * (8.0 / 3.0)};
}

}  // namespace jetedmd::testing
