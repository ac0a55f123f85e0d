// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/multiindex.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "jetedmd/errors.hpp"

namespace jetedmd {

MultiIndex::MultiIndex(std::vector<int> exponents) : exp_(std::move(exponents)) {
  if (exp_.empty()) throw ConfigError("MultiIndex: dimension must be >= 1");
  for (int e : exp_) {
    if (e < 0) throw ConfigError("MultiIndex: exponents must be nonnegative");
  }
}

MultiIndex MultiIndex::zero(int dim) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0));
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  e.at(static_cast<std::size_t>(axis)) = 1;
  return MultiIndex(std::move(e));
}

int MultiIndex::degree() const {
  return std::accumulate(exp_.begin(), exp_.end(), 0);
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < exp_.size(); ++i) {
    if (i > 0) os << ',';
    os << exp_[i];
  }
  os << ')';
  return os.str();
}

GradedOrder::GradedOrder(int dim, int max_order, std::vector<MultiIndex> indices)
    : dim_(dim), max_order_(max_order), indices_(std::move(indices)) {}

namespace {

// Appends all alpha with |alpha| = degree over coordinates [pos, d), first
// coordinate descending. Produces the lexicographic-within-degree listing with
// x_1 highest priority.
void emit_degree(std::vector<int>& work, int pos, int degree,
                 std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(work.size());
  if (pos == d - 1) {
    work[static_cast<std::size_t>(pos)] = degree;
    out.emplace_back(work);
    return;
  }
  for (int a = degree; a >= 0; --a) {
    work[static_cast<std::size_t>(pos)] = a;
    emit_degree(work, pos + 1, degree - a, out);
  }
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* ctx) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw NumericalError(std::string(ctx) + ": 64-bit integer overflow");
  }
  return r;
}

}  // namespace

GradedOrder graded_enumerate(int d, int n) {
  if (d < 1) throw ConfigError("graded_enumerate: d must be >= 1");
  if (n < 0) throw ConfigError("graded_enumerate: n must be >= 0");
  std::vector<MultiIndex> indices;
  indices.reserve(static_cast<std::size_t>(dimension(d, n)));
  std::vector<int> work(static_cast<std::size_t>(d), 0);
  for (int k = 0; k <= n; ++k) emit_degree(work, 0, k, indices);
  return GradedOrder(d, n, std::move(indices));
}

std::uint64_t dimension(int d, int n) {
  if (d < 1) throw ConfigError("dimension: d must be >= 1");
  if (n < 0) throw ConfigError("dimension: n must be >= 0");
  // C(n+d, d) built incrementally; each partial product is divisible by i.
  std::uint64_t r = 1;
  for (int i = 1; i <= d; ++i) {
    r = checked_mul(r, static_cast<std::uint64_t>(n + i), "dimension");
    r /= static_cast<std::uint64_t>(i);
  }
  return r;
}

std::size_t GradedOrder::index_of(const MultiIndex& alpha) const {
  if (alpha.dim() != dim_) throw ConfigError("index_of: dimension mismatch");
  const int k = alpha.degree();
  if (k > max_order_) throw ConfigError("index_of: degree exceeds max order");
  // Offset of the degree-k block, then the lexicographic rank inside it.
  std::size_t idx = (k == 0) ? 0 : static_cast<std::size_t>(dimension(dim_, k - 1));
  int remaining = k;
  for (int c = 0; c + 1 < dim_; ++c) {
    // Count indices whose coordinate c exceeds alpha_c (they come first).
    for (int a = remaining; a > alpha[c]; --a) {
      const int dims_left = dim_ - c - 1;
      idx += static_cast<std::size_t>(dimension(dims_left, remaining - a) -
                                      (remaining - a == 0
                                           ? 0
                                           : dimension(dims_left, remaining - a - 1)));
    }
    remaining -= alpha[c];
  }
  return idx;
}

std::uint64_t mi_factorial(const MultiIndex& alpha) {
  std::uint64_t r = 1;
  for (int i = 0; i < alpha.dim(); ++i) {
    for (int j = 2; j <= alpha[i]; ++j) {
      r = checked_mul(r, static_cast<std::uint64_t>(j), "mi_factorial");
    }
  }
  return r;
}

double mi_factorial_double(const MultiIndex& alpha) {
  double r = 1.0;
  for (int i = 0; i < alpha.dim(); ++i) {
    r *= std::tgamma(static_cast<double>(alpha[i]) + 1.0);
  }
  return r;
}

namespace {

template <typename Scalar>
Scalar monomial_eval_impl(const MultiIndex& alpha, std::span<const Scalar> z) {
  if (static_cast<int>(z.size()) != alpha.dim()) {
    throw ConfigError("monomial_eval: point dimension mismatch");
  }
  Scalar r{1.0};
  for (int i = 0; i < alpha.dim(); ++i) {
    for (int j = 0; j < alpha[i]; ++j) r *= z[static_cast<std::size_t>(i)];
  }
  return r;
}

}  // namespace

double monomial_eval(const MultiIndex& alpha, std::span<const double> z) {
  return monomial_eval_impl(alpha, z);
}

std::complex<double> monomial_eval(const MultiIndex& alpha,
                                   std::span<const std::complex<double>> z) {
  return monomial_eval_impl(alpha, z);
}

}  // namespace jetedmd
