// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jetedmd {

/// A multi-index alpha in Z^d_{>=0}. Exponent vectors are small, so value
/// semantics everywhere.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(int dim);
  static MultiIndex unit(int dim, int axis);

  int dim() const { return static_cast<int>(exp_.size()); }
  int degree() const;  // |alpha|
  int operator[](int i) const { return exp_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exp_; }

  bool operator==(const MultiIndex& other) const { return exp_ == other.exp_; }

  std::string to_string() const;

 private:
  std::vector<int> exp_;
};

/// The fixed enumeration of {alpha : |alpha| <= n} used for every basis and
/// matrix layout: by total degree, then lexicographic with x_1 highest
/// priority (within degree k: (k,0,..), (k-1,1,..), ..., (0,..,k)).
class GradedOrder {
 public:
  GradedOrder() = default;
  GradedOrder(int dim, int max_order, std::vector<MultiIndex> indices);

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Position of alpha in the enumeration (0-based). Requires |alpha| <= n.
  std::size_t index_of(const MultiIndex& alpha) const;

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

 private:
  int dim_ = 0;
  int max_order_ = 0;
  std::vector<MultiIndex> indices_;
};

GradedOrder graded_enumerate(int d, int n);

/// r_n = C(n+d, d). Throws NumericalError if the exact value does not fit in
/// 64 bits.
std::uint64_t dimension(int d, int n);

/// alpha! = prod_i alpha_i!. Throws NumericalError on 64-bit overflow.
std::uint64_t mi_factorial(const MultiIndex& alpha);

/// alpha! in floating point; used where factorials feed Gram matrices and
/// |alpha| may exceed the exact integer range (documented cutoff: exact
/// integers up to 20!, double beyond).
double mi_factorial_double(const MultiIndex& alpha);

/// z^alpha with the convention 0^0 = 1 (the empty product is 1).
double monomial_eval(const MultiIndex& alpha, std::span<const double> z);
std::complex<double> monomial_eval(const MultiIndex& alpha,
                                   std::span<const std::complex<double>> z);

}  // namespace jetedmd
