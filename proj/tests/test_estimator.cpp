// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jetedmd/errors.hpp"
#include "jetedmd/estimator.hpp"
#include "jetedmd/systems.hpp"
#include "oracles.hpp"

using namespace jetedmd;
using jetedmd::testing::TruncPoly;

namespace {

EstimatorConfig exp_config(int m, int n, const Eigen::VectorXd& p, double sigma,
                           const Eigen::VectorXd& b) {
  EstimatorConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.base_point = p;
  cfg.kernel = KernelSpec::exponential(sigma, b);
  return cfg;
}

Eigen::VectorXd zero1() { return Eigen::VectorXd::Zero(1); }
Eigen::VectorXd zero2() { return Eigen::VectorXd::Zero(2); }

SnapshotData linear_map_data(double a, int count) {
  SnapshotData d;
  d.x = sample_box(3, {{-1.0, 1.0}}, count, "linear_map");
  d.y = a * d.x;
  d.kind = SnapshotKind::DiscreteMap;
  return d;
}

}  // namespace

TEST_CASE("edmd_full on the identity map") {
  SnapshotData d;
  d.x = sample_box(1, {{-1.0, 1.0}, {-1.0, 1.0}}, 30, "identity");
  d.y = d.x;
  d.kind = SnapshotKind::DiscreteMap;
  const EstimatorConfig cfg = exp_config(2, 3, zero2(), 1.0, zero2());
  const Eigen::MatrixXcd c0 = edmd_full(cfg, d);
  REQUIRE(c0.rows() == 6);
  REQUIRE(c0.cols() == 10);
  CHECK((c0.topLeftCorner(6, 6) - Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-10);
}

TEST_CASE("feature columns reproduce feature_vector") {
  SnapshotData d = linear_map_data(0.5, 9);
  const EstimatorConfig cfg = exp_config(2, 2, zero1(), 1.0, zero1());
  const ObservableBasis basis(cfg.kernel, cfg.base_point, cfg.n);
  const Eigen::MatrixXd v = basis.feature_matrix(d.x);
  for (Eigen::Index j = 0; j < d.count(); ++j) {
    CHECK((v.col(j) - basis.feature_vector(d.x.col(j))).norm() == 0.0);
  }
}

TEST_CASE("jet_edmd_discrete on f(x) = 2x") {
  const SnapshotData d = linear_map_data(2.0, 5);
  SUBCASE("square case m = n = 2") {
    const OperatorEstimate est = jet_edmd_discrete(exp_config(2, 2, zero1(), 1.0, zero1()), d);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(3, 3);
    expected(0, 0) = 1.0;
    expected(1, 1) = 2.0;
    expected(2, 2) = 4.0;
    CHECK((est.matrix - expected).norm() < 1e-8);
  }
  SUBCASE("truncated case m = 2, n = 6 needs more samples") {
    const SnapshotData d10 = linear_map_data(2.0, 10);
    const OperatorEstimate est =
        jet_edmd_discrete(exp_config(2, 6, zero1(), 1.0, zero1()), d10);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(3, 3);
    expected(0, 0) = 1.0;
    expected(1, 1) = 2.0;
    expected(2, 2) = 4.0;
    CHECK((est.matrix - expected).norm() < 1e-8);
  }
}

TEST_CASE("m = n reduces to the square edmd_full matrix") {
  const DynamicalSystem henon = builtin("henon");
  const SnapshotData d = map_pairs(henon, sample_box(2, {{-0.5, 0.5}, {-0.2, 0.2}}, 40, "henon"));
  const EstimatorConfig cfg = exp_config(3, 3, zero2(), 1.0, zero2());
  const Eigen::MatrixXcd full = edmd_full(cfg, d);
  const OperatorEstimate est = jet_edmd_discrete(cfg, d);
  CHECK(full.rows() == full.cols());
  CHECK((full - est.matrix).norm() == 0.0);
}

TEST_CASE("truncation consistency across m") {
  const DynamicalSystem quad = builtin("quadratic_map");
  const SnapshotData d =
      map_pairs(quad, sample_box(4, {{-1.0, 1.0}, {-1.0, 1.0}}, 80, "quad"));
  const OperatorEstimate big = jet_edmd_discrete(exp_config(4, 8, zero2(), 1.0, zero2()), d);
  for (int m_small : {0, 1, 2, 3}) {
    const OperatorEstimate small =
        jet_edmd_discrete(exp_config(m_small, 8, zero2(), 1.0, zero2()), d);
    const auto r = small.matrix.rows();
    CHECK((big.matrix.topLeftCorner(r, r) - small.matrix).norm() <
          1e-12 * std::max(1.0, small.matrix.norm()));
  }
}

TEST_CASE("determinism: identical inputs give bitwise-identical matrices") {
  const DynamicalSystem quad = builtin("quadratic_map");
  const SnapshotData d =
      map_pairs(quad, sample_box(9, {{-1.0, 1.0}, {-1.0, 1.0}}, 70, "det"));
  const EstimatorConfig cfg = exp_config(3, 6, zero2(), 1.0, zero2());
  const OperatorEstimate a = jet_edmd_discrete(cfg, d);
  const OperatorEstimate b = jet_edmd_discrete(cfg, d);
  CHECK(a.matrix == b.matrix);
}

TEST_CASE("convergence in n toward the symbolic pushforward oracle") {
  const DynamicalSystem quad = builtin("quadratic_map");
  const SnapshotData d =
      map_pairs(quad, sample_box(12, {{-1.0, 1.0}, {-1.0, 1.0}}, 500, "quad_conv"));
  const Eigen::MatrixXd oracle =
      jetedmd::testing::pushforward_limit(jetedmd::testing::quadratic_map_polys(8),
                                          zero2(), 1.0, 3);
  double prev = 1e300;
  for (int n : {4, 6, 8, 10}) {
    const OperatorEstimate est = jet_edmd_discrete(exp_config(3, n, zero2(), 1.0, zero2()), d);
    const double err = (est.matrix.real() - oracle).norm();
    // Strict decrease until the round-off floor; for this polynomial map the
    // estimate is exact once n >= 2m, so the tail sits at the floor.
    CHECK((err < prev || err < 1e-10));
    prev = err;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("rank and sample-count guards") {
  const SnapshotData d = linear_map_data(2.0, 5);
  // r_n = 8 > N = 5 is rejected unless explicitly permitted.
  EstimatorConfig cfg = exp_config(2, 7, zero1(), 1.0, zero1());
  CHECK_THROWS_AS(jet_edmd_discrete(cfg, d), ConfigError);
  cfg.allow_rank_deficient = true;
  const OperatorEstimate est = jet_edmd_discrete(cfg, d);
  CHECK(!est.warnings.empty());
  CHECK(est.feature_rank <= 5);

  // Duplicated samples lower the numerical rank.
  SnapshotData dup;
  dup.x = Eigen::MatrixXd(1, 4);
  dup.x << 0.5, 0.5, 0.5, 0.5;
  dup.y = 2.0 * dup.x;
  dup.kind = SnapshotKind::DiscreteMap;
  EstimatorConfig cfg2 = exp_config(1, 1, zero1(), 1.0, zero1());
  CHECK_THROWS_AS(jet_edmd_discrete(cfg2, dup), NumericalError);
  cfg2.allow_rank_deficient = true;
  CHECK_NOTHROW(jet_edmd_discrete(cfg2, dup));

  CHECK_THROWS_AS(jet_edmd_discrete(exp_config(3, 2, zero1(), 1.0, zero1()), d),
                  ConfigError);
}

TEST_CASE("jet_edmd_generator on F(x) = a x") {
  const double a = -1.7;
  SnapshotData d;
  d.x = sample_box(6, {{-1.0, 1.0}}, 12, "gen_linear");
  d.y = a * d.x;
  d.kind = SnapshotKind::Velocity;
  const OperatorEstimate est = jet_edmd_generator(exp_config(2, 4, zero1(), 1.0, zero1()), d);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(3, 3);
  expected(1, 1) = a;
  expected(2, 2) = 2.0 * a;
  CHECK((est.matrix - expected).norm() < 1e-8);
  CHECK(est.kind == OperatorKind::Generator);
}

TEST_CASE("jet_edmd_generator: zero field gives the zero matrix") {
  SnapshotData d;
  d.x = sample_box(8, {{-1.0, 1.0}, {-1.0, 1.0}}, 20, "gen_zero");
  d.y = Eigen::MatrixXd::Zero(2, 20);
  d.kind = SnapshotKind::Velocity;
  const OperatorEstimate est = jet_edmd_generator(exp_config(2, 3, zero2(), 1.0, zero2()), d);
  CHECK(est.matrix.norm() == 0.0);
}

TEST_CASE("van der Pol generator matches the symbolic oracle and theory") {
  const double mu = 1.0;
  const DynamicalSystem vdp = builtin("van_der_pol", {{"mu", mu}});
  const SnapshotData d =
      velocity_pairs(vdp, sample_box(1, {{-1.0, 1.0}, {-1.0, 1.0}}, 36, "vdp"));
  const EstimatorConfig cfg = exp_config(5, 7, zero2(), 2.0, zero2());
  const OperatorEstimate est = jet_edmd_generator(cfg, d);
  const Eigen::MatrixXd oracle = jetedmd::testing::generator_limit(
      jetedmd::testing::van_der_pol_polys(mu, 10), zero2(), 2.0, 5, zero2());
  CHECK((est.matrix.real() - oracle).norm() < 1e-7 * std::max(1.0, oracle.norm()));
}

TEST_CASE("generator_from_flow on the linear flow") {
  DynamicalSystem decay;
  decay.dim = 1;
  decay.kind = SystemKind::VectorField;
  decay.eval = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(-z); };
  const Eigen::MatrixXd x = sample_box(10, {{-1.0, 1.0}}, 12, "flow_linear");
  SnapshotData d;
  d.x = x;
  d.y = std::exp(-0.1) * x;  // exact phi^{0.1}
  d.kind = SnapshotKind::FlowSample;
  d.t_s = 0.1;
  const OperatorEstimate est = generator_from_flow(exp_config(2, 4, zero1(), 1.0, zero1()), d);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(3, 3);
  expected(1, 1) = -1.0;
  expected(2, 2) = -2.0;
  CHECK((est.matrix - expected).norm() < 1e-8);

  // Semigroup consistency: exp(T_s A) recovers C.
  const OperatorEstimate c_hat = jet_edmd_discrete(exp_config(2, 4, zero1(), 1.0, zero1()), d);
  const Eigen::MatrixXcd back = matrix_exp(d.t_s * est.matrix);
  CHECK((back - c_hat.matrix).norm() < 1e-8 * std::max(1.0, c_hat.matrix.norm()));
}

TEST_CASE("generator_from_flow warns near the branch cut") {
  // Rotation flow sampled so that T_s * omega lands just inside the cut.
  DynamicalSystem rot;
  rot.dim = 2;
  rot.kind = SystemKind::VectorField;
  rot.eval = [](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(2);
    out << -3.0 * z(1), 3.0 * z(0);
    return out;
  };
  const Eigen::MatrixXd x = sample_box(2, {{-1.0, 1.0}, {-1.0, 1.0}}, 20, "rotflow");
  const SnapshotData d = flow_pairs(rot, x, 1.0, 1e-3);  // angle 3.0 close to pi
  const OperatorEstimate est = generator_from_flow(exp_config(1, 3, zero2(), 1.0, zero2()), d);
  bool saw_warning = false;
  for (const auto& w : est.warnings) {
    saw_warning |= w.find("branch cut") != std::string::npos;
  }
  CHECK(saw_warning);
}

TEST_CASE("branch_offsets_from_jacobian undoes a wrapped rotation") {
  // d/dt z = G z with eigenvalues +-3i; at T_s = 1 the principal log wraps.
  DynamicalSystem rot;
  rot.dim = 2;
  rot.kind = SystemKind::VectorField;
  rot.eval = [](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(2);
    out << -3.5 * z(1), 3.5 * z(0);
    return out;
  };
  Eigen::MatrixXd jac(2, 2);
  jac << 0.0, -3.5, 3.5, 0.0;
  const Eigen::MatrixXd x = sample_box(21, {{-1.0, 1.0}, {-1.0, 1.0}}, 30, "rot2");
  const SnapshotData d = flow_pairs(rot, x, 1.0, 1e-3);
  const EstimatorConfig cfg = exp_config(1, 4, zero2(), 1.0, zero2());
  const OperatorEstimate principal = generator_from_flow(cfg, d);
  // Principal branch wraps 3.5 to 3.5 - 2pi.
  bool wrapped = false;
  const EigenSystem es = eig(principal.matrix);
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    wrapped |= std::abs(es.values(i) - Complex(0.0, 3.5 - 2.0 * M_PI)) < 1e-6;
  }
  CHECK(wrapped);
  const OperatorEstimate c_hat = jet_edmd_discrete(cfg, d);
  const std::vector<int> offsets = branch_offsets_from_jacobian(c_hat, jac, d.t_s);
  const OperatorEstimate fixed = generator_from_flow(cfg, d, offsets);
  const EigenSystem fs = eig(fixed.matrix);
  double best = 1e300;
  for (Eigen::Index i = 0; i < fs.values.size(); ++i) {
    best = std::min(best, std::abs(fs.values(i) - Complex(0.0, 3.5)));
  }
  CHECK(best < 1e-6);
}

TEST_CASE("kdmd eigenvalues") {
  SUBCASE("identity map gives all ones") {
    SnapshotData d;
    d.x = sample_box(31, {{-1.0, 1.0}}, 6, "kdmd_id");
    d.y = d.x;
    d.kind = SnapshotKind::DiscreteMap;
    const auto vals = kdmd_eigenvalues(KernelSpec::gaussian(1.0), d);
    REQUIRE(vals.size() == 6);
    for (const Complex& v : vals) CHECK(std::abs(v - 1.0) < 1e-8);
  }
  SUBCASE("single snapshot") {
    SnapshotData d;
    d.x = Eigen::MatrixXd::Constant(1, 1, 0.4);
    d.y = d.x;
    d.kind = SnapshotKind::DiscreteMap;
    const auto vals = kdmd_eigenvalues(KernelSpec::exponential(1.0, Eigen::VectorXd::Zero(1)), d);
    REQUIRE(vals.size() == 1);
    CHECK(std::abs(vals[0] - 1.0) < 1e-12);
  }
  SUBCASE("nonzero edmd_full eigenvalues approach kdmd as n grows") {
    // Small points keep the powers bounded so the rank-N structure is clean.
    SnapshotData d;
    d.x = sample_box(3, {{-0.4, 0.4}}, 4, "kdmd_small");
    d.y = 0.5 * d.x;
    d.kind = SnapshotKind::DiscreteMap;
    const KernelSpec kernel = KernelSpec::exponential(1.0, zero1());
    const auto kd = kdmd_eigenvalues(kernel, d);
    std::vector<double> dists;
    for (int n : {8, 14, 20}) {
      EstimatorConfig cfg = exp_config(n, n, zero1(), 1.0, zero1());
      cfg.allow_rank_deficient = true;  // r_n > N on purpose
      // The equivalence is a statement about the orthonormal-feature matrix.
      const Eigen::MatrixXcd full = edmd_full(cfg, d, FeatureScaling::Orthonormal);
      EigenSystem es = eig(full);
      // The rank bound keeps N nonzero eigenvalues; take the N largest.
      std::vector<Complex> nz(es.values.data(), es.values.data() + es.values.size());
      std::sort(nz.begin(), nz.end(), [](const Complex& a, const Complex& b) {
        return std::abs(a) > std::abs(b);
      });
      nz.resize(static_cast<std::size_t>(d.count()));
      dists.push_back(hausdorff(nz, kd));
    }
    CHECK(dists.back() <= dists.front() + 1e-12);
    CHECK(dists.back() < 1e-4);
  }
}

TEST_CASE("gram_conjugated shares the spectrum") {
  const DynamicalSystem quad = builtin("quadratic_map");
  const SnapshotData d =
      map_pairs(quad, sample_box(33, {{-1.0, 1.0}, {-1.0, 1.0}}, 60, "conj"));
  const OperatorEstimate est = jet_edmd_discrete(exp_config(3, 6, zero2(), 1.0, zero2()), d);
  const Eigen::MatrixXcd conj = gram_conjugated(est);
  const EigenSystem a = eig(est.matrix);
  const EigenSystem b = eig(conj);
  CHECK(hausdorff(sorted_spectrum(a.values), sorted_spectrum(b.values)) < 1e-8);
}

TEST_CASE("snapshot and config validation") {
  SnapshotData bad;
  bad.x = Eigen::MatrixXd::Zero(2, 3);
  bad.y = Eigen::MatrixXd::Zero(2, 4);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  SnapshotData flow;
  flow.x = Eigen::MatrixXd::Zero(1, 3);
  flow.y = Eigen::MatrixXd::Zero(1, 3);
  flow.kind = SnapshotKind::FlowSample;
  flow.t_s = 0.0;
  CHECK_THROWS_AS(flow.validate(), ConfigError);
  const SnapshotData vel = [] {
    SnapshotData d;
    d.x = Eigen::MatrixXd::Zero(1, 3);
    d.y = Eigen::MatrixXd::Zero(1, 3);
    d.kind = SnapshotKind::Velocity;
    return d;
  }();
  CHECK_THROWS_AS(jet_edmd_discrete(exp_config(0, 0, zero1(), 1.0, zero1()), vel),
                  ConfigError);
}
