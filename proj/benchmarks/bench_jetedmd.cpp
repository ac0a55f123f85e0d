// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "jetedmd/estimator.hpp"
#include "jetedmd/spectral.hpp"
#include "jetedmd/systems.hpp"

using namespace jetedmd;

namespace {

SnapshotData quadratic_data(int n_samples) {
  const DynamicalSystem quad = builtin("quadratic_map");
  return map_pairs(quad,
                   sample_box(17, {{-1.0, 1.0}, {-1.0, 1.0}}, n_samples, "bench"));
}

EstimatorConfig config_2d(int m, int n) {
  EstimatorConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.base_point = Eigen::VectorXd::Zero(2);
  cfg.kernel = KernelSpec::exponential(1.0, Eigen::VectorXd::Zero(2));
  cfg.allow_rank_deficient = true;
  return cfg;
}

void FeatureMatrix(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const SnapshotData d = quadratic_data(500);
  const ObservableBasis basis(KernelSpec::exponential(1.0, Eigen::VectorXd::Zero(2)),
                              Eigen::VectorXd::Zero(2), n);
  for (auto _ : state) {
    Eigen::MatrixXd v = basis.feature_matrix(d.x);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(FeatureMatrix)->Arg(6)->Arg(10)->Arg(14)->Complexity();

void JetEdmdDiscrete(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const SnapshotData d = quadratic_data(500);
  const EstimatorConfig cfg = config_2d(5, n);
  for (auto _ : state) {
    OperatorEstimate est = jet_edmd_discrete(cfg, d);
    benchmark::DoNotOptimize(est.matrix.data());
  }
}
BENCHMARK(JetEdmdDiscrete)->Arg(8)->Arg(10)->Arg(12);

void GeneratorEstimate(benchmark::State& state) {
  const DynamicalSystem vdp = builtin("van_der_pol", {{"mu", 1.0}});
  const SnapshotData d =
      velocity_pairs(vdp, sample_box(19, {{-1.0, 1.0}, {-1.0, 1.0}}, 300, "bench"));
  EstimatorConfig cfg = config_2d(5, static_cast<int>(state.range(0)));
  cfg.kernel = KernelSpec::exponential(2.0, Eigen::VectorXd::Zero(2));
  for (auto _ : state) {
    OperatorEstimate est = jet_edmd_generator(cfg, d);
    benchmark::DoNotOptimize(est.matrix.data());
  }
}
BENCHMARK(GeneratorEstimate)->Arg(7)->Arg(11);

void CrossGramBlocks(benchmark::State& state) {
  const auto order = static_cast<int>(state.range(0));
  const KernelSpec kernel = KernelSpec::exponential(1.0, Eigen::VectorXd::Zero(2));
  Eigen::VectorXd p(2), q(2);
  p << -1.0, 0.0;
  q << 1.0, 0.0;
  const ObservableBasis bi(kernel, p, order);
  const ObservableBasis bj(kernel, q, order);
  for (auto _ : state) {
    CrossGram g = cross_gram(bi, bj);
    benchmark::DoNotOptimize(g.values.data());
  }
}
BENCHMARK(CrossGramBlocks)->Arg(6)->Arg(10)->Arg(14);

void EigTwoSided(benchmark::State& state) {
  const SnapshotData d = quadratic_data(400);
  const OperatorEstimate est =
      jet_edmd_discrete(config_2d(static_cast<int>(state.range(0)), 10), d);
  for (auto _ : state) {
    EigenSystem es = eig(est.matrix);
    benchmark::DoNotOptimize(es.values.data());
  }
}
BENCHMARK(EigTwoSided)->Arg(5)->Arg(8);

void MatrixLogBranch(benchmark::State& state) {
  DynamicalSystem rot;
  rot.dim = 2;
  rot.kind = SystemKind::VectorField;
  rot.eval = [](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(2);
    out << z(1), -z(0);
    return out;
  };
  const SnapshotData d =
      flow_pairs(rot, sample_box(23, {{-1.0, 1.0}, {-1.0, 1.0}}, 200, "bench"), 0.4,
                 1e-3);
  const OperatorEstimate c_hat = jet_edmd_discrete(config_2d(4, 8), d);
  for (auto _ : state) {
    Eigen::MatrixXcd l = matrix_log(c_hat.matrix);
    benchmark::DoNotOptimize(l.data());
  }
}
BENCHMARK(MatrixLogBranch);

void ProjectionErrorEval(benchmark::State& state) {
  const ObservableBasis basis(KernelSpec::gaussian(1.0),
                              Eigen::VectorXd::Zero(3),
                              static_cast<int>(state.range(0)));
  Eigen::VectorXd x(3);
  x << 0.7, -0.4, 1.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(projection_error(basis, x));
  }
}
BENCHMARK(ProjectionErrorEval)->Arg(4)->Arg(8)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
