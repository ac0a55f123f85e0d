// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jetedmd/estimator.hpp"

namespace jetedmd {

enum class SystemKind { DiscreteMap, VectorField };

/// A closed-form dynamical system: the map f (discrete) or the vector field F
/// (continuous), its known fixed/equilibrium points, and the Jacobian.
struct DynamicalSystem {
  std::string name;
  int dim = 0;
  SystemKind kind = SystemKind::DiscreteMap;
  std::map<std::string, double> params;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  std::vector<Eigen::VectorXd> fixed_points;
};

/// Built-in systems: quadratic_map, henon(a,b), ricker(r), van_der_pol(mu),
/// duffing(alpha,beta,delta), lorenz(sigma,rho,beta). Unknown names and
/// out-of-range parameters are rejected.
DynamicalSystem builtin(const std::string& name,
                        const std::map<std::string, double>& params = {});

/// Classical fixed-step RK4 approximation of the time-t flow. dt need not
/// divide t exactly; a final partial step covers the remainder.
Eigen::VectorXd rk4_flow(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                         const Eigen::VectorXd& x, double t, double dt);

/// Counter-based RNG "jetedmd-splitmix-1": output i is the SplitMix64
/// finalizer applied to key + (i+1) * 0x9E3779B97F4A7C15, with the key derived
/// from (seed, stream tag) by FNV-1a. Uniform doubles in [0,1) take the top
/// 53 bits: (word >> 11) * 2^-53.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view tag);
  std::uint64_t next_u64();
  double uniform01();

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// N points, uniform per axis and independent across axes; column = point.
/// Deterministic in (seed, tag).
Eigen::MatrixXd sample_box(std::uint64_t seed,
                           const std::vector<std::array<double, 2>>& box, int n,
                           std::string_view tag = "sample_box");

/// Flow snapshot pairs y_i = phi^{T_s}(x_i), integrated with RK4 at step dt.
SnapshotData flow_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x,
                        double t_s, double dt);

/// Discrete snapshot pairs y_i = f(x_i).
SnapshotData map_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x);

/// Exact velocity pairs y_i = F(x_i).
SnapshotData velocity_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x);

/// M trajectories of J snapshots each at uniform step dt.
struct TrajectoryBundle {
  std::vector<Eigen::MatrixXd> trajectories;  // each d x J
  double dt = 0.0;
  std::uint64_t seed = 0;

  int dim() const {
    return trajectories.empty() ? 0 : static_cast<int>(trajectories.front().rows());
  }
};

TrajectoryBundle sample_trajectories(const DynamicalSystem& system,
                                     std::uint64_t seed,
                                     const std::vector<std::array<double, 2>>& box,
                                     int count, int snapshots, double dt,
                                     double integrator_dt);

/// Velocity estimation along trajectories with the unique order-q finite
/// difference stencil over the q+1 nearest snapshots of each node; weights are
/// solved from the polynomial-exactness system at every node.
SnapshotData fd_velocities(const TrajectoryBundle& bundle, int order);

/// Stencil weights w such that sum_k w_k x(t_j + offsets_k dt) ~ dt * x'(t_j);
/// exact on polynomials of degree <= q = offsets.size() - 1.
Eigen::VectorXd fd_stencil_weights(const std::vector<int>& offsets);

/// The (m+1) x (m+1) upper-triangular limit matrix of the Ricker map's
/// JetEDMD estimate at base point 0: entry (i,j) is
/// (i-1)! B_{j-1,i-1}(f'(0), ..., f^{(j-i+1)}(0)) / (j-1)! with B the partial
/// exponential Bell polynomials and f(x) = x e^{r(x-1)}.
Eigen::MatrixXd ricker_oracle(double r, int m);

}  // namespace jetedmd
