// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/systems.hpp"

#include <cmath>

#include "jetedmd/errors.hpp"

namespace jetedmd {

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

DynamicalSystem builtin(const std::string& name,
                        const std::map<std::string, double>& params) {
  DynamicalSystem s;
  s.name = name;
  s.params = params;
  if (name == "quadratic_map") {
    s.dim = 2;
    s.kind = SystemKind::DiscreteMap;
    s.eval = [](const Eigen::VectorXd& z) {
      const double x = z(0), y = z(1);
      return vec2(x * x - y * y + x - y, 2.0 * x * y + x + y);
    };
    s.jacobian = [](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(2, 2);
      j << 2.0 * z(0) + 1.0, -2.0 * z(1) - 1.0, 2.0 * z(1) + 1.0, 2.0 * z(0) + 1.0;
      return j;
    };
    s.fixed_points = {vec2(0.0, 0.0)};
  } else if (name == "henon") {
    const double a = param(params, "a", 1.4);
    const double b = param(params, "b", 0.3);
    if (a == 0.0) throw ConfigError("henon: parameter a must be nonzero");
    const double disc = (b - 1.0) * (b - 1.0) + 4.0 * a;
    if (disc < 0.0) throw ConfigError("henon: (b-1)^2 + 4a must be >= 0 for fixed points");
    s.dim = 2;
    s.kind = SystemKind::DiscreteMap;
    s.eval = [a, b](const Eigen::VectorXd& z) {
      return vec2(z(1) + 1.0 - a * z(0) * z(0), b * z(0));
    };
    s.jacobian = [a, b](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(2, 2);
      j << -2.0 * a * z(0), 1.0, b, 0.0;
      return j;
    };
    const double root = std::sqrt(disc);
    for (double sign : {+1.0, -1.0}) {
      const double x = (b - 1.0 + sign * root) / (2.0 * a);
      s.fixed_points.push_back(vec2(x, b * x));
    }
  } else if (name == "ricker") {
    const double r = param(params, "r", 2.8);
    s.dim = 1;
    s.kind = SystemKind::DiscreteMap;
    s.eval = [r](const Eigen::VectorXd& z) {
      Eigen::VectorXd out(1);
      out(0) = z(0) * std::exp(r * (z(0) - 1.0));
      return out;
    };
    s.jacobian = [r](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(1, 1);
      j(0, 0) = std::exp(r * (z(0) - 1.0)) * (1.0 + r * z(0));
      return j;
    };
    Eigen::VectorXd origin(1), one(1);
    origin << 0.0;
    one << 1.0;
    s.fixed_points = {origin, one};
  } else if (name == "van_der_pol") {
    const double mu = param(params, "mu", 1.0);
    s.dim = 2;
    s.kind = SystemKind::VectorField;
    s.eval = [mu](const Eigen::VectorXd& z) {
      return vec2(z(1), mu * (1.0 - z(0) * z(0)) * z(1) - z(0));
    };
    s.jacobian = [mu](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(2, 2);
      j << 0.0, 1.0, -2.0 * mu * z(0) * z(1) - 1.0, mu * (1.0 - z(0) * z(0));
      return j;
    };
    s.fixed_points = {vec2(0.0, 0.0)};
  } else if (name == "duffing") {
    const double alpha = param(params, "alpha", -1.0);
    const double beta = param(params, "beta", 1.0);
    const double delta = param(params, "delta", 0.5);
    s.dim = 2;
    s.kind = SystemKind::VectorField;
    s.eval = [alpha, beta, delta](const Eigen::VectorXd& z) {
      return vec2(z(1), -delta * z(1) - alpha * z(0) - beta * z(0) * z(0) * z(0));
    };
    s.jacobian = [alpha, beta, delta](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(2, 2);
      j << 0.0, 1.0, -alpha - 3.0 * beta * z(0) * z(0), -delta;
      return j;
    };
    s.fixed_points = {vec2(0.0, 0.0)};
    if (beta != 0.0 && -alpha / beta > 0.0) {
      const double x = std::sqrt(-alpha / beta);
      s.fixed_points.push_back(vec2(x, 0.0));
      s.fixed_points.push_back(vec2(-x, 0.0));
    }
  } else if (name == "lorenz") {
    const double sig = param(params, "sigma", 10.0);
    const double rho = param(params, "rho", 28.0);
    const double beta = param(params, "beta", 8.0 / 3.0);
    s.dim = 3;
    s.kind = SystemKind::VectorField;
    s.eval = [sig, rho, beta](const Eigen::VectorXd& z) {
      return vec3(sig * (z(1) - z(0)), z(0) * (rho - z(2)) - z(1),
                  z(0) * z(1) - beta * z(2));
    };
    s.jacobian = [sig, rho, beta](const Eigen::VectorXd& z) {
      Eigen::MatrixXd j(3, 3);
      j << -sig, sig, 0.0, rho - z(2), -1.0, -z(0), z(1), z(0), -beta;
      return j;
    };
    s.fixed_points = {vec3(0.0, 0.0, 0.0)};
    if (beta * (rho - 1.0) > 0.0) {
      const double c = std::sqrt(beta * (rho - 1.0));
      s.fixed_points.push_back(vec3(c, c, rho - 1.0));
      s.fixed_points.push_back(vec3(-c, -c, rho - 1.0));
    }
  } else {
    throw ConfigError("builtin: unknown system '" + name + "'");
  }
  return s;
}

Eigen::VectorXd rk4_flow(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
    const Eigen::VectorXd& x, double t, double dt) {
  if (t < 0.0) throw ConfigError("rk4_flow: t must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("rk4_flow: dt must be > 0");
  Eigen::VectorXd z = x;
  double reached = 0.0;
  auto step = [&](double h) {
    const Eigen::VectorXd k1 = field(z);
    const Eigen::VectorXd k2 = field(z + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(z + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  const auto full_steps = static_cast<long>(std::floor(t / dt + 1e-12));
  for (long i = 0; i < full_steps; ++i) {
    step(dt);
    reached += dt;
    if (!z.allFinite()) {
      throw NumericalError("rk4_flow: state became non-finite at t = " +
                           std::to_string(reached));
    }
  }
  const double rem = t - static_cast<double>(full_steps) * dt;
  if (rem > 1e-12 * std::max(1.0, t)) {
    step(rem);
    if (!z.allFinite()) {
      throw NumericalError("rk4_flow: state became non-finite at t = " +
                           std::to_string(t));
    }
  }
  return z;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::string_view tag)
    : key_(seed ^ fnv1a(tag)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return splitmix_finalize(key_ + counter_ * kGolden);
}

double CounterRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd sample_box(std::uint64_t seed,
                           const std::vector<std::array<double, 2>>& box, int n,
                           std::string_view tag) {
  if (box.empty()) throw ConfigError("sample_box: box must have at least one axis");
  if (n < 1) throw ConfigError("sample_box: n must be >= 1");
  for (const auto& [lo, hi] : box) {
    if (!(lo < hi)) throw ConfigError("sample_box: degenerate box axis");
  }
  CounterRng rng(seed, tag);
  const int d = static_cast<int>(box.size());
  Eigen::MatrixXd x(d, n);
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < d; ++c) {
      const auto& [lo, hi] = box[static_cast<std::size_t>(c)];
      x(c, j) = lo + (hi - lo) * rng.uniform01();
    }
  }
  return x;
}

SnapshotData flow_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x,
                        double t_s, double dt) {
  if (system.kind != SystemKind::VectorField) {
    throw ConfigError("flow_pairs: vector-field system required");
  }
  SnapshotData data;
  data.x = x;
  data.y.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    try {
      data.y.col(j) = rk4_flow(system.eval, x.col(j), t_s, dt);
    } catch (const NumericalError& e) {
      throw NumericalError("flow_pairs: sample " + std::to_string(j) + ": " +
                           e.what());
    }
  }
  if (t_s > 0.0) {
    data.kind = SnapshotKind::FlowSample;
    data.t_s = t_s;
  } else {
    // T_s = 0 degenerates to the identity pairing.
    data.kind = SnapshotKind::DiscreteMap;
    data.t_s = 0.0;
  }
  return data;
}

SnapshotData map_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x) {
  if (system.kind != SystemKind::DiscreteMap) {
    throw ConfigError("map_pairs: discrete-map system required");
  }
  SnapshotData data;
  data.x = x;
  data.y.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) data.y.col(j) = system.eval(x.col(j));
  data.kind = SnapshotKind::DiscreteMap;
  return data;
}

SnapshotData velocity_pairs(const DynamicalSystem& system, const Eigen::MatrixXd& x) {
  if (system.kind != SystemKind::VectorField) {
    throw ConfigError("velocity_pairs: vector-field system required");
  }
  SnapshotData data;
  data.x = x;
  data.y.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) data.y.col(j) = system.eval(x.col(j));
  data.kind = SnapshotKind::Velocity;
  return data;
}

TrajectoryBundle sample_trajectories(const DynamicalSystem& system,
                                     std::uint64_t seed,
                                     const std::vector<std::array<double, 2>>& box,
                                     int count, int snapshots, double dt,
                                     double integrator_dt) {
  if (system.kind != SystemKind::VectorField) {
    throw ConfigError("sample_trajectories: vector-field system required");
  }
  if (snapshots < 1) throw ConfigError("sample_trajectories: snapshots must be >= 1");
  const Eigen::MatrixXd x0 = sample_box(seed, box, count, "trajectories");
  TrajectoryBundle bundle;
  bundle.dt = dt;
  bundle.seed = seed;
  bundle.trajectories.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::MatrixXd traj(system.dim, snapshots);
    traj.col(0) = x0.col(i);
    for (int j = 1; j < snapshots; ++j) {
      traj.col(j) = rk4_flow(system.eval, traj.col(j - 1), dt, integrator_dt);
    }
    bundle.trajectories.push_back(std::move(traj));
  }
  return bundle;
}

Eigen::VectorXd fd_stencil_weights(const std::vector<int>& offsets) {
  const auto q = static_cast<int>(offsets.size()) - 1;
  if (q < 1) throw ConfigError("fd_stencil_weights: need at least two nodes");
  Eigen::MatrixXd a(q + 1, q + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q + 1);
  rhs(1) = 1.0;
  for (int row = 0; row <= q; ++row) {
    for (int col = 0; col <= q; ++col) {
      a(row, col) = std::pow(static_cast<double>(offsets[static_cast<std::size_t>(col)]),
                             static_cast<double>(row));
    }
  }
  return a.fullPivLu().solve(rhs);
}

SnapshotData fd_velocities(const TrajectoryBundle& bundle, int order) {
  if (order < 1) throw ConfigError("fd_velocities: order must be >= 1");
  if (bundle.trajectories.empty()) throw ConfigError("fd_velocities: empty bundle");
  if (!(bundle.dt > 0.0)) throw ConfigError("fd_velocities: dt must be > 0");
  const int d = bundle.dim();
  Eigen::Index total = 0;
  for (const auto& t : bundle.trajectories) {
    if (t.cols() < order + 1) {
      throw ConfigError("fd_velocities: trajectories need at least order+1 snapshots");
    }
    total += t.cols();
  }
  SnapshotData data;
  data.kind = SnapshotKind::Velocity;
  data.x.resize(d, total);
  data.y.resize(d, total);
  Eigen::Index at = 0;
  for (const auto& traj : bundle.trajectories) {
    const int j_count = static_cast<int>(traj.cols());
    for (int j = 0; j < j_count; ++j) {
      // q+1 nearest nodes: centered window, clamped at the ends.
      int lo = j - order / 2;
      lo = std::max(0, std::min(lo, j_count - order - 1));
      std::vector<int> offsets(static_cast<std::size_t>(order + 1));
      for (int k = 0; k <= order; ++k) offsets[static_cast<std::size_t>(k)] = lo + k - j;
      const Eigen::VectorXd w = fd_stencil_weights(offsets);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      for (int k = 0; k <= order; ++k) v += w(k) * traj.col(lo + k);
      data.x.col(at) = traj.col(j);
      data.y.col(at) = v / bundle.dt;
      ++at;
    }
  }
  return data;
}

Eigen::MatrixXd ricker_oracle(double r, int m) {
  if (m < 0) throw ConfigError("ricker_oracle: m must be >= 0");
  const int size = m + 1;
  // Derivatives of f(x) = x e^{r(x-1)} at 0: f^(k)(0) = e^{-r} k r^{k-1}.
  Eigen::VectorXd deriv(size + 1);
  deriv(0) = 0.0;
  for (int k = 1; k <= size; ++k) {
    deriv(k) = std::exp(-r) * static_cast<double>(k) * std::pow(r, k - 1);
  }
  // Partial exponential Bell polynomials B_{n,k}(x_1, ..., x_{n-k+1}).
  Eigen::MatrixXd bell = Eigen::MatrixXd::Zero(size, size);
  bell(0, 0) = 1.0;
  Eigen::MatrixXd binom = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    binom(i, 0) = 1.0;
    for (int j = 1; j <= i; ++j) {
      binom(i, j) = binom(i - 1, j - 1) + (j <= i - 1 ? binom(i - 1, j) : 0.0);
    }
  }
  for (int n = 1; n < size; ++n) {
    for (int k = 1; k <= n; ++k) {
      double acc = 0.0;
      for (int i = 1; i <= n - k + 1; ++i) {
        acc += binom(n - 1, i - 1) * deriv(i) * bell(n - i, k - 1);
      }
      bell(n, k) = acc;
    }
  }
  Eigen::VectorXd fact(size);
  fact(0) = 1.0;
  for (int i = 1; i < size; ++i) fact(i) = fact(i - 1) * static_cast<double>(i);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size, size);
  for (int i = 1; i <= size; ++i) {
    for (int j = i; j <= size; ++j) {
      b(i - 1, j - 1) = fact(i - 1) * bell(j - 1, i - 1) / fact(j - 1);
    }
  }
  return b;
}

}  // namespace jetedmd
