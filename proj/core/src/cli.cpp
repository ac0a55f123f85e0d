// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jetedmd/errors.hpp"
#include "jetedmd/estimator.hpp"
#include "jetedmd/io.hpp"
#include "jetedmd/reconstruct.hpp"
#include "jetedmd/spectral.hpp"
#include "jetedmd/systems.hpp"

namespace jetedmd {

using nlohmann::json;

Subcommand parse_subcommand(const std::string& name) {
  if (name == "sample") return Subcommand::Sample;
  if (name == "flow") return Subcommand::Flow;
  if (name == "velocities") return Subcommand::Velocities;
  if (name == "estimate") return Subcommand::Estimate;
  if (name == "spectrum") return Subcommand::Spectrum;
  if (name == "eigenfunctions") return Subcommand::Eigenfunctions;
  if (name == "reconstruct") return Subcommand::Reconstruct;
  if (name == "predict") return Subcommand::Predict;
  if (name == "compare-spectra") return Subcommand::CompareSpectra;
  if (name == "ricker-study") return Subcommand::RickerStudy;
  throw ConfigError("unknown subcommand '" + name + "'");
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto r = rows.size();
  if (r == 0) return Eigen::MatrixXd();
  const auto c = rows[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  }
  return v;
}

/// Everything shared between subcommands: parsed config, provenance, output
/// directory, and lazily built system/data.
struct Experiment {
  TomlTable config;
  Provenance prov;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::optional<DynamicalSystem> system;

  json warnings = json::array();

  static Experiment load(const RunOptions& opts) {
    Experiment e;
    e.config = TomlTable::parse_file(opts.config_path);
    e.seed = opts.seed.value_or(
        static_cast<std::uint64_t>(e.config.get_int("sampling.seed", 0)));
    e.prov =
        Provenance{kVersion, jetedmd::config_hash(e.config.raw_text()), e.seed};
    e.out = opts.out_dir.value_or(
        std::filesystem::path(e.config.get_string("output.dir", "out")));
    if (e.config.contains("system.name")) {
      std::map<std::string, double> params;
      for (const std::string& key : e.config.keys_with_prefix("system.")) {
        const std::string leaf = key.substr(std::string("system.").size());
        if (leaf == "name" || leaf == "input") continue;
        params[leaf] = e.config.at(key).as_number();
      }
      e.system = builtin(e.config.require_string("system.name"), params);
    }
    return e;
  }

  int dim_hint() const {
    if (system) return system->dim;
    if (auto box = config.get_box("sampling.box")) return static_cast<int>(box->size());
    if (auto bp = config.get_vector("estimator.base_point")) {
      return static_cast<int>(bp->size());
    }
    throw ConfigError("cannot infer dimension: set sampling.box or system.name");
  }

  KernelSpec kernel(double sigma_override = 0.0,
                    const std::optional<Eigen::VectorXd>& center_override =
                        std::nullopt) const {
    const std::string kind = config.get_string("kernel.kind", "exponential");
    const double sigma =
        sigma_override > 0.0 ? sigma_override : config.get_number("kernel.sigma", 1.0);
    if (kind == "gaussian") return KernelSpec::gaussian(sigma);
    if (kind != "exponential") {
      throw ConfigError("kernel.kind must be 'exponential' or 'gaussian'");
    }
    Eigen::VectorXd center;
    if (center_override) {
      center = *center_override;
    } else if (auto c = config.get_vector("kernel.center")) {
      center = *c;
    } else {
      center = Eigen::VectorXd::Zero(dim_hint());
    }
    return KernelSpec::exponential(sigma, center);
  }

  EstimatorConfig estimator_config() const {
    EstimatorConfig cfg;
    cfg.m = static_cast<int>(config.get_int("estimator.m", 0));
    cfg.n = static_cast<int>(config.get_int("estimator.n", cfg.m));
    if (cfg.m > cfg.n) {
      throw ConfigError("estimator.m must satisfy m <= n (got m=" +
                        std::to_string(cfg.m) + ", n=" + std::to_string(cfg.n) + ")");
    }
    if (auto bp = config.get_vector("estimator.base_point")) {
      cfg.base_point = *bp;
    } else {
      cfg.base_point = Eigen::VectorXd::Zero(dim_hint());
    }
    cfg.kernel = kernel();
    cfg.pinv_rel_tol = config.get_number("estimator.pinv_rel_tol", 0.0);
    cfg.allow_rank_deficient = config.get_bool("estimator.allow_rank_deficient", false);
    return cfg;
  }

  Eigen::MatrixXd sample_points() const {
    const auto box = config.get_box("sampling.box");
    if (!box) throw ConfigError("sampling.box is required to draw samples");
    const int count = static_cast<int>(config.get_int("sampling.count", 0));
    if (count < 1) throw ConfigError("sampling.count must be >= 1");
    return sample_box(seed, *box, count);
  }

  std::string data_mode() const { return config.get_string("data.mode", "map"); }

  SnapshotData data() {
    const std::string mode = data_mode();
    if (config.contains("data.input")) {
      SnapshotData d;
      read_snapshot_csv(config.require_string("data.input"), d.x, d.y);
      if (mode == "map") {
        d.kind = SnapshotKind::DiscreteMap;
      } else if (mode == "velocity" || mode == "fd") {
        d.kind = SnapshotKind::Velocity;
      } else if (mode == "flow") {
        d.kind = SnapshotKind::FlowSample;
        d.t_s = config.get_number("data.t_s", 0.0);
      } else {
        throw ConfigError("data.mode must be map, velocity, flow, or fd");
      }
      d.validate();
      return d;
    }
    if (!system) throw ConfigError("either system.name or data.input is required");
    if (mode == "map") return map_pairs(*system, sample_points());
    if (mode == "velocity") return velocity_pairs(*system, sample_points());
    if (mode == "flow") {
      const double t_s = config.get_number("data.t_s", 0.0);
      if (!(t_s > 0.0)) throw ConfigError("data.t_s must be > 0 in flow mode");
      const double idt = config.get_number("data.integrator_dt", 1e-3);
      return flow_pairs(*system, sample_points(), t_s, idt);
    }
    if (mode == "fd") {
      const auto box = config.get_box("sampling.box");
      if (!box) throw ConfigError("sampling.box is required in fd mode");
      const int m_traj = static_cast<int>(config.get_int("data.trajectories", 0));
      const int snaps = static_cast<int>(config.get_int("data.snapshots", 0));
      const double dt = config.get_number("data.dt", 0.0);
      const double idt = config.get_number("data.integrator_dt", 1e-3);
      const int order = static_cast<int>(config.get_int("data.fd_order", 0));
      if (m_traj < 1 || snaps < 2 || !(dt > 0.0) || order < 1) {
        throw ConfigError("fd mode requires data.trajectories, data.snapshots, data.dt, data.fd_order");
      }
      const TrajectoryBundle bundle =
          sample_trajectories(*system, seed, *box, m_traj, snaps, dt, idt);
      return fd_velocities(bundle, order);
    }
    throw ConfigError("data.mode must be map, velocity, flow, or fd");
  }

  std::vector<int> branch_offsets(const OperatorEstimate& c_hat, double t_s) const {
    const std::string policy = config.get_string("estimator.branch", "principal");
    if (policy == "principal") return {};
    if (policy == "jacobian") {
      if (!system) throw ConfigError("estimator.branch='jacobian' needs system.name");
      return branch_offsets_from_jacobian(c_hat, system->jacobian(c_hat.config.base_point),
                                          t_s);
    }
    throw ConfigError("estimator.branch must be 'principal' or 'jacobian'");
  }

  /// Builds the estimate requested by [estimator] from the configured data.
  OperatorEstimate estimate(const SnapshotData& d) {
    EstimatorConfig cfg = estimator_config();
    std::string op = config.get_string("estimator.operator", "auto");
    if (op == "auto") {
      op = d.kind == SnapshotKind::Velocity
               ? "generator"
               : (d.kind == SnapshotKind::FlowSample ? "generator" : "pf");
    }
    if (op == "pf") return jet_edmd_discrete(cfg, d);
    if (op != "generator") {
      throw ConfigError("estimator.operator must be auto, pf, or generator");
    }
    if (d.kind == SnapshotKind::Velocity) return jet_edmd_generator(cfg, d);
    if (d.kind == SnapshotKind::FlowSample) {
      OperatorEstimate c_hat = jet_edmd_discrete(cfg, d);
      const std::vector<int> offsets = branch_offsets(c_hat, d.t_s);
      return generator_from_flow(cfg, d, offsets);
    }
    throw ConfigError("generator estimation needs velocity or flow data");
  }

  json base_summary(const std::string& command) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(prov.config_hash));
    j["config_hash"] = hash;
    j["seed"] = seed;
    return j;
  }

  void finish(ResultBundle& bundle, json& summary) const {
    summary["warnings"] = warnings;
    const std::filesystem::path p = out / "summary.json";
    write_text_atomic(p, summary.dump(2) + "\n");
    bundle.artifacts["summary"] = p;
    bundle.summary_json = summary.dump(2);
    bundle.out_dir = out;
  }
};

json estimate_diagnostics(const OperatorEstimate& est) {
  json j;
  j["kind"] = est.kind == OperatorKind::PerronFrobenius ? "perron_frobenius"
                                                        : "generator";
  j["m"] = est.config.m;
  j["n"] = est.config.n;
  j["samples"] = est.sample_count;
  j["feature_rank"] = est.feature_rank;
  j["feature_rows"] = est.feature_rows;
  j["feature_cond"] = est.feature_cond;
  j["order"] = est.matrix.rows();
  json w = json::array();
  for (const auto& s : est.warnings) w.push_back(s);
  j["warnings"] = w;
  return j;
}

std::vector<SpectrumRow> spectrum_rows(const std::vector<Complex>& values,
                                       const std::string& source) {
  std::vector<SpectrumRow> rows;
  rows.reserve(values.size());
  for (const Complex& v : values) rows.push_back({v.real(), v.imag(), source});
  return rows;
}

ResultBundle run_sample(Experiment& e) {
  ResultBundle bundle;
  const Eigen::MatrixXd x = e.sample_points();
  const std::filesystem::path p = e.out / "samples.csv";
  write_points_csv(p, x, e.prov);
  bundle.artifacts["samples"] = p;
  json summary = e.base_summary("sample");
  summary["count"] = x.cols();
  summary["dim"] = x.rows();
  e.finish(bundle, summary);
  return bundle;
}

ResultBundle run_pairs(Experiment& e, const std::string& command) {
  ResultBundle bundle;
  const SnapshotData d = e.data();
  const std::filesystem::path p = e.out / "pairs.csv";
  write_snapshot_csv(p, d.x, d.y, e.prov);
  bundle.artifacts["pairs"] = p;
  json summary = e.base_summary(command);
  summary["count"] = d.count();
  summary["dim"] = d.dim();
  summary["mode"] = e.data_mode();
  if (d.kind == SnapshotKind::FlowSample) summary["t_s"] = d.t_s;
  e.finish(bundle, summary);
  return bundle;
}

ResultBundle run_estimate(Experiment& e) {
  ResultBundle bundle;
  const SnapshotData d = e.data();
  const OperatorEstimate est = e.estimate(d);
  const std::filesystem::path p = e.out / "estimate_matrix.csv";
  write_matrix_csv(p, est.matrix, e.prov);
  bundle.artifacts["estimate_matrix"] = p;
  json summary = e.base_summary("estimate");
  summary["estimate"] = estimate_diagnostics(est);
  for (const auto& w : est.warnings) e.warnings.push_back(w);
  e.finish(bundle, summary);
  return bundle;
}

ResultBundle run_spectrum(Experiment& e) {
  ResultBundle bundle;
  const SnapshotData d = e.data();
  const OperatorEstimate est = e.estimate(d);
  std::vector<SpectrumRow> rows;
  const Spectrum estimated = estimate_spectrum(est);
  const auto jet_rows = spectrum_rows(estimated.values, "jetedmd");
  rows.insert(rows.end(), jet_rows.begin(), jet_rows.end());
  json summary = e.base_summary("spectrum");
  summary["estimate"] = estimate_diagnostics(est);

  std::optional<Spectrum> theory;
  if (e.config.get_bool("spectrum.theory", e.system.has_value())) {
    if (!e.system) throw ConfigError("spectrum.theory requires system.name");
    const SpectrumMode mode = est.kind == OperatorKind::Generator
                                  ? SpectrumMode::Generator
                                  : SpectrumMode::Discrete;
    theory = theoretical_spectrum(e.system->jacobian(est.config.base_point),
                                  est.config.m, mode);
    const auto t_rows = spectrum_rows(theory->values, "theory");
    rows.insert(rows.end(), t_rows.begin(), t_rows.end());
    summary["hausdorff_jetedmd_theory"] =
        hausdorff(estimated.values, theory->values);
  }
  if (e.config.get_bool("spectrum.edmd", false)) {
    EstimatorConfig cfg = e.estimator_config();
    cfg.m = cfg.n;  // EDMD keeps the full square matrix
    if (d.kind == SnapshotKind::Velocity) {
      throw ConfigError("spectrum.edmd applies to map or flow data");
    }
    const OperatorEstimate full = jet_edmd_discrete(cfg, d);
    const Spectrum edmd = estimate_spectrum(full);
    const auto e_rows = spectrum_rows(edmd.values, "edmd");
    rows.insert(rows.end(), e_rows.begin(), e_rows.end());
    if (theory) summary["hausdorff_edmd_theory"] = hausdorff(edmd.values, theory->values);
  }
  if (e.config.get_bool("spectrum.kdmd", false)) {
    if (d.kind == SnapshotKind::Velocity) {
      throw ConfigError("spectrum.kdmd applies to map or flow data");
    }
    const auto kdmd = kdmd_eigenvalues(e.estimator_config().kernel, d);
    const auto k_rows = spectrum_rows(kdmd, "kdmd");
    rows.insert(rows.end(), k_rows.begin(), k_rows.end());
  }
  const std::filesystem::path p = e.out / "spectrum.csv";
  write_spectrum_csv(p, rows, e.prov);
  bundle.artifacts["spectrum"] = p;
  for (const auto& w : est.warnings) e.warnings.push_back(w);
  e.finish(bundle, summary);
  return bundle;
}

GridSpec grid_from_config(const Experiment& e, const std::string& prefix, int dim) {
  GridSpec grid;
  const auto lo = e.config.get_vector(prefix + ".grid_lo");
  const auto hi = e.config.get_vector(prefix + ".grid_hi");
  if (!lo || !hi) throw ConfigError(prefix + ".grid_lo/grid_hi are required");
  grid.lo = *lo;
  grid.hi = *hi;
  if (!e.config.contains(prefix + ".grid_count")) {
    throw ConfigError(prefix + ".grid_count is required");
  }
  for (const TomlValue& v : e.config.at(prefix + ".grid_count").as_array()) {
    grid.count.push_back(static_cast<int>(v.as_int()));
  }
  grid.validate(dim);
  return grid;
}

Eigen::MatrixXd grid_nodes(const GridSpec& grid) {
  const Eigen::Index total = grid.total();
  Eigen::MatrixXd nodes(grid.lo.size(), total);
  for (Eigen::Index i = 0; i < total; ++i) nodes.col(i) = grid.node(i);
  return nodes;
}

ResultBundle run_eigenfunctions(Experiment& e) {
  ResultBundle bundle;
  const SnapshotData d = e.data();
  // One estimate per fixed point, sharing the data set and kernel.
  std::vector<Eigen::VectorXd> points;
  if (e.config.contains("eigenfunctions.base_points")) {
    for (const TomlValue& v : e.config.at("eigenfunctions.base_points").as_array()) {
      const TomlArray& coords = v.as_array();
      Eigen::VectorXd p(static_cast<Eigen::Index>(coords.size()));
      for (std::size_t c = 0; c < coords.size(); ++c) {
        p(static_cast<Eigen::Index>(c)) = coords[c].as_number();
      }
      points.push_back(std::move(p));
    }
  } else {
    points.push_back(e.estimator_config().base_point);
  }
  std::vector<OperatorEstimate> estimates;
  for (const Eigen::VectorXd& p : points) {
    EstimatorConfig cfg = e.estimator_config();
    cfg.base_point = p;
    const std::string op = e.config.get_string("estimator.operator", "auto");
    OperatorEstimate est;
    if (d.kind == SnapshotKind::Velocity) {
      est = jet_edmd_generator(cfg, d);
    } else if (d.kind == SnapshotKind::FlowSample &&
               (op == "generator" || op == "auto")) {
      OperatorEstimate c_hat = jet_edmd_discrete(cfg, d);
      est = generator_from_flow(cfg, d, e.branch_offsets(c_hat, d.t_s));
    } else {
      est = jet_edmd_discrete(cfg, d);
    }
    estimates.push_back(std::move(est));
  }
  AssemblyOptions opts;
  opts.h_pinv_rel_tol = e.config.get_number("eigenfunctions.h_pinv_rel_tol", 0.0);
  const std::vector<EigenfunctionField> fields =
      assemble_eigenfunctions(estimates, opts);

  if (!e.config.contains("eigenfunctions.select")) {
    throw ConfigError("eigenfunctions.select = [[re, im], ...] is required");
  }
  const std::string side_name = e.config.get_string("eigenfunctions.side", "left");
  const FieldSide side = side_name == "right" ? FieldSide::Right : FieldSide::Left;
  const std::string sym = e.config.get_string("eigenfunctions.symmetrize", "none");
  const GridSpec grid = grid_from_config(e, "eigenfunctions", d.dim());
  const Eigen::MatrixXd nodes = grid_nodes(grid);

  json summary = e.base_summary("eigenfunctions");
  json exported = json::array();
  int file_index = 0;
  for (const TomlValue& sel : e.config.at("eigenfunctions.select").as_array()) {
    const TomlArray& pair = sel.as_array();
    if (pair.size() != 2) throw ConfigError("eigenfunctions.select entries are [re, im]");
    const Complex target(pair[0].as_number(), pair[1].as_number());
    const EigenfunctionField* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& f : fields) {
      const double dist = std::abs(f.eigenvalue - target);
      if (dist < best_dist) {
        best_dist = dist;
        best = &f;
      }
    }
    Eigen::VectorXcd values = evaluate_field(*best, grid, side);
    if (sym == "odd" || sym == "even") {
      Eigen::VectorXcd mirrored(values.size());
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Eigen::VectorXd x = grid.node(i);
        mirrored(i) = side == FieldSide::Right ? best->evaluate_right(-x)
                                               : best->evaluate_left(-x);
      }
      if (sym == "odd") {
        values -= mirrored;
      } else {
        values += mirrored;
      }
    }
    // Normalize: unit max modulus, phase fixed so the peak is real positive.
    normalize_field_values(values);
    const std::filesystem::path p =
        e.out / ("eigenfunction_" + std::to_string(file_index) + ".csv");
    write_grid_csv(p, nodes, values, e.prov);
    bundle.artifacts["eigenfunction_" + std::to_string(file_index)] = p;
    json info;
    info["target"] = {target.real(), target.imag()};
    info["eigenvalue"] = {best->eigenvalue.real(), best->eigenvalue.imag()};
    info["point_index"] = best->point_index;
    info["pair_residual"] = best->pair_residual;
    info["defective"] = best->defective_flag;
    info["file"] = p.string();
    exported.push_back(std::move(info));
    ++file_index;
  }
  summary["exported"] = exported;
  summary["stacked_gram_cond"] = fields.front().assembly->stacked_gram_cond;
  e.finish(bundle, summary);
  return bundle;
}

json model_to_json(const ReconstructedMap& model) {
  json j;
  j["kind"] = model.kind() == ReconstructedKind::DiscreteMap ? "discrete_map"
                                                             : "vector_field";
  j["rule"] = model.rule() == ReconstructedMap::Rule::ExpComponent
                  ? "exp_component"
                  : "gauss_quadratic";
  const KernelSpec& k = model.basis().kernel();
  j["kernel"]["kind"] = k.kind == KernelKind::Exponential ? "exponential" : "gaussian";
  j["kernel"]["sigma"] = k.sigma;
  if (k.center.size() > 0) j["kernel"]["center"] = vector_to_json(k.center);
  j["base_point"] = vector_to_json(model.basis().base_point());
  j["m"] = model.basis().order();
  j["offset"] = vector_to_json(model.offset());
  j["coef"] = matrix_to_json(model.coefficients());
  return j;
}

ReconstructedMap model_from_json(const json& j) {
  const std::string kind_name = j.at("kind").get<std::string>();
  const std::string rule_name = j.at("rule").get<std::string>();
  const std::string kernel_kind = j.at("kernel").at("kind").get<std::string>();
  const double sigma = j.at("kernel").at("sigma").get<double>();
  const Eigen::VectorXd base_point = vector_from_json(j.at("base_point"));
  KernelSpec kernel = kernel_kind == "exponential"
                          ? KernelSpec::exponential(
                                sigma, j.at("kernel").contains("center")
                                           ? vector_from_json(j.at("kernel")["center"])
                                           : base_point)
                          : KernelSpec::gaussian(sigma);
  ObservableBasis basis(kernel, base_point, j.at("m").get<int>());
  return ReconstructedMap(
      kind_name == "discrete_map" ? ReconstructedKind::DiscreteMap
                                  : ReconstructedKind::VectorField,
      rule_name == "exp_component" ? ReconstructedMap::Rule::ExpComponent
                                   : ReconstructedMap::Rule::GaussQuadratic,
      std::move(basis), matrix_from_json(j.at("coef")),
      vector_from_json(j.at("offset")));
}

ReconstructedMap build_reconstruction(Experiment& e, const SnapshotData& d,
                                      json& summary) {
  const std::string variant = e.config.get_string("reconstruct.variant", "");
  const double sigma =
      e.config.get_number("reconstruct.sigma", e.config.get_number("kernel.sigma", 1.0));
  const int m = static_cast<int>(e.config.get_int("reconstruct.m",
                                                  e.config.get_int("estimator.m", 0)));
  const int n = static_cast<int>(e.config.get_int("reconstruct.n",
                                                  e.config.get_int("estimator.n", m)));
  const double pinv_tol = e.config.get_number("estimator.pinv_rel_tol", 0.0);
  const bool allow_deficient =
      e.config.get_bool("estimator.allow_rank_deficient", false);

  // Anchor pair (x0, y0): explicit, or the data pair closest to the mean of X.
  Eigen::VectorXd x0, y0;
  if (auto a = e.config.get_vector("reconstruct.anchor")) {
    x0 = *a;
    if (auto ao = e.config.get_vector("reconstruct.anchor_output")) {
      y0 = *ao;
    } else if (variant == "flow") {
      y0 = Eigen::VectorXd::Zero(x0.size());  // equilibrium: model vanishes at p
    } else if (e.system) {
      y0 = e.system->eval(x0);
    } else {
      throw ConfigError("reconstruct.anchor_output required without system.name");
    }
  } else if (variant == "flow") {
    throw ConfigError("reconstruct.anchor (the equilibrium) is required for flow");
  } else {
    const Eigen::VectorXd mean = d.x.rowwise().mean();
    Eigen::Index best = 0;
    (d.x.colwise() - mean).colwise().norm().minCoeff(&best);
    x0 = d.x.col(best);
    y0 = d.y.col(best);
  }
  summary["anchor"] = vector_to_json(x0);
  summary["anchor_output"] = vector_to_json(y0);
  summary["sigma"] = sigma;
  summary["m"] = m;
  summary["n"] = n;
  summary["variant"] = variant;

  if (variant == "discrete") {
    return reconstruct_discrete(sigma, m, n, x0, y0, d, pinv_tol, allow_deficient);
  }
  if (variant == "field") {
    const std::string kind = e.config.get_string("reconstruct.kind", "exponential");
    return reconstruct_field(sigma,
                             kind == "gaussian" ? KernelKind::Gaussian
                                                : KernelKind::Exponential,
                             m, n, x0, y0, d, pinv_tol, allow_deficient);
  }
  if (variant == "flow") {
    std::vector<int> offsets;
    if (e.config.get_string("estimator.branch", "principal") == "jacobian") {
      EstimatorConfig cfg;
      cfg.m = m;
      cfg.n = n;
      cfg.base_point = x0;
      cfg.kernel = KernelSpec::exponential(sigma, x0);
      cfg.pinv_rel_tol = pinv_tol;
      cfg.allow_rank_deficient = allow_deficient;
      const OperatorEstimate c_hat = jet_edmd_discrete(cfg, d);
      offsets = e.branch_offsets(c_hat, d.t_s);
    }
    return reconstruct_field_from_flow(sigma, m, n, x0, d, offsets, pinv_tol,
                                       allow_deficient);
  }
  throw ConfigError("reconstruct.variant must be discrete, field, or flow");
}

ResultBundle run_reconstruct(Experiment& e, bool chain_predict) {
  ResultBundle bundle;
  json summary = e.base_summary(chain_predict ? "predict" : "reconstruct");
  std::optional<ReconstructedMap> model;
  if (e.config.contains("reconstruct.variant")) {
    const SnapshotData d = e.data();
    model = build_reconstruction(e, d, summary);
    const std::filesystem::path mp = e.out / "model.json";
    write_text_atomic(mp, model_to_json(*model).dump(2) + "\n");
    bundle.artifacts["model"] = mp;
    // Training consistency on the data that produced the model.
    if (model->kind() == ReconstructedKind::DiscreteMap ||
        d.kind == SnapshotKind::Velocity) {
      double worst = 0.0;
      for (Eigen::Index j = 0; j < d.count(); ++j) {
        worst = std::max(worst, (model->evaluate(d.x.col(j)) - d.y.col(j)).norm());
      }
      summary["max_training_residual"] = worst;
    }
  } else if (chain_predict && e.config.contains("predict.model")) {
    const json mj = json::parse(read_text(e.config.require_string("predict.model")));
    model = model_from_json(mj);
  } else {
    throw ConfigError(chain_predict
                          ? "predict needs [reconstruct] or predict.model"
                          : "[reconstruct] section is required");
  }
  if (e.config.contains("reconstruct.grid_lo")) {
    const GridSpec grid = grid_from_config(e, "reconstruct", model->dim());
    const Eigen::MatrixXd nodes = grid_nodes(grid);
    Eigen::MatrixXd values(model->dim(), nodes.cols());
    for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
      values.col(i) = model->evaluate(nodes.col(i));
    }
    const std::filesystem::path gp = e.out / "field_grid.csv";
    write_snapshot_csv(gp, nodes, values, e.prov);
    bundle.artifacts["field_grid"] = gp;
  }
  if (chain_predict) {
    const auto x0 = e.config.get_vector("predict.x0");
    if (!x0) throw ConfigError("predict.x0 is required");
    const int steps = static_cast<int>(e.config.get_int("predict.steps", 0));
    const double dt = e.config.get_number("predict.dt", 0.0);
    if (steps < 1) throw ConfigError("predict.steps must be >= 1");
    const Eigen::MatrixXd traj = predict_trajectory(*model, *x0, steps, dt);
    Eigen::VectorXd times(steps + 1);
    const bool continuous = model->kind() == ReconstructedKind::VectorField;
    for (int s = 0; s <= steps; ++s) {
      times(s) = continuous ? dt * static_cast<double>(s) : static_cast<double>(s);
    }
    const std::filesystem::path tp = e.out / "trajectory.csv";
    write_trajectory_csv(tp, times, traj, e.prov);
    bundle.artifacts["trajectory"] = tp;
    summary["steps"] = steps;
    if (continuous) summary["dt"] = dt;
  }
  e.finish(bundle, summary);
  return bundle;
}

ResultBundle run_ricker_study(Experiment& e) {
  ResultBundle bundle;
  const double r = e.config.get_number("ricker_study.r", 2.8);
  const double sigma = e.config.get_number("ricker_study.sigma", 1.0);
  const int count = static_cast<int>(e.config.get_int("ricker_study.count", 1000));
  const int n_min = static_cast<int>(e.config.get_int("ricker_study.n_min", 6));
  const int n_max = static_cast<int>(e.config.get_int("ricker_study.n_max", 35));
  std::vector<int> m_values;
  if (e.config.contains("ricker_study.m_values")) {
    for (const TomlValue& v : e.config.at("ricker_study.m_values").as_array()) {
      m_values.push_back(static_cast<int>(v.as_int()));
    }
  } else {
    m_values = {4, 6};
  }
  auto box = e.config.get_box("ricker_study.box")
                 .value_or(std::vector<std::array<double, 2>>{{-0.5, 0.5}});
  const DynamicalSystem ricker = builtin("ricker", {{"r", r}});

  auto estimate_error = [&](int m, int n, int n_samples, std::uint64_t seed,
                            std::string_view tag) {
    const Eigen::MatrixXd x = sample_box(seed, box, n_samples, tag);
    const SnapshotData d = map_pairs(ricker, x);
    EstimatorConfig cfg;
    cfg.m = m;
    cfg.n = n;
    cfg.base_point = Eigen::VectorXd::Zero(1);
    cfg.kernel = KernelSpec::exponential(sigma, Eigen::VectorXd::Zero(1));
    // The study deliberately runs deep into the pinv-truncation regime.
    cfg.allow_rank_deficient = true;
    const OperatorEstimate est = jet_edmd_discrete(cfg, d);
    const Eigen::MatrixXd oracle = ricker_oracle(r, m);
    return (est.matrix.real() - oracle).norm();
  };

  // Error versus n at fixed N, one column per m.
  std::ostringstream table;
  table << e.prov.comment_line() << "\n";
  table << "n";
  for (int m : m_values) table << ",log_err_m" << m;
  table << "\n";
  json fits = json::array();
  std::vector<std::vector<double>> logerr(m_values.size());
  for (int n = n_min; n <= n_max; ++n) {
    table << n;
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
      const double err = estimate_error(m_values[mi], n, count, e.seed, "ricker_order");
      logerr[mi].push_back(std::log(err));
      table << ',' << format_double(std::log(err));
    }
    table << "\n";
  }
  // Least-squares slope of log err against the theoretical shape
  // -0.5 n log n + (m+1) log n.
  for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
    const int m = m_values[mi];
    std::vector<double> shape;
    for (int n = n_min; n <= n_max; ++n) {
      shape.push_back(-0.5 * n * std::log(n) + (m + 1) * std::log(n));
    }
    const auto& y = logerr[mi];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto cnt = static_cast<double>(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i) {
      sx += shape[i];
      sy += y[i];
      sxx += shape[i] * shape[i];
      sxy += shape[i] * y[i];
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    json f;
    f["m"] = m;
    f["slope_vs_theory"] = slope;
    fits.push_back(std::move(f));
  }
  const std::filesystem::path op = e.out / "error_vs_order.csv";
  write_text_atomic(op, table.str());
  bundle.artifacts["error_vs_order"] = op;

  // Sample-complexity sweep at fixed (m, n).
  const int sweep_m = static_cast<int>(e.config.get_int("ricker_study.sweep_m", 6));
  const int sweep_n = static_cast<int>(e.config.get_int("ricker_study.sweep_n", 33));
  const int sweep_lo = static_cast<int>(e.config.get_int("ricker_study.sweep_n_min", 34));
  const int sweep_hi = static_cast<int>(e.config.get_int("ricker_study.sweep_n_max", 200));
  const int sweep_step = static_cast<int>(e.config.get_int("ricker_study.sweep_step", 2));
  const int trials = static_cast<int>(e.config.get_int("ricker_study.trials", 200));
  std::ostringstream sweep;
  sweep << e.prov.comment_line() << "\n" << "N,mean_log_err,std_log_err\n";
  for (int n_samples = sweep_lo; n_samples <= sweep_hi; n_samples += sweep_step) {
    double mean = 0.0, m2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double err =
          estimate_error(sweep_m, sweep_n, n_samples,
                         e.seed + static_cast<std::uint64_t>(t) * 7919u, "ricker_sweep");
      const double le = std::log(err);
      const double delta = le - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (le - mean);
    }
    const double sd = trials > 1 ? std::sqrt(m2 / static_cast<double>(trials - 1)) : 0.0;
    sweep << n_samples << ',' << format_double(mean) << ',' << format_double(sd) << "\n";
  }
  const std::filesystem::path sp = e.out / "error_vs_samples.csv";
  write_text_atomic(sp, sweep.str());
  bundle.artifacts["error_vs_samples"] = sp;

  json summary = e.base_summary("ricker-study");
  summary["r"] = r;
  summary["sigma"] = sigma;
  summary["slope_fits"] = fits;
  e.finish(bundle, summary);
  return bundle;
}

}  // namespace

SpectraComparison compare_spectra(const std::filesystem::path& file_a,
                                  const std::filesystem::path& file_b,
                                  const std::optional<std::filesystem::path>& out_dir) {
  const auto rows_a = read_spectrum_csv(file_a);
  const auto rows_b = read_spectrum_csv(file_b);
  if (rows_a.empty() || rows_b.empty()) {
    throw ConfigError("compare_spectra: both files must contain at least one row");
  }
  std::vector<Complex> a, b;
  for (const auto& r : rows_a) a.emplace_back(r.re, r.im);
  for (const auto& r : rows_b) b.emplace_back(r.re, r.im);
  SpectraComparison cmp;
  cmp.hausdorff_distance = hausdorff(a, b);
  // Greedy nearest matching: repeatedly pair the globally closest rows.
  std::set<std::size_t> left_a, left_b;
  for (std::size_t i = 0; i < a.size(); ++i) left_a.insert(i);
  for (std::size_t i = 0; i < b.size(); ++i) left_b.insert(i);
  while (!left_a.empty() && !left_b.empty()) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i : left_a) {
      for (std::size_t j : left_b) {
        const double dist = std::abs(a[i] - b[j]);
        if (dist < best) {
          best = dist;
          bi = i;
          bj = j;
        }
      }
    }
    cmp.matches.push_back({static_cast<double>(bi), static_cast<double>(bj), best});
    left_a.erase(bi);
    left_b.erase(bj);
  }
  json j;
  j["file_a"] = file_a.string();
  j["file_b"] = file_b.string();
  j["hausdorff"] = cmp.hausdorff_distance;
  json matches = json::array();
  for (const auto& m : cmp.matches) {
    json row;
    row["a_index"] = static_cast<std::size_t>(m[0]);
    row["b_index"] = static_cast<std::size_t>(m[1]);
    row["distance"] = m[2];
    matches.push_back(std::move(row));
  }
  j["matches"] = matches;
  cmp.report_json = j.dump(2);
  std::cout << "hausdorff " << format_double(cmp.hausdorff_distance) << "\n";
  for (const auto& m : cmp.matches) {
    std::cout << "a[" << static_cast<std::size_t>(m[0]) << "] ~ b["
              << static_cast<std::size_t>(m[1]) << "]  distance "
              << format_double(m[2]) << "\n";
  }
  if (out_dir) {
    write_text_atomic(*out_dir / "compare.json", cmp.report_json + "\n");
  }
  return cmp;
}

ResultBundle run(Subcommand cmd, const RunOptions& opts) {
  if (opts.threads > 0) Eigen::setNbThreads(opts.threads);
  Experiment e = Experiment::load(opts);
  switch (cmd) {
    case Subcommand::Sample:
      return run_sample(e);
    case Subcommand::Flow:
      return run_pairs(e, "flow");
    case Subcommand::Velocities:
      return run_pairs(e, "velocities");
    case Subcommand::Estimate:
      return run_estimate(e);
    case Subcommand::Spectrum:
      return run_spectrum(e);
    case Subcommand::Eigenfunctions:
      return run_eigenfunctions(e);
    case Subcommand::Reconstruct:
      return run_reconstruct(e, /*chain_predict=*/false);
    case Subcommand::Predict:
      return run_reconstruct(e, /*chain_predict=*/true);
    case Subcommand::RickerStudy:
      return run_ricker_study(e);
    case Subcommand::CompareSpectra:
      throw ConfigError("compare-spectra takes two spectrum files, not a config");
  }
  throw ConfigError("unhandled subcommand");
}

}  // namespace jetedmd
