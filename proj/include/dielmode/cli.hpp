#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "dielmode/analytic.hpp"
#include "dielmode/io.hpp"
#include "dielmode/material.hpp"
#include "dielmode/mesh.hpp"
#include "dielmode/meshgen.hpp"
#include "dielmode/modes.hpp"
#include "dielmode/parallel.hpp"
#include "dielmode/quantum.hpp"
#include "dielmode/response.hpp"

namespace dielmode::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit codes: 0 ok, 1 config error, 2 numeric failure, 3 validation failure.

struct RunConfig {
  std::string mesh_path;
  DrudeLorentz material;
  int n_par = 4;
  int n_perp = 4;
  int mode_quadrature = 4;
  int dyn_quadrature = 1;
  std::vector<std::string> selection;  // "par:1", "perp:2", ...; empty = all
  SweepConfig sweep;
  // coupling dump grid
  int coupling_samples = 33;
  double coupling_omega_max = 0;  // 0: 2 * omega_p
  // field command
  std::vector<Vec3> field_points;
  std::string field_region = "inside";
  std::string drive_type = "single-mode";  // or "white-band"
  std::string drive_mode = "par:1";
  complexd drive_amplitude{1.0, 0.0};
  // validate command
  int validate_sphere_m = 6;
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw config_error("unknown key \"" + it.key() + "\" in " + where);
}

inline RunConfig parse_config(const fs::path& path) {
  const json j = io::read_json(path);
  detail::reject_unknown(j,
                         {"schema_version", "mesh", "material", "modes", "selection", "sweep",
                          "coupling", "field", "validate"},
                         "config");
  if (j.at("schema_version").get<int>() != 1)
    throw config_error("unsupported config schema_version");
  RunConfig cfg;
  if (j.contains("mesh")) cfg.mesh_path = j.at("mesh").get<std::string>();

  if (j.contains("material")) {
    const json& m = j.at("material");
    reject_unknown(m, {"omega_p", "omega_0", "gamma"}, "material");
    cfg.material.omega_p = m.at("omega_p").get<double>();
    cfg.material.omega_0 = m.value("omega_0", 0.0);
    cfg.material.gamma = m.value("gamma", 0.0);
    cfg.material.validate();
  }
  if (j.contains("modes")) {
    const json& m = j.at("modes");
    reject_unknown(m, {"longitudinal", "transverse", "quadrature", "dynamic_quadrature"},
                   "modes");
    cfg.n_par = m.value("longitudinal", 4);
    cfg.n_perp = m.value("transverse", 4);
    cfg.mode_quadrature = m.value("quadrature", 4);
    cfg.dyn_quadrature = m.value("dynamic_quadrature", 1);
  }
  if (j.contains("selection")) cfg.selection = j.at("selection").get<std::vector<std::string>>();
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s,
                   {"n_freq", "omega_max", "omega_cap", "decay_fraction", "window_fraction",
                    "contour_alpha", "coupling_nodes", "presweep_points"},
                   "sweep");
    cfg.sweep.n_freq = s.value("n_freq", 4096);
    cfg.sweep.omega_max = s.value("omega_max", 0.0);
    cfg.sweep.omega_cap = s.value("omega_cap", 0.0);
    cfg.sweep.decay_fraction = s.value("decay_fraction", 0.05);
    cfg.sweep.window_fraction = s.value("window_fraction", 0.1);
    cfg.sweep.contour_alpha = s.value("contour_alpha", 1.0);
    cfg.sweep.coupling_nodes = s.value("coupling_nodes", 65);
    cfg.sweep.presweep_points = s.value("presweep_points", 256);
  }
  if (j.contains("coupling")) {
    const json& c = j.at("coupling");
    reject_unknown(c, {"samples", "omega_max"}, "coupling");
    cfg.coupling_samples = c.value("samples", 33);
    cfg.coupling_omega_max = c.value("omega_max", 0.0);
  }
  if (j.contains("field")) {
    const json& f = j.at("field");
    reject_unknown(f, {"points", "region", "drive"}, "field");
    for (const auto& p : f.at("points"))
      cfg.field_points.push_back(
          Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()));
    cfg.field_region = f.value("region", "inside");
    if (f.contains("drive")) {
      const json& d = f.at("drive");
      reject_unknown(d, {"type", "mode", "amplitude"}, "drive");
      cfg.drive_type = d.value("type", "single-mode");
      cfg.drive_mode = d.value("mode", "par:1");
      if (d.contains("amplitude"))
        cfg.drive_amplitude =
            complexd(d.at("amplitude").at(0).get<double>(), d.at("amplitude").at(1).get<double>());
    }
  }
  if (j.contains("validate")) {
    const json& v = j.at("validate");
    reject_unknown(v, {"sphere_subdivision"}, "validate");
    cfg.validate_sphere_m = v.value("sphere_subdivision", 6);
  }
  return cfg;
}

inline int parse_mode_label(const std::string& label, const ModeBasis& basis) {
  const auto colon = label.find(':');
  if (colon == std::string::npos)
    throw config_error("mode label must look like par:1 or perp:2, got " + label);
  const std::string fam = label.substr(0, colon);
  const int idx = std::stoi(label.substr(colon + 1)) - 1;
  if (fam == "par") {
    if (idx < 0 || idx >= basis.n_par) throw config_error("par mode out of range: " + label);
    return idx;
  }
  if (fam == "perp") {
    if (idx < 0 || idx >= basis.n_perp) throw config_error("perp mode out of range: " + label);
    return basis.n_par + idx;
  }
  throw config_error("unknown mode family in " + label);
}

struct Pipeline {
  VolumeMesh mesh;
  LoopBasis loops;
  LongitudinalSpectrum par;
  TransverseSpectrum perp;
  ModeBasis basis;
  std::unique_ptr<CouplingAssembler> coupling;
  ModeSelection sel;
  bool cache_hit = false;
};

inline Pipeline build_pipeline(const RunConfig& cfg, const fs::path& cache_dir,
                               bool need_coupling) {
  Pipeline p;
  if (cfg.mesh_path.empty()) throw config_error("config is missing the mesh path");
  p.mesh = parse_mesh(cfg.mesh_path);
  p.loops = build_loop_basis(p.mesh);

  fs::path cache_file;
  if (!cache_dir.empty()) {
    const std::uint64_t key =
        fnv1a(std::to_string(p.mesh.content_hash) + "|" + std::to_string(cfg.n_par) + "|" +
              std::to_string(cfg.n_perp));
    cache_file = cache_dir / ("modes_" + std::to_string(key) + ".json");
  }
  if (!cache_file.empty() && fs::exists(cache_file)) {
    io::spectra_from_json(io::read_json(cache_file), p.mesh, p.loops, &p.par, &p.perp);
    p.cache_hit = true;
  } else {
    p.par = solve_longitudinal(p.mesh.boundary, cfg.n_par);
    p.perp = solve_transverse(p.mesh, p.loops, cfg.n_perp);
    if (!cache_file.empty()) {
      fs::create_directories(cache_dir);
      io::write_json(cache_file, io::spectra_to_json(p.mesh, p.par, p.perp));
    }
  }
  p.basis = build_mode_basis(p.mesh, p.loops, p.par, p.perp, cfg.mode_quadrature);
  if (need_coupling)
    p.coupling =
        std::make_unique<CouplingAssembler>(p.basis, constants::c0, cfg.dyn_quadrature);
  if (cfg.selection.empty()) {
    p.sel = ModeSelection::all(p.basis);
  } else {
    for (const auto& label : cfg.selection) p.sel.modes.push_back(parse_mode_label(label, p.basis));
    p.sel.validate(p.basis);
  }
  return p;
}

inline json sweep_metadata(const RunConfig& cfg, const Pipeline& p, const TransferSample& ts) {
  json meta;
  meta["mesh_hash"] = p.mesh.content_hash;
  meta["cache_hit"] = p.cache_hit;
  meta["material"] = {{"omega_p", cfg.material.omega_p},
                      {"omega_0", cfg.material.omega_0},
                      {"gamma", cfg.material.gamma},
                      {"epsilon_shift", cfg.material.epsilon_shift()},
                      {"lambda_c", cfg.material.lambda_c()}};
  meta["grid"] = {{"n_freq", static_cast<int>(ts.omega.size())},
                  {"omega_max", ts.omega_max},
                  {"sigma_c", ts.sigma_c},
                  {"window_fraction", ts.window_fraction},
                  {"contour_alpha", cfg.sweep.contour_alpha},
                  {"decay_fraction", cfg.sweep.decay_fraction},
                  {"coupling_nodes", cfg.sweep.coupling_nodes},
                  {"presweep_points", cfg.sweep.presweep_points}};
  meta["quadrature"] = {{"mode_points_per_tet", cfg.mode_quadrature},
                        {"dynamic_points_per_tet", cfg.dyn_quadrature},
                        {"surface_rule", "3-point Gauss, 7-point for close pairs"},
                        {"singular_volume_rule", "exact inner tet potential, 4-point outer"}};
  meta["tolerances"] = {{"degeneracy_gap", kDegeneracyGap},
                        {"flag_residual", cfg.sweep.flag_residual},
                        {"boundary_guard_factor", 0.5}};
  meta["nondimensional"] = {
      {"beta", cfg.material.omega_p * p.mesh.a / constants::c0},
      {"gamma_max", std::abs(complexd(ts.sigma_c, ts.omega_max)) * p.mesh.a / constants::c0},
      {"omega_max_over_omega_p", ts.omega_max / cfg.material.omega_p}};
  meta["flagged_samples"] = ts.n_flagged;
  json kp = json::array(), kt = json::array();
  for (double k : p.basis.kappa_par) kp.push_back(k);
  for (double k : p.basis.kappa_perp) kt.push_back(k);
  meta["kappa_par"] = kp;
  meta["kappa_perp"] = kt;
  json selj = json::array();
  for (int m : p.sel.modes) selj.push_back(p.basis.mode_name(m));
  meta["selection"] = selj;
  meta["convention"] = "Laplace s = sigma_c + i omega; impulse responses unwound by exp(sigma_c t)";
  return meta;
}

inline int cmd_modes(const RunConfig& cfg, const fs::path& out, const fs::path& cache) {
  const Pipeline p = build_pipeline(cfg, cache, false);
  fs::create_directories(out);
  io::write_json(out / "modes.json", io::spectra_to_json(p.mesh, p.par, p.perp));
  io::CsvWriter csv(out / "eigenvalues.csv");
  csv.header({"family", "index", "kappa", "multiplet"});
  int g = 0;
  for (std::size_t m = 0; m < p.par.kappa.size(); ++m) {
    while (g + 1 < static_cast<int>(p.par.multiplets.size()) &&
           static_cast<int>(m) >= p.par.multiplets[g + 1].first)
      ++g;
    csv.row_strings({"par", std::to_string(m + 1), io::fmt(p.par.kappa[m]), std::to_string(g)});
  }
  g = 0;
  for (std::size_t m = 0; m < p.perp.kappa.size(); ++m) {
    while (g + 1 < static_cast<int>(p.perp.multiplets.size()) &&
           static_cast<int>(m) >= p.perp.multiplets[g + 1].first)
      ++g;
    csv.row_strings({"perp", std::to_string(m + 1), io::fmt(p.perp.kappa[m]), std::to_string(g)});
  }
  std::cout << (p.cache_hit ? "mode cache hit\n" : "mode cache miss\n");
  std::cout << "wrote " << (out / "eigenvalues.csv").string() << "\n";
  return 0;
}

inline int cmd_coupling(const RunConfig& cfg, const fs::path& out, const fs::path& cache) {
  const Pipeline p = build_pipeline(cfg, cache, true);
  fs::create_directories(out);
  const double wmax =
      cfg.coupling_omega_max > 0 ? cfg.coupling_omega_max : 2.0 * cfg.material.omega_p;
  std::vector<CouplingMatrix> samples;
  for (int k = 0; k < cfg.coupling_samples; ++k) {
    const double w = wmax * (k + 1) / cfg.coupling_samples;
    samples.push_back(p.coupling->evaluate(complexd(cfg.material.epsilon_shift(), w)));
  }
  io::write_coupling_csv(out, samples, p.basis, p.sel);
  json meta;
  meta["mesh_hash"] = p.mesh.content_hash;
  meta["omega_max"] = wmax;
  meta["samples"] = cfg.coupling_samples;
  meta["note"] = "perp-perp entries hold the regular remainder deltaS";
  io::write_json(out / "coupling_meta.json", meta);
  std::cout << "wrote coupling samples to " << out.string() << "\n";
  return 0;
}

inline int cmd_response(const RunConfig& cfg, const fs::path& out, const fs::path& cache,
                        bool impulse) {
  const Pipeline p = build_pipeline(cfg, cache, true);
  fs::create_directories(out);
  // response samples sit on s = eps + i w; impulse synthesis shifts the
  // contour to alpha * domega and unwinds exactly
  TransferSample ts;
  if (!impulse) {
    ts = frequency_sweep(*p.coupling, cfg.material, p.sel, cfg.sweep,
                         cfg.material.epsilon_shift());
    io::write_transfer_csv(out, ts, p.basis, p.sel);
    io::write_json(out / "response_meta.json", sweep_metadata(cfg, p, ts));
    std::cout << "wrote transfer samples to " << out.string() << "\n";
    return 0;
  }
  SweepConfig scfg = cfg.sweep;
  scfg.omega_max = select_omega_max(*p.coupling, cfg.material, p.sel, scfg);
  const double domega = scfg.omega_max / scfg.n_freq;
  const double sigma_c = std::max(cfg.material.epsilon_shift(), scfg.contour_alpha * domega);
  ts = frequency_sweep(*p.coupling, cfg.material, p.sel, scfg, sigma_c);
  const ImpulseResponse ir = impulse_from_transfer(ts);
  io::write_impulse_csv(out, ir, p.basis, p.sel);
  json meta = sweep_metadata(cfg, p, ts);
  meta["synthesis"] = {{"imag_residue_rel", ir.imag_residue_rel},
                       {"anticausal_fraction", ir.anticausal_fraction},
                       {"dt", ir.dt}};
  io::write_json(out / "impulse_meta.json", meta);
  if (ir.imag_residue_rel > 1e-8)
    throw numeric_error("impulse synthesis: imaginary residue above threshold");
  std::cout << "wrote impulse responses to " << out.string() << "\n";
  return 0;
}

inline int cmd_field(const RunConfig& cfg, const fs::path& out, const fs::path& cache) {
  if (cfg.field_points.empty()) throw config_error("field command needs field.points");
  const Pipeline p = build_pipeline(cfg, cache, true);
  fs::create_directories(out);
  SweepConfig scfg = cfg.sweep;
  const TransferSample ts =
      frequency_sweep(*p.coupling, cfg.material, p.sel, scfg, cfg.material.epsilon_shift());

  // toy driving statistics
  DrivingStatistics stats;
  stats.omega = ts.omega;
  stats.mean = MatrixXcd::Zero(static_cast<int>(ts.omega.size()), p.sel.size());
  if (cfg.drive_type == "single-mode") {
    const int target = parse_mode_label(cfg.drive_mode, p.basis);
    int found = -1;
    for (int i = 0; i < p.sel.size(); ++i)
      if (p.sel.modes[i] == target) found = i;
    if (found < 0) throw config_error("drive mode is not part of the selection");
    stats.mean.col(found).setConstant(cfg.drive_amplitude);
  } else if (cfg.drive_type == "white-band") {
    stats.mean.setConstant(cfg.drive_amplitude);
  } else {
    throw config_error("unknown drive type: " + cfg.drive_type);
  }

  const ModePointEvaluator eval(p.basis);
  const MatrixXcd coords = expectation_coordinates(stats, ts);
  FieldSample fsample;
  if (cfg.field_region == "inside") {
    fsample = expectation_polarization(stats, ts, p.sel, eval, cfg.field_points);
  } else if (cfg.field_region == "outside") {
    fsample = efield_outside(coords, ts, p.sel, eval, cfg.field_points);
  } else {
    throw config_error("field.region must be inside or outside");
  }

  for (std::size_t pt = 0; pt < cfg.field_points.size(); ++pt) {
    io::CsvWriter csv(out / ("field_point" + std::to_string(pt) + ".csv"));
    csv.header({"omega", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z"});
    for (std::size_t k = 0; k < ts.omega.size(); ++k) {
      const auto& v = fsample.values[k][pt];
      csv.row({ts.omega[k], v[0].real(), v[0].imag(), v[1].real(), v[1].imag(), v[2].real(),
               v[2].imag()});
    }
  }
  json meta = sweep_metadata(cfg, p, ts);
  meta["field"] = {{"region", cfg.field_region},
                   {"drive_type", cfg.drive_type},
                   {"points", cfg.field_points.size()}};
  io::write_json(out / "field_meta.json", meta);
  std::cout << "wrote field samples to " << out.string() << "\n";
  return 0;
}

struct CheckRow {
  std::string name;
  double measured;
  double threshold;
  bool less_than;
  bool pass() const { return less_than ? measured < threshold : measured > threshold; }
};

inline int cmd_validate(const RunConfig& cfg, const fs::path& out) {
  std::vector<CheckRow> rows;
  const double c0 = constants::c0;

  // Green-function identities at random points
  {
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    for (int k = 0; k < 64; ++k) {
      const Vec3 r(u(gen) + 1.5, u(gen), u(gen));
      const complexd s(std::abs(u(gen)) + 0.1, 2.0 * u(gen));
      const Dyad3c lhs = green_total(r, s, 1.0) - green_longitudinal(r, s, 1.0);
      const Dyad3c rhs =
          green_transverse_static(r).cast<complexd>() + green_transverse_dynamic(r, s, 1.0);
      worst = std::max(worst, ((lhs - rhs).norm()) / lhs.norm());
    }
    rows.push_back({"green_decomposition_rel", worst, 1e-12, true});
    rows.push_back({"f1_at_zero", std::abs(greens::f1(complexd(0, 0)) - 1.0), 1e-12, true});
    rows.push_back({"f2_at_zero", std::abs(greens::f2(complexd(0, 0)) - 1.0), 1e-12, true});
  }

  // Kramers-Kronig self-test for a lossy model
  {
    DrudeLorentz m{1.0, 0.25, 0.1};
    std::vector<double> grid;
    for (int i = 1; i <= 50000; ++i) grid.push_back(40.0 * i / 50000);
    double chimax = 0;
    for (int i = 0; i < 50000; i += 9)
      chimax = std::max(chimax, std::abs(m.chi(complexd(0, grid[i])).real()));
    rows.push_back({"kramers_kronig_rel", kk_residual(m, grid) / chimax, 0.01, true});
  }

  // bulk-medium identity
  {
    DrudeLorentz m{1.0, 0.25, 0.05};
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
      const complexd s(u(gen), u(gen) - 1.0);
      const double wmu = u(gen);
      const complexd route1 = 1.0 / (m.inv_chi(s) + s * (s / (s * s + wmu * wmu)));
      const complexd route2 = infinite_medium_transfer(m, wmu, s);
      worst = std::max(worst, std::abs(route1 - route2) / std::abs(route2));
    }
    rows.push_back({"bulk_identity_rel", worst, 1e-12, true});
  }

  // slab battery (lossless metal, small size)
  {
    SlabModel slab;
    slab.material = DrudeLorentz{1.0, 0.0, 0.0};
    slab.a = 0.1 * slab.material.lambda_c(1.0);  // working units c0 = 1
    const complexd s(1e-4, 0.35);
    rows.push_back(
        {"slab_truncation_change", slab_truncation_change(slab, s, 8, 2, 1.0), 0.01, true});
    const MatrixXcd H = slab_transfer(slab, s, 8, 1.0);
    double offmax = 0, diagmin = 1e300;
    for (int i = 0; i < H.rows(); ++i) {
      diagmin = std::min(diagmin, std::abs(H(i, i)));
      for (int j = 0; j < H.cols(); ++j)
        if (i != j) offmax = std::max(offmax, std::abs(H(i, j)));
    }
    rows.push_back({"slab_decoupling_ratio", offmax / diagmin, 1e-2, true});
    rows.push_back({"slab_reciprocity",
                    (H - H.transpose()).cwiseAbs().maxCoeff() / H.cwiseAbs().maxCoeff(), 1e-10,
                    true});

    const int nf = 1024;
    const double wmax = 3.0;
    TransferSample ts;
    ts.omega_max = wmax;
    ts.sigma_c = wmax / nf;
    ts.window_fraction = 0.1;
    for (int k = 1; k <= nf; ++k) {
      ts.omega.push_back(wmax * k / nf);
      ts.H.push_back(slab_transfer(slab, complexd(ts.sigma_c, ts.omega.back()), 4, 1.0));
    }
    ts.H_dc = slab_transfer(slab, complexd(ts.sigma_c, 0), 4, 1.0);
    const ImpulseResponse ir = impulse_from_transfer(ts);
    rows.push_back({"slab_imag_residue_rel", ir.imag_residue_rel, 1e-10, true});
    rows.push_back({"slab_anticausal_fraction", ir.anticausal_fraction, 1e-3, true});
  }

  // sphere eigenvalue battery on a generated mesh
  {
    const VolumeMesh mesh = meshgen::icosphere_cone_ball(cfg.validate_sphere_m, 1.0);
    const LongitudinalSpectrum spec = solve_longitudinal(mesh.boundary, 15);
    for (int l = 1; l <= 3; ++l) {
      const double expected = sphere_kappa_longitudinal(l);
      const double got = spec.kappa[spec.multiplets[l - 1].first];
      rows.push_back({"sphere_kappa_l" + std::to_string(l) + "_rel",
                      std::abs(got - expected) / expected, 0.02, true});
      rows.push_back({"sphere_degeneracy_l" + std::to_string(l),
                      static_cast<double>(spec.multiplets[l - 1].count),
                      static_cast<double>(2 * l), false});
    }
    rows.push_back({"sphere_kappa_min", *std::min_element(spec.kappa.begin(), spec.kappa.end()),
                    2.0 - 0.05, false});
  }

  fs::create_directories(out);
  io::CsvWriter csv(out / "validation.csv");
  csv.header({"check", "measured", "threshold", "pass"});
  bool all_pass = true;
  for (const auto& r : rows) {
    csv.row_strings({r.name, io::fmt(r.measured), io::fmt(r.threshold), r.pass() ? "1" : "0"});
    std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << " = " << r.measured << "\n";
    all_pass = all_pass && r.pass();
  }
  return all_pass ? 0 : 3;
}

}  // namespace detail

inline int run(int argc, char** argv) {
  CLI::App app{"static-mode impulse-response toolkit for dispersive dielectric bodies"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "out", cache_dir;
  int threads = 1;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->capture_default_str();
  app.add_option("--cache", cache_dir, "mode-set cache directory");

  auto* modes = app.add_subcommand("modes", "static mode spectra");
  auto* coupling = app.add_subcommand("coupling", "radiation coupling samples");
  auto* response = app.add_subcommand("response", "transfer-matrix sweep");
  auto* impulse = app.add_subcommand("impulse", "impulse-response synthesis");
  auto* field = app.add_subcommand("field", "driven field reconstruction");
  auto* validate = app.add_subcommand("validate", "closed-form oracle battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  thread_count() = std::max(1, threads);
  try {
    RunConfig cfg;
    if (!config_path.empty())
      cfg = detail::parse_config(config_path);
    else if (!validate->parsed())
      throw config_error("--config is required for this command");

    const fs::path out(out_dir);
    const fs::path cache(cache_dir);
    if (modes->parsed()) return detail::cmd_modes(cfg, out, cache);
    if (coupling->parsed()) return detail::cmd_coupling(cfg, out, cache);
    if (response->parsed()) return detail::cmd_response(cfg, out, cache, false);
    if (impulse->parsed()) return detail::cmd_response(cfg, out, cache, true);
    if (field->parsed()) return detail::cmd_field(cfg, out, cache);
    if (validate->parsed()) return detail::cmd_validate(cfg, out);
    throw config_error("no subcommand given");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dielmode::cli
