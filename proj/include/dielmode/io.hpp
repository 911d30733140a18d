#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dielmode/coupling.hpp"
#include "dielmode/mesh.hpp"
#include "dielmode/modes.hpp"
#include "dielmode/response.hpp"

namespace dielmode::io {

using nlohmann::json;

// All numeric output goes through one shortest-round-trip formatter so that
// identical runs produce byte-identical files.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw config_error("cannot open output file: " + path.string());
  }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << fmt(vals[i]);
    out_ << "\n";
  }
  void row_strings(const std::vector<std::string>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << vals[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output file: " + path.string());
  out << j.dump(2) << "\n";
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

// --- mode-set serialization: the static stage runs once per shape ---

inline json spectra_to_json(const VolumeMesh& mesh, const LongitudinalSpectrum& par,
                            const TransverseSpectrum& perp) {
  json j;
  j["mesh_hash"] = mesh.content_hash;
  j["kappa_par"] = par.kappa;
  j["kappa_perp"] = perp.kappa;
  j["par_ortho_residual"] = par.ortho_residual;
  j["perp_ortho_residual"] = perp.ortho_residual;
  auto dump_matrix = [](const MatrixXd& m) {
    json cols = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      json col = json::array();
      for (int r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
      cols.push_back(std::move(col));
    }
    return cols;
  };
  j["charge"] = dump_matrix(par.charge);
  j["loop_coeff"] = dump_matrix(perp.coeff);
  return j;
}

inline void spectra_from_json(const json& j, const VolumeMesh& mesh, const LoopBasis& loops,
                              LongitudinalSpectrum* par, TransverseSpectrum* perp) {
  if (j.at("mesh_hash").get<std::uint64_t>() != mesh.content_hash)
    throw config_error("cached mode set does not match this mesh");
  auto load_matrix = [](const json& cols, int rows) {
    MatrixXd m(rows, static_cast<int>(cols.size()));
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = cols.at(c).at(r).get<double>();
    return m;
  };
  par->kappa = j.at("kappa_par").get<std::vector<double>>();
  par->charge = load_matrix(j.at("charge"), mesh.boundary.n_triangles());
  par->multiplets = group_multiplets(par->kappa);
  par->ortho_residual = j.at("par_ortho_residual").get<double>();
  par->surface = &mesh.boundary;
  perp->kappa = j.at("kappa_perp").get<std::vector<double>>();
  perp->coeff = load_matrix(j.at("loop_coeff"), loops.n_loops());
  perp->multiplets = group_multiplets(perp->kappa);
  perp->ortho_residual = j.at("perp_ortho_residual").get<double>();
  perp->basis = &loops;
}

// --- emission of sweep products ---

inline void write_transfer_csv(const std::filesystem::path& dir, const TransferSample& ts,
                               const ModeBasis& basis, const ModeSelection& sel) {
  for (int i = 0; i < sel.size(); ++i)
    for (int j = 0; j < sel.size(); ++j) {
      const std::string name = "H_" + basis.mode_name(sel.modes[i]) + "_" +
                               basis.mode_name(sel.modes[j]) + ".csv";
      CsvWriter csv(dir / name);
      csv.header({"omega", "re", "im"});
      for (std::size_t k = 0; k < ts.omega.size(); ++k)
        csv.row({ts.omega[k], ts.H[k](i, j).real(), ts.H[k](i, j).imag()});
    }
}

inline void write_impulse_csv(const std::filesystem::path& dir, const ImpulseResponse& ir,
                              const ModeBasis& basis, const ModeSelection& sel) {
  for (int i = 0; i < sel.size(); ++i)
    for (int j = 0; j < sel.size(); ++j) {
      const std::string name = "h_" + basis.mode_name(sel.modes[i]) + "_" +
                               basis.mode_name(sel.modes[j]) + ".csv";
      CsvWriter csv(dir / name);
      csv.header({"t", "h"});
      for (std::size_t k = 0; k < ir.t.size(); ++k) csv.row({ir.t[k], ir.h[k](i, j)});
    }
}

inline void write_coupling_csv(const std::filesystem::path& dir,
                               const std::vector<CouplingMatrix>& samples,
                               const ModeBasis& basis, const ModeSelection& sel) {
  for (int i = 0; i < sel.size(); ++i)
    for (int j = 0; j < sel.size(); ++j) {
      const std::string name = "S_" + basis.mode_name(sel.modes[i]) + "_" +
                               basis.mode_name(sel.modes[j]) + ".csv";
      CsvWriter csv(dir / name);
      csv.header({"omega", "re", "im"});
      for (const auto& S : samples)
        csv.row({S.s.imag(), S.S(sel.modes[i], sel.modes[j]).real(),
                 S.S(sel.modes[i], sel.modes[j]).imag()});
    }
}

}  // namespace dielmode::io
