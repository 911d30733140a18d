#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dielmode/common.hpp"
#include "dielmode/mesh.hpp"

namespace dielmode {
namespace meshgen {

// Generators used by the CLI tool and the test fixtures. All of them are
// deterministic functions of their integer parameters.

struct RawMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> tets;
};

inline VolumeMesh to_volume_mesh(RawMesh&& raw) {
  VolumeMesh mesh;
  mesh.nodes = std::move(raw.nodes);
  mesh.tets = std::move(raw.tets);
  finalize_topology(mesh);
  std::string stamp;
  stamp.reserve(mesh.nodes.size() * 24);
  for (const auto& p : mesh.nodes) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g;", p[0], p[1], p[2]);
    stamp += buf;
  }
  for (const auto& t : mesh.tets) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d;", t[0], t[1], t[2], t[3]);
    stamp += buf;
  }
  mesh.content_hash = fnv1a(stamp);
  return mesh;
}

// --- primitive fixtures ---

inline VolumeMesh single_regular_tet(double edge) {
  const double s = edge / (2.0 * std::sqrt(2.0));
  RawMesh raw;
  raw.nodes = {Vec3(1, 1, 1) * s, Vec3(1, -1, -1) * s, Vec3(-1, 1, -1) * s, Vec3(-1, -1, 1) * s};
  raw.tets = {{0, 1, 2, 3}};
  return to_volume_mesh(std::move(raw));
}

inline VolumeMesh two_tets_shared_face() {
  RawMesh raw;
  raw.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0.4, 0.4, -1)};
  raw.tets = {{0, 1, 2, 3}, {0, 1, 2, 4}};
  return to_volume_mesh(std::move(raw));
}

// Structured box of nx*ny*nz cells, each split into six tets (Kuhn split,
// conforming). Used for independent loop-count checks.
inline VolumeMesh block(int nx, int ny, int nz, double lx = 1, double ly = 1, double lz = 1) {
  RawMesh raw;
  auto id = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k)
        raw.nodes.push_back(Vec3(lx * i / nx, ly * j / ny, lz * k / nz));
  static const int kuhn[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                 {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) {
        int corner[8];
        for (int b = 0; b < 8; ++b)
          corner[b] = id(i + ((b >> 2) & 1), j + ((b >> 1) & 1), k + (b & 1));
        for (const auto& t : kuhn)
          raw.tets.push_back({corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]});
      }
  return to_volume_mesh(std::move(raw));
}

// --- icosphere surface (m-frequency subdivision; 20*m^2 triangles) ---

struct RawSurface {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 3>> triangles;
};

inline RawSurface icosphere_surface(int m, int smooth_iters = 0);

namespace detail_gen {

// Tangential Laplacian smoothing on the unit sphere: evens out the panel
// size modulation around the twelve pentavalent vertices, which otherwise
// splits high-order eigenvalue multiplets at the 1e-3 level.
inline void smooth_on_sphere(RawSurface& s, int iters) {
  const int n = static_cast<int>(s.nodes.size());
  std::vector<std::vector<int>> nbr(n);
  {
    std::map<std::array<int, 2>, char> seen;
    for (const auto& t : s.triangles)
      for (int e = 0; e < 3; ++e) {
        std::array<int, 2> k{t[e], t[(e + 1) % 3]};
        if (k[0] > k[1]) std::swap(k[0], k[1]);
        if (!seen.count(k)) {
          seen[k] = 1;
          nbr[k[0]].push_back(k[1]);
          nbr[k[1]].push_back(k[0]);
        }
      }
  }
  for (int it = 0; it < iters; ++it) {
    std::vector<Vec3> next(n);
    for (int v = 0; v < n; ++v) {
      Vec3 avg = Vec3::Zero();
      for (int w : nbr[v]) avg += s.nodes[w];
      avg /= double(nbr[v].size());
      next[v] = (s.nodes[v] + 0.5 * (avg - s.nodes[v])).normalized();
    }
    s.nodes.swap(next);
  }
}

}  // namespace detail_gen

inline RawSurface icosphere_surface(int m, int smooth_iters) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> iv = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                          {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                          {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : iv) v.normalize();
  static const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                   {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                   {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                   {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  RawSurface out;
  std::map<std::array<long long, 3>, int> weld;
  auto key_of = [](const Vec3& p) {
    const double q = 1e12;
    return std::array<long long, 3>{static_cast<long long>(std::llround(p[0] * q)),
                                    static_cast<long long>(std::llround(p[1] * q)),
                                    static_cast<long long>(std::llround(p[2] * q))};
  };
  auto add = [&](const Vec3& p) {
    const auto k = key_of(p);
    auto it = weld.find(k);
    if (it != weld.end()) return it->second;
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(p);
    weld[k] = id;
    return id;
  };
  for (const auto& f : faces) {
    const Vec3 A = iv[f[0]], B = iv[f[1]], C = iv[f[2]];
    // lattice points p(i,j) = normalize(A + i/m*(B-A) + j/m*(C-A)), j <= m-i
    std::vector<std::vector<int>> grid(m + 1);
    for (int i = 0; i <= m; ++i) {
      grid[i].resize(m - i + 1);
      for (int j = 0; j <= m - i; ++j) {
        Vec3 p = A + (double(i) / m) * (B - A) + (double(j) / m) * (C - A);
        grid[i][j] = add(p.normalized());
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m - i; ++j) {
        out.triangles.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
        if (j < m - i - 1)
          out.triangles.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
  }
  if (smooth_iters > 0) detail_gen::smooth_on_sphere(out, smooth_iters);
  return out;
}

// Push each vertex outward by beta times the local mean panel sag. The
// inscribed polyhedron's radial deficit is modulated by the icosahedral
// panel-size pattern, which splits high-order surface-operator multiplets;
// compensating the modulated part restores the degeneracies an order of
// magnitude tighter (beta ~ 0.75 empirically optimal).
inline void compensate_panel_sag(RawSurface& s, double beta) {
  const int n = static_cast<int>(s.nodes.size());
  std::vector<double> sag(n, 0.0);
  std::vector<int> cnt(n, 0);
  for (const auto& t : s.triangles) {
    const Vec3 g = (s.nodes[t[0]] + s.nodes[t[1]] + s.nodes[t[2]]) / 3.0;
    const double d = 1.0 - g.norm();
    for (int k = 0; k < 3; ++k) {
      sag[t[k]] += d;
      cnt[t[k]]++;
    }
  }
  for (int v = 0; v < n; ++v) s.nodes[v] *= 1.0 + beta * sag[v] / cnt[v];
}

// Ball meshed as cones from the icosphere surface to the center. The surface
// quality is what matters for boundary operators; the interior tets are tall.
inline VolumeMesh icosphere_cone_ball(int m, double radius = 1.0, double sag_beta = 0.75,
                                      int smooth_iters = 0) {
  RawSurface s = icosphere_surface(m, smooth_iters);
  if (sag_beta != 0) {
    compensate_panel_sag(s, sag_beta);
    double rmax = 0;
    for (const auto& p : s.nodes) rmax = std::max(rmax, p.norm());
    for (auto& p : s.nodes) p /= rmax;  // enclosing radius back to 1
  }
  RawMesh raw;
  raw.nodes.reserve(s.nodes.size() + 1);
  for (const auto& p : s.nodes) raw.nodes.push_back(p * radius);
  const int center = static_cast<int>(raw.nodes.size());
  raw.nodes.push_back(Vec3::Zero());
  for (const auto& t : s.triangles) raw.tets.push_back({t[0], t[1], t[2], center});
  return to_volume_mesh(std::move(raw));
}

// Ball from concentric icosphere shells joined by prisms (staircase split,
// conforming) with a cone layer at the core.
inline VolumeMesh icosphere_layered_ball(int m, int layers, double radius = 1.0) {
  RawSurface s = icosphere_surface(m);
  const int ns = static_cast<int>(s.nodes.size());
  RawMesh raw;
  for (int L = 0; L <= layers - 1; ++L) {
    const double r = radius * double(layers - L) / layers;
    for (const auto& p : s.nodes) raw.nodes.push_back(p * r);
  }
  const int center = static_cast<int>(raw.nodes.size());
  raw.nodes.push_back(Vec3::Zero());
  for (int L = 0; L + 1 < layers; ++L) {
    const int off0 = L * ns, off1 = (L + 1) * ns;
    for (const auto& t : s.triangles) {
      int v[3] = {t[0], t[1], t[2]};
      std::sort(v, v + 3);  // staircase split keyed by global vertex order
      const int a = off0 + v[0], b = off0 + v[1], c = off0 + v[2];
      const int a1 = off1 + v[0], b1 = off1 + v[1], c1 = off1 + v[2];
      raw.tets.push_back({a, b, c, a1});
      raw.tets.push_back({b, c, a1, b1});
      raw.tets.push_back({c, a1, b1, c1});
    }
  }
  const int off = (layers - 1) * ns;
  for (const auto& t : s.triangles)
    raw.tets.push_back({off + t[0], off + t[1], off + t[2], center});
  return to_volume_mesh(std::move(raw));
}

// --- cube-ball: n^3 cells, 24 tets per cell, exactly inversion symmetric ---
// Grid coordinates (2i-n)/n negate exactly in floating point, and the 24-way
// cell split needs no diagonal choices, so the whole mesh maps onto itself
// under r -> -r to the last bit. Symmetry-forbidden couplings then vanish to
// roundoff rather than to mesh resolution.

inline VolumeMesh cube_ball(int n, double radius = 1.0) {
  if (n < 1) throw config_error("cube_ball: n must be >= 1");
  RawMesh raw;
  std::map<std::array<long long, 3>, int> weld;
  auto coord = [&](int i2) {  // i2 in units of half-cells: node at (i2/n - 1)
    return double(i2 - n) / double(n);
  };
  auto add = [&](int i2, int j2, int k2) {
    const std::array<long long, 3> key{i2, j2, k2};
    auto it = weld.find(key);
    if (it != weld.end()) return it->second;
    const int id = static_cast<int>(raw.nodes.size());
    raw.nodes.push_back(Vec3(coord(i2), coord(j2), coord(k2)));
    weld[key] = id;
    return id;
  };
  // half-integer lattice: cell (i,j,k) has corners at even offsets, center at
  // odd offsets, face centers mixed
  static const int face_axis[6] = {0, 0, 1, 1, 2, 2};
  static const int face_sign[6] = {-1, 1, -1, 1, -1, 1};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int c2[3] = {2 * i + 1, 2 * j + 1, 2 * k + 1};
        const int center = add(c2[0], c2[1], c2[2]);
        for (int f = 0; f < 6; ++f) {
          int fc2[3] = {c2[0], c2[1], c2[2]};
          fc2[face_axis[f]] += face_sign[f];
          const int fcenter = add(fc2[0], fc2[1], fc2[2]);
          const int u = (face_axis[f] + 1) % 3, v = (face_axis[f] + 2) % 3;
          // four corners of the face, cyclic
          int corner[4];
          static const int du[4] = {-1, 1, 1, -1};
          static const int dv[4] = {-1, -1, 1, 1};
          for (int q = 0; q < 4; ++q) {
            int p2[3] = {fc2[0], fc2[1], fc2[2]};
            p2[u] += du[q];
            p2[v] += dv[q];
            corner[q] = add(p2[0], p2[1], p2[2]);
          }
          for (int q = 0; q < 4; ++q)
            raw.tets.push_back({center, fcenter, corner[q], corner[(q + 1) % 4]});
        }
      }
  // map cube to ball: x -> x * |x|_inf / |x|_2 (radially, exactly odd)
  for (auto& p : raw.nodes) {
    const double linf = p.cwiseAbs().maxCoeff();
    const double l2 = p.norm();
    if (l2 > 0) p *= radius * linf / l2;
  }
  return to_volume_mesh(std::move(raw));
}

// Rounded disk: radius R, height R/2, edge curvature radius R/4 (the offset
// body of a flat disk of radius 3R/4 by R/4). Star-shaped, so any ball mesh
// maps onto it by directional radial scaling.
inline double rounded_disk_radius(const Vec3& unit_dir, double R) {
  const double rho = 0.25 * R, b = 0.75 * R;
  const double c = std::abs(unit_dir[2]);
  const double s = std::hypot(unit_dir[0], unit_dir[1]);
  if (rho * s <= b * c) return rho / c;  // flat cap
  const double disc = b * b * s * s - b * b + rho * rho;
  return b * s + std::sqrt(std::max(0.0, disc));
}

inline VolumeMesh rounded_disk(int n, double R = 1.0) {
  VolumeMesh ball = cube_ball(n, 1.0);
  RawMesh raw;
  raw.nodes = ball.nodes;
  raw.tets = ball.tets;
  for (auto& p : raw.nodes) {
    const double r = p.norm();
    if (r > 0) p *= rounded_disk_radius(p / r, R);
  }
  return to_volume_mesh(std::move(raw));
}

// --- Gmsh writers (ASCII 2.2 and 4.1), used by the mesh tool and tests ---

inline void write_gmsh22(const VolumeMesh& mesh, const std::string& path,
                         bool with_boundary_triangles = true) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write mesh file: " + path);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.n_nodes() << "\n";
  char buf[128];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g\n", i + 1, mesh.nodes[i][0],
                  mesh.nodes[i][1], mesh.nodes[i][2]);
    out << buf;
  }
  const int ntri = with_boundary_triangles ? mesh.boundary.n_triangles() : 0;
  out << "$EndNodes\n$Elements\n" << (mesh.n_tets() + ntri) << "\n";
  int id = 1;
  for (int t = 0; t < ntri; ++t) {
    const auto& tri = mesh.boundary.triangles[t];
    out << id++ << " 2 2 1 1 " << mesh.boundary.volume_node[tri[0]] + 1 << " "
        << mesh.boundary.volume_node[tri[1]] + 1 << " " << mesh.boundary.volume_node[tri[2]] + 1
        << "\n";
  }
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& T = mesh.tets[t];
    out << id++ << " 4 2 1 1 " << T[0] + 1 << " " << T[1] + 1 << " " << T[2] + 1 << " " << T[3] + 1
        << "\n";
  }
  out << "$EndElements\n";
}

inline void write_gmsh41(const VolumeMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write mesh file: " + path);
  out << "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n1 " << mesh.n_nodes() << " 1 " << mesh.n_nodes() << "\n";
  out << "3 1 0 " << mesh.n_nodes() << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) out << i + 1 << "\n";
  char buf[128];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", mesh.nodes[i][0], mesh.nodes[i][1],
                  mesh.nodes[i][2]);
    out << buf;
  }
  out << "$EndNodes\n$Elements\n1 " << mesh.n_tets() << " 1 " << mesh.n_tets() << "\n";
  out << "3 1 4 " << mesh.n_tets() << "\n";
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& T = mesh.tets[t];
    out << t + 1 << " " << T[0] + 1 << " " << T[1] + 1 << " " << T[2] + 1 << " " << T[3] + 1
        << "\n";
  }
  out << "$EndElements\n";
}

}  // namespace meshgen
}  // namespace dielmode
