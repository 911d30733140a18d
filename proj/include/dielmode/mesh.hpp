#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dielmode/common.hpp"

namespace dielmode {

// Closed orientable triangulated boundary. Triangles are stored with outward
// orientation; `normal` is consistent with the vertex order.
struct SurfaceMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> area;
  std::vector<Vec3> normal;
  std::vector<Vec3> centroid;
  std::vector<int> volume_node;  // original volume-mesh node index, -1 if standalone

  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_nodes() const { return static_cast<int>(nodes.size()); }

  Vec3 vertex(int t, int k) const { return nodes[triangles[t][k]]; }

  double total_area() const {
    double s = 0;
    for (double a : area) s += a;
    return s;
  }

  // Signed volume enclosed by the oriented surface (divergence theorem).
  double enclosed_volume() const {
    double v = 0;
    for (const auto& t : triangles)
      v += nodes[t[0]].dot(nodes[t[1]].cross(nodes[t[2]])) / 6.0;
    return v;
  }

  int euler_characteristic() const;
  void finalize();  // areas, normals, centroids from nodes/triangles
};

struct VolumeMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> tets;  // positively oriented
  std::vector<double> volume;
  std::vector<std::array<int, 2>> edges;  // unique, sorted pairs, lexicographic
  std::vector<char> edge_on_boundary;
  std::vector<char> node_on_boundary;
  SurfaceMesh boundary;
  double a = 0.0;       // radius of the smallest enclosing sphere of the nodes
  Vec3 a_center = Vec3::Zero();
  std::uint64_t content_hash = 0;

  int n_tets() const { return static_cast<int>(tets.size()); }
  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec3 vertex(int t, int k) const { return nodes[tets[t][k]]; }
  Vec3 tet_centroid(int t) const {
    return 0.25 * (vertex(t, 0) + vertex(t, 1) + vertex(t, 2) + vertex(t, 3));
  }

  double total_volume() const {
    double v = 0;
    for (double x : volume) v += x;
    return v;
  }
};

// Divergence-free piecewise-constant basis attached to interior cotree edges.
struct LoopBasis {
  struct Piece {
    int tet;
    Vec3 c;  // constant value of the basis function on that tet
  };
  std::vector<std::vector<Piece>> loops;
  std::vector<int> link_edge;  // mesh edge index each loop circulates
  int n_loops() const { return static_cast<int>(loops.size()); }
};

inline void SurfaceMesh::finalize() {
  const int nt = n_triangles();
  area.resize(nt);
  normal.resize(nt);
  centroid.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const Vec3 a0 = vertex(t, 0), a1 = vertex(t, 1), a2 = vertex(t, 2);
    Vec3 n = (a1 - a0).cross(a2 - a0);
    const double twoA = n.norm();
    if (twoA <= 0.0)
      throw numeric_error("degenerate surface triangle " + std::to_string(t));
    area[t] = 0.5 * twoA;
    normal[t] = n / twoA;
    centroid[t] = (a0 + a1 + a2) / 3.0;
  }
}

inline int SurfaceMesh::euler_characteristic() const {
  std::map<std::array<int, 2>, int> edge_count;
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      std::array<int, 2> key{t[e], t[(e + 1) % 3]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      edge_count[key]++;
    }
  }
  std::vector<char> used(nodes.size(), 0);
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) used[t[k]] = 1;
  int v = 0;
  for (char u : used) v += u;
  return v - static_cast<int>(edge_count.size()) + static_cast<int>(triangles.size());
}

namespace detail {

struct Face {
  std::array<int, 3> key;       // sorted node ids
  std::array<int, 3> oriented;  // outward order as seen from the owning tet
  int tet;
};

inline std::uint64_t face_hash(const std::array<int, 3>& k) {
  std::uint64_t h = 1469598103934665603ull;
  for (int v : k) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

// --- minimal enclosing sphere (Welzl, move-to-front) ---

struct Sphere {
  Vec3 c = Vec3::Zero();
  double r = -1.0;
  bool contains(const Vec3& p, double tol) const { return (p - c).norm() <= r + tol; }
};

inline Sphere sphere_from(const std::vector<Vec3>& sup) {
  Sphere s;
  const int n = static_cast<int>(sup.size());
  if (n == 0) return s;
  if (n == 1) {
    s.c = sup[0];
    s.r = 0;
    return s;
  }
  if (n == 2) {
    s.c = 0.5 * (sup[0] + sup[1]);
    s.r = (sup[0] - s.c).norm();
    return s;
  }
  if (n == 3) {
    // circumcircle in the triangle plane: center = a + alpha*ab + beta*ac
    const Vec3 a = sup[0], b = sup[1], c = sup[2];
    const Vec3 ab = b - a, ac = c - a;
    const double d11 = ab.squaredNorm(), d22 = ac.squaredNorm(), d12 = ab.dot(ac);
    const double det = d11 * d22 - d12 * d12;
    if (det <= 1e-30 * d11 * d22 || det <= 0) {  // collinear: farthest pair
      Sphere best;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          Sphere t;
          t.c = 0.5 * (sup[i] + sup[j]);
          t.r = (sup[i] - t.c).norm();
          if (t.r > best.r) best = t;
        }
      return best;
    }
    const double alpha = 0.5 * (d11 * d22 - d12 * d22) / det;
    const double beta = 0.5 * (d11 * d22 - d12 * d11) / det;
    s.c = a + alpha * ab + beta * ac;
    s.r = (a - s.c).norm();
    return s;
  }
  // circumsphere of 4 points
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    const Vec3 d = sup[i + 1] - sup[0];
    M.row(i) = d.transpose();
    rhs(i) = 0.5 * (sup[i + 1].squaredNorm() - sup[0].squaredNorm());
  }
  const double det = M.determinant();
  if (std::abs(det) < 1e-30) {
    std::vector<Vec3> three(sup.begin(), sup.begin() + 3);
    return sphere_from(three);
  }
  s.c = M.fullPivLu().solve(rhs);
  s.r = (sup[0] - s.c).norm();
  return s;
}

inline Sphere welzl(std::vector<Vec3>& pts, std::vector<Vec3>& sup, std::size_t n, double tol) {
  if (n == 0 || sup.size() == 4) return sphere_from(sup);
  Sphere s = welzl(pts, sup, n - 1, tol);
  const Vec3& p = pts[n - 1];
  if (s.r >= 0 && s.contains(p, tol)) return s;
  sup.push_back(p);
  s = welzl(pts, sup, n - 1, tol);
  sup.pop_back();
  // move-to-front keeps the support near the head on structured inputs
  std::rotate(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n - 1),
              pts.begin() + static_cast<std::ptrdiff_t>(n));
  return s;
}

}  // namespace detail

inline std::pair<Vec3, double> min_enclosing_sphere(const std::vector<Vec3>& nodes) {
  if (nodes.empty()) throw numeric_error("min_enclosing_sphere: empty node set");
  double scale = 0;
  for (const auto& p : nodes) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * std::max(scale, 1.0);
  std::vector<Vec3> pts = nodes;
  std::vector<Vec3> sup;
  detail::Sphere s = detail::welzl(pts, sup, pts.size(), tol);
  return {s.c, s.r};
}

// Builds adjacency products: boundary surface, edge list, flags, enclosing
// sphere. Throws on non-conforming or open meshes.
inline void finalize_topology(VolumeMesh& mesh) {
  const int nt = mesh.n_tets();
  if (nt == 0) throw config_error("mesh has no tetrahedra");

  // orient tets positively, compute volumes
  mesh.volume.resize(nt);
  for (int t = 0; t < nt; ++t) {
    auto& T = mesh.tets[t];
    const Vec3 d1 = mesh.nodes[T[1]] - mesh.nodes[T[0]];
    const Vec3 d2 = mesh.nodes[T[2]] - mesh.nodes[T[0]];
    const Vec3 d3 = mesh.nodes[T[3]] - mesh.nodes[T[0]];
    double det = d1.cross(d2).dot(d3);
    if (det < 0) {
      std::swap(T[2], T[3]);
      det = -det;
    }
    if (det <= 0)
      throw numeric_error("degenerate tetrahedron " + std::to_string(t));
    mesh.volume[t] = det / 6.0;
  }

  // face incidence
  static const int local_faces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  struct FaceRec {
    std::array<int, 3> oriented;
    int count = 0;
    int tet = -1;
  };
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::array<int, 3>, FaceRec>>> faces;
  faces.reserve(static_cast<std::size_t>(nt) * 4);
  auto face_key = [](int a, int b, int c) {
    std::array<int, 3> k{a, b, c};
    std::sort(k.begin(), k.end());
    return k;
  };
  for (int t = 0; t < nt; ++t) {
    const auto& T = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> ori{T[local_faces[f][0]], T[local_faces[f][1]], T[local_faces[f][2]]};
      auto key = face_key(ori[0], ori[1], ori[2]);
      auto& bucket = faces[detail::face_hash(key)];
      bool found = false;
      for (auto& item : bucket) {
        if (item.first == key) {
          item.second.count++;
          found = true;
          if (item.second.count > 2)
            throw config_error("non-conforming mesh: face shared by >2 tets near tet " +
                               std::to_string(t));
          break;
        }
      }
      if (!found) {
        FaceRec rec;
        rec.oriented = ori;
        rec.count = 1;
        rec.tet = t;
        bucket.push_back({key, rec});
      }
    }
  }

  // boundary surface: faces seen exactly once, already outward-oriented
  std::vector<detail::Face> bfaces;
  for (auto& [h, bucket] : faces)
    for (auto& item : bucket)
      if (item.second.count == 1)
        bfaces.push_back({item.first, item.second.oriented, item.second.tet});
  std::sort(bfaces.begin(), bfaces.end(),
            [](const detail::Face& x, const detail::Face& y) { return x.key < y.key; });
  if (bfaces.empty()) throw config_error("mesh has no boundary faces");

  mesh.node_on_boundary.assign(mesh.n_nodes(), 0);
  for (const auto& f : bfaces)
    for (int v : f.key) mesh.node_on_boundary[v] = 1;

  // compact surface node numbering
  std::vector<int> surf_id(mesh.n_nodes(), -1);
  SurfaceMesh& surf = mesh.boundary;
  surf = SurfaceMesh();
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    if (mesh.node_on_boundary[v]) {
      surf_id[v] = static_cast<int>(surf.nodes.size());
      surf.nodes.push_back(mesh.nodes[v]);
      surf.volume_node.push_back(v);
    }
  }
  for (const auto& f : bfaces)
    surf.triangles.push_back({surf_id[f.oriented[0]], surf_id[f.oriented[1]], surf_id[f.oriented[2]]});
  surf.finalize();

  const double vol_from_surf = surf.enclosed_volume();
  const double vol_from_tets = mesh.total_volume();
  if (vol_from_surf <= 0)
    throw numeric_error("boundary orientation failure: non-positive enclosed volume");
  if (std::abs(vol_from_surf - vol_from_tets) > 1e-8 * vol_from_tets)
    throw numeric_error("boundary/volume mismatch: open or non-conforming mesh");
  if (surf.euler_characteristic() != 2)
    throw config_error("boundary is not a single genus-0 surface (Euler characteristic " +
                       std::to_string(surf.euler_characteristic()) + "); unsupported topology");

  // boundary edge closure: each boundary edge in exactly two triangles
  {
    std::map<std::array<int, 2>, int> ecount;
    for (const auto& t : surf.triangles)
      for (int e = 0; e < 3; ++e) {
        std::array<int, 2> key{t[e], t[(e + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        ecount[key]++;
      }
    for (const auto& [k, c] : ecount)
      if (c != 2)
        throw config_error("boundary not closed at surface edge (" + std::to_string(k[0]) + "," +
                           std::to_string(k[1]) + ")");
  }

  // unique edge list (lexicographic)
  {
    std::vector<std::array<int, 2>> all;
    all.reserve(static_cast<std::size_t>(nt) * 6);
    static const int tet_edges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& T : mesh.tets)
      for (const auto& e : tet_edges) {
        std::array<int, 2> key{T[e[0]], T[e[1]]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        all.push_back(key);
      }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    mesh.edges = std::move(all);
  }
  mesh.edge_on_boundary.assign(mesh.edges.size(), 0);
  {
    std::map<std::array<int, 2>, int> edge_index;
    for (int e = 0; e < mesh.n_edges(); ++e) edge_index[mesh.edges[e]] = e;
    for (const auto& t : surf.triangles)
      for (int e = 0; e < 3; ++e) {
        std::array<int, 2> key{surf.volume_node[t[e]], surf.volume_node[t[(e + 1) % 3]]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        mesh.edge_on_boundary[edge_index.at(key)] = 1;
      }
  }

  auto [center, radius] = min_enclosing_sphere(mesh.nodes);
  mesh.a_center = center;
  mesh.a = radius;
}

// ---------------------------------------------------------------------------
// Gmsh ASCII readers (MSH 2.2 and 4.1), 4-node tets and 3-node triangles only.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open mesh file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Tokens {
  std::vector<std::string> lines;
  std::size_t pos = 0;

  explicit Tokens(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
      lines.push_back(line);
    }
  }
  bool done() const { return pos >= lines.size(); }
  const std::string& next() {
    if (done()) throw config_error("unexpected end of mesh file");
    return lines[pos++];
  }
};

}  // namespace detail

inline VolumeMesh parse_gmsh(const std::string& path) {
  const std::string text = detail::read_file(path);
  detail::Tokens tk(text);

  double version = 0;
  std::unordered_map<long long, int> node_id;
  VolumeMesh mesh;
  std::vector<std::array<int, 3>> file_triangles;  // parsed but re-derived from tets

  auto parse_node_line = [&](const std::string& line) {
    const char* s = line.c_str();
    char* end = nullptr;
    long long tag = std::strtoll(s, &end, 10);
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      s = end;
      p[k] = std::strtod(s, &end);
      if (end == s) throw config_error("malformed node line: " + line);
    }
    node_id[tag] = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back(p);
  };

  while (!tk.done()) {
    const std::string line = tk.next();
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::istringstream ss(tk.next());
      int filetype = 0, datasize = 0;
      ss >> version >> filetype >> datasize;
      if (filetype != 0) throw config_error("binary .msh files are not supported");
      if (!(std::abs(version - 2.2) < 0.05 || std::abs(version - 4.1) < 0.05))
        throw config_error("unsupported MSH version " + std::to_string(version));
      if (tk.next().rfind("$EndMeshFormat", 0) != 0)
        throw config_error("malformed $MeshFormat section");
    } else if (line.rfind("$Nodes", 0) == 0) {
      if (version < 3.0) {
        const long long n = std::strtoll(tk.next().c_str(), nullptr, 10);
        for (long long i = 0; i < n; ++i) parse_node_line(tk.next());
      } else {
        std::istringstream hd(tk.next());
        long long nblocks = 0, nnodes = 0, mintag = 0, maxtag = 0;
        hd >> nblocks >> nnodes >> mintag >> maxtag;
        for (long long b = 0; b < nblocks; ++b) {
          std::istringstream bh(tk.next());
          int dim = 0, etag = 0, param = 0;
          long long nb = 0;
          bh >> dim >> etag >> param >> nb;
          std::vector<long long> tags(nb);
          for (long long i = 0; i < nb; ++i) tags[i] = std::strtoll(tk.next().c_str(), nullptr, 10);
          for (long long i = 0; i < nb; ++i) {
            const std::string cl = tk.next();
            const char* s = cl.c_str();
            char* end = nullptr;
            Vec3 p;
            for (int k = 0; k < 3; ++k) {
              p[k] = std::strtod(s, &end);
              if (end == s) throw config_error("malformed node coordinates: " + cl);
              s = end;
            }
            node_id[tags[i]] = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(p);
          }
        }
      }
      if (tk.next().rfind("$EndNodes", 0) != 0) throw config_error("malformed $Nodes section");
    } else if (line.rfind("$Elements", 0) == 0) {
      auto map_node = [&](long long tag, long long elem) {
        auto it = node_id.find(tag);
        if (it == node_id.end())
          throw config_error("element " + std::to_string(elem) + " references unknown node " +
                             std::to_string(tag));
        return it->second;
      };
      if (version < 3.0) {
        const long long n = std::strtoll(tk.next().c_str(), nullptr, 10);
        for (long long i = 0; i < n; ++i) {
          std::istringstream ss(tk.next());
          long long id = 0;
          int type = 0, ntags = 0;
          ss >> id >> type >> ntags;
          long long dummy;
          for (int k = 0; k < ntags; ++k) ss >> dummy;
          if (type == 15 || type == 1) continue;  // points and lines are ignored
          if (type == 2) {
            long long a, b, c;
            ss >> a >> b >> c;
            file_triangles.push_back({map_node(a, id), map_node(b, id), map_node(c, id)});
          } else if (type == 4) {
            long long a, b, c, d;
            ss >> a >> b >> c >> d;
            mesh.tets.push_back({map_node(a, id), map_node(b, id), map_node(c, id), map_node(d, id)});
          } else {
            throw config_error("unsupported element type " + std::to_string(type) + " at element " +
                               std::to_string(id));
          }
        }
      } else {
        std::istringstream hd(tk.next());
        long long nblocks = 0, nelems = 0, mintag = 0, maxtag = 0;
        hd >> nblocks >> nelems >> mintag >> maxtag;
        for (long long b = 0; b < nblocks; ++b) {
          std::istringstream bh(tk.next());
          int dim = 0, etag = 0, type = 0;
          long long nb = 0;
          bh >> dim >> etag >> type >> nb;
          for (long long i = 0; i < nb; ++i) {
            std::istringstream ss(tk.next());
            long long id = 0;
            ss >> id;
            if (type == 15 || type == 1) continue;
            if (type == 2) {
              long long a, c, d;
              ss >> a >> c >> d;
              file_triangles.push_back({map_node(a, id), map_node(c, id), map_node(d, id)});
            } else if (type == 4) {
              long long a, c, d, e;
              ss >> a >> c >> d >> e;
              mesh.tets.push_back(
                  {map_node(a, id), map_node(c, id), map_node(d, id), map_node(e, id)});
            } else {
              throw config_error("unsupported element type " + std::to_string(type) +
                                 " at element " + std::to_string(id));
            }
          }
        }
      }
      if (tk.next().rfind("$EndElements", 0) != 0) throw config_error("malformed $Elements section");
    } else if (line.rfind("$", 0) == 0) {
      // skip unknown sections ($PhysicalNames, $Entities, ...)
      const std::string end = "$End" + line.substr(1);
      while (!tk.done() && tk.next().rfind(end, 0) != 0) {
      }
    }
  }

  if (version == 0) throw config_error("not a Gmsh ASCII file: " + path);
  if (mesh.nodes.empty()) throw config_error("mesh has no nodes: " + path);
  finalize_topology(mesh);
  mesh.content_hash = fnv1a(text);
  return mesh;
}

inline VolumeMesh parse_mesh(const std::string& path, const std::string& format = "gmsh") {
  if (format != "gmsh" && format != "msh")
    throw config_error("unsupported mesh format tag: " + format);
  return parse_gmsh(path);
}

inline const SurfaceMesh& extract_boundary(const VolumeMesh& mesh) { return mesh.boundary; }

// --- JSON dump/load (round-trip tests, cache fixtures) ---

inline nlohmann::json mesh_to_json(const VolumeMesh& mesh) {
  nlohmann::json j;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& p : mesh.nodes) nodes.push_back({p[0], p[1], p[2]});
  auto& tets = j["tets"] = nlohmann::json::array();
  for (const auto& t : mesh.tets) tets.push_back({t[0], t[1], t[2], t[3]});
  auto& tris = j["boundary_triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.boundary.triangles)
    tris.push_back({mesh.boundary.volume_node[t[0]], mesh.boundary.volume_node[t[1]],
                    mesh.boundary.volume_node[t[2]]});
  return j;
}

inline VolumeMesh mesh_from_json(const nlohmann::json& j) {
  VolumeMesh mesh;
  for (const auto& p : j.at("nodes"))
    mesh.nodes.push_back(Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()));
  for (const auto& t : j.at("tets"))
    mesh.tets.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(), t.at(3).get<int>()});
  finalize_topology(mesh);
  mesh.content_hash = fnv1a(j.dump());
  return mesh;
}

// ---------------------------------------------------------------------------
// Tree-cotree loop basis
// ---------------------------------------------------------------------------

// Spanning tree of the node/edge graph grown breadth-first with a boundary
// spanning tree first; ties broken by ascending edge index. One basis
// function per interior cotree edge; boundary ("half-loop") edges are
// excluded. On each tet of the fan around edge (p,q), the value is
// s*(v_b - v_a)/(3V) where (a,b) are the off-edge vertices and the sign makes
// the fluxes circulate coherently; this makes every function exactly
// divergence-free in the weak sense with zero normal trace.
inline LoopBasis build_loop_basis(const VolumeMesh& mesh) {
  const int nn = mesh.n_nodes();
  const int ne = mesh.n_edges();

  // adjacency sorted by edge index (edges are already lexicographically sorted)
  std::vector<std::vector<std::pair<int, int>>> adj(nn);  // node -> (edge, other)
  for (int e = 0; e < ne; ++e) {
    adj[mesh.edges[e][0]].push_back({e, mesh.edges[e][1]});
    adj[mesh.edges[e][1]].push_back({e, mesh.edges[e][0]});
  }

  std::vector<char> in_tree(ne, 0), visited(nn, 0);
  std::deque<int> queue;

  auto bfs = [&](bool boundary_only) {
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const auto& [e, w] : adj[v]) {
        if (boundary_only && !mesh.edge_on_boundary[e]) continue;
        if (visited[w]) continue;
        visited[w] = 1;
        in_tree[e] = 1;
        queue.push_back(w);
      }
    }
  };

  // boundary tree first
  int seed = -1;
  for (int v = 0; v < nn && seed < 0; ++v)
    if (mesh.node_on_boundary[v]) seed = v;
  if (seed >= 0) {
    visited[seed] = 1;
    queue.push_back(seed);
    bfs(true);
  }
  // extend through the interior
  for (int v = 0; v < nn; ++v)
    if (visited[v]) queue.push_back(v);
  if (queue.empty() && nn > 0) {
    visited[0] = 1;
    queue.push_back(0);
  }
  bfs(false);
  for (int v = 0; v < nn; ++v)
    if (!visited[v]) throw config_error("disconnected mesh graph at node " + std::to_string(v));

  // tets attached to each edge
  std::map<std::array<int, 2>, int> edge_index;
  for (int e = 0; e < ne; ++e) edge_index[mesh.edges[e]] = e;
  std::vector<std::vector<int>> edge_tets(ne);
  static const int tet_edges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& T = mesh.tets[t];
    for (const auto& le : tet_edges) {
      std::array<int, 2> key{T[le[0]], T[le[1]]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      edge_tets[edge_index.at(key)].push_back(t);
    }
  }

  LoopBasis basis;
  for (int e = 0; e < ne; ++e) {
    if (in_tree[e] || mesh.edge_on_boundary[e]) continue;
    const int p = mesh.edges[e][0], q = mesh.edges[e][1];
    std::vector<LoopBasis::Piece> pieces;
    for (int t : edge_tets[e]) {
      const auto& T = mesh.tets[t];
      int other[2], no = 0;
      for (int k = 0; k < 4; ++k)
        if (T[k] != p && T[k] != q) other[no++] = T[k];
      const Vec3 vp = mesh.nodes[p], vq = mesh.nodes[q];
      const Vec3 va = mesh.nodes[other[0]], vb = mesh.nodes[other[1]];
      const double det = (vq - vp).cross(va - vp).dot(vb - vp);
      const double s = det >= 0 ? 1.0 : -1.0;
      pieces.push_back({t, s * (vb - va) / (3.0 * mesh.volume[t])});
    }
    basis.loops.push_back(std::move(pieces));
    basis.link_edge.push_back(e);
  }
  return basis;
}

// Interior-edge / interior-twig counts, for checking N_L independently.
inline int count_interior_edges(const VolumeMesh& mesh) {
  int n = 0;
  for (char b : mesh.edge_on_boundary) n += !b;
  return n;
}

inline int count_interior_nodes(const VolumeMesh& mesh) {
  int n = 0;
  for (char b : mesh.node_on_boundary) n += !b;
  return n;
}

}  // namespace dielmode
