// Mesh fixture generator: spheres (cube-ball and icosphere families), the
// rounded disk, and small primitives, written as Gmsh ASCII.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "dielmode/meshgen.hpp"

using namespace dielmode;

int main(int argc, char** argv) {
  CLI::App app{"dielmode mesh generator"};
  std::string shape = "cube-ball";
  std::string out = "mesh.msh";
  std::string format = "msh2";
  int n = 4;
  int layers = 3;
  double radius = 1.0;
  double edge = 1.0;
  app.add_option("--shape", shape,
                 "cube-ball | icosphere-cone | icosphere-layered | rounded-disk | block | "
                 "single-tet | two-tets")
      ->capture_default_str();
  app.add_option("--n", n, "cells per axis / subdivision frequency")->capture_default_str();
  app.add_option("--layers", layers, "radial layers (icosphere-layered)")->capture_default_str();
  app.add_option("--radius", radius, "radius / disk radius")->capture_default_str();
  app.add_option("--edge", edge, "edge length (single-tet)")->capture_default_str();
  app.add_option("--format", format, "msh2 | msh4")->capture_default_str();
  app.add_option("-o,--out", out, "output path")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    VolumeMesh mesh;
    if (shape == "cube-ball")
      mesh = meshgen::cube_ball(n, radius);
    else if (shape == "icosphere-cone")
      mesh = meshgen::icosphere_cone_ball(n, radius);
    else if (shape == "icosphere-layered")
      mesh = meshgen::icosphere_layered_ball(n, layers, radius);
    else if (shape == "rounded-disk")
      mesh = meshgen::rounded_disk(n, radius);
    else if (shape == "block")
      mesh = meshgen::block(n, n, n);
    else if (shape == "single-tet")
      mesh = meshgen::single_regular_tet(edge);
    else if (shape == "two-tets")
      mesh = meshgen::two_tets_shared_face();
    else {
      std::cerr << "unknown shape: " << shape << "\n";
      return 1;
    }
    if (format == "msh2")
      meshgen::write_gmsh22(mesh, out);
    else if (format == "msh4")
      meshgen::write_gmsh41(mesh, out);
    else {
      std::cerr << "unknown format: " << format << "\n";
      return 1;
    }
    std::cout << "wrote " << out << ": " << mesh.n_nodes() << " nodes, " << mesh.n_tets()
              << " tets, " << mesh.boundary.n_triangles() << " boundary triangles, a = " << mesh.a
              << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? 1 : 2;
  }
  return 0;
}
