#pragma once

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "vortexlab/modgraph.hpp"

namespace vortexlab::surface {

enum class EndKind { truncated, socket };

struct EndDescriptor {
  EndKind kind = EndKind::truncated;
  int anchor = -1;       // leg index for truncated ends, edge id for sockets
  int orientation = +1;  // +1 upper (r -> +inf), -1 lower
};

// Flat cylinder [r_min, r_max] x S^1 sampled at sites (r_min + i h_r, j h_theta).
// A closed mesh wraps in r: row n_r - 1 is followed by row 0 rotated by wrap_shift.
struct ComponentMesh {
  int vertex = 0;
  int n_r = 0;
  int n_theta = 0;
  double h_r = 0;
  double r_min = 0;
  EndDescriptor lower{EndKind::truncated, -1, -1};
  EndDescriptor upper{EndKind::truncated, -1, +1};
  bool closed = false;
  int wrap_shift = 0;

  double h_theta() const;
  double r(int i) const { return r_min + i * h_r; }
  double theta(int j) const { return j * h_theta(); }
  double r_max() const { return r(n_r - 1); }
  int sites() const { return n_r * n_theta; }
  int cell_rows() const { return closed ? n_r : n_r - 1; }
  int cells() const { return cell_rows() * n_theta; }
  double area() const;
  int row_of(double r) const;  // nearest site row
};

struct ComponentSpec {
  int vertex = 0;
  int n_r = 0;
  int n_theta = 0;
  double h_r = 0;
  double r_min = 0;
  EndDescriptor lower{EndKind::truncated, -1, -1};
  EndDescriptor upper{EndKind::truncated, -1, +1};
};

ComponentMesh build_component(const ComponentSpec& spec);
// Convenience: [-R, R] with both ends truncated.
ComponentMesh cylinder(double R, double h_r, int n_theta, int vertex = 0);

struct Gluing {
  int edge = -1;
  bool broken = false;  // delta = 0: the node stays
  std::complex<double> delta{0, 0};
  double L = 0;
  double twist = 0;
  int L_steps = 0;
  int twist_steps = 0;
  int plus_vertex = -1;   // whose upper socket anchors the edge
  int minus_vertex = -1;  // whose lower socket anchors the edge
};

// Where a component sits inside an assembled grid.
struct Segment {
  int vertex = 0;
  double r_offset = 0;  // global r = local r + r_offset
  int theta_shift = 0;  // global theta index = local index + theta_shift
};

struct Neck {
  int edge = -1;
  int lower_vertex = -1;  // plus side, owns rho_+
  int upper_vertex = -1;  // minus side
  double r_start = 0;     // global r at rho_+ = 0
  double L = 0;
  int twist_steps = 0;
};

// Glued components forming one cylinder (or torus when closed).
struct AssembledChain {
  ComponentMesh mesh;
  std::vector<Segment> segments;
  std::vector<Neck> necks;
};

struct GluedSurface {
  modgraph::ModularGraph graph;
  std::map<int, ComponentMesh> components;
  std::map<int, Gluing> gluings;
  double sleeve_width = 8.0;
  std::vector<AssembledChain> chains;
};

// Chain-of-cylinder gluing; delta entries missing from the map are treated as 0.
GluedSurface glue(const std::map<int, ComponentMesh>& components, const modgraph::ModularGraph& graph,
                  const std::map<int, std::complex<double>>& delta, double sleeve_width);

// plus-side coordinates (rho, theta) -> minus-side coordinates across a glued neck
std::pair<double, double> identify_plus_to_minus(const Gluing& g, double rho, double theta);
std::pair<double, double> identify_minus_to_plus(const Gluing& g, double rho, double theta);

struct CutoffProfile {
  double width = 8.0;
  double operator()(double x) const;
  std::vector<std::pair<double, double>> table(int samples) const;
};

CutoffProfile cutoff_profile(double width);

enum class Lattice { sites, cells };

// Cover piece of one component; rows are taken modulo the row count on closed meshes.
struct Piece {
  int vertex = 0;
  int row_begin = 0;
  int row_count = 0;
  std::vector<double> weight;  // cutoff per row of the piece
};

struct Sleeve {
  int edge = -1;
  int lower_piece = -1;  // plus side
  int upper_piece = -1;
  int row_begin = 0;
  int row_count = 0;
  double rho_begin = 0;  // rho_+ range of the sleeve
  double rho_end = 0;
  double L = 0;
  double twist = 0;
};

struct CoreSleeve {
  Lattice lattice = Lattice::cells;
  int n_rows = 0;
  int n_theta = 0;
  bool closed = false;
  std::vector<Piece> pieces;
  std::vector<Sleeve> sleeves;
  std::vector<int> row_sleeve;  // -1 for core rows

  int wrap(int row) const;
  bool in_core(int row) const { return row_sleeve[static_cast<size_t>(row)] < 0; }
  // sum over cover preimages of the cutoff at a row
  double weight_sum(int row) const;
};

CoreSleeve core_sleeve(const AssembledChain& chain, double sleeve_width, Lattice lattice);

}  // namespace vortexlab::surface
