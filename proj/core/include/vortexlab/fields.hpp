#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vortexlab/surface.hpp"
#include "vortexlab/target.hpp"

namespace vortexlab::fields {

using surface::ComponentMesh;
using target::TargetSpace;

// Neighbour tables of the site/cell lattice of a mesh. Cell c has lower-left
// corner site c (same index) for c < cells. Missing neighbours are -1.
struct Topology {
  int n_theta = 0;
  int n_sites = 0;
  int n_cells = 0;
  std::vector<int> site_up, site_down, site_right, site_left;
  std::vector<int> cell_up, cell_down, cell_right, cell_left;
  std::vector<int> corner01, corner10, corner11;  // corner00 is the cell index itself
  // cells touching a site: at s, at left(s), at down(s), at left(down(s))
  std::vector<int> around[4];
  std::vector<double> site_weight;  // trapezoid weight in r (1/2 on open boundary rows)
};

Topology make_topology(const ComponentMesh& m);

// Link/plaquette gauged field: a_r(s) lives on the link s -> up(s), a_theta(s)
// on s -> right(s), u on sites. twist is a constant background lambda dtheta.
struct GaugedField {
  ComponentMesh mesh;
  TargetSpace target;
  RVec a_r;      // sites * k
  RVec a_theta;  // sites * k
  CVec u;        // sites * n
  RVec twist;    // k

  int k() const { return target.k; }
  int n() const { return target.n; }
  Complex* u_at(int site) { return u.data() + static_cast<size_t>(site) * target.n; }
  const Complex* u_at(int site) const { return u.data() + static_cast<size_t>(site) * target.n; }
};

GaugedField zero_field(const ComponentMesh& m, const TargetSpace& t);
GaugedField constant_field(const ComponentMesh& m, const TargetSpace& t, const CVec& v);
void check_finite(const GaugedField& f);

RVec curvature(const GaugedField& f);                // cells * k
CVec dbar_residual(const GaugedField& f);            // cells * n, at cell centres
RVec vortex_residual(const GaugedField& f);          // cells * k: *F - Phi (corner average)
RVec corner_average_moment(const GaugedField& f);    // cells * k

struct EnergyReport {
  double total = 0;
  RVec density;  // per site, sum(density * site_weight * h_r * h_theta) == total
  RVec ring;     // per site row: integral of density over theta
  std::map<std::string, double> partials;
};

EnergyReport energy(const GaugedField& f, const surface::CoreSleeve* sites_cover = nullptr);
// Energy of the rows with r in [r0, r1], trapezoid in r.
double energy_between(const EnergyReport& e, const ComponentMesh& m, double r0, double r1);

GaugedField apply_unitary_gauge(const GaugedField& f, const RVec& phi);  // phi: sites * k
GaugedField apply_complex_gauge(const GaugedField& f, const RVec& xi);   // xi: cells * k
RVec site_average(const ComponentMesh& m, const Topology& topo, const RVec& cell_values, int k);

struct Holonomy {
  RVec lift;
  RVec reduced;  // lift minus nearest lattice point
};
Holonomy holonomy(const GaugedField& f, int row);

enum class End { lower, upper };
// Axially transported ring average (frame of site (row, 0)).
CVec ring_average(const GaugedField& f, int row);
target::Fingerprint limit_orbit(const GaugedField& f, End end);
int winding(const GaugedField& f, int row, int coord);

std::uint64_t mesh_hash(const ComponentMesh& m);
std::string snapshot_header(const GaugedField& f);
void write_snapshot_csv(const GaugedField& f, std::ostream& os);

}  // namespace vortexlab::fields
