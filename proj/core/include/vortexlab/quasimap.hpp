#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/modgraph.hpp"
#include "vortexlab/solver.hpp"
#include "vortexlab/surface.hpp"
#include "vortexlab/target.hpp"

namespace vortexlab::quasimap {

// What sits at an end of a cylindrical component.
struct EndRef {
  enum class Kind { leg, edge } kind = Kind::leg;
  int id = 0;  // marking index or edge id
};

// Section u_j = c_j zeta^(-m_j) prod_k (zeta - exp(-z_k)), zeta = exp(-(r + i theta)).
// A zero with r = +inf is the factor zeta; one with r = -inf is dropped.
struct VertexData {
  CVec coefficients;                        // c_j
  std::vector<std::vector<Complex>> zeros;  // per coordinate
  std::vector<int> laurent;                 // m_j (0 unless given)
  EndRef lower{EndRef::Kind::leg, 0};
  EndRef upper{EndRef::Kind::leg, 0};
  double r_min = -20;
  double r_max = 20;
};

struct EdgeData {
  std::complex<double> delta{0, 0};  // 0: the node stays
  std::vector<std::vector<Complex>> neck_zeros;  // per coordinate, rho_+ + i theta on the neck
};

struct QuasimapData {
  modgraph::ModularGraph graph;
  target::TargetSpace target;
  std::map<int, VertexData> vertices;
  std::map<int, EdgeData> edges;
  double h_r = 0.1;
  int n_theta = 64;
  double sleeve_width = 8.0;
};

void validate(const QuasimapData& q);

// per vertex, the zero locations where u leaves the semistable locus
std::map<int, std::vector<Complex>> base_points(const QuasimapData& q);
bool is_stable_quasimap(const QuasimapData& q, std::string* why = nullptr);

// Limits of u at r -> -inf / +inf up to the torus action (leading coefficients).
CVec lower_end_value(const VertexData& v, int n);
CVec upper_end_value(const VertexData& v, int n);
// Holonomy of the seed at the ends, in the k-dim Lie algebra
RVec asymptotic_holonomy(const target::TargetSpace& t, const VertexData& v, bool upper);

struct Laurent {
  CVec coefficients;
  std::vector<int> shift;
  std::vector<std::vector<Complex>> zeros;  // in the mesh's coordinates
};

// Holomorphic pair (a = 0, P) moved by the radial complex gauge that puts each ring's
// RMS point on the zero level; a_theta = sigma'(r).
fields::GaugedField seed_from_laurent(const target::TargetSpace& t, const surface::ComponentMesh& mesh,
                                      const Laurent& p);
fields::GaugedField build_seed(const QuasimapData& q, int vertex, const surface::ComponentMesh& mesh);
surface::ComponentMesh component_mesh(const QuasimapData& q, int vertex);

// Glued surface from the quasimap's delta table; seeds live on assembled chains.
surface::GluedSurface glued_surface(const QuasimapData& q);
fields::GaugedField build_glued_seed(const QuasimapData& q, const surface::GluedSurface& s, int chain);

struct EdgeCheck {
  int edge = -1;
  double gap = 0;
  double tol = 0;
  bool ok = false;
};

struct ComponentResult {
  int vertex = 0;
  solver::SolveResult solve;
  double gamma_hat = 0;  // decay rate fitted on the component
};

struct StableVortexFamily {
  std::vector<ComponentResult> components;
  std::vector<EdgeCheck> edges;
  std::map<int, target::Fingerprint> ev;  // marking index -> fingerprint
  double total_energy = 0;
};

struct CorrespondenceConfig {
  solver::SolveConfig solve;
  int threads = 1;
  bool throw_on_gap = true;
};

// Per-component solves (threaded, index-ordered), connectedness and evaluation fingerprints.
StableVortexFamily correspondence(const QuasimapData& q, const CorrespondenceConfig& cfg);

// decay rate from the ring energies on [r0, r1] (log-linear least squares)
double fit_decay_rate(const fields::EnergyReport& e, const surface::ComponentMesh& m, double r0, double r1,
                      double* r2 = nullptr);

std::string to_json(const StableVortexFamily& fam);

}  // namespace vortexlab::quasimap
