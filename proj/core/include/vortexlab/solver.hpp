#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/surface.hpp"

namespace vortexlab::solver {

using fields::GaugedField;

enum class Preconditioner { none, patched };

struct SolveConfig {
  double newton_tol = 1e-8;  // sup norm of the vortex residual
  int max_newton = 30;
  double cg_tol = 1e-10;     // relative
  int max_cg = 20000;
  bool damping = true;
  Preconditioner preconditioner = Preconditioner::none;
  double sleeve_width = 8.0;
  double pad = 4.0;          // extension of each cover piece past its cutoff support
  double inner_tol = 1e-12;  // piece solves inside the patched preconditioner
  int defect_probes = 10;
  std::uint64_t seed = 1;
};

void validate(const SolveConfig& cfg);

struct SolveReport {
  std::vector<double> residual_l2;
  std::vector<double> residual_sup;
  std::vector<int> cg_iterations;
  std::vector<double> step_lengths;
  int newton_iterations = 0;
  double final_energy = 0;
  double xi_l2 = 0;
  double xi_sup = 0;
  double dbar_sup_initial = 0;
  double dbar_sup_final = 0;
  bool converged = false;
  std::string preconditioner = "none";
  std::vector<double> defects;  // measured per Newton step when patched
  std::string note;
};

std::string to_json(const SolveReport& r);

// R(xi) = vortex residual of the complex-gauged field, on cells.
RVec moment_functional(const GaugedField& f, const RVec& xi);
// DR(0) xi = -Laplacian xi + M^T L M xi
RVec linearized_apply(const GaugedField& f, const RVec& xi);

using LinearMap = std::function<void(const RVec&, RVec&)>;

// Jacobian of the moment functional at xi = 0 of a field.
class Jacobian {
 public:
  explicit Jacobian(const GaugedField& f);
  int size() const { return n_cells_ * k_; }
  void apply(const RVec& x, RVec& y) const;
  // pure Laplacian part (-Delta), same boundary handling
  void apply_laplacian(const RVec& x, RVec& y) const;
  const fields::Topology& topology() const { return topo_; }
  const surface::ComponentMesh& mesh() const { return mesh_; }
  const RVec& site_L() const { return L_; }
  LinearMap as_map() const;

 private:
  surface::ComponentMesh mesh_;
  fields::Topology topo_;
  int n_cells_ = 0;
  int k_ = 1;
  double ir2_ = 0, it2_ = 0;
  RVec L_;  // sites * k * k, zero on Dirichlet rows
  mutable RVec bar_;
};

struct CgResult {
  RVec x;
  int iterations = 0;
  double relative_residual = 0;
};

// CG for an SPD map; with a preconditioner the Polak-Ribiere (flexible) beta is used.
CgResult conjugate_gradient(const LinearMap& A, const RVec& rhs, double tol, int max_iter,
                            const LinearMap* precond = nullptr);
CgResult cg_solve(const GaugedField& f, const RVec& rhs, const SolveConfig& cfg);

struct SolveResult {
  GaugedField field;
  RVec xi;
  SolveReport report;
};

// cover: cell-lattice core/sleeve split of f's mesh, needed for the patched preconditioner
SolveResult newton_solve(const GaugedField& f, const SolveConfig& cfg, const surface::CoreSleeve* cover = nullptr);

// Approximate inverse assembled from Dirichlet solves on the cover pieces.
class PatchedPreconditioner {
 public:
  PatchedPreconditioner(const GaugedField& f, const surface::CoreSleeve& cover, double pad, double inner_tol,
                        int inner_max = 20000);
  void apply(const RVec& eta, RVec& out) const;
  LinearMap as_map() const;
  // ||J Q eta - eta|| / ||eta||
  double defect(const Jacobian& J, const RVec& eta) const;
  // max over random probes
  double measure_defect(const Jacobian& J, int probes, std::uint64_t seed) const;
  long inner_iterations() const { return inner_iterations_; }
  int piece_count() const { return static_cast<int>(pieces_.size()); }

 private:
  struct LocalPiece {
    std::vector<int> cells;  // local cell -> global cell
    RVec weight;             // per local cell
    std::unique_ptr<Jacobian> J;
  };
  std::vector<LocalPiece> pieces_;
  int k_ = 1;
  int n_global_ = 0;
  double inner_tol_;
  int inner_max_;
  mutable long inner_iterations_ = 0;
};

// Rectangle of cells (rows x columns); col_count = n_theta for full rings.
struct Patch {
  int row_begin = 0;
  int row_count = 0;
  int col_begin = 0;
  int col_count = 0;
};

struct FlatGaugeResult {
  RVec xi;  // cells * k, zero outside the patch
  GaugedField fixed;
  double ratio = 0;  // ||xi|| / ||F|| on the patch
  int cg_iterations = 0;
  double curvature_after = 0;  // sup of *F on the patch after the fix
};

FlatGaugeResult flat_gauge_fix(const GaugedField& f, const Patch& patch, double tol = 1e-12);

struct CoulombResult {
  GaugedField fixed;
  RVec phi;               // sites * k
  double div_before = 0;  // sup of d*a
  double div_after = 0;
  double ratio = 0;       // (||a|| + ||da||) / ||F||
};

// Unitary Hodge gauge on site rows [row_begin, row_end], full rings, Neumann at the ends.
CoulombResult coulomb_gauge_local(const GaugedField& f, int row_begin, int row_end, double kappa);
RVec divergence(const GaugedField& f);  // sites * k

}  // namespace vortexlab::solver
