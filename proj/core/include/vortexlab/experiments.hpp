#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/quasimap.hpp"
#include "vortexlab/solver.hpp"

namespace vortexlab::experiments {

using fields::GaugedField;

struct DecayFit {
  double r0 = 0, r1 = 0;  // window actually used (distance from the centre for the lower end)
  double gamma = 0;
  double C = 0;
  double r2 = 0;
  bool accepted = false;
  std::string note;
  RVec r, e;  // ring samples inside the window
};

// Log-linear fit of the ring energy e(r) on [r0, r1] (upper end) or [-r1, -r0] (lower end).
DecayFit decay_fit(const GaugedField& f, fields::End end, double r0, double r1);

struct AnnulusRow {
  double T = 0;
  double energy = 0;    // E([s0 + T, s1 - T])
  double diameter = 0;  // sup over window rings of the fingerprint distance to the centre ring
};

struct AnnulusCheck {
  std::vector<AnnulusRow> rows;
  bool monotone = false;
  double delta_hat = 0;  // -(slope of log E vs T)
  double r2 = 0;
};

AnnulusCheck annulus_check(const GaugedField& f, const RVec& T, double energy_threshold);

struct QuantizationScan {
  RVec energies;
  std::vector<bool> converged;
  double epsilon0 = 1e-6;
  double gap = 0;  // smallest energy above epsilon0 (0 if none)
  bool band_empty = false;
  std::vector<std::pair<double, int>> histogram;  // (lower edge, count), log10 bins
};

QuantizationScan quantization_scan(const target::TargetSpace& t, const surface::ComponentMesh& mesh,
                                   const std::vector<quasimap::Laurent>& seeds, const solver::SolveConfig& cfg,
                                   int threads, double epsilon0 = 1e-6);

struct NeckProfile {
  double L = 0;
  double r_start = 0;  // global r of the neck start
  double h = 0;
  RVec r;              // global radii of the rings
  RVec ring;           // ring energies
  double total = 0;
  double neck_energy = 0;    // E([start, start + L])
  double middle_energy = 0;  // E([start + L/4, start + 3L/4])
  double m0 = 0;             // E([start + rho_c, start + L - rho_c])
  double rho_c = 5;
  bool converged = false;
  int newton_iterations = 0;
};

struct BubbleLocation {
  double index = 0;  // fractional ring index into the profile
  double r = 0;
  double m0 = 0;
  double delta = 0;
};

// Cumulative-from-the-right crossing of m0 - delta/2 inside the window [start + rho_c, start + L - rho_c].
// delta <= 0 picks min(gap, m0)/2. Returns none when m0 <= min_energy.
std::optional<BubbleLocation> bubble_locator(const NeckProfile& p, double delta, double gap,
                                             double min_energy = 1.0);

// q has one glued edge; delta of that edge is replaced by exp(-L) for every L.
std::vector<NeckProfile> neck_family(const quasimap::QuasimapData& q, int edge, const RVec& Ls,
                                     const solver::SolveConfig& cfg, int threads, double rho_c = 5.0);

struct EvRow {
  int index = 0;
  target::Fingerprint fp;
  double distance_to_previous = 0;
};

// Fingerprint of the given leg for each member of a sweep, with consecutive distances.
std::vector<EvRow> ev_continuity(const std::vector<quasimap::QuasimapData>& sweep, int leg,
                                 const solver::SolveConfig& cfg, int threads);

struct EnergyHomology {
  double measured = 0;
  double pairing = 0;
  double relative_gap = 0;
};

// pairing = 2 pi <tau, degree>; degree is the holonomy drop between the ends
EnergyHomology energy_homology_check(const GaugedField& f, const RVec& degree);
// Independent oracle: holonomy drop of the seed connection on a fine grid (flux quadrature).
RVec degree_by_quadrature(const target::TargetSpace& t, const quasimap::Laurent& p, double r_min, double r_max,
                          double h, int n_theta);

void write_decay_csv(const DecayFit& d, std::ostream& os);
void write_annulus_csv(const AnnulusCheck& a, std::ostream& os);
void write_quantization_csv(const QuantizationScan& q, std::ostream& os);
void write_neck_csv(const NeckProfile& p, std::ostream& os);
void write_ev_csv(const std::vector<EvRow>& rows, std::ostream& os);

}  // namespace vortexlab::experiments
