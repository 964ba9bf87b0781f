#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/modgraph.hpp"
#include "vortexlab/quasimap.hpp"
#include "vortexlab/solver.hpp"
#include "vortexlab/target.hpp"

namespace vortexlab::config {

// single truncated cylinder used when no quasimap block is given
struct SurfaceBlock {
  double R = 20;
  double h_r = 0.1;
  int n_theta = 64;
  double sleeve_width = 8;
};

struct DecayParams {
  fields::End end = fields::End::upper;
  double r0 = 5, r1 = 15;
};

struct AnnulusParams {
  RVec T{0, 1, 2, 3, 4, 5, 6, 7, 8};
  double energy_threshold = 1.0;
};

struct QuantizeParams {
  std::vector<quasimap::Laurent> seeds;  // empty: random seeds drawn from the run seed
  int count = 20;
  double epsilon0 = 1e-6;
};

struct NeckParams {
  int edge = 0;
  RVec L{10, 20, 40};
  double rho_c = 5;
  double min_bubble_energy = 1.0;
  double delta = 0;  // <= 0: min(gap, m0)/2
};

struct EvParams {
  int leg = 1;
  int vertex = 0;
  int coordinate = 0;
  int zero = 0;
  RVec steps{0, 0.1, 0.2, 0.3};  // radial shifts applied to the chosen zero
};

struct EnergyParams {
  double quadrature_refine = 4;  // oracle grid is this many times finer
  double max_gap = 0.02;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output = "out";
  std::string source;  // canonical dump of the parsed document (hash input)

  target::TargetSpace target;
  SurfaceBlock surface;
  solver::SolveConfig solve;
  std::optional<quasimap::QuasimapData> quasimap;
  std::optional<modgraph::ModularGraph> graph;  // quasimap graph or a bare graph literal

  DecayParams decay;
  AnnulusParams annulus;
  QuantizeParams quantize;
  NeckParams neck;
  EvParams ev;
  EnergyParams energy;
};

// Throws ConfigError listing every problem found, one per line.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& yaml);

// FNV-1a over the canonical document, the subcommand and the seed
std::uint64_t content_hash(const RunConfig& c, const std::string& subcommand);

// default quasimap: one cylinder [-R, R] carrying one zero per coordinate at the origin
quasimap::QuasimapData default_quasimap(const RunConfig& c);

}  // namespace vortexlab::config
