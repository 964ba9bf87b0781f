#pragma once

#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vortexlab {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using RVec = std::vector<double>;

}  // namespace vortexlab

namespace vortexlab::target {

// C^n with a rank-k torus acting by integer weights, moment map shifted by tau.
struct TargetSpace {
  int n = 1;
  int k = 1;
  std::vector<int> weights{1};  // k x n row-major, w(a, j) = weights[a * n + j]
  RVec tau{1.0};

  int w(int a, int j) const { return weights[static_cast<size_t>(a * n + j)]; }
  // (w^T s)_j
  double pair(const double* s, int j) const {
    double acc = 0;
    for (int a = 0; a < k; ++a) acc += w(a, j) * s[a];
    return acc;
  }
};

TargetSpace make_target(int n, int k, std::vector<int> weights, RVec tau);
void validate(const TargetSpace& t);

RVec moment_map(const TargetSpace& t, const CVec& v);
void moment_map(const TargetSpace& t, const Complex* v, double* out);
CVec infinitesimal_action(const TargetSpace& t, const RVec& xi, const CVec& v);
RVec L_operator(const TargetSpace& t, const CVec& v);  // k x k row-major
void L_operator(const TargetSpace& t, const Complex* v, double* out);

// A destabilizing one-parameter subgroup, if any (k <= 2).
std::optional<std::vector<double>> destabilizing_direction(const TargetSpace& t, const CVec& v,
                                                           double support_tol = 0.0);
bool is_semistable(const TargetSpace& t, const CVec& v);

// tau strictly inside the weight cone and off every wall; empty if fine.
std::optional<std::string> chamber_problem(const TargetSpace& t);
// Rank condition on supports of sampled zero-level points; empty if free.
std::optional<std::string> free_action_problem(const TargetSpace& t, std::mt19937_64& rng,
                                               int samples = 32);

struct KPoint {
  CVec point;
  RVec s;  // point_j = exp((w^T s)_j) v_j
  int iterations = 0;
};

KPoint kempf_ness(const TargetSpace& t, const CVec& v, double tol = 1e-12, int max_iter = 60);

struct Fingerprint {
  RVec moduli;
  RVec phases;          // phase normal form, one per coordinate (0 where modulus vanishes)
  std::vector<int> pivots;
};

// Fingerprint of the K-orbit of a point already on the zero level.
Fingerprint fingerprint(const TargetSpace& t, const CVec& v);
// kempf_ness followed by fingerprint.
Fingerprint orbit_fingerprint(const TargetSpace& t, const CVec& v);
double distance(const Fingerprint& a, const Fingerprint& b);

// Smallest eigenvalue of a symmetric k x k matrix (k <= 2 closed form, else power iteration).
double smallest_eigenvalue(const RVec& m, int k);

}  // namespace vortexlab::target
