#pragma once

#include <cmath>
#include <random>

#include "vortexlab/fields.hpp"
#include "vortexlab/quasimap.hpp"
#include "vortexlab/surface.hpp"
#include "vortexlab/target.hpp"

namespace testutil {

using namespace vortexlab;

inline target::TargetSpace abelian_higgs(double tau = 1.0) { return target::make_target(1, 1, {1}, {tau}); }

inline surface::ComponentMesh strip(double r_min, double r_max, double h, int n_theta) {
  surface::ComponentSpec s;
  s.n_r = static_cast<int>(std::lround((r_max - r_min) / h)) + 1;
  s.n_theta = n_theta;
  s.h_r = h;
  s.r_min = r_min;
  return surface::build_component(s);
}

// degree-1 seed on [-R, R] with one zero at z0
inline fields::GaugedField degree_one_seed(const target::TargetSpace& t, const surface::ComponentMesh& m,
                                           Complex z0 = {0, 0}) {
  quasimap::Laurent p;
  p.coefficients.assign(static_cast<size_t>(t.n), Complex(1, 0));
  p.zeros.assign(static_cast<size_t>(t.n), {});
  p.zeros[0].push_back(z0);
  return quasimap::seed_from_laurent(t, m, p);
}

inline RVec random_vec(std::mt19937_64& rng, size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RVec v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline double norm2(const RVec& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double sup(const RVec& v) {
  double s = 0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace testutil
