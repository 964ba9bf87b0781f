#include "doctest.h"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/experiments.hpp"

using namespace vortexlab;
using namespace vortexlab::experiments;
using testutil::abelian_higgs;

namespace {

constexpr double kPi = 3.14159265358979323846;

fields::GaugedField solved_vortex(double tau, double R = 10, int n_theta = 32) {
  auto t = abelian_higgs(tau);
  auto m = surface::cylinder(R, 0.1, n_theta);
  auto res = solver::newton_solve(testutil::degree_one_seed(t, m), solver::SolveConfig{});
  REQUIRE(res.report.converged);
  return res.field;
}

// Gaussian bump of the given mass centred at c on the fixed grid [0, 40]; the neck moves with the bump
NeckProfile bump(double c, double mass, double shift_steps = 0) {
  NeckProfile p;
  p.h = 0.1;
  p.L = 30;
  p.rho_c = 5;
  p.r_start = 5 + shift_steps * p.h;
  for (int i = 0; i <= 400; ++i) {
    double r = i * p.h;
    p.r.push_back(r);
    double x = r - (c + shift_steps * p.h);
    p.ring.push_back(mass * std::exp(-x * x / 2) / std::sqrt(2 * kPi));
  }
  return p;
}

}  // namespace

TEST_CASE("decay fit") {
  auto m = surface::cylinder(10, 0.1, 16);
  auto c = fields::constant_field(m, abelian_higgs(0.5), {Complex(1, 0)});
  auto d = decay_fit(c, fields::End::upper, 3, 8);
  CHECK_FALSE(d.accepted);
  CHECK(d.note.find("constant") != std::string::npos);
  CHECK_THROWS_AS(decay_fit(c, fields::End::upper, 3, 12), InvalidArgument);
  CHECK_THROWS_AS(decay_fit(c, fields::End::upper, 8, 3), InvalidArgument);

  // energy tails decay at twice the Higgs mass sqrt(2 tau)
  // windows stay clear of the core and of the ~1e-9 floor left by the truncated ends
  struct Case {
    double tau, r0, r1, tol;
  };
  for (auto c : {Case{1.0, 3, 7, 0.03}, Case{2.0, 2, 4.5, 0.06}}) {
    auto f = solved_vortex(c.tau);
    for (auto end : {fields::End::upper, fields::End::lower}) {
      auto fit = decay_fit(f, end, c.r0, c.r1);
      CHECK(fit.accepted);
      CHECK(fit.r2 > 0.999);
      CHECK(fit.gamma == doctest::Approx(2 * std::sqrt(2 * c.tau)).epsilon(c.tol));
    }
  }
}

TEST_CASE("decay fit steps past a zero in the window") {
  auto t = abelian_higgs();
  auto m = surface::cylinder(12, 0.1, 32);
  auto res = solver::newton_solve(testutil::degree_one_seed(t, m, Complex(4, 0)), solver::SolveConfig{});
  auto d = decay_fit(res.field, fields::End::upper, 2, 6);
  CHECK(d.r0 > 2);
  CHECK(d.note.find("shifted") != std::string::npos);
}

TEST_CASE("annulus check") {
  auto m = surface::cylinder(5, 0.1, 16);
  auto c = fields::constant_field(m, abelian_higgs(0.5), {Complex(0, 1)});
  auto a = annulus_check(c, {0, 1, 2}, 1.0);
  CHECK(a.monotone);
  for (const auto& row : a.rows) {
    CHECK(row.energy == 0);
    CHECK(row.diameter < 1e-12);
  }
  CHECK_THROWS_AS(annulus_check(fields::zero_field(m, abelian_higgs(0.5)), {0}, 1.0), PreconditionError);
  CHECK_THROWS_AS(annulus_check(c, {6}, 1.0), InvalidArgument);
}

TEST_CASE("quantization scan") {
  auto t = abelian_higgs();
  auto m = surface::cylinder(8, 0.1, 32);
  std::vector<quasimap::Laurent> constants, vortices;
  for (int i = 0; i < 4; ++i) {
    quasimap::Laurent p;
    p.coefficients = {std::polar(0.5 + i, 0.3 * i)};
    p.zeros = {{}};
    constants.push_back(p);
    p.zeros = {{Complex(-1.0 + 0.7 * i, i)}};
    vortices.push_back(p);
  }
  auto q0 = quantization_scan(t, m, constants, solver::SolveConfig{}, 2);
  for (double E : q0.energies) CHECK(E < 1e-12);
  CHECK(q0.gap == 0);
  CHECK(q0.band_empty);
  int total = 0;
  for (auto [lo, count] : q0.histogram) total += count;
  CHECK(total == 4);

  auto q1 = quantization_scan(t, m, vortices, solver::SolveConfig{}, 2);
  for (double E : q1.energies) CHECK(E == doctest::Approx(2 * kPi).epsilon(0.02));
  for (bool ok : q1.converged) CHECK(ok);
  CHECK(q1.band_empty);
  CHECK(q1.gap == doctest::Approx(2 * kPi).epsilon(0.02));
  std::ostringstream os;
  write_quantization_csv(q1, os);
  CHECK(os.str().rfind("seed,energy,converged\n", 0) == 0);
}

TEST_CASE("bubble locator: brute-force oracle on a synthetic bump") {
  auto p = bump(20, 6.0);
  auto loc = bubble_locator(p, 0, 2 * kPi);
  REQUIRE(loc);
  CHECK(loc->m0 == doctest::Approx(6.0).epsilon(1e-3));
  CHECK(loc->delta == doctest::Approx(3.0).epsilon(1e-3));
  // fine quadrature of the cumulative mass from the right edge of the window, then bisection
  auto mass_right = [&](double r) {
    const int N = 20000;
    double a = r, b = p.r_start + p.L - p.rho_c, acc = 0, dx = (b - a) / N;
    for (int i = 0; i < N; ++i) {
      double x = a + (i + 0.5) * dx - 20;
      acc += 6.0 * std::exp(-x * x / 2) / std::sqrt(2 * kPi) * dx;
    }
    return acc;
  };
  double lo = 10, hi = 30, target = loc->m0 - 0.5 * loc->delta;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (mass_right(mid) > target ? lo : hi) = mid;
  }
  CHECK(loc->r == doctest::Approx(lo).epsilon(5e-3));
  CHECK(loc->r < 20);
}

TEST_CASE("bubble locator: translation equivariance and degenerate cases") {
  auto a = bubble_locator(bump(20, 6.0), 2.0, 2 * kPi);
  auto b = bubble_locator(bump(20, 6.0, 37), 2.0, 2 * kPi);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->index - a->index == doctest::Approx(37).epsilon(1e-12));
  CHECK(b->r - a->r == doctest::Approx(3.7).epsilon(1e-12));
  CHECK(b->m0 == doctest::Approx(a->m0).epsilon(1e-12));

  CHECK_FALSE(bubble_locator(bump(20, 0.0), 0, 2 * kPi));
  CHECK_FALSE(bubble_locator(bump(20, 0.5), 0, 2 * kPi));
  CHECK_THROWS_AS(bubble_locator(bump(20, 6.0), 7.0, 2 * kPi), InvalidArgument);
  NeckProfile empty;
  CHECK_THROWS_AS(bubble_locator(empty, 0, 1), InvalidArgument);
}

TEST_CASE("ev continuity on a constant sweep") {
  auto t = abelian_higgs();
  quasimap::QuasimapData q;
  q.target = t;
  q.n_theta = 16;
  q.graph.genus = {{0, 0}};
  q.graph.legs = {{1, 0}, {2, 0}};
  quasimap::VertexData v;
  v.coefficients = {1};
  v.zeros = {{Complex(0, 0)}};
  v.r_min = -6;
  v.r_max = 6;
  v.lower = {quasimap::EndRef::Kind::leg, 1};
  v.upper = {quasimap::EndRef::Kind::leg, 2};
  q.vertices[0] = v;
  auto rows = ev_continuity({q, q, q}, 2, solver::SolveConfig{}, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].distance_to_previous == 0);
  CHECK(rows[2].distance_to_previous == 0);
  CHECK_THROWS_AS(ev_continuity({q}, 7, solver::SolveConfig{}, 1), InvalidArgument);
  std::ostringstream os;
  write_ev_csv(rows, os);
  CHECK(os.str().rfind("index,distance_to_previous,modulus0,phase0\n", 0) == 0);
}

TEST_CASE("energy and homology") {
  auto m = surface::cylinder(5, 0.1, 16);
  auto c = fields::constant_field(m, abelian_higgs(), {Complex(std::sqrt(2.0), 0)});
  auto h0 = energy_homology_check(c, {0});
  CHECK(h0.pairing == 0);
  CHECK(h0.relative_gap < 1e-12);
  CHECK_THROWS_AS(energy_homology_check(c, {0, 1}), InvalidArgument);

  quasimap::Laurent p;
  p.coefficients = {1};
  p.zeros = {{Complex(0, 0)}};
  auto d1 = degree_by_quadrature(abelian_higgs(), p, -10, 10, 0.05, 128);
  CHECK(d1[0] == doctest::Approx(1).epsilon(1e-3));
  p.zeros = {{Complex(-1, 0), Complex(1, 2)}};
  auto d2 = degree_by_quadrature(abelian_higgs(), p, -10, 10, 0.05, 128);
  CHECK(d2[0] == doctest::Approx(2).epsilon(1e-3));

  auto f = solved_vortex(1.0);
  auto h1 = energy_homology_check(f, {1});
  CHECK(h1.pairing == doctest::Approx(2 * kPi));
  CHECK(h1.relative_gap < 0.01);
}

TEST_CASE("csv writers") {
  DecayFit d;
  d.r = {1, 2};
  d.e = {0.5, 0};
  std::ostringstream a;
  write_decay_csv(d, a);
  CHECK(a.str().rfind("r,e_r,log_e_r\n", 0) == 0);
  CHECK(a.str().find("nan") != std::string::npos);
  std::ostringstream b;
  write_neck_csv(bump(20, 1), b);
  CHECK(b.str().rfind("r,rho,e_r\n", 0) == 0);
  AnnulusCheck an;
  an.rows = {{0, 1, 0}};
  std::ostringstream c;
  write_annulus_csv(an, c);
  CHECK(c.str() == "T,energy,diameter\n0,1,0\n");
}
