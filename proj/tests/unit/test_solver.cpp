#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/quasimap.hpp"
#include "vortexlab/solver.hpp"

using namespace vortexlab;
using namespace vortexlab::solver;
using testutil::abelian_higgs;
using testutil::norm2;
using testutil::random_vec;
using testutil::strip;
using testutil::sup;

namespace {

constexpr double kPi = 3.14159265358979323846;

double dot(const RVec& a, const RVec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Eigen::MatrixXd dense(const Jacobian& J) {
  const int n = J.size();
  Eigen::MatrixXd A(n, n);
  RVec e(static_cast<size_t>(n), 0.0), y;
  for (int c = 0; c < n; ++c) {
    e[static_cast<size_t>(c)] = 1;
    J.apply(e, y);
    for (int r = 0; r < n; ++r) A(r, c) = y[static_cast<size_t>(r)];
    e[static_cast<size_t>(c)] = 0;
  }
  return A;
}

// a degree-1 seed on a small strip, away from the zero level
fields::GaugedField small_seed() {
  return testutil::degree_one_seed(abelian_higgs(), strip(-2, 2, 0.25, 8), Complex(0.3, 0.5));
}

quasimap::QuasimapData two_cylinders(double L, int n_theta) {
  quasimap::QuasimapData q;
  q.target = abelian_higgs();
  q.h_r = 0.1;
  q.n_theta = n_theta;
  q.sleeve_width = 4;
  q.graph.genus = {{0, 0}, {1, 0}};
  q.graph.edges = {{0, 1}};
  q.graph.legs = {{1, 0}, {2, 1}};
  quasimap::VertexData a;
  a.coefficients = {1};
  a.zeros = {{Complex(0, 0)}};
  a.r_min = -10;
  a.r_max = 10;
  a.lower = {quasimap::EndRef::Kind::leg, 1};
  a.upper = {quasimap::EndRef::Kind::edge, 0};
  auto b = a;
  b.zeros = {{}};
  b.lower = {quasimap::EndRef::Kind::edge, 0};
  b.upper = {quasimap::EndRef::Kind::leg, 2};
  q.vertices = {{0, a}, {1, b}};
  q.edges[0].delta = std::exp(Complex(-L, 0));
  return q;
}

}  // namespace

TEST_CASE("linearization matches finite differences of the moment functional") {
  auto f = small_seed();
  std::mt19937_64 rng(11);
  auto xi = random_vec(rng, static_cast<size_t>(f.mesh.cells()));
  const double eps = 1e-5;
  RVec xp(xi), xm(xi);
  for (size_t i = 0; i < xi.size(); ++i) {
    xp[i] = eps * xi[i];
    xm[i] = -eps * xi[i];
  }
  RVec Rp = moment_functional(f, xp), Rm = moment_functional(f, xm);
  RVec Jx = linearized_apply(f, xi);
  RVec diff(Jx.size());
  for (size_t i = 0; i < Jx.size(); ++i) diff[i] = (Rp[i] - Rm[i]) / (2 * eps) - Jx[i];
  CHECK(sup(diff) <= 1e-6 * sup(Jx));
  CHECK_THROWS_AS(linearized_apply(f, RVec(3, 0.0)), InvalidArgument);
}

TEST_CASE("linearization is symmetric positive definite") {
  auto f = small_seed();
  Jacobian J(f);
  std::mt19937_64 rng(12);
  RVec y, z;
  for (int trial = 0; trial < 100; ++trial) {
    auto x = random_vec(rng, static_cast<size_t>(J.size()));
    auto w = random_vec(rng, static_cast<size_t>(J.size()));
    J.apply(x, y);
    J.apply(w, z);
    CHECK(dot(y, x) > 0);
    CHECK(dot(y, w) == doctest::Approx(dot(x, z)).epsilon(1e-12));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(J));
  CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("linearization on a constant zero-level torus: discrete symbol") {
  auto m = strip(0, 1.9, 0.1, 16);
  m.closed = true;
  auto f = fields::constant_field(m, abelian_higgs(), {Complex(std::sqrt(2.0), 0)});
  const double hr = m.h_r, ht = m.h_theta(), ell = m.n_r * hr;
  for (auto [p, q] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{0, 3}, std::pair{2, 5}}) {
    double kr = 2 * kPi * p / ell;
    RVec x(static_cast<size_t>(m.cells()));
    for (int c = 0; c < m.cells(); ++c) {
      double r = (c / m.n_theta + 0.5) * hr, th = (c % m.n_theta + 0.5) * ht;
      x[static_cast<size_t>(c)] = std::cos(kr * r) * std::cos(q * th);
    }
    double c2 = std::cos(kr * hr / 2) * std::cos(q * ht / 2);
    double symbol = 4 / (hr * hr) * std::pow(std::sin(kr * hr / 2), 2) +
                    4 / (ht * ht) * std::pow(std::sin(q * ht / 2), 2) + 2.0 * c2 * c2;
    RVec y = linearized_apply(f, x);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(symbol * x[i]).epsilon(1e-10).scale(1));
  }
}

TEST_CASE("conjugate gradient") {
  std::mt19937_64 rng(13);
  const int n = 30;
  Eigen::MatrixXd B = Eigen::MatrixXd::Random(n, n);
  Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  LinearMap map = [&](const RVec& x, RVec& y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    y.resize(static_cast<size_t>(n));
    Eigen::Map<Eigen::VectorXd>(y.data(), n) = A * xv;
  };
  auto b = random_vec(rng, n);
  auto res = conjugate_gradient(map, b, 1e-13, 1000);
  Eigen::VectorXd direct = A.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
  for (int i = 0; i < n; ++i) CHECK(res.x[static_cast<size_t>(i)] == doctest::Approx(direct(i)).epsilon(1e-10));
  CHECK(res.relative_residual <= 1e-13);

  auto zero = conjugate_gradient(map, RVec(n, 0.0), 1e-12, 100);
  CHECK(zero.iterations == 0);
  CHECK(sup(zero.x) == 0);

  LinearMap neg = [&](const RVec& x, RVec& y) {
    y = x;
    for (auto& v : y) v = -v;
  };
  CHECK_THROWS_AS(conjugate_gradient(neg, b, 1e-12, 100), NumericalError);
  CHECK_THROWS_AS(conjugate_gradient(map, b, 1e-15, 2), NumericalError);
}

TEST_CASE("manufactured Poisson problem converges at second order") {
  // u = 0 leaves -Laplacian with Dirichlet data at the first and last site rows
  RVec err;
  for (double h : {0.2, 0.1, 0.05}) {
    int nt = static_cast<int>(std::lround(2 * kPi / h));
    auto m = strip(0, 2, h, nt);
    auto f = fields::zero_field(m, abelian_higgs());
    Jacobian J(f);
    const double ht = m.h_theta();
    RVec rhs(static_cast<size_t>(m.cells())), exact(rhs.size());
    for (int c = 0; c < m.cells(); ++c) {
      double r = m.r(c / nt) + 0.5 * h, th = (c % nt + 0.5) * ht;
      exact[static_cast<size_t>(c)] = std::sin(kPi * r / 2) * std::cos(th);
      rhs[static_cast<size_t>(c)] = (kPi * kPi / 4 + 1) * exact[static_cast<size_t>(c)];
    }
    auto res = conjugate_gradient(J.as_map(), rhs, 1e-12, 100000);
    double e = 0;
    for (size_t i = 0; i < rhs.size(); ++i) e = std::max(e, std::abs(res.x[i] - exact[i]));
    err.push_back(e);
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2).epsilon(0.15));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2).epsilon(0.15));
}

TEST_CASE("newton: a vortex is a fixed point") {
  auto m = strip(-1, 1, 0.1, 16);
  auto f = fields::constant_field(m, abelian_higgs(), {std::polar(std::sqrt(2.0), 1.0)});
  auto res = newton_solve(f, SolveConfig{});
  CHECK(res.report.converged);
  CHECK(res.report.newton_iterations == 0);
  CHECK(sup(res.xi) == 0);
}

TEST_CASE("newton: first step agrees with a dense direct solve") {
  auto f = small_seed();
  Jacobian J(f);
  RVec R = fields::vortex_residual(f);
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(R.data(), static_cast<Eigen::Index>(R.size()));
  Eigen::VectorXd step = dense(J).ldlt().solve(rhs);
  SolveConfig cfg;
  cfg.max_newton = 1;
  cfg.damping = false;
  auto res = newton_solve(f, cfg);
  REQUIRE(res.report.newton_iterations == 1);
  for (int i = 0; i < step.size(); ++i) CHECK(res.xi[static_cast<size_t>(i)] == doctest::Approx(step(i)).epsilon(1e-8).scale(1e-6));
}

TEST_CASE("newton: quadratic convergence, refusal of unstable seeds, covariance") {
  auto t = abelian_higgs();
  auto m = surface::cylinder(10, 0.1, 32);
  auto f = testutil::degree_one_seed(t, m);
  auto res = newton_solve(f, SolveConfig{});
  REQUIRE(res.report.converged);
  const auto& s = res.report.residual_sup;
  REQUIRE(s.size() >= 3);
  // last contraction: e_{k+1} <= C e_k^2 with a modest C
  double ek = s[s.size() - 2], ek1 = s.back();
  if (ek < 1e-3) CHECK(ek1 <= 10 * ek * ek);
  for (size_t i = 1; i < s.size(); ++i) CHECK(res.report.residual_l2[i] < res.report.residual_l2[i - 1]);
  CHECK(res.report.final_energy == doctest::Approx(2 * kPi).epsilon(0.02));
  CHECK(res.report.dbar_sup_final == doctest::Approx(res.report.dbar_sup_initial).epsilon(0.05));

  CHECK_THROWS_AS(newton_solve(fields::zero_field(m, t), SolveConfig{}), PreconditionError);
  SolveConfig bad;
  bad.newton_tol = 0;
  CHECK_THROWS_AS(newton_solve(f, bad), InvalidArgument);
  SolveConfig patched;
  patched.preconditioner = Preconditioner::patched;
  CHECK_THROWS_AS(newton_solve(f, patched), InvalidArgument);

  std::mt19937_64 rng(5);
  auto phi = random_vec(rng, static_cast<size_t>(m.sites()));
  auto g = newton_solve(fields::apply_unitary_gauge(f, phi), SolveConfig{});
  REQUIRE(g.report.converged);
  CHECK(g.report.final_energy == doctest::Approx(res.report.final_energy).epsilon(1e-10));
  double du = 0;
  for (size_t i = 0; i < f.u.size(); ++i) du = std::max(du, std::abs(std::abs(g.field.u[i]) - std::abs(res.field.u[i])));
  CHECK(du < 1e-8);
}

TEST_CASE("flat gauge fix matches a direct Dirichlet solve") {
  auto f = small_seed();
  for (auto& x : f.a_r) x += 0.1;
  for (int s = 0; s < f.mesh.sites(); ++s) f.a_theta[static_cast<size_t>(s)] += 0.2 * std::sin(f.mesh.r(s / 8));
  Patch p{3, 5, 2, 4};
  auto res = flat_gauge_fix(f, p);
  CHECK(res.curvature_after < 1e-10);

  // independent five-point assembly on the patch, zero outside
  const auto& m = f.mesh;
  const double ir2 = 1 / (m.h_r * m.h_r), it2 = 1 / (m.h_theta() * m.h_theta());
  const int n = p.row_count * p.col_count;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  auto F = fields::curvature(f);
  auto idx = [&](int i, int j) { return i * p.col_count + j; };
  for (int i = 0; i < p.row_count; ++i)
    for (int j = 0; j < p.col_count; ++j) {
      int me = idx(i, j);
      A(me, me) = 2 * ir2 + 2 * it2;
      if (i > 0) A(me, idx(i - 1, j)) = -ir2;
      if (i + 1 < p.row_count) A(me, idx(i + 1, j)) = -ir2;
      if (j > 0) A(me, idx(i, j - 1)) = -it2;
      if (j + 1 < p.col_count) A(me, idx(i, j + 1)) = -it2;
      b(me) = -F[static_cast<size_t>((p.row_begin + i) * m.n_theta + p.col_begin + j)];
    }
  Eigen::VectorXd x = A.ldlt().solve(b);
  for (int i = 0; i < p.row_count; ++i)
    for (int j = 0; j < p.col_count; ++j)
      CHECK(res.xi[static_cast<size_t>((p.row_begin + i) * m.n_theta + p.col_begin + j)] ==
            doctest::Approx(x(idx(i, j))).epsilon(1e-9).scale(1e-9));
  double outside = 0;
  for (int c = 0; c < m.cells(); ++c) {
    int i = c / m.n_theta - p.row_begin, j = c % m.n_theta - p.col_begin;
    if (i < 0 || i >= p.row_count || j < 0 || j >= p.col_count) outside = std::max(outside, std::abs(res.xi[static_cast<size_t>(c)]));
  }
  CHECK(outside == 0);
  CHECK(res.ratio > 0);
  CHECK_THROWS_AS(flat_gauge_fix(f, Patch{0, 100, 0, 2}), InvalidArgument);
}

TEST_CASE("local Coulomb gauge") {
  auto t = abelian_higgs();
  auto m = surface::cylinder(5, 0.1, 32);
  auto f = newton_solve(testutil::degree_one_seed(t, m), SolveConfig{}).field;
  std::mt19937_64 rng(9);
  auto g = fields::apply_unitary_gauge(f, random_vec(rng, static_cast<size_t>(m.sites()), 0.5));
  auto res = coulomb_gauge_local(g, 40, 60, 10.0);
  CHECK(res.div_before > 1e-3);
  CHECK(res.div_after <= 1e-8);
  CHECK(res.ratio >= 1);
  auto F0 = fields::curvature(g), F1 = fields::curvature(res.fixed);
  double df = 0;
  for (size_t i = 0; i < F0.size(); ++i) df = std::max(df, std::abs(F0[i] - F1[i]));
  CHECK(df < 1e-9);
  CHECK(fields::energy(res.fixed).total == doctest::Approx(fields::energy(g).total).epsilon(1e-10));
  CHECK_THROWS_AS(coulomb_gauge_local(g, 40, 60, 1e-6), PreconditionError);
  CHECK_THROWS_AS(coulomb_gauge_local(g, 60, 40, 10.0), InvalidArgument);
}

TEST_CASE("patched preconditioner defect shrinks with the sleeve width") {
  auto q = two_cylinders(40, 16);
  auto s = quasimap::glued_surface(q);
  auto f = quasimap::build_glued_seed(q, s, 0);
  Jacobian J(f);
  RVec defects;
  for (double width : {4.0, 8.0, 16.0}) {
    auto cover = surface::core_sleeve(s.chains[0], width, surface::Lattice::cells);
    PatchedPreconditioner P(f, cover, 4.0, 1e-12);
    CHECK(P.piece_count() == 2);
    defects.push_back(P.measure_defect(J, 4, 3));
  }
  MESSAGE("defects ", defects[0], " ", defects[1], " ", defects[2]);
  CHECK(defects[1] < defects[0]);
  CHECK(defects[2] < defects[1]);
  CHECK(defects[1] < 0.5);
}
