#include <cmath>

#include "vortexlab/error.hpp"
#include "vortexlab/solver.hpp"

namespace vortexlab::solver {

FlatGaugeResult flat_gauge_fix(const GaugedField& f, const Patch& patch, double tol) {
  const auto& m = f.mesh;
  const int k = f.k(), nt = m.n_theta, rows = m.cell_rows();
  if (patch.row_count < 1 || patch.col_count < 1 || patch.col_count > nt)
    throw InvalidArgument("flat_gauge_fix: empty or oversized patch");
  if (!m.closed && (patch.row_begin < 0 || patch.row_begin + patch.row_count > rows))
    throw InvalidArgument("flat_gauge_fix: patch leaves the mesh");
  if (m.closed && patch.row_count >= rows && patch.col_count == nt)
    throw InvalidArgument("flat_gauge_fix: patch must have a boundary");
  std::vector<char> in(static_cast<size_t>(m.cells()), 0);
  for (int q = 0; q < patch.row_count; ++q) {
    int row = ((patch.row_begin + q) % rows + rows) % rows;
    for (int c = 0; c < patch.col_count; ++c) in[static_cast<size_t>(row * nt + (patch.col_begin + c) % nt)] = 1;
  }
  Jacobian J(f);
  const RVec F = fields::curvature(f);
  RVec rhs(F.size(), 0.0);
  double fn = 0;
  for (size_t c = 0; c < in.size(); ++c)
    if (in[c])
      for (int a = 0; a < k; ++a) {
        rhs[c * k + a] = -F[c * k + a];
        fn += F[c * k + a] * F[c * k + a];
      }
  RVec tmp;
  LinearMap A = [&](const RVec& x, RVec& y) {
    tmp = x;
    for (size_t c = 0; c < in.size(); ++c)
      if (!in[c])
        for (int a = 0; a < k; ++a) tmp[c * k + a] = 0;
    J.apply_laplacian(tmp, y);
    for (size_t c = 0; c < in.size(); ++c)
      if (!in[c])
        for (int a = 0; a < k; ++a) y[c * k + a] = 0;
  };
  FlatGaugeResult out;
  CgResult cg = conjugate_gradient(A, rhs, tol, 50000);
  out.xi = cg.x;
  if (out.xi.empty()) out.xi.assign(F.size(), 0.0);
  out.cg_iterations = cg.iterations;
  out.fixed = fields::apply_complex_gauge(f, out.xi);
  double xn = 0;
  for (double x : out.xi) xn += x * x;
  out.ratio = fn > 0 ? std::sqrt(xn / fn) : 0.0;
  const RVec F2 = fields::curvature(out.fixed);
  for (size_t c = 0; c < in.size(); ++c)
    if (in[c])
      for (int a = 0; a < k; ++a) out.curvature_after = std::max(out.curvature_after, std::abs(F2[c * k + a]));
  return out;
}

RVec divergence(const GaugedField& f) {
  const auto& m = f.mesh;
  const auto t = fields::make_topology(m);
  const int k = f.k();
  const double hr = m.h_r, ht = m.h_theta();
  RVec d(static_cast<size_t>(t.n_sites) * k, 0.0);
  for (int s = 0; s < t.n_sites; ++s)
    for (int a = 0; a < k; ++a) {
      double acc = (f.a_theta[static_cast<size_t>(s) * k + a] - f.a_theta[static_cast<size_t>(t.site_left[s]) * k + a]) / ht;
      if (t.site_up[s] >= 0) acc += f.a_r[static_cast<size_t>(s) * k + a] / hr;
      if (t.site_down[s] >= 0) acc -= f.a_r[static_cast<size_t>(t.site_down[s]) * k + a] / hr;
      d[static_cast<size_t>(s) * k + a] = acc;
    }
  return d;
}

CoulombResult coulomb_gauge_local(const GaugedField& f, int row_begin, int row_end, double kappa) {
  const auto& m = f.mesh;
  if (row_begin < 0 || row_end >= m.n_r || row_end <= row_begin)
    throw InvalidArgument("coulomb_gauge_local: bad row range");
  const auto t = fields::make_topology(m);
  const int k = f.k(), n = f.n(), nt = m.n_theta;
  const double hr = m.h_r, ht = m.h_theta();
  auto in = [&](int s) { return s >= 0 && s / nt >= row_begin && s / nt <= row_end; };
  // patch cells: both lower corners' rows in range
  const RVec F = fields::curvature(f);
  double fsup = 0, fn = 0;
  for (int c = 0; c < t.n_cells; ++c) {
    if (!in(c) || !in(t.corner10[c]) || t.corner10[c] / nt < c / nt) continue;
    for (int a = 0; a < k; ++a) {
      fsup = std::max(fsup, std::abs(F[static_cast<size_t>(c) * k + a]));
      fn += F[static_cast<size_t>(c) * k + a] * F[static_cast<size_t>(c) * k + a];
    }
  }
  if (fsup > kappa)
    throw PreconditionError("coulomb_gauge_local: curvature " + std::to_string(fsup) + " above kappa " +
                            std::to_string(kappa));
  const int n0 = row_begin * nt, np = (row_end - row_begin + 1) * nt;
  auto up_in = [&](int s) { int u = t.site_up[s]; return in(u) && u > s ? u : -1; };
  auto dn_in = [&](int s) { int d = t.site_down[s]; return in(d) && d < s ? d : -1; };

  auto patch_div = [&](const GaugedField& g, int s, int a) {
    double acc = (g.a_theta[static_cast<size_t>(s) * k + a] - g.a_theta[static_cast<size_t>(t.site_left[s]) * k + a]) / ht;
    if (up_in(s) >= 0) acc += g.a_r[static_cast<size_t>(s) * k + a] / hr;
    int d = dn_in(s);
    if (d >= 0) acc -= g.a_r[static_cast<size_t>(d) * k + a] / hr;
    return acc;
  };

  CoulombResult out;
  out.phi.assign(static_cast<size_t>(t.n_sites) * k, 0.0);
  for (int a = 0; a < k; ++a) {
    RVec rhs(static_cast<size_t>(np));
    double mean = 0;
    for (int p = 0; p < np; ++p) {
      double d = patch_div(f, n0 + p, a);
      out.div_before = std::max(out.div_before, std::abs(d));
      rhs[p] = -d;
      mean += rhs[p];
    }
    mean /= np;
    for (auto& x : rhs) x -= mean;
    // -Delta_N on the patch, constants projected out
    LinearMap A = [&](const RVec& x, RVec& y) {
      y.assign(x.size(), 0.0);
      double xm = 0;
      for (double v : x) xm += v;
      xm /= static_cast<double>(x.size());
      for (int p = 0; p < np; ++p) {
        int s = n0 + p;
        double acc = 0;
        int rt = t.site_right[s] - n0, lt = t.site_left[s] - n0;
        acc += (2 * x[p] - x[rt] - x[lt]) / (ht * ht);
        int u = up_in(s), d = dn_in(s);
        if (u >= 0) acc += (x[p] - x[u - n0]) / (hr * hr);
        if (d >= 0) acc += (x[p] - x[d - n0]) / (hr * hr);
        y[p] = acc + xm;  // rank-one shift fixes the kernel
      }
    };
    CgResult cg = conjugate_gradient(A, rhs, 1e-14, 100000);
    if (cg.x.empty()) cg.x.assign(static_cast<size_t>(np), 0.0);
    for (int p = 0; p < np; ++p) out.phi[static_cast<size_t>(n0 + p) * k + a] = cg.x[p];
  }
  // phi vanishes off the patch, so applying it everywhere is a genuine gauge transformation
  out.fixed = fields::apply_unitary_gauge(f, out.phi);
  (void)n;
  double an = 0;
  for (int p = 0; p < np; ++p) {
    int s = n0 + p;
    for (int a = 0; a < k; ++a) {
      out.div_after = std::max(out.div_after, std::abs(patch_div(out.fixed, s, a)));
      double ar = up_in(s) >= 0 ? out.fixed.a_r[static_cast<size_t>(s) * k + a] : 0.0;
      double at = out.fixed.a_theta[static_cast<size_t>(s) * k + a];
      an += ar * ar + at * at;
    }
  }
  // ||a||_2 + ||F||_2 stands in for the first-order Sobolev norm (d*a = 0 after the fix)
  double area = hr * ht;
  out.ratio = fn > 0 ? (std::sqrt(an * area) + std::sqrt(fn * area)) / std::sqrt(fn * area) : 0.0;
  return out;
}

}  // namespace vortexlab::solver
