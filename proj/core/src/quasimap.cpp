#include "vortexlab/quasimap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/stats.hpp"
#include "parallel.hpp"

namespace vortexlab::quasimap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_plus_inf(const Complex& z) { return std::isinf(z.real()) && z.real() > 0; }
bool at_minus_inf(const Complex& z) { return std::isinf(z.real()) && z.real() < 0; }

int shift_of(const VertexData& v, int j) {
  return v.laurent.empty() ? 0 : v.laurent[static_cast<size_t>(j)];
}

// exponents of |u_j| ~ exp(-e r): at r -> +inf (p) and r -> -inf (q)
void exponents(const VertexData& v, int j, int& p, int& q) {
  int plus = 0, finite = 0;
  for (const auto& z : v.zeros[static_cast<size_t>(j)]) {
    if (at_plus_inf(z))
      ++plus;
    else if (!at_minus_inf(z))
      ++finite;
  }
  p = plus - shift_of(v, j);
  q = plus + finite - shift_of(v, j);
}

void require_positive_rank_one(const target::TargetSpace& t, const char* what) {
  bool ok = t.k == 1;
  for (int j = 0; ok && j < t.n; ++j) ok = t.w(0, j) > 0;
  if (!ok) throw InvalidArgument(std::string(what) + ": needs k = 1 with positive weights");
}

// log of (zeta - zeta_k) for zeta = e^{-z}, written to stay finite far from the zero
Complex log_factor(const Complex& z, const Complex& zk) {
  if (at_plus_inf(zk)) return -z;
  if (z.real() <= zk.real()) {
    Complex d = 1.0 - std::exp(z - zk);
    if (d == Complex(0, 0)) return {-kInf, 0};
    return -z + std::log(d);
  }
  Complex d = std::exp(zk - z) - 1.0;
  if (d == Complex(0, 0)) return {-kInf, 0};
  return -zk + std::log(d);
}

// zeta / (zeta - zeta_k)
Complex ratio_factor(const Complex& z, const Complex& zk) {
  if (at_plus_inf(zk)) return 1.0;
  if (z.real() <= zk.real()) return 1.0 / (1.0 - std::exp(z - zk));
  Complex e = std::exp(zk - z);
  return -e / (1.0 - e);
}

}  // namespace

void validate(const QuasimapData& q) {
  modgraph::validate(q.graph);
  target::validate(q.target);
  if (!modgraph::is_prestable(q.graph)) throw InvalidArgument("quasimap: graph is not prestable");
  if (!(q.h_r > 0)) throw InvalidArgument("quasimap: h_r must be > 0");
  if (q.n_theta < 8) throw InvalidArgument("quasimap: n_theta must be >= 8");
  const int n = q.target.n;
  for (auto& [v, d] : q.vertices) {
    std::string tag = "quasimap: vertex " + std::to_string(v);
    if (!q.graph.has_vertex(v)) throw InvalidArgument(tag + " is not in the graph");
    if (static_cast<int>(d.coefficients.size()) != n) throw InvalidArgument(tag + ": need n coefficients");
    if (static_cast<int>(d.zeros.size()) != n) throw InvalidArgument(tag + ": need zeros per coordinate");
    if (!d.laurent.empty() && static_cast<int>(d.laurent.size()) != n)
      throw InvalidArgument(tag + ": laurent shift needs n entries");
    for (int j = 0; j < n; ++j)
      if (d.zeros[static_cast<size_t>(j)].size() > 4) throw InvalidArgument(tag + ": degree per coordinate capped at 4");
    for (const auto* e : {&d.lower, &d.upper}) {
      if (e->kind == EndRef::Kind::edge) {
        if (e->id < 0 || e->id >= q.graph.edge_count())
          throw InvalidArgument(tag + ": end refers to unknown edge " + std::to_string(e->id));
        const auto& ed = q.graph.edges[static_cast<size_t>(e->id)];
        if (ed.a != v && ed.b != v)
          throw InvalidArgument(tag + ": edge " + std::to_string(e->id) + " is not incident");
      } else {
        bool found = false;
        for (const auto& l : q.graph.legs)
          if (l.index == e->id && l.vertex == v) found = true;
        if (!found) throw InvalidArgument(tag + ": end refers to leg " + std::to_string(e->id) + " not at the vertex");
      }
    }
    if (!(d.r_max > d.r_min)) throw InvalidArgument(tag + ": r_max must exceed r_min");
  }
  for (auto& [e, d] : q.edges) {
    if (e < 0 || e >= q.graph.edge_count()) throw InvalidArgument("quasimap: unknown edge " + std::to_string(e));
    if (!d.neck_zeros.empty() && static_cast<int>(d.neck_zeros.size()) != n)
      throw InvalidArgument("quasimap: neck zeros of edge " + std::to_string(e) + " need one list per coordinate");
  }
}

std::map<int, std::vector<Complex>> base_points(const QuasimapData& q) {
  std::map<int, std::vector<Complex>> out;
  const int n = q.target.n;
  for (auto& [v, d] : q.vertices) {
    std::vector<Complex> cand;
    for (const auto& zs : d.zeros)
      for (const auto& z : zs)
        if (std::find(cand.begin(), cand.end(), z) == cand.end()) cand.push_back(z);
    auto& pts = out[v];
    for (const auto& z : cand) {
      CVec ind(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) {
        bool vanishes = d.coefficients[static_cast<size_t>(j)] == Complex(0, 0);
        for (const auto& zz : d.zeros[static_cast<size_t>(j)])
          if (zz == z) vanishes = true;
        ind[static_cast<size_t>(j)] = vanishes ? 0.0 : 1.0;
      }
      if (!target::is_semistable(q.target, ind)) pts.push_back(z);
    }
  }
  return out;
}

bool is_stable_quasimap(const QuasimapData& q, std::string* why) {
  auto fail = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  if (!modgraph::is_prestable(q.graph)) return fail("graph not prestable");
  auto bp = base_points(q);
  for (auto& [v, pts] : bp)
    for (const auto& z : pts)
      if (std::isinf(z.real())) return fail("base point of vertex " + std::to_string(v) + " sits at a special point");
  for (auto& [v, d] : q.vertices) {
    if (q.graph.genus.at(v) != 0 || q.graph.special_points(v) != 2) continue;
    bool finite_zero = false;
    for (const auto& zs : d.zeros)
      for (const auto& z : zs)
        if (!std::isinf(z.real())) finite_zero = true;
    int pmin = std::numeric_limits<int>::max(), qmax = std::numeric_limits<int>::min();
    for (int j = 0; j < q.target.n; ++j) {
      if (d.coefficients[static_cast<size_t>(j)] == Complex(0, 0)) continue;
      int p, qq;
      exponents(d, j, p, qq);
      pmin = std::min(pmin, p);
      qmax = std::max(qmax, qq);
    }
    bool nonconstant = finite_zero || (pmin != std::numeric_limits<int>::max() && qmax != pmin);
    if (!nonconstant) return fail("vertex " + std::to_string(v) + " has 2 special points and constant u");
  }
  for (auto& [v, d] : q.vertices) {
    const int n = q.target.n;
    CVec lo = lower_end_value(d, n);
    if (!target::is_semistable(q.target, lo) && q.target.k == 1)
      return fail("lower end of vertex " + std::to_string(v) + " is unstable");
  }
  return true;
}

CVec lower_end_value(const VertexData& v, int n) {
  CVec out(static_cast<size_t>(n), Complex(0, 0));
  int qmax = std::numeric_limits<int>::min();
  for (int j = 0; j < n; ++j) {
    if (v.coefficients[static_cast<size_t>(j)] == Complex(0, 0)) continue;
    int p, q;
    exponents(v, j, p, q);
    qmax = std::max(qmax, q);
  }
  for (int j = 0; j < n; ++j) {
    int p, q;
    exponents(v, j, p, q);
    if (q == qmax) out[static_cast<size_t>(j)] = v.coefficients[static_cast<size_t>(j)];
  }
  return out;
}

CVec upper_end_value(const VertexData& v, int n) {
  CVec out(static_cast<size_t>(n), Complex(0, 0));
  int pmin = std::numeric_limits<int>::max();
  for (int j = 0; j < n; ++j) {
    if (v.coefficients[static_cast<size_t>(j)] == Complex(0, 0)) continue;
    int p, q;
    exponents(v, j, p, q);
    pmin = std::min(pmin, p);
  }
  for (int j = 0; j < n; ++j) {
    int p, q;
    exponents(v, j, p, q);
    if (p != pmin) continue;
    Complex val = v.coefficients[static_cast<size_t>(j)];
    for (const auto& z : v.zeros[static_cast<size_t>(j)])
      if (!std::isinf(z.real())) val *= -std::exp(-z);
    out[static_cast<size_t>(j)] = val;
  }
  return out;
}

RVec asymptotic_holonomy(const target::TargetSpace& t, const VertexData& v, bool upper) {
  require_positive_rank_one(t, "asymptotic_holonomy");
  // sigma'(+inf) = min p_j / w_j, sigma'(-inf) = max q_j / w_j over the support
  double best = upper ? kInf : -kInf;
  for (int j = 0; j < t.n; ++j) {
    if (v.coefficients[static_cast<size_t>(j)] == Complex(0, 0)) continue;
    int p, q;
    exponents(v, j, p, q);
    double x = static_cast<double>(upper ? p : q) / t.w(0, j);
    best = upper ? std::min(best, x) : std::max(best, x);
  }
  return {best};
}

fields::GaugedField seed_from_laurent(const target::TargetSpace& t, const surface::ComponentMesh& mesh,
                                      const Laurent& P) {
  const int n = t.n, k = t.k, nt = mesh.n_theta;
  if (static_cast<int>(P.coefficients.size()) != n || static_cast<int>(P.zeros.size()) != n)
    throw InvalidArgument("seed: coefficient/zero lists must have n entries");
  bool any_zero = false;
  for (int j = 0; j < n; ++j) {
    for (const auto& z : P.zeros[static_cast<size_t>(j)]) {
      if (std::isinf(z.real())) continue;
      any_zero = true;
      if (z.real() < mesh.r_min - 1e-12 || z.real() > mesh.r_max() + 1e-12)
        throw InvalidArgument("seed: zero at r=" + std::to_string(z.real()) + " lies outside the mesh");
    }
    if (!P.shift.empty() && P.shift[static_cast<size_t>(j)] != 0) any_zero = true;
  }
  if (mesh.closed && any_zero) throw InvalidArgument("seed: closed meshes only take constant seeds");

  fields::GaugedField f = fields::zero_field(mesh, t);
  std::vector<Complex> logp(static_cast<size_t>(nt) * n);
  std::vector<Complex> dlog(static_cast<size_t>(nt) * n);
  std::vector<char> dead(static_cast<size_t>(nt) * n);
  for (int i = 0; i < mesh.n_r; ++i) {
    const double r = mesh.r(i);
    for (int jj = 0; jj < nt; ++jj) {
      const Complex z(r, mesh.theta(jj));
      for (int q = 0; q < n; ++q) {
        size_t idx = static_cast<size_t>(jj) * n + q;
        Complex c = P.coefficients[static_cast<size_t>(q)];
        int m = P.shift.empty() ? 0 : P.shift[static_cast<size_t>(q)];
        dead[idx] = c == Complex(0, 0);
        Complex lp = dead[idx] ? Complex(0, 0) : std::log(c) + static_cast<double>(m) * z;
        Complex dl = static_cast<double>(m);
        for (const auto& zk : P.zeros[static_cast<size_t>(q)]) {
          if (at_minus_inf(zk)) continue;
          Complex lf = log_factor(z, zk);
          if (std::isinf(lf.real())) {
            dead[idx] = 1;
            continue;
          }
          lp += lf;
          dl -= ratio_factor(z, zk);
        }
        logp[idx] = lp;
        dlog[idx] = dl;
      }
    }
    // ring RMS in log form
    RVec logrms(static_cast<size_t>(n), -kInf), rho(static_cast<size_t>(n), 0.0);
    for (int q = 0; q < n; ++q) {
      double mx = -kInf;
      for (int jj = 0; jj < nt; ++jj)
        if (!dead[static_cast<size_t>(jj) * n + q]) mx = std::max(mx, logp[static_cast<size_t>(jj) * n + q].real());
      if (std::isinf(mx)) continue;
      double acc = 0, dacc = 0;
      for (int jj = 0; jj < nt; ++jj) {
        size_t idx = static_cast<size_t>(jj) * n + q;
        if (dead[idx]) continue;
        double w2 = std::exp(2 * (logp[idx].real() - mx));
        acc += w2;
        dacc += w2 * 2 * dlog[idx].real();
      }
      logrms[static_cast<size_t>(q)] = mx + 0.5 * std::log(acc / nt);
      rho[static_cast<size_t>(q)] = dacc / acc;  // m_q' / m_q
    }
    double lmax = -kInf;
    for (double x : logrms) lmax = std::max(lmax, x);
    if (std::isinf(lmax)) throw PreconditionError("seed: section vanishes on the ring at r=" + std::to_string(r));
    if (lmax > 300) throw NumericalError("seed: section too large to represent at r=" + std::to_string(r));
    CVec v(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) v[static_cast<size_t>(q)] = std::exp(logrms[static_cast<size_t>(q)]);
    target::KPoint kp = target::kempf_ness(t, v);
    // L sigma' = -1/2 sum_q w_q |point_q|^2 rho_q
    RVec L = target::L_operator(t, kp.point);
    RVec rhs(static_cast<size_t>(k), 0.0);
    for (int q = 0; q < n; ++q) {
      double p2 = std::norm(kp.point[static_cast<size_t>(q)]);
      for (int a = 0; a < k; ++a) rhs[a] -= 0.5 * t.w(a, q) * p2 * rho[static_cast<size_t>(q)];
    }
    RVec ds(static_cast<size_t>(k));
    if (k == 1) {
      ds[0] = rhs[0] / L[0];
    } else {
      double det = L[0] * L[3] - L[1] * L[2];
      if (std::abs(det) < 1e-300) throw NumericalError("seed: singular L on ring");
      ds[0] = (L[3] * rhs[0] - L[1] * rhs[1]) / det;
      ds[1] = (-L[2] * rhs[0] + L[0] * rhs[1]) / det;
    }
    for (int jj = 0; jj < nt; ++jj) {
      int s = i * nt + jj;
      for (int q = 0; q < n; ++q) {
        size_t idx = static_cast<size_t>(jj) * n + q;
        f.u_at(s)[q] = dead[idx] ? Complex(0, 0) : std::exp(logp[idx] + t.pair(kp.s.data(), q));
      }
      for (int a = 0; a < k; ++a) f.a_theta[static_cast<size_t>(s) * k + a] = ds[a];
    }
  }
  fields::check_finite(f);
  return f;
}

surface::ComponentMesh component_mesh(const QuasimapData& q, int vertex) {
  const VertexData& d = q.vertices.at(vertex);
  long steps = std::lround((d.r_max - d.r_min) / q.h_r);
  if (std::abs(steps * q.h_r - (d.r_max - d.r_min)) > 1e-7)
    throw InvalidArgument("quasimap: extent of vertex " + std::to_string(vertex) + " is not a multiple of h_r");
  surface::ComponentSpec s;
  s.vertex = vertex;
  s.n_r = static_cast<int>(steps) + 1;
  s.n_theta = q.n_theta;
  s.h_r = q.h_r;
  s.r_min = d.r_min;
  auto end = [](const EndRef& e, int orient) {
    surface::EndDescriptor out;
    out.kind = e.kind == EndRef::Kind::edge ? surface::EndKind::socket : surface::EndKind::truncated;
    out.anchor = e.id;
    out.orientation = orient;
    return out;
  };
  s.lower = end(d.lower, -1);
  s.upper = end(d.upper, +1);
  return surface::build_component(s);
}

fields::GaugedField build_seed(const QuasimapData& q, int vertex, const surface::ComponentMesh& mesh) {
  auto it = q.vertices.find(vertex);
  if (it == q.vertices.end()) throw InvalidArgument("build_seed: unknown vertex " + std::to_string(vertex));
  Laurent p;
  p.coefficients = it->second.coefficients;
  p.shift = it->second.laurent;
  p.zeros = it->second.zeros;
  return seed_from_laurent(q.target, mesh, p);
}

surface::GluedSurface glued_surface(const QuasimapData& q) {
  std::map<int, surface::ComponentMesh> comps;
  for (auto& [v, d] : q.vertices) comps[v] = component_mesh(q, v);
  std::map<int, std::complex<double>> delta;
  for (auto& [e, d] : q.edges) delta[e] = d.delta;
  return surface::glue(comps, q.graph, delta, q.sleeve_width);
}

fields::GaugedField build_glued_seed(const QuasimapData& q, const surface::GluedSurface& s, int chain) {
  if (chain < 0 || chain >= static_cast<int>(s.chains.size())) throw InvalidArgument("build_glued_seed: bad chain");
  const auto& ch = s.chains[static_cast<size_t>(chain)];
  const int n = q.target.n;
  const double ht = ch.mesh.h_theta();
  Laurent p;
  p.coefficients.assign(static_cast<size_t>(n), Complex(1, 0));
  p.shift.assign(static_cast<size_t>(n), 0);
  p.zeros.resize(static_cast<size_t>(n));
  std::map<int, surface::Segment> seg_of;
  for (const auto& sg : ch.segments) seg_of[sg.vertex] = sg;
  for (const auto& sg : ch.segments) {
    const VertexData& d = q.vertices.at(sg.vertex);
    for (int j = 0; j < n; ++j) {
      p.coefficients[static_cast<size_t>(j)] *= d.coefficients[static_cast<size_t>(j)];
      p.shift[static_cast<size_t>(j)] += shift_of(d, j);
      for (const auto& z : d.zeros[static_cast<size_t>(j)]) {
        if (std::isinf(z.real())) {
          p.zeros[static_cast<size_t>(j)].push_back(z);
          continue;
        }
        p.zeros[static_cast<size_t>(j)].push_back(z + Complex(sg.r_offset, sg.theta_shift * ht));
      }
    }
  }
  for (const auto& nk : ch.necks) {
    auto it = q.edges.find(nk.edge);
    if (it == q.edges.end() || it->second.neck_zeros.empty()) continue;
    const auto& sg = seg_of.at(nk.lower_vertex);
    for (int j = 0; j < n; ++j)
      for (const auto& z : it->second.neck_zeros[static_cast<size_t>(j)]) {
        if (z.real() < 0 || z.real() > nk.L) throw InvalidArgument("build_glued_seed: neck zero outside the neck");
        p.zeros[static_cast<size_t>(j)].push_back(z + Complex(nk.r_start, sg.theta_shift * ht));
      }
  }
  return seed_from_laurent(q.target, ch.mesh, p);
}

double fit_decay_rate(const fields::EnergyReport& e, const surface::ComponentMesh& m, double r0, double r1,
                      double* r2) {
  RVec xs, ys;
  for (int i = 0; i < m.n_r; ++i) {
    double r = m.r(i);
    if (r < r0 - 1e-9 || r > r1 + 1e-9) continue;
    double v = e.ring[static_cast<size_t>(i)];
    if (!(v > 0)) continue;
    xs.push_back(r);
    ys.push_back(std::log(v));
  }
  LineFit f = fit_line(xs, ys);
  if (r2) *r2 = f.r2;
  if (f.samples < 3) return 0.0;
  return std::abs(f.slope);
}

namespace {

// how far the nearest finite zero sits from each end
void zero_extent(const VertexData& d, double& zlo, double& zhi) {
  zlo = kInf;
  zhi = -kInf;
  for (const auto& zs : d.zeros)
    for (const auto& z : zs)
      if (!std::isinf(z.real())) {
        zlo = std::min(zlo, z.real());
        zhi = std::max(zhi, z.real());
      }
  if (std::isinf(zlo)) zlo = zhi = 0.5 * (d.r_min + d.r_max);
}

}  // namespace

StableVortexFamily correspondence(const QuasimapData& q, const CorrespondenceConfig& cfg) {
  validate(q);
  std::string why;
  if (!is_stable_quasimap(q, &why)) throw PreconditionError("correspondence: quasimap not stable: " + why);
  for (auto& [v, g] : q.graph.genus) {
    if (!q.vertices.count(v)) throw InvalidArgument("correspondence: vertex " + std::to_string(v) + " has no data");
    if (g != 0 || q.graph.special_points(v) != 2)
      throw InvalidArgument("correspondence: vertex " + std::to_string(v) +
                            " is not a cylinder (only genus-0 vertices with 2 special points are meshed)");
  }
  StableVortexFamily fam;
  std::vector<int> ids;
  for (auto& [v, d] : q.vertices) ids.push_back(v);
  fam.components.resize(ids.size());
  detail::parallel_for(static_cast<int>(ids.size()), cfg.threads, [&](int i) {
    int v = ids[static_cast<size_t>(i)];
    const VertexData& d = q.vertices.at(v);
    auto mesh = component_mesh(q, v);
    auto seed = build_seed(q, v, mesh);
    ComponentResult cr;
    cr.vertex = v;
    cr.solve = solver::newton_solve(seed, cfg.solve);
    if (!cr.solve.report.converged)
      throw NumericalError("correspondence: solve of vertex " + std::to_string(v) + " did not converge");
    auto e = fields::energy(cr.solve.field);
    double zlo, zhi;
    zero_extent(d, zlo, zhi);
    double g1 = 0, g2 = 0;
    if (d.r_max - zhi > 10) g1 = fit_decay_rate(e, mesh, zhi + 0.25 * (d.r_max - zhi), d.r_max - 0.25 * (d.r_max - zhi));
    if (zlo - d.r_min > 10) g2 = fit_decay_rate(e, mesh, d.r_min + 0.25 * (zlo - d.r_min), zlo - 0.25 * (zlo - d.r_min));
    cr.gamma_hat = std::max(g1, g2);
    if (g1 > 0 && g2 > 0) cr.gamma_hat = std::min(g1, g2);
    fam.components[static_cast<size_t>(i)] = std::move(cr);
  });

  std::map<int, const ComponentResult*> by_vertex;
  for (const auto& c : fam.components) {
    by_vertex[c.vertex] = &c;
    fam.total_energy += c.solve.report.final_energy;
  }
  const double h = std::max(q.h_r, 2 * 3.14159265358979323846 / q.n_theta);
  for (int e = 0; e < q.graph.edge_count(); ++e) {
    int plus = -1, minus = -1;
    for (auto& [v, d] : q.vertices) {
      if (d.upper.kind == EndRef::Kind::edge && d.upper.id == e) plus = v;
      if (d.lower.kind == EndRef::Kind::edge && d.lower.id == e) minus = v;
    }
    if (plus < 0 || minus < 0)
      throw InvalidArgument("correspondence: edge " + std::to_string(e) + " lacks an upper/lower socket pair");
    const auto* cp = by_vertex.at(plus);
    const auto* cm = by_vertex.at(minus);
    auto fp = fields::limit_orbit(cp->solve.field, fields::End::upper);
    auto fm = fields::limit_orbit(cm->solve.field, fields::End::lower);
    double zlo, zhi, R;
    zero_extent(q.vertices.at(plus), zlo, zhi);
    R = q.vertices.at(plus).r_max - zhi;
    zero_extent(q.vertices.at(minus), zlo, zhi);
    R = std::min(R, zlo - q.vertices.at(minus).r_min);
    double gamma = std::min(cp->gamma_hat > 0 ? cp->gamma_hat : kInf, cm->gamma_hat > 0 ? cm->gamma_hat : kInf);
    EdgeCheck ec;
    ec.edge = e;
    ec.gap = target::distance(fp, fm);
    ec.tol = 10 * (h * h + (std::isinf(gamma) ? 0.0 : std::exp(-gamma * R)));
    ec.ok = ec.gap <= ec.tol;
    if (!ec.ok && cfg.throw_on_gap) {
      std::ostringstream os;
      os << "correspondence: connectedness violated at edge " << e << " (gap " << ec.gap << " > tol " << ec.tol
         << "), discretization too coarse";
      throw NumericalError(os.str());
    }
    fam.edges.push_back(ec);
  }
  for (const auto& leg : q.graph.legs) {
    const VertexData& d = q.vertices.at(leg.vertex);
    const auto* c = by_vertex.at(leg.vertex);
    if (d.lower.kind == EndRef::Kind::leg && d.lower.id == leg.index)
      fam.ev[leg.index] = fields::limit_orbit(c->solve.field, fields::End::lower);
    else if (d.upper.kind == EndRef::Kind::leg && d.upper.id == leg.index)
      fam.ev[leg.index] = fields::limit_orbit(c->solve.field, fields::End::upper);
    else
      throw InvalidArgument("correspondence: leg " + std::to_string(leg.index) + " is not an end of its vertex");
  }
  return fam;
}

std::string to_json(const StableVortexFamily& fam) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["total_energy"] = fam.total_energy;
  auto& comps = j["components"] = nlohmann::ordered_json::array();
  for (const auto& c : fam.components) {
    nlohmann::ordered_json o;
    o["vertex"] = c.vertex;
    o["converged"] = c.solve.report.converged;
    o["newton_iterations"] = c.solve.report.newton_iterations;
    o["energy"] = c.solve.report.final_energy;
    o["residual_sup"] = c.solve.report.residual_sup.empty() ? 0.0 : c.solve.report.residual_sup.back();
    o["gamma_hat"] = c.gamma_hat;
    comps.push_back(o);
  }
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : fam.edges) edges.push_back({{"edge", e.edge}, {"gap", e.gap}, {"tol", e.tol}, {"ok", e.ok}});
  auto& ev = j["ev"] = nlohmann::ordered_json::object();
  for (auto& [leg, fp] : fam.ev)
    ev[std::to_string(leg)] = {{"moduli", fp.moduli}, {"phases", fp.phases}, {"pivots", fp.pivots}};
  return j.dump(2);
}

}  // namespace vortexlab::quasimap
