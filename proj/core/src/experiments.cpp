#include "vortexlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "parallel.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/stats.hpp"

namespace vortexlab::experiments {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ring whose |u|^2 dips well below the ring maximum: a zero of u is nearby
bool ring_has_zero(const GaugedField& f, int row) {
  double lo = 1e300, hi = 0;
  for (int j = 0; j < f.mesh.n_theta; ++j) {
    double s = 0;
    const Complex* u = f.u_at(row * f.mesh.n_theta + j);
    for (int q = 0; q < f.n(); ++q) s += std::norm(u[q]);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi > 0 && lo < 0.25 * hi;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

DecayFit decay_fit(const GaugedField& f, fields::End end, double r0, double r1) {
  if (!(r1 > r0) || r0 < 0) throw InvalidArgument("decay_fit: window must satisfy 0 <= r0 < r1");
  const auto& m = f.mesh;
  const double sgn = end == fields::End::upper ? 1.0 : -1.0;
  auto row_in_mesh = [&](double dist) {
    double r = sgn * dist;
    return r >= m.r_min - 1e-9 && r <= m.r_max() + 1e-9;
  };
  if (!row_in_mesh(r0) || !row_in_mesh(r1)) throw InvalidArgument("decay_fit: window leaves the mesh");
  fields::EnergyReport e = fields::energy(f);
  DecayFit d;
  const double width = r1 - r0;
  for (int attempt = 0;; ++attempt) {
    bool zero = false;
    for (int i = 0; i < m.n_r; ++i) {
      double dist = sgn * m.r(i);
      if (dist >= r0 - 1e-9 && dist <= r1 + 1e-9 && ring_has_zero(f, i)) zero = true;
    }
    if (!zero) break;
    if (attempt == 3 || !row_in_mesh(r1 + 0.5 * width)) {
      d.note = "window still contains a zero of u";
      break;
    }
    r0 += 0.5 * width;
    r1 += 0.5 * width;
    d.note = "window shifted outward past a zero of u";
  }
  d.r0 = r0;
  d.r1 = r1;
  RVec xs, ys;
  for (int i = 0; i < m.n_r; ++i) {
    double dist = sgn * m.r(i);
    if (dist < r0 - 1e-9 || dist > r1 + 1e-9) continue;
    double v = e.ring[static_cast<size_t>(i)];
    d.r.push_back(m.r(i));
    d.e.push_back(v);
    if (v > 1e-300) {
      xs.push_back(dist);
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() < 3) {
    d.note = d.note.empty() ? "energy vanishes on the window (constant vortex), fit rejected" : d.note;
    return d;
  }
  LineFit lf = fit_line(xs, ys);
  d.gamma = -lf.slope;
  d.C = std::exp(lf.intercept);
  d.r2 = lf.r2;
  d.accepted = d.gamma > 0 && d.r2 >= 0.99;
  if (!d.accepted && d.note.empty()) d.note = "fit rejected (gamma <= 0 or R^2 < 0.99)";
  return d;
}

AnnulusCheck annulus_check(const GaugedField& f, const RVec& Ts, double energy_threshold) {
  const auto& m = f.mesh;
  fields::EnergyReport e = fields::energy(f);
  if (e.total >= energy_threshold)
    throw PreconditionError("annulus_check: energy " + fmt(e.total) + " above the small-energy threshold " +
                            fmt(energy_threshold));
  const double s0 = m.r_min, s1 = m.r_max();
  // ring fingerprints for the orbit-diameter proxy
  std::vector<std::optional<target::Fingerprint>> fps(static_cast<size_t>(m.n_r));
  for (int i = 0; i < m.n_r; ++i) {
    try {
      CVec v = fields::ring_average(f, i);
      if (!target::destabilizing_direction(f.target, v, 1e-8)) fps[static_cast<size_t>(i)] = target::orbit_fingerprint(f.target, v);
    } catch (const Error&) {
    }
  }
  const int mid = m.row_of(0.5 * (s0 + s1));
  AnnulusCheck a;
  RVec xs, ys;
  for (double T : Ts) {
    if (T < 0 || s0 + T >= s1 - T) throw InvalidArgument("annulus_check: T=" + fmt(T) + " leaves no middle cylinder");
    AnnulusRow row;
    row.T = T;
    row.energy = fields::energy_between(e, m, s0 + T, s1 - T);
    for (int i = 0; i < m.n_r; ++i) {
      double r = m.r(i);
      if (r < s0 + T - 1e-9 || r > s1 - T + 1e-9) continue;
      if (fps[static_cast<size_t>(i)] && fps[static_cast<size_t>(mid)])
        row.diameter = std::max(row.diameter, target::distance(*fps[static_cast<size_t>(i)], *fps[static_cast<size_t>(mid)]));
    }
    a.rows.push_back(row);
    if (row.energy > 0) {
      xs.push_back(T);
      ys.push_back(std::log(row.energy));
    }
  }
  a.monotone = true;
  for (size_t i = 1; i < a.rows.size(); ++i)
    if (a.rows[i].T >= a.rows[i - 1].T && a.rows[i].energy > a.rows[i - 1].energy) a.monotone = false;
  LineFit lf = fit_line(xs, ys);
  a.delta_hat = -lf.slope;
  a.r2 = lf.r2;
  return a;
}

QuantizationScan quantization_scan(const target::TargetSpace& t, const surface::ComponentMesh& mesh,
                                   const std::vector<quasimap::Laurent>& seeds, const solver::SolveConfig& cfg,
                                   int threads, double epsilon0) {
  QuantizationScan q;
  q.epsilon0 = epsilon0;
  const int n = static_cast<int>(seeds.size());
  q.energies.assign(static_cast<size_t>(n), 0.0);
  std::vector<char> conv(static_cast<size_t>(n), 0);
  detail::parallel_for(n, threads, [&](int i) {
    auto seed = quasimap::seed_from_laurent(t, mesh, seeds[static_cast<size_t>(i)]);
    auto res = solver::newton_solve(seed, cfg);
    q.energies[static_cast<size_t>(i)] = res.report.final_energy;
    conv[static_cast<size_t>(i)] = res.report.converged;
  });
  q.converged.assign(conv.begin(), conv.end());
  for (double E : q.energies)
    if (E > epsilon0 && (q.gap == 0 || E < q.gap)) q.gap = E;
  q.band_empty = true;
  for (double E : q.energies)
    if (E > epsilon0 && E < 0.5 * q.gap) q.band_empty = false;
  for (int b = -16; b <= 3; ++b) {
    int count = 0;
    for (double E : q.energies) {
      double lg = E > 0 ? std::log10(E) : -1e9;
      bool lo_ok = b == -16 ? true : lg >= b;
      bool hi_ok = b == 3 ? true : lg < b + 1;
      if (lo_ok && hi_ok) ++count;
    }
    q.histogram.emplace_back(std::pow(10.0, b), count);
  }
  return q;
}

std::optional<BubbleLocation> bubble_locator(const NeckProfile& p, double delta, double gap, double min_energy) {
  if (p.ring.size() != p.r.size() || p.r.size() < 2) throw InvalidArgument("bubble_locator: malformed profile");
  // window in index space relative to the profile's own neck, so translations act exactly
  const double a = (p.r_start + p.rho_c - p.r[0]) / p.h;
  const double b = (p.r_start + p.L - p.rho_c - p.r[0]) / p.h;
  int ia = static_cast<int>(std::ceil(a - 1e-9)), ib = static_cast<int>(std::floor(b + 1e-9));
  ia = std::max(ia, 0);
  ib = std::min(ib, static_cast<int>(p.r.size()) - 1);
  if (ib <= ia) return std::nullopt;
  const int n = ib - ia + 1;
  RVec C(static_cast<size_t>(n), 0.0);  // C[i] = E([r_{ia+i}, r_ib])
  for (int i = n - 2; i >= 0; --i)
    C[static_cast<size_t>(i)] = C[static_cast<size_t>(i + 1)] +
                                0.5 * p.h * (p.ring[static_cast<size_t>(ia + i)] + p.ring[static_cast<size_t>(ia + i + 1)]);
  const double m0 = C[0];
  if (!(m0 > min_energy)) return std::nullopt;
  if (delta <= 0) delta = 0.5 * std::min(gap, m0);
  if (!(delta > 0 && delta < std::min(gap, m0)))
    throw InvalidArgument("bubble_locator: delta must lie in (0, min(gap, m0))");
  const double target = m0 - 0.5 * delta;
  int i = n - 1;
  while (i > 0 && C[static_cast<size_t>(i)] < target) --i;
  // C[i] >= target > C[i+1]
  double frac = 0;
  if (i + 1 < n) {
    double hi = C[static_cast<size_t>(i)], lo = C[static_cast<size_t>(i + 1)];
    frac = hi > lo ? (hi - target) / (hi - lo) : 0.0;
  }
  BubbleLocation out;
  out.index = ia + i + frac;
  out.r = p.r[0] + out.index * p.h;
  out.m0 = m0;
  out.delta = delta;
  return out;
}

std::vector<NeckProfile> neck_family(const quasimap::QuasimapData& q, int edge, const RVec& Ls,
                                     const solver::SolveConfig& cfg, int threads, double rho_c) {
  if (edge < 0 || edge >= q.graph.edge_count()) throw InvalidArgument("neck_family: unknown edge");
  std::vector<NeckProfile> out(Ls.size());
  detail::parallel_for(static_cast<int>(Ls.size()), threads, [&](int li) {
    const double L = Ls[static_cast<size_t>(li)];
    quasimap::QuasimapData qq = q;
    auto& ed = qq.edges[edge];
    double phase = ed.delta != Complex(0, 0) ? std::arg(ed.delta) : 0.0;  // keep the configured twist
    ed.delta = std::polar(std::exp(-L), phase);
    auto s = quasimap::glued_surface(qq);
    int chain = -1;
    const surface::Neck* neck = nullptr;
    for (size_t c = 0; c < s.chains.size(); ++c)
      for (const auto& nk : s.chains[c].necks)
        if (nk.edge == edge) {
          chain = static_cast<int>(c);
          neck = &nk;
        }
    if (chain < 0) throw InvalidArgument("neck_family: edge is not glued into a chain");
    const auto& ch = s.chains[static_cast<size_t>(chain)];
    auto seed = quasimap::build_glued_seed(qq, s, chain);
    solver::SolveResult res;
    if (cfg.preconditioner == solver::Preconditioner::patched) {
      auto cover = surface::core_sleeve(ch, qq.sleeve_width, surface::Lattice::cells);
      res = solver::newton_solve(seed, cfg, &cover);
    } else {
      res = solver::newton_solve(seed, cfg);
    }
    auto e = fields::energy(res.field);
    NeckProfile p;
    p.L = neck->L;
    p.r_start = neck->r_start;
    p.h = ch.mesh.h_r;
    p.rho_c = rho_c;
    for (int i = 0; i < ch.mesh.n_r; ++i) {
      p.r.push_back(ch.mesh.r(i));
      p.ring.push_back(e.ring[static_cast<size_t>(i)]);
    }
    p.total = e.total;
    p.neck_energy = fields::energy_between(e, ch.mesh, p.r_start, p.r_start + p.L);
    p.middle_energy = fields::energy_between(e, ch.mesh, p.r_start + 0.25 * p.L, p.r_start + 0.75 * p.L);
    p.m0 = p.L > 2 * rho_c ? fields::energy_between(e, ch.mesh, p.r_start + rho_c, p.r_start + p.L - rho_c) : 0.0;
    p.converged = res.report.converged;
    p.newton_iterations = res.report.newton_iterations;
    out[static_cast<size_t>(li)] = std::move(p);
  });
  return out;
}

std::vector<EvRow> ev_continuity(const std::vector<quasimap::QuasimapData>& sweep, int leg,
                                 const solver::SolveConfig& cfg, int threads) {
  std::vector<EvRow> rows(sweep.size());
  detail::parallel_for(static_cast<int>(sweep.size()), threads, [&](int i) {
    quasimap::CorrespondenceConfig cc;
    cc.solve = cfg;
    cc.threads = 1;
    cc.throw_on_gap = false;
    auto fam = quasimap::correspondence(sweep[static_cast<size_t>(i)], cc);
    auto it = fam.ev.find(leg);
    if (it == fam.ev.end()) throw InvalidArgument("ev_continuity: leg " + std::to_string(leg) + " not present");
    rows[static_cast<size_t>(i)].index = i;
    rows[static_cast<size_t>(i)].fp = it->second;
  });
  for (size_t i = 1; i < rows.size(); ++i) rows[i].distance_to_previous = target::distance(rows[i].fp, rows[i - 1].fp);
  return rows;
}

EnergyHomology energy_homology_check(const GaugedField& f, const RVec& degree) {
  if (static_cast<int>(degree.size()) != f.k()) throw InvalidArgument("energy_homology_check: degree needs k entries");
  EnergyHomology h;
  h.measured = fields::energy(f).total;
  for (int a = 0; a < f.k(); ++a) h.pairing += 2 * kPi * f.target.tau[static_cast<size_t>(a)] * degree[static_cast<size_t>(a)];
  double den = std::abs(h.pairing);
  h.relative_gap = den > 0 ? std::abs(h.measured - h.pairing) / den : std::abs(h.measured);
  return h;
}

RVec degree_by_quadrature(const target::TargetSpace& t, const quasimap::Laurent& p, double r_min, double r_max,
                          double h, int n_theta) {
  surface::ComponentSpec s;
  s.n_r = static_cast<int>(std::lround((r_max - r_min) / h)) + 1;
  s.n_theta = n_theta;
  s.h_r = h;
  s.r_min = r_min;
  auto mesh = surface::build_component(s);
  auto f = quasimap::seed_from_laurent(t, mesh, p);
  RVec F = fields::curvature(f);
  const int k = t.k;
  RVec d(static_cast<size_t>(k), 0.0);
  const double area = mesh.h_r * mesh.h_theta();
  for (int c = 0; c < mesh.cells(); ++c)
    for (int a = 0; a < k; ++a) d[static_cast<size_t>(a)] -= F[static_cast<size_t>(c) * k + a] * area / (2 * kPi);
  return d;
}

void write_decay_csv(const DecayFit& d, std::ostream& os) {
  os << "r,e_r,log_e_r\n";
  for (size_t i = 0; i < d.r.size(); ++i)
    os << fmt(d.r[i]) << ',' << fmt(d.e[i]) << ',' << (d.e[i] > 0 ? fmt(std::log(d.e[i])) : std::string("nan")) << '\n';
}

void write_annulus_csv(const AnnulusCheck& a, std::ostream& os) {
  os << "T,energy,diameter\n";
  for (const auto& r : a.rows) os << fmt(r.T) << ',' << fmt(r.energy) << ',' << fmt(r.diameter) << '\n';
}

void write_quantization_csv(const QuantizationScan& q, std::ostream& os) {
  os << "seed,energy,converged\n";
  for (size_t i = 0; i < q.energies.size(); ++i)
    os << i << ',' << fmt(q.energies[i]) << ',' << (q.converged[i] ? 1 : 0) << '\n';
}

void write_neck_csv(const NeckProfile& p, std::ostream& os) {
  os << "r,rho,e_r\n";
  for (size_t i = 0; i < p.r.size(); ++i) os << fmt(p.r[i]) << ',' << fmt(p.r[i] - p.r_start) << ',' << fmt(p.ring[i]) << '\n';
}

void write_ev_csv(const std::vector<EvRow>& rows, std::ostream& os) {
  size_t n = rows.empty() ? 0 : rows.front().fp.moduli.size();
  os << "index,distance_to_previous";
  for (size_t j = 0; j < n; ++j) os << ",modulus" << j << ",phase" << j;
  os << '\n';
  for (const auto& r : rows) {
    os << r.index << ',' << fmt(r.distance_to_previous);
    for (size_t j = 0; j < n; ++j) os << ',' << fmt(r.fp.moduli[j]) << ',' << fmt(r.fp.phases[j]);
    os << '\n';
  }
}

}  // namespace vortexlab::experiments
