#include "vortexlab/fields.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "vortexlab/error.hpp"

namespace vortexlab::fields {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline Complex phase(double x) { return {std::cos(x), std::sin(x)}; }

}  // namespace

Topology make_topology(const ComponentMesh& m) {
  Topology t;
  const int nt = m.n_theta, nr = m.n_r;
  t.n_theta = nt;
  t.n_sites = m.sites();
  t.n_cells = m.cells();
  const size_t ns = static_cast<size_t>(t.n_sites), nc = static_cast<size_t>(t.n_cells);
  t.site_up.assign(ns, -1);
  t.site_down.assign(ns, -1);
  t.site_right.resize(ns);
  t.site_left.resize(ns);
  t.site_weight.assign(ns, 1.0);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      int s = i * nt + j;
      t.site_right[s] = i * nt + (j + 1) % nt;
      t.site_left[s] = i * nt + (j + nt - 1) % nt;
      if (i + 1 < nr)
        t.site_up[s] = s + nt;
      else if (m.closed)
        t.site_up[s] = (j + m.wrap_shift) % nt;
      if (i > 0)
        t.site_down[s] = s - nt;
      else if (m.closed)
        t.site_down[s] = (nr - 1) * nt + ((j - m.wrap_shift) % nt + nt) % nt;
      if (!m.closed && (i == 0 || i == nr - 1)) t.site_weight[s] = 0.5;
    }
  t.cell_up.assign(nc, -1);
  t.cell_down.assign(nc, -1);
  t.cell_right.resize(nc);
  t.cell_left.resize(nc);
  t.corner01.resize(nc);
  t.corner10.resize(nc);
  t.corner11.resize(nc);
  auto is_cell = [&](int s) { return s >= 0 && s < t.n_cells; };
  for (int c = 0; c < t.n_cells; ++c) {
    t.cell_right[c] = t.site_right[c];
    t.cell_left[c] = t.site_left[c];
    int up = t.site_up[c];
    t.corner01[c] = t.site_right[c];
    t.corner10[c] = up;
    t.corner11[c] = t.site_right[up];
    if (is_cell(up)) t.cell_up[c] = up;
    int dn = t.site_down[c];
    if (is_cell(dn)) t.cell_down[c] = dn;
  }
  for (auto& a : t.around) a.assign(ns, -1);
  for (int s = 0; s < t.n_sites; ++s) {
    int l = t.site_left[s];
    int d = t.site_down[s];
    if (is_cell(s)) t.around[0][s] = s;
    if (is_cell(l)) t.around[1][s] = l;
    if (d >= 0 && is_cell(d)) {
      t.around[2][s] = d;
      t.around[3][s] = t.site_left[d];
    }
  }
  return t;
}

GaugedField zero_field(const ComponentMesh& m, const TargetSpace& t) {
  GaugedField f;
  f.mesh = m;
  f.target = t;
  f.a_r.assign(static_cast<size_t>(m.sites()) * t.k, 0.0);
  f.a_theta.assign(static_cast<size_t>(m.sites()) * t.k, 0.0);
  f.u.assign(static_cast<size_t>(m.sites()) * t.n, Complex(0, 0));
  f.twist.assign(static_cast<size_t>(t.k), 0.0);
  return f;
}

GaugedField constant_field(const ComponentMesh& m, const TargetSpace& t, const CVec& v) {
  if (static_cast<int>(v.size()) != t.n) throw InvalidArgument("constant_field: wrong vector size");
  GaugedField f = zero_field(m, t);
  for (int s = 0; s < m.sites(); ++s)
    for (int j = 0; j < t.n; ++j) f.u[static_cast<size_t>(s) * t.n + j] = v[j];
  return f;
}

void check_finite(const GaugedField& f) {
  for (double x : f.a_r)
    if (!std::isfinite(x)) throw NumericalError("field: non-finite connection component");
  for (double x : f.a_theta)
    if (!std::isfinite(x)) throw NumericalError("field: non-finite connection component");
  for (const auto& z : f.u)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericalError("field: non-finite section value");
}

RVec curvature(const GaugedField& f) {
  const Topology t = make_topology(f.mesh);
  const int k = f.k();
  const double hr = f.mesh.h_r, ht = f.mesh.h_theta();
  RVec F(static_cast<size_t>(t.n_cells) * k);
  for (int c = 0; c < t.n_cells; ++c) {
    int s01 = t.corner01[c], s10 = t.corner10[c];
    for (int a = 0; a < k; ++a) {
      double dth = (f.a_theta[s10 * k + a] - f.a_theta[c * k + a]) / hr;
      double dr = (f.a_r[s01 * k + a] - f.a_r[c * k + a]) / ht;
      F[static_cast<size_t>(c) * k + a] = dth - dr;
    }
  }
  return F;
}

RVec corner_average_moment(const GaugedField& f) {
  const Topology t = make_topology(f.mesh);
  const int k = f.k();
  RVec mu(static_cast<size_t>(f.mesh.sites()) * k);
  for (int s = 0; s < t.n_sites; ++s) target::moment_map(f.target, f.u_at(s), &mu[static_cast<size_t>(s) * k]);
  RVec out(static_cast<size_t>(t.n_cells) * k);
  for (int c = 0; c < t.n_cells; ++c)
    for (int a = 0; a < k; ++a)
      out[static_cast<size_t>(c) * k + a] =
          0.25 * (mu[c * k + a] + mu[t.corner01[c] * k + a] + mu[t.corner10[c] * k + a] + mu[t.corner11[c] * k + a]);
  return out;
}

RVec vortex_residual(const GaugedField& f) {
  RVec F = curvature(f);
  RVec mu = corner_average_moment(f);
  for (size_t i = 0; i < F.size(); ++i) F[i] -= mu[i];
  return F;
}

CVec dbar_residual(const GaugedField& f) {
  const Topology t = make_topology(f.mesh);
  const int k = f.k(), n = f.n();
  const double hr = f.mesh.h_r, ht = f.mesh.h_theta();
  const RVec F = curvature(f);
  CVec out(static_cast<size_t>(t.n_cells) * n);
  RVec ar0(k), ar1(k), at0(k), at1(k), fr(k), ft(k);
  const Complex I(0, 1);
  for (int c = 0; c < t.n_cells; ++c) {
    int s01 = t.corner01[c], s10 = t.corner10[c], s11 = t.corner11[c];
    for (int a = 0; a < k; ++a) {
      ar0[a] = f.a_r[c * k + a];
      ar1[a] = f.a_r[s01 * k + a];
      at0[a] = f.a_theta[c * k + a] + f.twist[a];
      at1[a] = f.a_theta[s10 * k + a] + f.twist[a];
      fr[a] = -F[static_cast<size_t>(c) * k + a] * ht / 4;  // symmetric gauge about the cell corner
      ft[a] = F[static_cast<size_t>(c) * k + a] * hr / 4;
    }
    for (int j = 0; j < n; ++j) {
      double wr0 = f.target.pair(ar0.data(), j), wr1 = f.target.pair(ar1.data(), j);
      double wt0 = f.target.pair(at0.data(), j), wt1 = f.target.pair(at1.data(), j);
      Complex pr0 = phase(hr * wr0), pt0 = phase(ht * wt0);
      Complex U00 = f.u_at(c)[j];
      Complex U10 = pr0 * f.u_at(s10)[j];
      Complex U01 = pt0 * f.u_at(s01)[j];
      Complex U11 = 0.5 * (pr0 * phase(ht * wt1) + pt0 * phase(hr * wr1)) * f.u_at(s11)[j];
      Complex dr = 0.5 * ((U10 - U00) + (U11 - U01)) / hr;
      Complex dt = 0.5 * ((U01 - U00) + (U11 - U10)) / ht;
      Complex uc = 0.25 * (U00 + U01 + U10 + U11);
      Complex Dr = dr + I * f.target.pair(fr.data(), j) * uc;
      Complex Dt = dt + I * f.target.pair(ft.data(), j) * uc;
      out[static_cast<size_t>(c) * n + j] = 0.5 * (Dr + I * Dt);
    }
  }
  return out;
}

EnergyReport energy(const GaugedField& f, const surface::CoreSleeve* cover) {
  const ComponentMesh& m = f.mesh;
  const Topology t = make_topology(m);
  const int k = f.k(), n = f.n();
  const double hr = m.h_r, ht = m.h_theta(), A = hr * ht;
  const RVec F = curvature(f);
  RVec contrib(static_cast<size_t>(t.n_sites), 0.0);  // weighted contributions, divide by site weight
  RVec at(k), mu(k);
  for (int s = 0; s < t.n_sites; ++s) {
    const double w = t.site_weight[s];
    double site = 0;
    for (int a = 0; a < k; ++a) at[a] = f.a_theta[s * k + a] + f.twist[a];
    int sr = t.site_right[s];
    for (int j = 0; j < n; ++j) {
      Complex d = (phase(ht * f.target.pair(at.data(), j)) * f.u_at(sr)[j] - f.u_at(s)[j]) / ht;
      site += std::norm(d);
    }
    target::moment_map(f.target, f.u_at(s), mu.data());
    for (int a = 0; a < k; ++a) site += mu[a] * mu[a];
    contrib[s] += 0.5 * w * site;
    int su = t.site_up[s];
    if (su >= 0) {
      double link = 0;
      for (int j = 0; j < n; ++j) {
        Complex d = (phase(hr * f.target.pair(&f.a_r[static_cast<size_t>(s) * k], j)) * f.u_at(su)[j] - f.u_at(s)[j]) / hr;
        link += std::norm(d);
      }
      contrib[s] += 0.25 * link;
      contrib[su] += 0.25 * link;
    }
  }
  for (int c = 0; c < t.n_cells; ++c) {
    double q = 0;
    for (int a = 0; a < k; ++a) q += F[static_cast<size_t>(c) * k + a] * F[static_cast<size_t>(c) * k + a];
    q *= 0.5 * 0.25;
    contrib[c] += q;
    contrib[t.corner01[c]] += q;
    contrib[t.corner10[c]] += q;
    contrib[t.corner11[c]] += q;
  }
  EnergyReport e;
  e.density.resize(contrib.size());
  e.ring.assign(static_cast<size_t>(m.n_r), 0.0);
  double total = 0;
  for (int s = 0; s < t.n_sites; ++s) {
    e.density[s] = contrib[s] / t.site_weight[s];
    total += contrib[s] * A;
    e.ring[static_cast<size_t>(s / m.n_theta)] += e.density[s] * ht;
  }
  e.total = total;
  e.partials["total"] = total;
  if (cover) {
    if (cover->lattice != surface::Lattice::sites || cover->n_rows != m.n_r)
      throw InvalidArgument("energy: cover must live on the site rows of this mesh");
    auto row_energy = [&](int row) {
      double w = m.closed ? 1.0 : ((row == 0 || row == m.n_r - 1) ? 0.5 : 1.0);
      return e.ring[static_cast<size_t>(row)] * w * hr;
    };
    double core = 0;
    for (int row = 0; row < m.n_r; ++row)
      if (cover->in_core(row)) core += row_energy(row);
    e.partials["core"] = core;
    for (size_t si = 0; si < cover->sleeves.size(); ++si) {
      const auto& sl = cover->sleeves[si];
      double acc = 0;
      for (int q = 0; q < sl.row_count; ++q) acc += row_energy(cover->wrap(sl.row_begin + q));
      e.partials["sleeve_" + std::to_string(sl.edge)] += acc;
    }
    for (const auto& p : cover->pieces) {
      double acc = 0;
      for (int q = 0; q < p.row_count; ++q) acc += p.weight[static_cast<size_t>(q)] * row_energy(cover->wrap(p.row_begin + q));
      e.partials["vertex_" + std::to_string(p.vertex)] += acc;
    }
  }
  return e;
}

double energy_between(const EnergyReport& e, const ComponentMesh& m, double r0, double r1) {
  if (r1 < r0) std::swap(r0, r1);
  int b = static_cast<int>(std::ceil((r0 - m.r_min) / m.h_r - 1e-9));
  int en = static_cast<int>(std::floor((r1 - m.r_min) / m.h_r + 1e-9));
  b = std::max(b, 0);
  en = std::min(en, m.n_r - 1);
  if (en <= b) return 0.0;
  double acc = 0;
  for (int i = b; i <= en; ++i) acc += e.ring[static_cast<size_t>(i)] * ((i == b || i == en) ? 0.5 : 1.0);
  return acc * m.h_r;
}

GaugedField apply_unitary_gauge(const GaugedField& f, const RVec& phi) {
  const Topology t = make_topology(f.mesh);
  const int k = f.k(), n = f.n();
  if (phi.size() != static_cast<size_t>(t.n_sites) * k) throw InvalidArgument("apply_unitary_gauge: wrong size");
  GaugedField g = f;
  const double hr = f.mesh.h_r, ht = f.mesh.h_theta();
  for (int s = 0; s < t.n_sites; ++s) {
    for (int j = 0; j < n; ++j) g.u_at(s)[j] *= phase(f.target.pair(&phi[static_cast<size_t>(s) * k], j));
    int su = t.site_up[s], sr = t.site_right[s];
    for (int a = 0; a < k; ++a) {
      if (su >= 0) g.a_r[s * k + a] -= (phi[su * k + a] - phi[s * k + a]) / hr;
      g.a_theta[s * k + a] -= (phi[sr * k + a] - phi[s * k + a]) / ht;
    }
  }
  return g;
}

RVec site_average(const ComponentMesh& m, const Topology& t, const RVec& xi, int k) {
  RVec out(static_cast<size_t>(t.n_sites) * k, 0.0);
  for (int s = 0; s < t.n_sites; ++s) {
    int row = s / m.n_theta;
    if (!m.closed && (row == 0 || row == m.n_r - 1)) continue;  // antisymmetric ghosts cancel
    for (int a = 0; a < k; ++a) {
      double acc = 0;
      for (int q = 0; q < 4; ++q) acc += xi[static_cast<size_t>(t.around[q][s]) * k + a];
      out[static_cast<size_t>(s) * k + a] = 0.25 * acc;
    }
  }
  return out;
}

GaugedField apply_complex_gauge(const GaugedField& f, const RVec& xi) {
  const ComponentMesh& m = f.mesh;
  const Topology t = make_topology(m);
  const int k = f.k(), n = f.n();
  if (xi.size() != static_cast<size_t>(t.n_cells) * k) throw InvalidArgument("apply_complex_gauge: wrong size");
  GaugedField g = f;
  const double hr = m.h_r, ht = m.h_theta();
  RVec bar = site_average(m, t, xi, k);
  for (int s = 0; s < t.n_sites; ++s) {
    for (int j = 0; j < n; ++j) g.u_at(s)[j] *= std::exp(-f.target.pair(&bar[static_cast<size_t>(s) * k], j));
    int above = s < t.n_cells ? s : -1;
    int below = t.site_down[s];
    if (below >= t.n_cells) below = -1;
    for (int a = 0; a < k; ++a) {
      if (above >= 0) {  // r-link s -> up(s) separates cells left(s) and s
        g.a_r[s * k + a] += (xi[above * k + a] - xi[t.site_left[s] * k + a]) / ht;
      }
      double xa = above >= 0 ? xi[above * k + a] : (below >= 0 ? -xi[below * k + a] : 0.0);
      double xb = below >= 0 ? xi[below * k + a] : -xa;
      g.a_theta[s * k + a] -= (xa - xb) / hr;
    }
  }
  return g;
}

Holonomy holonomy(const GaugedField& f, int row) {
  const ComponentMesh& m = f.mesh;
  if (row < 0 || row >= m.n_r) throw InvalidArgument("holonomy: row out of range");
  const int k = f.k();
  Holonomy h;
  h.lift.assign(static_cast<size_t>(k), 0.0);
  h.reduced.resize(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) {
    double acc = 0;
    for (int j = 0; j < m.n_theta; ++j) acc += f.a_theta[static_cast<size_t>(row * m.n_theta + j) * k + a];
    h.lift[a] = f.twist[a] + acc * m.h_theta() / (2 * kPi);
    h.reduced[a] = h.lift[a] - std::round(h.lift[a]);
  }
  return h;
}

CVec ring_average(const GaugedField& f, int row) {
  const ComponentMesh& m = f.mesh;
  const int k = f.k(), n = f.n();
  const double ht = m.h_theta();
  RVec acc_a(static_cast<size_t>(k), 0.0);
  CVec avg(static_cast<size_t>(n), Complex(0, 0));
  for (int j = 0; j < m.n_theta; ++j) {
    int s = row * m.n_theta + j;
    for (int q = 0; q < n; ++q) avg[q] += phase(ht * f.target.pair(acc_a.data(), q)) * f.u_at(s)[q];
    for (int a = 0; a < k; ++a) acc_a[a] += f.a_theta[static_cast<size_t>(s) * k + a] + f.twist[a];
  }
  for (auto& z : avg) z /= m.n_theta;
  return avg;
}

target::Fingerprint limit_orbit(const GaugedField& f, End end) {
  int row = end == End::lower ? 0 : f.mesh.n_r - 1;
  if (f.mesh.closed) throw InvalidArgument("limit_orbit: closed mesh has no ends");
  CVec v = ring_average(f, row);
  double mx = 0;
  for (auto& z : v) mx = std::max(mx, std::abs(z));
  if (!(mx > 0)) throw PreconditionError("limit_orbit: end value vanishes");
  if (auto lam = target::destabilizing_direction(f.target, v, 1e-8))
    throw PreconditionError("limit_orbit: end value is not semistable");
  return target::orbit_fingerprint(f.target, v);
}

int winding(const GaugedField& f, int row, int coord) {
  const ComponentMesh& m = f.mesh;
  const int k = f.k();
  double total = 0;
  for (int j = 0; j < m.n_theta; ++j) {
    int s = row * m.n_theta + j;
    int sr = row * m.n_theta + (j + 1) % m.n_theta;
    Complex a = f.u_at(s)[coord], b = f.u_at(sr)[coord];
    if (std::abs(a) == 0 || std::abs(b) == 0) throw PreconditionError("winding: section vanishes on ring");
    total += std::arg(b / a);
  }
  (void)k;
  return static_cast<int>(std::lround(total / (2 * kPi)));
}

std::uint64_t mesh_hash(const ComponentMesh& m) {
  std::ostringstream os;
  os.precision(17);
  os << m.vertex << ' ' << m.n_r << ' ' << m.n_theta << ' ' << m.h_r << ' ' << m.r_min << ' ' << m.closed << ' '
     << m.wrap_shift;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string snapshot_header(const GaugedField& f) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"schema_version\":1,\"n_r\":" << f.mesh.n_r << ",\"n_theta\":" << f.mesh.n_theta
     << ",\"h_r\":" << f.mesh.h_r << ",\"r_min\":" << f.mesh.r_min << ",\"closed\":" << (f.mesh.closed ? "true" : "false")
     << ",\"n\":" << f.n() << ",\"k\":" << f.k() << ",\"mesh_hash\":\"" << std::hex << mesh_hash(f.mesh) << "\"}";
  return os.str();
}

void write_snapshot_csv(const GaugedField& f, std::ostream& os) {
  const int k = f.k(), n = f.n();
  os << "# " << snapshot_header(f) << "\n";
  os << "i,j,r,theta";
  for (int a = 0; a < k; ++a) os << ",a_r" << a << ",a_theta" << a;
  for (int j = 0; j < n; ++j) os << ",re_u" << j << ",im_u" << j;
  os << "\n";
  char buf[64];
  for (int s = 0; s < f.mesh.sites(); ++s) {
    int i = s / f.mesh.n_theta, j = s % f.mesh.n_theta;
    os << i << ',' << j;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", f.mesh.r(i), f.mesh.theta(j));
    os << buf;
    for (int a = 0; a < k; ++a) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", f.a_r[static_cast<size_t>(s) * k + a],
                    f.a_theta[static_cast<size_t>(s) * k + a]);
      os << buf;
    }
    for (int q = 0; q < n; ++q) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", f.u_at(s)[q].real(), f.u_at(s)[q].imag());
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace vortexlab::fields
