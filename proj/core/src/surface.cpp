#include "vortexlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "vortexlab/error.hpp"

namespace vortexlab::surface {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

bool near_integer(double x, long& out) {
  out = std::lround(x);
  return std::abs(x - static_cast<double>(out)) <= 1e-7;
}

}  // namespace

double ComponentMesh::h_theta() const { return kTwoPi / n_theta; }

double ComponentMesh::area() const {
  double len = closed ? n_r * h_r : (n_r - 1) * h_r;
  return len * kTwoPi;
}

int ComponentMesh::row_of(double r) const {
  int i = static_cast<int>(std::lround((r - r_min) / h_r));
  return std::clamp(i, 0, n_r - 1);
}

ComponentMesh build_component(const ComponentSpec& spec) {
  if (spec.n_r < 8) throw InvalidArgument("component mesh: N_r must be >= 8");
  if (spec.n_theta < 8) throw InvalidArgument("component mesh: N_theta must be >= 8");
  if (!(spec.h_r > 0) || !std::isfinite(spec.h_r)) throw InvalidArgument("component mesh: h_r must be > 0");
  if (!std::isfinite(spec.r_min)) throw InvalidArgument("component mesh: r_min must be finite");
  ComponentMesh m;
  m.vertex = spec.vertex;
  m.n_r = spec.n_r;
  m.n_theta = spec.n_theta;
  m.h_r = spec.h_r;
  m.r_min = spec.r_min;
  m.lower = spec.lower;
  m.upper = spec.upper;
  m.lower.orientation = -1;
  m.upper.orientation = +1;
  return m;
}

ComponentMesh cylinder(double R, double h_r, int n_theta, int vertex) {
  long steps;
  if (!near_integer(2 * R / h_r, steps)) throw InvalidArgument("cylinder: 2R must be a multiple of h_r");
  ComponentSpec s;
  s.vertex = vertex;
  s.n_r = static_cast<int>(steps) + 1;
  s.n_theta = n_theta;
  s.h_r = h_r;
  s.r_min = -R;
  return build_component(s);
}

std::pair<double, double> identify_plus_to_minus(const Gluing& g, double rho, double theta) {
  double th = std::fmod(theta - g.twist, kTwoPi);
  if (th < 0) th += kTwoPi;
  return {rho - g.L, th};
}

std::pair<double, double> identify_minus_to_plus(const Gluing& g, double rho, double theta) {
  double th = std::fmod(theta + g.twist, kTwoPi);
  if (th < 0) th += kTwoPi;
  return {rho + g.L, th};
}

GluedSurface glue(const std::map<int, ComponentMesh>& components, const modgraph::ModularGraph& graph,
                  const std::map<int, std::complex<double>>& delta, double sleeve_width) {
  modgraph::validate(graph);
  if (!(sleeve_width > 0)) throw InvalidArgument("glue: sleeve width must be > 0");
  GluedSurface s;
  s.graph = graph;
  s.components = components;
  s.sleeve_width = sleeve_width;
  for (auto& [v, m] : components)
    if (!graph.has_vertex(v)) throw InvalidArgument("glue: component for unknown vertex " + std::to_string(v));

  // socket bookkeeping: every socket must anchor an existing edge, each edge end once
  std::map<int, int> plus_of, minus_of;
  for (auto& [v, m] : components) {
    for (const EndDescriptor* end : {&m.lower, &m.upper}) {
      if (end->kind != EndKind::socket) continue;
      if (end->anchor < 0 || end->anchor >= graph.edge_count())
        throw InvalidArgument("glue: socket of vertex " + std::to_string(v) + " anchors unknown edge " +
                              std::to_string(end->anchor));
      auto& slot = end->orientation > 0 ? plus_of : minus_of;
      if (slot.count(end->anchor))
        throw InvalidArgument("glue: edge " + std::to_string(end->anchor) + " consumed twice");
      slot[end->anchor] = v;
    }
  }

  for (auto& [e, d] : delta)
    if (e < 0 || e >= graph.edge_count()) throw InvalidArgument("glue: delta for unknown edge " + std::to_string(e));

  for (int e = 0; e < graph.edge_count(); ++e) {
    Gluing g;
    g.edge = e;
    auto it = delta.find(e);
    g.delta = it == delta.end() ? std::complex<double>(0, 0) : it->second;
    g.plus_vertex = plus_of.count(e) ? plus_of[e] : -1;
    g.minus_vertex = minus_of.count(e) ? minus_of[e] : -1;
    if (std::abs(g.delta) == 0) {
      g.broken = true;
      s.gluings[e] = g;
      continue;
    }
    if (std::abs(g.delta) > 1 + 1e-12) throw InvalidArgument("glue: |delta| must lie in (0,1]");
    if (g.plus_vertex < 0 || g.minus_vertex < 0)
      throw InvalidArgument("glue: edge " + std::to_string(e) + " lacks a socket pair on meshed components");
    const auto& mp = components.at(g.plus_vertex);
    const auto& mm = components.at(g.minus_vertex);
    if (mp.n_theta != mm.n_theta || std::abs(mp.h_r - mm.h_r) > 1e-12)
      throw InvalidArgument("glue: components across edge " + std::to_string(e) + " have different grids");
    g.L = -std::log(std::abs(g.delta));
    double t = std::fmod(-std::arg(g.delta), kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t > kTwoPi - 1e-12) t = 0;
    g.twist = t;
    long ls, ts;
    if (!near_integer(g.L / mp.h_r, ls))
      throw InvalidArgument("glue: neck length of edge " + std::to_string(e) + " is not a multiple of h_r");
    if (!near_integer(g.twist / mp.h_theta(), ts))
      throw InvalidArgument("glue: twist of edge " + std::to_string(e) + " is not a multiple of h_theta");
    g.L_steps = static_cast<int>(ls);
    g.twist_steps = static_cast<int>(ts % mp.n_theta);
    g.L = g.L_steps * mp.h_r;
    g.twist = g.twist_steps * mp.h_theta();
    if (g.L < 2 * sleeve_width)
      throw PreconditionError("glue: neck " + std::to_string(e) + " too short for sleeve width (L=" +
                              std::to_string(g.L) + " < 2*Delta)");
    s.gluings[e] = g;
  }

  // glued up/down links between components
  std::map<int, int> up_edge, down_edge;
  for (auto& [e, g] : s.gluings) {
    if (g.broken) continue;
    up_edge[g.plus_vertex] = e;
    down_edge[g.minus_vertex] = e;
  }

  std::set<int> placed;
  auto assemble = [&](int start, bool closed) {
    AssembledChain ch;
    const ComponentMesh& first = components.at(start);
    double h = first.h_r;
    long dummy;
    double offset = 0;
    int shift = 0;
    int v = start;
    double r_lo = closed ? 0.0 : first.r_min;
    if (!closed && up_edge.count(start) && !near_integer(first.r_min / h, dummy))
      throw InvalidArgument("glue: r_min of vertex " + std::to_string(start) + " is not a multiple of h_r");
    for (;;) {
      placed.insert(v);
      ch.segments.push_back({v, offset, shift});
      if (!up_edge.count(v)) break;
      const Gluing& g = s.gluings.at(up_edge.at(v));
      ch.necks.push_back({g.edge, v, g.minus_vertex, offset, g.L, g.twist_steps});
      offset += g.L;
      shift = (shift + g.twist_steps) % first.n_theta;
      v = g.minus_vertex;
      if (v == start) break;
    }
    ComponentMesh m = first;
    m.vertex = start;
    m.r_min = r_lo;
    if (closed) {
      m.closed = true;
      m.n_r = static_cast<int>(std::lround(offset / h));
      m.wrap_shift = (first.n_theta - shift) % first.n_theta;
      m.lower = {EndKind::socket, ch.necks.back().edge, -1};
      m.upper = {EndKind::socket, ch.necks.back().edge, +1};
    } else {
      const ComponentMesh& last = components.at(ch.segments.back().vertex);
      double r_hi = last.r_max() + ch.segments.back().r_offset;
      m.n_r = static_cast<int>(std::lround((r_hi - r_lo) / h)) + 1;
      m.upper = last.upper;
    }
    if (m.n_r < 8) throw InvalidArgument("glue: assembled grid too short");
    ch.mesh = m;
    s.chains.push_back(std::move(ch));
  };

  for (auto& [v, m] : components)
    if (!down_edge.count(v)) assemble(v, false);
  for (auto& [v, m] : components)
    if (!placed.count(v)) assemble(v, true);
  return s;
}

double CutoffProfile::operator()(double x) const {
  double h = 0.5 * width;
  if (x <= -h) return 0.0;
  if (x >= h) return 1.0;
  double t = (x + h) / width;
  return t * t * (3.0 - 2.0 * t);
}

std::vector<std::pair<double, double>> CutoffProfile::table(int samples) const {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < samples; ++i) {
    double x = -0.5 * width + width * i / std::max(1, samples - 1);
    out.emplace_back(x, (*this)(x));
  }
  return out;
}

CutoffProfile cutoff_profile(double width) {
  if (!(width > 0)) throw InvalidArgument("cutoff_profile: width must be > 0");
  return CutoffProfile{width};
}

int CoreSleeve::wrap(int row) const {
  if (!closed) return row;
  int r = row % n_rows;
  return r < 0 ? r + n_rows : r;
}

double CoreSleeve::weight_sum(int row) const {
  double acc = 0;
  for (const auto& p : pieces)
    for (int q = 0; q < p.row_count; ++q)
      if (wrap(p.row_begin + q) == row) acc += p.weight[static_cast<size_t>(q)];
  return acc;
}

CoreSleeve core_sleeve(const AssembledChain& chain, double sleeve_width, Lattice lattice) {
  const ComponentMesh& m = chain.mesh;
  CoreSleeve cs;
  cs.lattice = lattice;
  cs.closed = m.closed;
  cs.n_theta = m.n_theta;
  cs.n_rows = lattice == Lattice::sites ? m.n_r : m.cell_rows();
  cs.row_sleeve.assign(static_cast<size_t>(cs.n_rows), -1);
  const double h = m.h_r;
  const double off = lattice == Lattice::sites ? 0.0 : 0.5;
  const double eps = 1e-9 * h;
  auto radius = [&](int row) { return m.r_min + (row + off) * h; };  // unwrapped
  auto first_row_at_or_above = [&](double r) {
    return static_cast<int>(std::ceil((r - m.r_min) / h - off - 1e-9));
  };
  auto last_row_at_or_below = [&](double r) {
    return static_cast<int>(std::floor((r - m.r_min) / h - off + 1e-9));
  };
  const double D = sleeve_width;
  CutoffProfile phi{D};

  for (const auto& n : chain.necks)
    if (n.L < 2 * D) throw PreconditionError("core_sleeve: sleeve wider than neck");

  const int np = static_cast<int>(chain.segments.size());
  for (size_t s = 0; s < chain.necks.size(); ++s) {
    const Neck& n = chain.necks[s];
    Sleeve sl;
    sl.edge = n.edge;
    sl.lower_piece = static_cast<int>(s);
    sl.upper_piece = static_cast<int>((s + 1) % np);
    sl.rho_begin = 0.5 * (n.L - D);
    sl.rho_end = 0.5 * (n.L + D);
    sl.L = n.L;
    sl.twist = n.twist_steps * m.h_theta();
    sl.row_begin = first_row_at_or_above(n.r_start + sl.rho_begin);
    sl.row_count = last_row_at_or_below(n.r_start + sl.rho_end) - sl.row_begin + 1;
    for (int q = 0; q < sl.row_count; ++q) cs.row_sleeve[static_cast<size_t>(cs.wrap(sl.row_begin + q))] = static_cast<int>(s);
    cs.sleeves.push_back(sl);
  }

  const double period = m.closed ? m.n_r * h : 0.0;
  for (int p = 0; p < np; ++p) {
    Piece pc;
    pc.vertex = chain.segments[static_cast<size_t>(p)].vertex;
    const Neck* lower = nullptr;
    const Neck* upper = nullptr;
    double lower_start = 0;
    if (p > 0) {
      lower = &chain.necks[static_cast<size_t>(p - 1)];
      lower_start = lower->r_start;
    } else if (m.closed) {
      lower = &chain.necks.back();
      lower_start = lower->r_start - period;
    }
    if (p < static_cast<int>(chain.necks.size())) upper = &chain.necks[static_cast<size_t>(p)];
    double r_lo = lower ? lower_start + 0.5 * (lower->L - D) : -1e300;
    double r_hi = upper ? upper->r_start + 0.5 * (upper->L + D) : 1e300;
    int b = lower ? first_row_at_or_above(r_lo) : 0;
    int e = upper ? last_row_at_or_below(r_hi) : cs.n_rows - 1;
    pc.row_begin = b;
    pc.row_count = e - b + 1;
    for (int row = b; row <= e; ++row) {
      double r = radius(row);
      double w = 1.0;
      if (lower && r <= lower_start + 0.5 * (lower->L + D) + eps)
        w = phi(r - lower_start - 0.5 * lower->L);
      else if (upper && r >= upper->r_start + 0.5 * (upper->L - D) - eps)
        w = 1.0 - phi(r - upper->r_start - 0.5 * upper->L);
      pc.weight.push_back(w);
    }
    cs.pieces.push_back(std::move(pc));
  }
  return cs;
}

}  // namespace vortexlab::surface
