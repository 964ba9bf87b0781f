#include "vortexlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/experiments.hpp"
#include "vortexlab/stats.hpp"

namespace vortexlab::runner {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

quasimap::QuasimapData quasimap_or_default(const config::RunConfig& c) {
  return c.quasimap ? *c.quasimap : config::default_quasimap(c);
}

// experiments that act on one cylinder
int single_vertex(const quasimap::QuasimapData& q, const std::string& sub) {
  if (q.vertices.size() != 1)
    throw ConfigError(sub + ": needs a quasimap with exactly one vertex (got " + std::to_string(q.vertices.size()) +
                      ")");
  return q.vertices.begin()->first;
}

solver::SolveResult solve_vertex(const config::RunConfig& c, const quasimap::QuasimapData& q, int v) {
  auto mesh = quasimap::component_mesh(q, v);
  auto seed = quasimap::build_seed(q, v, mesh);
  auto res = solver::newton_solve(seed, c.solve);
  if (!res.report.converged) throw NumericalError("solve of vertex " + std::to_string(v) + " did not converge");
  return res;
}

json fingerprint_json(const target::Fingerprint& fp) {
  return {{"moduli", fp.moduli}, {"phases", fp.phases}, {"pivots", fp.pivots}};
}

std::string csv_of(void (*writer)(const experiments::DecayFit&, std::ostream&), const experiments::DecayFit& d) {
  std::ostringstream os;
  writer(d, os);
  return os.str();
}

std::string L_name(double L) {
  std::ostringstream os;
  os << "neck_L" << std::setprecision(6) << L << ".csv";
  return os.str();
}

// ---- subcommands ----

Results do_solve(const config::RunConfig& c) {
  Results r;
  auto q = quasimap_or_default(c);
  quasimap::CorrespondenceConfig cc;
  cc.solve = c.solve;
  cc.threads = c.threads;
  cc.throw_on_gap = false;
  auto fam = quasimap::correspondence(q, cc);
  json s = json::parse(quasimap::to_json(fam));
  s.erase("schema_version");
  json reports = json::array();
  for (const auto& comp : fam.components) {
    reports.push_back(json::parse(solver::to_json(comp.solve.report)));
    std::ostringstream os;
    fields::write_snapshot_csv(comp.solve.field, os);
    r.tables.emplace_back("field_v" + std::to_string(comp.vertex) + ".csv", os.str());
    if (!comp.solve.report.converged) r.failures.push_back("vertex " + std::to_string(comp.vertex) + " not converged");
  }
  s["reports"] = reports;
  bool converged = true;
  for (const auto& comp : fam.components) converged = converged && comp.solve.report.converged;
  s["converged"] = converged;
  for (const auto& e : fam.edges)
    if (!e.ok) r.failures.push_back("connectedness gap at edge " + std::to_string(e.edge));
  r.summary = s.dump();
  return r;
}

Results do_decay(const config::RunConfig& c) {
  Results r;
  auto q = quasimap_or_default(c);
  int v = single_vertex(q, "decay");
  auto res = solve_vertex(c, q, v);
  auto d = experiments::decay_fit(res.field, c.decay.end, c.decay.r0, c.decay.r1);
  json s;
  s["end"] = c.decay.end == fields::End::upper ? "upper" : "lower";
  s["window"] = {d.r0, d.r1};
  s["gamma_hat"] = d.gamma;
  s["C"] = d.C;
  s["r2"] = d.r2;
  s["accepted"] = d.accepted;
  s["note"] = d.note;
  s["energy"] = res.report.final_energy;
  r.summary = s.dump();
  r.tables.emplace_back("decay.csv", csv_of(experiments::write_decay_csv, d));
  if (!d.accepted) r.failures.push_back("decay fit rejected: " + d.note);
  return r;
}

Results do_annulus(const config::RunConfig& c) {
  Results r;
  auto q = quasimap_or_default(c);
  int v = single_vertex(q, "annulus");
  auto res = solve_vertex(c, q, v);
  auto a = experiments::annulus_check(res.field, c.annulus.T, c.annulus.energy_threshold);
  json s;
  s["energy"] = res.report.final_energy;
  s["monotone"] = a.monotone;
  s["delta_hat"] = a.delta_hat;
  s["r2"] = a.r2;
  json rows = json::array();
  for (const auto& row : a.rows) rows.push_back({{"T", row.T}, {"energy", row.energy}, {"diameter", row.diameter}});
  s["rows"] = rows;
  r.summary = s.dump();
  std::ostringstream os;
  experiments::write_annulus_csv(a, os);
  r.tables.emplace_back("annulus.csv", os.str());
  if (!a.monotone) r.failures.push_back("middle energy not monotone in T");
  if (a.r2 < 0.95) r.failures.push_back("log-linear fit R2 below 0.95");
  return r;
}

// even indices: constants; odd: one zero on the first coordinate
std::vector<quasimap::Laurent> random_seeds(const config::RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> mod(0.5, 2.0), ph(0.0, 2 * kPi), pos(-0.25 * c.surface.R, 0.25 * c.surface.R);
  std::vector<quasimap::Laurent> out;
  const int n = c.target.n;
  for (int i = 0; i < c.quantize.count; ++i) {
    quasimap::Laurent p;
    for (int j = 0; j < n; ++j) p.coefficients.push_back(std::polar(mod(rng), ph(rng)));
    p.zeros.assign(static_cast<size_t>(n), {});
    if (i % 2 == 1) p.zeros[0].push_back({pos(rng), ph(rng)});
    out.push_back(p);
  }
  return out;
}

Results do_quantize(const config::RunConfig& c) {
  Results r;
  auto mesh = surface::cylinder(c.surface.R, c.surface.h_r, c.surface.n_theta);
  auto seeds = c.quantize.seeds.empty() ? random_seeds(c) : c.quantize.seeds;
  auto qs = experiments::quantization_scan(c.target, mesh, seeds, c.solve, c.threads, c.quantize.epsilon0);
  json s;
  s["seeds"] = seeds.size();
  s["energies"] = qs.energies;
  int conv = 0;
  for (bool b : qs.converged) conv += b;
  s["converged"] = conv;
  s["epsilon0"] = qs.epsilon0;
  s["gap"] = qs.gap;
  s["band_empty"] = qs.band_empty;
  r.summary = s.dump();
  std::ostringstream os;
  experiments::write_quantization_csv(qs, os);
  r.tables.emplace_back("quantization.csv", os.str());
  if (!qs.band_empty) r.failures.push_back("energy band (epsilon0, gap/2) is not empty");
  if (conv != static_cast<int>(seeds.size())) r.failures.push_back("some seeds did not converge");
  return r;
}

Results do_neck(const config::RunConfig& c) {
  Results r;
  if (!c.quasimap) throw ConfigError("neck: needs a quasimap block with a glued edge");
  const auto& q = *c.quasimap;
  auto profiles = experiments::neck_family(q, c.neck.edge, c.neck.L, c.solve, c.threads, c.neck.rho_c);
  // smallest energy of a nontrivial vortex: 2 pi min tau
  double gap = 2 * kPi * *std::min_element(q.target.tau.begin(), q.target.tau.end());
  bool seeded = false;
  auto it = q.edges.find(c.neck.edge);
  if (it != q.edges.end())
    for (const auto& zs : it->second.neck_zeros) seeded = seeded || !zs.empty();
  json s;
  s["edge"] = c.neck.edge;
  s["neck_seeded"] = seeded;
  json rows = json::array();
  bool all_conv = true;
  for (const auto& p : profiles) {
    json row{{"L", p.L},           {"r_start", p.r_start},         {"total", p.total},
             {"neck_energy", p.neck_energy}, {"middle_energy", p.middle_energy}, {"m0", p.m0},
             {"converged", p.converged},     {"newton_iterations", p.newton_iterations}};
    auto b = experiments::bubble_locator(p, c.neck.delta, gap, c.neck.min_bubble_energy);
    if (b)
      row["bubble"] = {{"index", b->index}, {"r", b->r}, {"m0", b->m0}, {"delta", b->delta}};
    else
      row["bubble"] = nullptr;
    rows.push_back(row);
    all_conv = all_conv && p.converged;
    std::ostringstream os;
    experiments::write_neck_csv(p, os);
    r.tables.emplace_back(L_name(p.L), os.str());
  }
  s["profiles"] = rows;
  if (!all_conv) r.failures.push_back("some neck family members did not converge");
  double tmin = 1e300, tmax = -1e300;
  for (const auto& p : profiles) tmin = std::min(tmin, p.total), tmax = std::max(tmax, p.total);
  if (!profiles.empty() && tmax - tmin > 0.02 * std::abs(tmax))
    r.failures.push_back("total energy varies with L by more than 2%");
  if (profiles.size() >= 2) {
    // order by L
    std::vector<const experiments::NeckProfile*> by_L;
    for (const auto& p : profiles) by_L.push_back(&p);
    std::sort(by_L.begin(), by_L.end(), [](auto* a, auto* b) { return a->L < b->L; });
    if (seeded) {
      double a = by_L[by_L.size() - 2]->m0, b = by_L.back()->m0;
      double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
      s["m0_relative_change"] = rel;
      if (rel > 0.05) r.failures.push_back("m0 not stable within 5% between the two largest L");
    } else {
      for (size_t i = 1; i < by_L.size(); ++i)
        if (!(by_L[i]->middle_energy < by_L[i - 1]->middle_energy))
          r.failures.push_back("middle neck energy does not decrease with L");
    }
  }
  r.summary = s.dump();
  return r;
}

Results do_ev(const config::RunConfig& c) {
  Results r;
  auto base = quasimap_or_default(c);
  std::vector<quasimap::QuasimapData> sweep;
  for (double step : c.ev.steps) {
    auto q = base;
    auto& zs = q.vertices.at(c.ev.vertex).zeros.at(static_cast<size_t>(c.ev.coordinate));
    if (c.ev.zero >= static_cast<int>(zs.size())) throw ConfigError("ev: no such zero to move");
    zs[static_cast<size_t>(c.ev.zero)] += Complex(step, 0);
    sweep.push_back(q);
  }
  auto rows = experiments::ev_continuity(sweep, c.ev.leg, c.solve, c.threads);
  json s;
  s["leg"] = c.ev.leg;
  json jr = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    jr.push_back({{"step", c.ev.steps[i]},
                  {"fingerprint", fingerprint_json(rows[i].fp)},
                  {"distance_to_previous", rows[i].distance_to_previous}});
    for (double x : rows[i].fp.moduli)
      if (!std::isfinite(x)) r.failures.push_back("non-finite fingerprint at step " + std::to_string(i));
  }
  s["rows"] = jr;
  r.summary = s.dump();
  std::ostringstream os;
  experiments::write_ev_csv(rows, os);
  r.tables.emplace_back("ev.csv", os.str());
  return r;
}

Results do_graph(const config::RunConfig& c) {
  Results r;
  if (!c.graph) throw ConfigError("graph: needs a graph literal (top-level 'graph' or quasimap.graph)");
  const auto& g = *c.graph;
  json s;
  s["graph"] = json::parse(modgraph::to_json(g));
  s["genus"] = modgraph::total_genus(g);
  s["connected"] = modgraph::is_connected(g);
  s["prestable"] = modgraph::is_prestable(g);
  s["stable"] = modgraph::is_stable(g);
  s["canonical_key"] = modgraph::canonical_key(g);
  if (modgraph::is_prestable(g)) {
    auto st = modgraph::stabilize(g);
    s["stabilized"] = json::parse(modgraph::to_json(st));
    s["stabilized_genus"] = modgraph::total_genus(st);
    if (modgraph::total_genus(st) != modgraph::total_genus(g)) r.failures.push_back("stabilize changed the genus");
    try {
      auto dec = modgraph::cyl_chains(g);
      s["cyl_chains"] = dec.chains.size();
    } catch (const PreconditionError& ex) {
      s["cyl_chains"] = nullptr;
      s["cyl_chains_note"] = ex.what();
    }
  }
  r.summary = s.dump();
  return r;
}

Results do_energy(const config::RunConfig& c) {
  Results r;
  auto q = quasimap_or_default(c);
  const double refine = c.energy.quadrature_refine;
  json comps = json::array();
  std::ostringstream os;
  os << "vertex,measured,pairing,relative_gap\n" << std::setprecision(12);
  for (auto& [v, d] : q.vertices) {
    auto res = solve_vertex(c, q, v);
    quasimap::Laurent p{d.coefficients, d.laurent, d.zeros};
    auto deg = experiments::degree_by_quadrature(q.target, p, d.r_min, d.r_max, q.h_r / refine,
                                                 static_cast<int>(std::lround(q.n_theta * refine)));
    // the oracle returns a quadrature value; the class is integral
    RVec rounded;
    for (double x : deg) rounded.push_back(std::round(x));
    auto eh = experiments::energy_homology_check(res.field, rounded);
    comps.push_back({{"vertex", v},
                     {"degree_quadrature", deg},
                     {"degree", rounded},
                     {"measured", eh.measured},
                     {"pairing", eh.pairing},
                     {"relative_gap", eh.relative_gap}});
    os << v << ',' << eh.measured << ',' << eh.pairing << ',' << eh.relative_gap << '\n';
    if (eh.relative_gap > c.energy.max_gap)
      r.failures.push_back("vertex " + std::to_string(v) + ": energy-homology gap above " +
                           std::to_string(c.energy.max_gap));
  }
  json s;
  s["components"] = comps;
  r.summary = s.dump();
  r.tables.emplace_back("energy.csv", os.str());
  return r;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"solve", "decay", "annulus", "quantize", "neck", "ev", "graph", "energy"};
  return names;
}

Results execute(const config::RunConfig& c, const std::string& sub) {
  Results r;
  if (sub == "solve")
    r = do_solve(c);
  else if (sub == "decay")
    r = do_decay(c);
  else if (sub == "annulus")
    r = do_annulus(c);
  else if (sub == "quantize")
    r = do_quantize(c);
  else if (sub == "neck")
    r = do_neck(c);
  else if (sub == "ev")
    r = do_ev(c);
  else if (sub == "graph")
    r = do_graph(c);
  else if (sub == "energy")
    r = do_energy(c);
  else
    throw ConfigError("unknown subcommand '" + sub + "'");
  r.subcommand = sub;
  return r;
}

void emit_report(const Results& r, const config::RunConfig& c, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output directory " + dir + " not writable: " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << text;
    if (!out) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
  };
  json s;
  s["schema_version"] = kSchemaVersion;
  s["subcommand"] = r.subcommand;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config::content_hash(c, r.subcommand);
  s["config_hash"] = hash.str();
  s["seed"] = c.seed;
  s["passed"] = r.failures.empty();
  s["failures"] = r.failures;
  json tables = json::array();
  for (const auto& t : r.tables) tables.push_back(t.first);
  s["tables"] = tables;
  s["results"] = json::parse(r.summary);
  write("summary.json", s.dump(2) + "\n");
  for (const auto& t : r.tables) write(t.first, t.second);
}

Outcome run(const config::RunConfig& c, const std::string& sub, const std::string& out_root) {
  Outcome o;
  try {
    std::ostringstream name;
    name << sub << '-' << std::hex << std::setw(16) << std::setfill('0') << config::content_hash(c, sub);
    o.artifact_dir = (fs::path(out_root) / name.str()).string();
    Results r = execute(c, sub);
    emit_report(r, c, o.artifact_dir);
    if (!r.failures.empty()) {
      o.exit_code = assertion_failed;
      for (const auto& f : r.failures) o.message += "assertion failed: " + f + "\n";
    }
  } catch (const Error& ex) {
    switch (ex.kind()) {
      case ErrorKind::config:
      case ErrorKind::invalid_argument:
        o.exit_code = config_error;
        break;
      case ErrorKind::precondition:
      case ErrorKind::numerical:
        o.exit_code = numerical_failure;
        break;
    }
    o.message = ex.what();
  } catch (const std::exception& ex) {
    o.exit_code = numerical_failure;
    o.message = ex.what();
  }
  return o;
}

}  // namespace vortexlab::runner
