#include "vortexlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vortexlab/error.hpp"

namespace vortexlab::config {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// YAML -> json. Infinite floats survive as the strings "inf"/"-inf" (json has no inf).
json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& x : n) a.push_back(to_json(x));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "~" || s == "null") return nullptr;
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (...) {
  }
  double d;
  if (YAML::convert<double>::decode(n, d)) {
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    if (!std::isnan(d)) return d;
  }
  return s;
}

// Walks the document; every problem is appended, nothing throws until the end.
struct Reader {
  std::vector<std::string> errors;

  void error(const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); }

  void allow(const json& o, const std::string& where, std::initializer_list<const char*> keys) {
    if (!o.is_object()) return;
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto& [k, v] : o.items())
      if (!ok.count(k)) error(where, "unknown key '" + k + "'");
  }

  bool number(const json& v, double& out) {
    if (v.is_number()) {
      out = v.get<double>();
      return true;
    }
    if (v.is_string()) {
      auto s = v.get<std::string>();
      if (s == "inf") return out = kInf, true;
      if (s == "-inf") return out = -kInf, true;
    }
    return false;
  }

  template <class T>
  void get(const json& o, const char* key, const std::string& where, T& out, bool required = false) {
    if (!o.is_object() || !o.contains(key)) {
      if (required) error(where, std::string("missing key '") + key + "'");
      return;
    }
    const json& v = o.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return error(where + "." + key, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return error(where + "." + key, "expected an integer");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!number(v, out)) return error(where + "." + key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return error(where + "." + key, "expected a string");
      out = v.get<std::string>();
    }
  }

  bool complex(const json& v, const std::string& where, Complex& out) {
    double re = 0, im = 0;
    if (number(v, re)) {
      out = {re, 0};
      return true;
    }
    if (v.is_array() && v.size() == 2 && number(v[0], re) && number(v[1], im)) {
      out = {re, im};
      return true;
    }
    error(where, "expected a number or a [re, im] pair");
    return false;
  }

  RVec numbers(const json& v, const std::string& where) {
    RVec out;
    if (!v.is_array()) {
      error(where, "expected a list of numbers");
      return out;
    }
    for (size_t i = 0; i < v.size(); ++i) {
      double x;
      if (number(v[i], x))
        out.push_back(x);
      else
        error(where + "[" + std::to_string(i) + "]", "expected a number");
    }
    return out;
  }

  CVec complexes(const json& v, const std::string& where) {
    CVec out;
    if (!v.is_array()) {
      error(where, "expected a list");
      return out;
    }
    for (size_t i = 0; i < v.size(); ++i) {
      Complex z;
      if (complex(v[i], where + "[" + std::to_string(i) + "]", z)) out.push_back(z);
    }
    return out;
  }

  // per coordinate lists of zeros; a zero is r or [r, theta]
  std::vector<CVec> zero_table(const json& v, const std::string& where) {
    std::vector<CVec> out;
    if (!v.is_array()) {
      error(where, "expected one list of zeros per coordinate");
      return out;
    }
    for (size_t j = 0; j < v.size(); ++j) out.push_back(complexes(v[j], where + "[" + std::to_string(j) + "]"));
    return out;
  }

  std::vector<int> ints(const json& v, const std::string& where) {
    std::vector<int> out;
    if (!v.is_array()) {
      error(where, "expected a list of integers");
      return out;
    }
    for (size_t i = 0; i < v.size(); ++i) {
      if (v[i].is_number_integer())
        out.push_back(v[i].get<int>());
      else
        error(where + "[" + std::to_string(i) + "]", "expected an integer");
    }
    return out;
  }

  quasimap::Laurent laurent(const json& o, const std::string& where, int n) {
    quasimap::Laurent p;
    allow(o, where, {"coefficients", "zeros", "laurent"});
    if (o.contains("coefficients"))
      p.coefficients = complexes(o["coefficients"], where + ".coefficients");
    else
      p.coefficients.assign(static_cast<size_t>(n), Complex(1, 0));
    if (o.contains("zeros"))
      p.zeros = zero_table(o["zeros"], where + ".zeros");
    else
      p.zeros.assign(static_cast<size_t>(n), {});
    if (o.contains("laurent")) p.shift = ints(o["laurent"], where + ".laurent");
    if (static_cast<int>(p.coefficients.size()) != n) error(where, "need " + std::to_string(n) + " coefficients");
    if (static_cast<int>(p.zeros.size()) != n) error(where, "need " + std::to_string(n) + " zero lists");
    if (!p.shift.empty() && static_cast<int>(p.shift.size()) != n)
      error(where, "need " + std::to_string(n) + " laurent shifts");
    return p;
  }

  quasimap::EndRef end_ref(const json& o, const std::string& where) {
    quasimap::EndRef e;
    if (o.is_object() && o.size() == 1 && o.contains("leg") && o["leg"].is_number_integer()) {
      e.kind = quasimap::EndRef::Kind::leg;
      e.id = o["leg"].get<int>();
    } else if (o.is_object() && o.size() == 1 && o.contains("edge") && o["edge"].is_number_integer()) {
      e.kind = quasimap::EndRef::Kind::edge;
      e.id = o["edge"].get<int>();
    } else {
      error(where, "expected {leg: <index>} or {edge: <id>}");
    }
    return e;
  }
};

std::optional<modgraph::ModularGraph> graph_literal(Reader& rd, const json& v, const std::string& where) {
  try {
    return modgraph::from_json(v.is_string() ? v.get<std::string>() : v.dump());
  } catch (const Error& ex) {
    rd.error(where, ex.what());
  }
  return std::nullopt;
}

void read_quasimap(Reader& rd, const json& o, RunConfig& c) {
  const std::string where = "quasimap";
  if (!o.is_object()) return rd.error(where, "expected a block");
  rd.allow(o, where, {"graph", "h_r", "n_theta", "sleeve_width", "vertices", "edges"});
  quasimap::QuasimapData q;
  q.target = c.target;
  q.h_r = c.surface.h_r;
  q.n_theta = c.surface.n_theta;
  q.sleeve_width = c.surface.sleeve_width;
  rd.get(o, "h_r", where, q.h_r);
  rd.get(o, "n_theta", where, q.n_theta);
  rd.get(o, "sleeve_width", where, q.sleeve_width);
  if (!o.contains("graph")) return rd.error(where, "missing key 'graph'");
  auto g = graph_literal(rd, o["graph"], where + ".graph");
  if (!g) return;
  q.graph = *g;
  c.graph = *g;
  const int n = c.target.n;
  bool refs_ok = true;
  if (!o.contains("vertices") || !o["vertices"].is_array()) {
    rd.error(where, "missing list 'vertices'");
    return;
  }
  for (size_t i = 0; i < o["vertices"].size(); ++i) {
    const json& vj = o["vertices"][i];
    std::string w = where + ".vertices[" + std::to_string(i) + "]";
    rd.allow(vj, w, {"id", "coefficients", "zeros", "laurent", "lower", "upper", "r_min", "r_max"});
    int id = -1;
    rd.get(vj, "id", w, id, true);
    if (id < 0) continue;
    if (!q.graph.has_vertex(id)) {
      rd.error(w, "unknown vertex id " + std::to_string(id));
      refs_ok = false;
      continue;
    }
    if (q.vertices.count(id)) {
      rd.error(w, "duplicate vertex id " + std::to_string(id));
      refs_ok = false;
      continue;
    }
    quasimap::VertexData d;
    auto p = rd.laurent(json{{"coefficients", vj.value("coefficients", json())},
                             {"zeros", vj.value("zeros", json())},
                             {"laurent", vj.value("laurent", json::array())}},
                        w, n);
    if (!vj.contains("coefficients")) rd.error(w, "missing key 'coefficients'");
    if (!vj.contains("zeros")) rd.error(w, "missing key 'zeros'");
    d.coefficients = p.coefficients;
    d.zeros = p.zeros;
    d.laurent = p.shift;
    if (vj.contains("lower"))
      d.lower = rd.end_ref(vj["lower"], w + ".lower");
    else
      rd.error(w, "missing key 'lower'");
    if (vj.contains("upper"))
      d.upper = rd.end_ref(vj["upper"], w + ".upper");
    else
      rd.error(w, "missing key 'upper'");
    d.r_min = -c.surface.R;
    d.r_max = c.surface.R;
    rd.get(vj, "r_min", w, d.r_min);
    rd.get(vj, "r_max", w, d.r_max);
    for (const auto* e : {&d.lower, &d.upper}) {
      if (e->kind == quasimap::EndRef::Kind::edge && (e->id < 0 || e->id >= q.graph.edge_count())) {
        rd.error(w, "unknown edge id " + std::to_string(e->id));
        refs_ok = false;
      }
      if (e->kind == quasimap::EndRef::Kind::leg) {
        bool found = false;
        for (const auto& l : q.graph.legs) found |= l.index == e->id && l.vertex == id;
        if (!found) {
          rd.error(w, "leg " + std::to_string(e->id) + " is not a leg of vertex " + std::to_string(id));
          refs_ok = false;
        }
      }
    }
    q.vertices[id] = d;
  }
  for (auto& [v, gen] : q.graph.genus)
    if (!q.vertices.count(v)) {
      rd.error(where, "graph vertex " + std::to_string(v) + " has no data");
      refs_ok = false;
    }
  if (o.contains("edges")) {
    if (!o["edges"].is_array()) return rd.error(where + ".edges", "expected a list");
    for (size_t i = 0; i < o["edges"].size(); ++i) {
      const json& ej = o["edges"][i];
      std::string w = where + ".edges[" + std::to_string(i) + "]";
      rd.allow(ej, w, {"id", "L", "twist", "delta", "neck_zeros"});
      int id = -1;
      rd.get(ej, "id", w, id, true);
      if (id < 0) continue;
      if (id >= q.graph.edge_count()) {
        rd.error(w, "unknown edge id " + std::to_string(id));
        refs_ok = false;
        continue;
      }
      quasimap::EdgeData ed;
      if (ej.contains("delta") && ej.contains("L")) rd.error(w, "give either 'delta' or 'L', not both");
      if (ej.contains("delta")) rd.complex(ej["delta"], w + ".delta", ed.delta);
      if (ej.contains("L")) {
        double L = 0, twist = 0;
        rd.get(ej, "L", w, L);
        rd.get(ej, "twist", w, twist);
        if (!(L > 0)) rd.error(w + ".L", "must be > 0");
        ed.delta = std::polar(std::exp(-L), twist);
      }
      if (ej.contains("neck_zeros")) {
        ed.neck_zeros = rd.zero_table(ej["neck_zeros"], w + ".neck_zeros");
        if (static_cast<int>(ed.neck_zeros.size()) != n) rd.error(w, "need " + std::to_string(n) + " neck zero lists");
      }
      q.edges[id] = ed;
    }
  }
  if (!refs_ok || !rd.errors.empty()) {
    c.quasimap = q;
    return;
  }
  // everything the modules would reject later, caught now
  try {
    quasimap::validate(q);
    std::string why;
    if (!quasimap::is_stable_quasimap(q, &why)) rd.error(where, "quasimap is not stable: " + why);
    for (auto& [v, gen] : q.graph.genus)
      if (gen != 0 || q.graph.special_points(v) != 2)
        rd.error(where, "vertex " + std::to_string(v) + " is not a cylinder (genus 0, 2 special points)");
    for (auto& [v, d] : q.vertices) quasimap::component_mesh(q, v);
  } catch (const Error& ex) {
    rd.error(where, ex.what());
  }
  c.quasimap = q;
}

void read_target(Reader& rd, const json& o, RunConfig& c) {
  const std::string where = "target";
  if (!o.is_object()) return rd.error(where, "missing block");
  rd.allow(o, where, {"n", "k", "weights", "tau"});
  int n = 0, k = 0;
  rd.get(o, "n", where, n, true);
  rd.get(o, "k", where, k, true);
  std::vector<int> w;
  if (o.contains("weights")) {
    const json& wj = o["weights"];
    if (!wj.is_array() || static_cast<int>(wj.size()) != k) {
      rd.error(where + ".weights", "expected k rows");
    } else {
      for (size_t a = 0; a < wj.size(); ++a) {
        auto row = rd.ints(wj[a], where + ".weights[" + std::to_string(a) + "]");
        if (static_cast<int>(row.size()) != n)
          rd.error(where + ".weights[" + std::to_string(a) + "]", "expected n entries");
        w.insert(w.end(), row.begin(), row.end());
      }
    }
  } else {
    rd.error(where, "missing key 'weights'");
  }
  RVec tau;
  if (o.contains("tau"))
    tau = rd.numbers(o["tau"], where + ".tau");
  else
    rd.error(where, "missing key 'tau'");
  if (static_cast<int>(tau.size()) != k && o.contains("tau")) rd.error(where + ".tau", "expected k entries");
  if (n <= 0 || k <= 0 || static_cast<int>(w.size()) != n * k || static_cast<int>(tau.size()) != k) return;
  try {
    c.target = target::make_target(n, k, w, tau);
  } catch (const Error& ex) {
    return rd.error(where, ex.what());
  }
  if (auto p = target::chamber_problem(c.target)) rd.error(where, "chamber: " + *p);
  std::mt19937_64 rng(c.seed);
  if (auto p = target::free_action_problem(c.target, rng)) rd.error(where, "free action: " + *p);
}

void read_solve(Reader& rd, const json& o, RunConfig& c) {
  const std::string where = "solve";
  rd.allow(o, where,
           {"newton_tol", "max_newton", "cg_tol", "max_cg", "damping", "preconditioner", "sleeve_width", "pad",
            "inner_tol", "defect_probes"});
  auto& s = c.solve;
  rd.get(o, "newton_tol", where, s.newton_tol);
  rd.get(o, "max_newton", where, s.max_newton);
  rd.get(o, "cg_tol", where, s.cg_tol);
  rd.get(o, "max_cg", where, s.max_cg);
  rd.get(o, "damping", where, s.damping);
  std::string pc = s.preconditioner == solver::Preconditioner::patched ? "patched" : "none";
  rd.get(o, "preconditioner", where, pc);
  if (pc == "patched")
    s.preconditioner = solver::Preconditioner::patched;
  else if (pc == "none")
    s.preconditioner = solver::Preconditioner::none;
  else
    rd.error(where + ".preconditioner", "expected 'none' or 'patched'");
  rd.get(o, "sleeve_width", where, s.sleeve_width);
  rd.get(o, "pad", where, s.pad);
  rd.get(o, "inner_tol", where, s.inner_tol);
  rd.get(o, "defect_probes", where, s.defect_probes);
  try {
    solver::validate(s);
  } catch (const Error& ex) {
    rd.error(where, ex.what());
  }
}

void read_experiments(Reader& rd, const json& doc, RunConfig& c) {
  if (doc.contains("decay")) {
    const json& o = doc["decay"];
    rd.allow(o, "decay", {"end", "window"});
    std::string end = "upper";
    rd.get(o, "end", "decay", end);
    if (end == "upper")
      c.decay.end = fields::End::upper;
    else if (end == "lower")
      c.decay.end = fields::End::lower;
    else
      rd.error("decay.end", "expected 'upper' or 'lower'");
    if (o.contains("window")) {
      auto w = rd.numbers(o["window"], "decay.window");
      if (w.size() != 2 || !(w[0] >= 0 && w[0] < w[1]))
        rd.error("decay.window", "expected [r0, r1] with 0 <= r0 < r1");
      else
        c.decay.r0 = w[0], c.decay.r1 = w[1];
    }
  }
  if (doc.contains("annulus")) {
    const json& o = doc["annulus"];
    rd.allow(o, "annulus", {"T", "energy_threshold"});
    if (o.contains("T")) c.annulus.T = rd.numbers(o["T"], "annulus.T");
    rd.get(o, "energy_threshold", "annulus", c.annulus.energy_threshold);
    for (size_t i = 1; i < c.annulus.T.size(); ++i)
      if (!(c.annulus.T[i] > c.annulus.T[i - 1])) rd.error("annulus.T", "must be increasing");
  }
  if (doc.contains("quantize")) {
    const json& o = doc["quantize"];
    rd.allow(o, "quantize", {"seeds", "count", "epsilon0"});
    rd.get(o, "count", "quantize", c.quantize.count);
    rd.get(o, "epsilon0", "quantize", c.quantize.epsilon0);
    if (o.contains("seeds")) {
      if (!o["seeds"].is_array()) {
        rd.error("quantize.seeds", "expected a list");
      } else {
        for (size_t i = 0; i < o["seeds"].size(); ++i)
          c.quantize.seeds.push_back(
              rd.laurent(o["seeds"][i], "quantize.seeds[" + std::to_string(i) + "]", c.target.n));
      }
    }
    if (c.quantize.count < 1) rd.error("quantize.count", "must be >= 1");
  }
  if (doc.contains("neck")) {
    const json& o = doc["neck"];
    rd.allow(o, "neck", {"edge", "L", "rho_c", "min_bubble_energy", "delta"});
    rd.get(o, "edge", "neck", c.neck.edge);
    if (o.contains("L")) c.neck.L = rd.numbers(o["L"], "neck.L");
    rd.get(o, "rho_c", "neck", c.neck.rho_c);
    rd.get(o, "min_bubble_energy", "neck", c.neck.min_bubble_energy);
    rd.get(o, "delta", "neck", c.neck.delta);
    if (c.quasimap && (c.neck.edge < 0 || c.neck.edge >= c.quasimap->graph.edge_count()))
      rd.error("neck.edge", "unknown edge id " + std::to_string(c.neck.edge));
    for (double L : c.neck.L)
      if (L < 2 * c.surface.sleeve_width && (!c.quasimap || L < 2 * c.quasimap->sleeve_width))
        rd.error("neck.L", "neck length " + std::to_string(L) + " shorter than two sleeve widths");
  }
  if (doc.contains("ev")) {
    const json& o = doc["ev"];
    rd.allow(o, "ev", {"leg", "vertex", "coordinate", "zero", "steps"});
    rd.get(o, "leg", "ev", c.ev.leg);
    rd.get(o, "vertex", "ev", c.ev.vertex);
    rd.get(o, "coordinate", "ev", c.ev.coordinate);
    rd.get(o, "zero", "ev", c.ev.zero);
    if (o.contains("steps")) c.ev.steps = rd.numbers(o["steps"], "ev.steps");
    if (c.quasimap) {
      const auto& q = *c.quasimap;
      auto it = q.vertices.find(c.ev.vertex);
      if (it == q.vertices.end()) {
        rd.error("ev.vertex", "unknown vertex id " + std::to_string(c.ev.vertex));
      } else if (c.ev.coordinate < 0 || c.ev.coordinate >= q.target.n ||
                 c.ev.zero < 0 ||
                 c.ev.zero >= static_cast<int>(it->second.zeros[static_cast<size_t>(c.ev.coordinate)].size())) {
        rd.error("ev", "no zero " + std::to_string(c.ev.zero) + " on coordinate " + std::to_string(c.ev.coordinate));
      }
      bool leg = false;
      for (const auto& l : q.graph.legs) leg |= l.index == c.ev.leg;
      if (!leg) rd.error("ev.leg", "unknown leg " + std::to_string(c.ev.leg));
    }
  }
  if (doc.contains("energy")) {
    const json& o = doc["energy"];
    rd.allow(o, "energy", {"refine", "max_gap"});
    rd.get(o, "refine", "energy", c.energy.quadrature_refine);
    rd.get(o, "max_gap", "energy", c.energy.max_gap);
    if (!(c.energy.quadrature_refine >= 1)) rd.error("energy.refine", "must be >= 1");
  }
}

}  // namespace

quasimap::QuasimapData default_quasimap(const RunConfig& c) {
  quasimap::QuasimapData q;
  q.target = c.target;
  q.h_r = c.surface.h_r;
  q.n_theta = c.surface.n_theta;
  q.sleeve_width = c.surface.sleeve_width;
  q.graph.genus[0] = 0;
  q.graph.legs = {{1, 0}, {2, 0}};
  quasimap::VertexData d;
  const int n = c.target.n;
  d.coefficients.assign(static_cast<size_t>(n), Complex(1, 0));
  d.zeros.assign(static_cast<size_t>(n), {});
  d.zeros[0].push_back({0, 0});
  d.lower = {quasimap::EndRef::Kind::leg, 1};
  d.upper = {quasimap::EndRef::Kind::leg, 2};
  d.r_min = -c.surface.R;
  d.r_max = c.surface.R;
  q.vertices[0] = d;
  return q;
}

RunConfig parse_config_text(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  json doc = to_json(root);
  if (!doc.is_object()) throw ConfigError("config: top level must be a mapping");

  Reader rd;
  RunConfig c;
  rd.allow(doc, "config",
           {"seed", "threads", "output", "target", "surface", "solve", "quasimap", "graph", "decay", "annulus",
            "quantize", "neck", "ev", "energy"});
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
      c.seed = s.get<std::uint64_t>();
    else
      rd.error("config.seed", "expected a non-negative integer");
  }
  rd.get(doc, "threads", "config", c.threads);
  if (c.threads < 1) rd.error("config.threads", "must be >= 1");
  rd.get(doc, "output", "config", c.output);

  read_target(rd, doc.value("target", json()), c);

  if (doc.contains("surface")) {
    const json& o = doc["surface"];
    rd.allow(o, "surface", {"R", "h_r", "n_theta", "sleeve_width"});
    rd.get(o, "R", "surface", c.surface.R);
    rd.get(o, "h_r", "surface", c.surface.h_r);
    rd.get(o, "n_theta", "surface", c.surface.n_theta);
    rd.get(o, "sleeve_width", "surface", c.surface.sleeve_width);
  }
  if (!(c.surface.R > 0)) rd.error("surface.R", "must be > 0");
  if (!(c.surface.h_r > 0)) rd.error("surface.h_r", "must be > 0");
  if (c.surface.n_theta < 8) rd.error("surface.n_theta", "must be >= 8");
  if (!(c.surface.sleeve_width > 0)) rd.error("surface.sleeve_width", "must be > 0");
  if (c.surface.h_r > 0 && std::abs(std::round(2 * c.surface.R / c.surface.h_r) * c.surface.h_r - 2 * c.surface.R) > 1e-7)
    rd.error("surface", "2R is not a multiple of h_r");

  c.solve.seed = c.seed;
  if (doc.contains("solve")) read_solve(rd, doc["solve"], c);

  const bool target_ok = rd.errors.empty();
  if (doc.contains("quasimap")) {
    if (target_ok)
      read_quasimap(rd, doc["quasimap"], c);
    else
      rd.error("quasimap", "not checked (fix the target block first)");
  }
  if (doc.contains("graph")) {
    if (c.graph) rd.error("graph", "give the graph inside the quasimap block or at top level, not both");
    c.graph = graph_literal(rd, doc["graph"], "graph");
  }
  read_experiments(rd, doc, c);

  if (!rd.errors.empty()) {
    std::ostringstream os;
    os << "config: " << rd.errors.size() << " problem(s)";
    for (const auto& e : rd.errors) os << "\n  " << e;
    throw ConfigError(os.str());
  }
  c.source = doc.dump();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::uint64_t content_hash(const RunConfig& c, const std::string& subcommand) {
  std::string s = c.source + "\n" + subcommand + "\n" + std::to_string(c.seed);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace vortexlab::config
