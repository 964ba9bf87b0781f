#include "vortexlab/modgraph.hpp"

#include <algorithm>
#include <functional>
#include <tuple>
#include <numeric>
#include <set>

#include "json.hpp"
#include "vortexlab/error.hpp"

namespace vortexlab::modgraph {

int ModularGraph::special_points(int v) const {
  int count = 0;
  for (const auto& e : edges) {
    if (e.a == v) ++count;
    if (e.b == v) ++count;
  }
  for (const auto& l : legs)
    if (l.vertex == v) ++count;
  return count;
}

std::vector<int> ModularGraph::incident_edges(int v) const {
  std::vector<int> out;
  for (int i = 0; i < edge_count(); ++i)
    if (edges[i].a == v || edges[i].b == v) out.push_back(i);
  return out;
}

std::vector<int> ModularGraph::legs_at(int v) const {
  std::vector<int> out;
  for (const auto& l : legs)
    if (l.vertex == v) out.push_back(l.index);
  std::sort(out.begin(), out.end());
  return out;
}

bool is_connected(const ModularGraph& g) {
  if (g.genus.empty()) return false;
  std::set<int> seen{g.genus.begin()->first};
  std::vector<int> stack{g.genus.begin()->first};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges) {
      int other = e.a == v ? e.b : (e.b == v ? e.a : -1);
      if (e.a != v && e.b != v) continue;
      if (seen.insert(other).second) stack.push_back(other);
    }
  }
  return static_cast<int>(seen.size()) == g.vertex_count();
}

void validate(const ModularGraph& g) {
  if (g.genus.empty()) throw InvalidArgument("modular graph has no vertices");
  for (auto [v, gen] : g.genus)
    if (gen < 0) throw InvalidArgument("vertex " + std::to_string(v) + " has negative genus");
  for (size_t i = 0; i < g.edges.size(); ++i)
    if (!g.has_vertex(g.edges[i].a) || !g.has_vertex(g.edges[i].b))
      throw InvalidArgument("edge " + std::to_string(i) + " references an unknown vertex");
  std::vector<int> idx;
  for (const auto& l : g.legs) {
    if (!g.has_vertex(l.vertex))
      throw InvalidArgument("leg " + std::to_string(l.index) + " references unknown vertex " +
                            std::to_string(l.vertex));
    idx.push_back(l.index);
  }
  std::sort(idx.begin(), idx.end());
  for (size_t i = 0; i < idx.size(); ++i)
    if (idx[i] != static_cast<int>(i) + 1)
      throw InvalidArgument("marking indices must form a bijection with 1..n");
  if (!is_connected(g)) throw InvalidArgument("modular graph is not connected");
}

int total_genus(const ModularGraph& g) {
  int s = 0;
  for (auto [v, gen] : g.genus) s += gen;
  return s + g.edge_count() - g.vertex_count() + 1;
}

ModularGraph contract_edge(const ModularGraph& g, int edge) {
  if (edge < 0 || edge >= g.edge_count())
    throw InvalidArgument("unknown edge id " + std::to_string(edge));
  ModularGraph out = g;
  Edge e = g.edges[edge];
  out.edges.erase(out.edges.begin() + edge);
  if (e.is_loop()) {
    out.genus[e.a] += 1;
    return out;
  }
  int keep = std::min(e.a, e.b), drop = std::max(e.a, e.b);
  out.genus[keep] += out.genus[drop];
  out.genus.erase(drop);
  for (auto& x : out.edges) {
    if (x.a == drop) x.a = keep;
    if (x.b == drop) x.b = keep;
  }
  for (auto& l : out.legs)
    if (l.vertex == drop) l.vertex = keep;
  return out;
}

bool vertex_stable(const ModularGraph& g, int v) {
  int gen = g.genus.at(v);
  int sp = g.special_points(v);
  if (gen == 0) return sp >= 3;
  if (gen == 1) return sp >= 1;
  return true;
}

bool is_stable(const ModularGraph& g) {
  for (auto [v, gen] : g.genus)
    if (!vertex_stable(g, v)) return false;
  return true;
}

bool is_prestable(const ModularGraph& g) {
  for (auto [v, gen] : g.genus)
    if (!vertex_stable(g, v) && !(gen == 0 && g.special_points(v) == 2)) return false;
  return true;
}

namespace {

void remove_vertex(ModularGraph& g, int v, std::vector<int> edge_ids) {
  std::sort(edge_ids.rbegin(), edge_ids.rend());
  for (int id : edge_ids) g.edges.erase(g.edges.begin() + id);
  g.genus.erase(v);
}

}  // namespace

ModularGraph stabilize(const ModularGraph& g) {
  validate(g);
  int n = g.marking_count();
  if (n < 1 || n + 2 * total_genus(g) - 3 < 0)
    throw PreconditionError("no stable model: n=" + std::to_string(n) +
                            ", genus=" + std::to_string(total_genus(g)));
  ModularGraph out = g;
  for (;;) {
    int bad = -1;
    for (auto [v, gen] : out.genus)
      if (!vertex_stable(out, v)) {
        bad = v;
        break;
      }
    if (bad < 0) return out;
    if (out.genus.at(bad) != 0)
      throw PreconditionError("no stable model: isolated genus-1 vertex without special points");
    auto inc = out.incident_edges(bad);
    auto lg = out.legs_at(bad);
    int sp = out.special_points(bad);
    if (sp == 1 && inc.size() == 1) {
      remove_vertex(out, bad, inc);
    } else if (sp == 2 && inc.size() == 2) {
      const Edge& e1 = out.edges[inc[0]];
      const Edge& e2 = out.edges[inc[1]];
      int x = e1.a == bad ? e1.b : e1.a;
      int y = e2.a == bad ? e2.b : e2.a;
      remove_vertex(out, bad, inc);
      out.edges.push_back({std::min(x, y), std::max(x, y)});
    } else if (sp == 2 && inc.size() == 1 && lg.size() == 1) {
      const Edge& e = out.edges[inc[0]];
      int x = e.a == bad ? e.b : e.a;
      remove_vertex(out, bad, inc);
      for (auto& l : out.legs)
        if (l.vertex == bad) l.vertex = x;
    } else {
      throw PreconditionError("no stable model for vertex " + std::to_string(bad));
    }
  }
}

ModularGraph relabel(const ModularGraph& g, const std::map<int, int>& new_ids) {
  ModularGraph out;
  for (auto [v, gen] : g.genus) out.genus[new_ids.at(v)] = gen;
  for (auto e : g.edges) out.edges.push_back({new_ids.at(e.a), new_ids.at(e.b)});
  for (auto l : g.legs) out.legs.push_back({l.index, new_ids.at(l.vertex)});
  return out;
}

CylChainDecomposition cyl_chains(const ModularGraph& g) {
  validate(g);
  if (!is_prestable(g)) throw PreconditionError("graph is not pre-stable");
  std::set<int> unstable;
  for (auto [v, gen] : g.genus)
    if (!vertex_stable(g, v)) unstable.insert(v);
  if (unstable.size() == g.genus.size())
    throw PreconditionError("graph has no stable core");

  CylChainDecomposition dec;
  ModularGraph& core = dec.stable_core;
  for (auto [v, gen] : g.genus)
    if (!unstable.count(v)) core.genus[v] = gen;
  for (const auto& e : g.edges)
    if (!unstable.count(e.a) && !unstable.count(e.b)) core.edges.push_back(e);
  for (const auto& l : g.legs)
    if (!unstable.count(l.vertex)) core.legs.push_back(l);

  std::vector<bool> used(g.edges.size(), false);
  std::set<int> visited;
  for (auto [s, gen] : core.genus) {
    for (int start : g.incident_edges(s)) {
      if (used[start]) continue;
      const Edge& se = g.edges[start];
      int first = se.a == s ? se.b : se.a;
      if (!unstable.count(first)) continue;
      CylChain chain;
      used[start] = true;
      int cur = first, via = start;
      for (;;) {
        chain.vertices.push_back(cur);
        visited.insert(cur);
        int next_edge = -1;
        for (int id : g.incident_edges(cur))
          if (id != via && !used[id]) next_edge = id;
        if (next_edge < 0) {
          auto lg = g.legs_at(cur);
          chain.kind = ChainKind::marked_point;
          chain.anchor = lg.at(0);
          core.legs.push_back({chain.anchor, s});
          break;
        }
        used[next_edge] = true;
        const Edge& ne = g.edges[next_edge];
        int nxt = ne.a == cur ? ne.b : ne.a;
        if (!unstable.count(nxt)) {
          chain.kind = ChainKind::node;
          chain.anchor = core.edge_count();
          core.edges.push_back({std::min(s, nxt), std::max(s, nxt)});
          break;
        }
        cur = nxt;
        via = next_edge;
      }
      dec.chains.push_back(std::move(chain));
    }
  }
  if (visited.size() != unstable.size())
    throw PreconditionError("unstable vertices not attached to a stable core");
  std::sort(core.legs.begin(), core.legs.end(),
            [](const Leg& a, const Leg& b) { return a.index < b.index; });
  return dec;
}

namespace {

using Code = std::vector<long>;

Code encode(const ModularGraph& g, const std::vector<int>& order) {
  std::map<int, int> pos;
  for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  int nv = static_cast<int>(order.size());
  Code code;
  code.push_back(nv);
  for (int v : order) {
    code.push_back(g.genus.at(v));
    auto lg = g.legs_at(v);
    code.push_back(static_cast<long>(lg.size()));
    code.insert(code.end(), lg.begin(), lg.end());
  }
  std::vector<long> mult(static_cast<size_t>(nv * nv), 0);
  for (const auto& e : g.edges) {
    int i = pos[e.a], j = pos[e.b];
    if (i > j) std::swap(i, j);
    mult[static_cast<size_t>(i * nv + j)]++;
  }
  for (int i = 0; i < nv; ++i)
    for (int j = i; j < nv; ++j) code.push_back(mult[static_cast<size_t>(i * nv + j)]);
  return code;
}

// colour refinement; colours are indices into a sorted signature list so
// they depend only on isomorphism-invariant data
std::map<int, int> refine_colours(const ModularGraph& g) {
  std::map<int, std::vector<long>> sig;
  for (auto [v, gen] : g.genus) {
    auto lg = g.legs_at(v);
    int loops = 0;
    for (const auto& e : g.edges)
      if (e.a == v && e.b == v) ++loops;
    std::vector<long> s{gen, g.special_points(v), loops, static_cast<long>(lg.size())};
    s.insert(s.end(), lg.begin(), lg.end());
    sig[v] = s;
  }
  std::map<int, int> colour;
  for (int round = 0; round < 6; ++round) {
    std::set<std::vector<long>> distinct;
    for (auto& [v, s] : sig) distinct.insert(s);
    std::vector<std::vector<long>> sorted(distinct.begin(), distinct.end());
    std::map<int, int> next;
    for (auto& [v, s] : sig)
      next[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin());
    if (next == colour) break;
    colour = next;
    std::map<int, std::vector<long>> nsig;
    for (auto [v, gen] : g.genus) {
      std::vector<long> nb;
      for (const auto& e : g.edges) {
        if (e.a == v && e.b != v) nb.push_back(colour[e.b]);
        if (e.b == v && e.a != v) nb.push_back(colour[e.a]);
      }
      std::sort(nb.begin(), nb.end());
      std::vector<long> s{colour[v]};
      s.insert(s.end(), nb.begin(), nb.end());
      nsig[v] = s;
    }
    sig = nsig;
  }
  return colour;
}

}  // namespace

ModularGraph canonical_form(const ModularGraph& g) {
  auto colour = refine_colours(g);
  std::map<int, std::vector<int>> classes;
  for (auto [v, c] : colour) classes[c].push_back(v);
  std::vector<std::vector<int>> groups;
  for (auto& [c, vs] : classes) groups.push_back(vs);

  Code best;
  std::vector<int> best_order;
  // enumerate the product of permutations inside each colour class
  std::function<void(size_t, std::vector<int>&)> rec = [&](size_t gi, std::vector<int>& order) {
    if (gi == groups.size()) {
      Code c = encode(g, order);
      if (best_order.empty() || c < best) {
        best = c;
        best_order = order;
      }
      return;
    }
    auto perm = groups[gi];
    std::sort(perm.begin(), perm.end());
    do {
      size_t base = order.size();
      order.insert(order.end(), perm.begin(), perm.end());
      rec(gi + 1, order);
      order.resize(base);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  std::vector<int> order;
  rec(0, order);

  std::map<int, int> ids;
  for (size_t i = 0; i < best_order.size(); ++i) ids[best_order[i]] = static_cast<int>(i);
  ModularGraph out = relabel(g, ids);
  for (auto& e : out.edges)
    if (e.a > e.b) std::swap(e.a, e.b);
  std::sort(out.edges.begin(), out.edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  std::sort(out.legs.begin(), out.legs.end(),
            [](const Leg& x, const Leg& y) { return x.index < y.index; });
  return out;
}

std::string canonical_key(const ModularGraph& g) { return to_json(canonical_form(g)); }

bool isomorphic(const ModularGraph& a, const ModularGraph& b) {
  return canonical_key(a) == canonical_key(b);
}

std::string to_json(const ModularGraph& g) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (auto [v, gen] : g.genus) j["vertices"].push_back({{"id", v}, {"genus", gen}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) j["edges"].push_back({e.a, e.b});
  j["legs"] = nlohmann::json::array();
  for (const auto& l : g.legs) j["legs"].push_back({{"index", l.index}, {"vertex", l.vertex}});
  return j.dump();
}

ModularGraph from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("graph literal: ") + ex.what());
  }
  ModularGraph g;
  try {
    for (const auto& v : j.at("vertices")) {
      int id = v.at("id").get<int>();
      if (g.has_vertex(id)) throw InvalidArgument("duplicate vertex id " + std::to_string(id));
      g.genus[id] = v.value("genus", 0);
    }
    if (j.contains("edges"))
      for (const auto& e : j.at("edges")) g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    if (j.contains("legs"))
      for (const auto& l : j.at("legs"))
        g.legs.push_back({l.at("index").get<int>(), l.at("vertex").get<int>()});
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("graph literal: ") + ex.what());
  }
  validate(g);
  return g;
}

}  // namespace vortexlab::modgraph
