#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace vortexlab::modgraph {

struct Leg {
  int index = 0;   // marking index, 1..n, never renumbered
  int vertex = 0;
};

struct Edge {
  int a = 0;
  int b = 0;
  bool is_loop() const { return a == b; }
};

// Combinatorial type of a nodal marked curve. Edge ids are positions in
// `edges`; vertex ids are arbitrary integers.
struct ModularGraph {
  std::map<int, int> genus;  // vertex id -> genus
  std::vector<Edge> edges;
  std::vector<Leg> legs;

  int vertex_count() const { return static_cast<int>(genus.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int marking_count() const { return static_cast<int>(legs.size()); }
  bool has_vertex(int v) const { return genus.count(v) != 0; }

  // edge ends + legs, a loop counted twice
  int special_points(int v) const;
  std::vector<int> incident_edges(int v) const;
  std::vector<int> legs_at(int v) const;  // marking indices
};

// Throws InvalidArgument if connectivity, marking bijectivity or genus
// sign is violated.
void validate(const ModularGraph& g);
bool is_connected(const ModularGraph& g);

int total_genus(const ModularGraph& g);
ModularGraph contract_edge(const ModularGraph& g, int edge);
bool is_stable(const ModularGraph& g);
bool vertex_stable(const ModularGraph& g, int v);
bool is_prestable(const ModularGraph& g);
ModularGraph stabilize(const ModularGraph& g);
ModularGraph relabel(const ModularGraph& g, const std::map<int, int>& new_ids);

enum class ChainKind { marked_point, node };

struct CylChain {
  ChainKind kind = ChainKind::node;
  // marked_point: marking index; node: edge id in the stable core
  int anchor = -1;
  // vertex ids of the input graph; vertices[0] attaches to the stable part
  std::vector<int> vertices;
};

struct CylChainDecomposition {
  ModularGraph stable_core;
  std::vector<CylChain> chains;
};

CylChainDecomposition cyl_chains(const ModularGraph& g);

// Canonical form under vertex relabeling: vertices renumbered 0..V-1,
// edges sorted. Two graphs are isomorphic (preserving markings) iff their
// canonical forms compare equal.
ModularGraph canonical_form(const ModularGraph& g);
std::string canonical_key(const ModularGraph& g);
bool isomorphic(const ModularGraph& a, const ModularGraph& b);

std::string to_json(const ModularGraph& g);
ModularGraph from_json(const std::string& text);

}  // namespace vortexlab::modgraph
