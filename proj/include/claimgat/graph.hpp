#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimgat/conversation.hpp"
#include "claimgat/errors.hpp"
#include "claimgat/tensor.hpp"

namespace claimgat {

enum class Direction { BottomUp, TopDown };

// Structure variants for the interaction topology:
//   UndirectedFull      parent-child and sibling edges, symmetric
//   UndirectedNoSibling parent-child only, symmetric
//   DirectedTree        parent-child arcs oriented by `direction`
//   DirectedTreeSibling directed arcs plus symmetric sibling edges
struct StructureVariant {
  enum class Kind { UndirectedFull, UndirectedNoSibling, DirectedTree, DirectedTreeSibling };
  Kind kind = Kind::UndirectedFull;
  Direction direction = Direction::BottomUp;

  static StructureVariant parse(const std::string& name) {
    StructureVariant v;
    if (name == "undirected")
      v.kind = Kind::UndirectedFull;
    else if (name == "undirected-nosib")
      v.kind = Kind::UndirectedNoSibling;
    else if (name == "directed")
      v.kind = Kind::DirectedTree;
    else if (name == "directed-sib")
      v.kind = Kind::DirectedTreeSibling;
    else
      throw ConfigError("unknown structure variant '" + name +
                        "' (expected undirected|undirected-nosib|directed|directed-sib)");
    return v;
  }

  std::string name() const {
    switch (kind) {
      case Kind::UndirectedFull: return "undirected";
      case Kind::UndirectedNoSibling: return "undirected-nosib";
      case Kind::DirectedTree: return "directed";
      case Kind::DirectedTreeSibling: return "directed-sib";
    }
    return "?";
  }

  bool undirected() const { return kind == Kind::UndirectedFull || kind == Kind::UndirectedNoSibling; }
};

// Adjacency over one event's posts. Node 0 is always the claim; responses
// follow in canonical chronological order. Self-edges are never stored —
// self-inclusion is applied at the neighborhood level.
struct InteractionGraph {
  std::vector<std::string> node_order;
  int n = 0;
  std::vector<std::uint8_t> adj;  // n*n row-major; adj[i*n+j] = arc i->j
  StructureVariant variant;

  bool edge(int i, int j) const { return adj[static_cast<std::size_t>(i) * n + j] != 0; }
  void set_edge(int i, int j) { adj[static_cast<std::size_t>(i) * n + j] = 1; }
};

inline InteractionGraph build_graph(const Event& e, StructureVariant variant) {
  InteractionGraph g;
  g.variant = variant;
  g.n = static_cast<int>(e.post_count());
  g.adj.assign(static_cast<std::size_t>(g.n) * g.n, 0);
  g.node_order.reserve(e.post_count());
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < e.post_count(); ++i) {
    g.node_order.push_back(e.post(i).post_id);
    index[e.post(i).post_id] = static_cast<int>(i);
  }
  std::vector<int> parent(e.post_count(), -1);
  for (std::size_t i = 1; i < e.post_count(); ++i) parent[i] = index.at(*e.post(i).parent_id);

  const bool siblings = variant.kind == StructureVariant::Kind::UndirectedFull ||
                        variant.kind == StructureVariant::Kind::DirectedTreeSibling;
  const bool directed = !variant.undirected();

  for (int i = 1; i < g.n; ++i) {
    const int p = parent[static_cast<std::size_t>(i)];
    if (!directed) {
      g.set_edge(i, p);
      g.set_edge(p, i);
    } else if (variant.direction == Direction::BottomUp) {
      g.set_edge(i, p);  // responses point at what they answer
    } else {
      g.set_edge(p, i);
    }
  }
  if (siblings) {
    // Siblings share the same reply parent; the claim has none.
    for (int i = 1; i < g.n; ++i)
      for (int j = i + 1; j < g.n; ++j)
        if (parent[static_cast<std::size_t>(i)] == parent[static_cast<std::size_t>(j)]) {
          g.set_edge(i, j);
          g.set_edge(j, i);
        }
  }
  return g;
}

// One-hop out-neighbors plus the node itself, sorted ascending.
inline std::vector<std::vector<int>> neighborhoods(const InteractionGraph& g) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) {
    auto& ni = out[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.n; ++j)
      if (j == i || g.edge(i, j)) ni.push_back(j);
  }
  return out;
}

// Neighborhood masks as n rows of n flags (self included), the form the
// attention layers consume.
inline std::vector<BoolVec> neighborhood_masks(const InteractionGraph& g) {
  std::vector<BoolVec> masks(static_cast<std::size_t>(g.n), BoolVec(static_cast<std::size_t>(g.n), 0));
  for (int i = 0; i < g.n; ++i) {
    masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j)) masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
  }
  return masks;
}

}  // namespace claimgat
