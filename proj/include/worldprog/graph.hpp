#ifndef WORLDPROG_GRAPH_HPP_
#define WORLDPROG_GRAPH_HPP_

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "worldprog/label.hpp"

namespace wp {

inline constexpr int kDefaultVertexCap = 512;

/// Canonical serialization of a labeled graph. Two graphs have equal codes
/// iff they are isomorphic (label-preserving on vertices and edges).
struct CanonicalCode {
  std::string bytes;

  friend auto operator<=>(const CanonicalCode&, const CanonicalCode&) = default;
};

struct Edge {
  int u = 0;
  int v = 0;
  Label label;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Neighbor {
  int vertex = 0;
  Label label;
};

/// Vertex- and edge-labeled simple undirected graph with dense vertex ids.
///
/// Immutable after construction. Copies share storage, so passing graphs
/// around by value is cheap.
class LabeledGraph {
 public:
  LabeledGraph();

  /// Throws GraphError on self-loops, parallel edges or dangling endpoints.
  LabeledGraph(std::vector<Label> vertex_labels, std::vector<Edge> edges);

  int vertex_count() const noexcept;
  std::size_t edge_count() const noexcept;
  bool empty() const noexcept { return vertex_count() == 0; }

  Label vertex_label(int v) const;
  std::span<const Label> vertex_labels() const noexcept;

  /// Edges normalized to u < v and sorted.
  std::span<const Edge> edges() const noexcept;

  /// Neighbors sorted by vertex id.
  std::span<const Neighbor> neighbors(int v) const;
  int degree(int v) const { return static_cast<int>(neighbors(v).size()); }
  std::optional<Label> edge_label(int u, int v) const;

  /// Memoized canonical_form(*this).
  const CanonicalCode& canonical_code() const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Injective map pattern vertex -> host vertex, indexed by pattern vertex.
struct VertexMap {
  std::vector<int> image;

  friend auto operator<=>(const VertexMap&, const VertexMap&) = default;
};

/// Multiset of graphs.
class State {
 public:
  State() = default;

  /// Throws SizeError when the total vertex count exceeds `vertex_cap`.
  explicit State(std::vector<LabeledGraph> graphs, int vertex_cap = kDefaultVertexCap);

  const std::vector<LabeledGraph>& graphs() const noexcept { return graphs_; }
  const LabeledGraph& operator[](std::size_t i) const { return graphs_.at(i); }
  std::size_t size() const noexcept { return graphs_.size(); }
  bool empty() const noexcept { return graphs_.empty(); }
  int total_vertices() const noexcept;

 private:
  std::vector<LabeledGraph> graphs_;
};

/// Per-vertex component assignment. Components are numbered by their
/// smallest vertex; `local` is the vertex id inside its component.
struct ComponentAssignment {
  int count = 0;
  std::vector<int> component;
  std::vector<int> local;
};

ComponentAssignment assign_components(const LabeledGraph& g);

/// Components ordered by smallest original vertex id; relative vertex order
/// is preserved inside each component.
std::vector<LabeledGraph> connected_components(const LabeledGraph& g);

bool is_connected(const LabeledGraph& g);

/// Induced subgraph on `vertices` (strictly increasing), re-indexed densely.
LabeledGraph induced_subgraph(const LabeledGraph& g, std::span<const int> vertices);

/// Disjoint union; vertices of `b` are shifted by a.vertex_count().
LabeledGraph disjoint_union(const LabeledGraph& a, const LabeledGraph& b);

}  // namespace wp

#endif  // WORLDPROG_GRAPH_HPP_
