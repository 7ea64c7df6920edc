#include "worldprog/graph.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <string>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"

namespace wp {

struct LabeledGraph::Data {
  std::vector<Label> labels;
  std::vector<Edge> edges;
  std::vector<int> offsets;  // CSR row starts, size n + 1
  std::vector<Neighbor> adjacency;

  mutable std::once_flag code_once;
  mutable CanonicalCode code;
};

LabeledGraph::LabeledGraph() {
  static const std::shared_ptr<const Data> empty = [] {
    auto d = std::make_shared<Data>();
    d->offsets.assign(1, 0);
    return std::shared_ptr<const Data>(std::move(d));
  }();
  data_ = empty;
}

LabeledGraph::LabeledGraph(std::vector<Label> vertex_labels, std::vector<Edge> edges) {
  const int n = static_cast<int>(vertex_labels.size());
  for (Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw GraphError("edge endpoint out of range: " + std::to_string(e.u) + "-" +
                       std::to_string(e.v));
    }
    if (e.u == e.v) throw GraphError("self-loop at vertex " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
      throw GraphError("parallel edge " + std::to_string(edges[i].u) + "-" +
                       std::to_string(edges[i].v));
    }
  }

  auto d = std::make_shared<Data>();
  d->offsets.assign(n + 1, 0);
  for (const Edge& e : edges) {
    ++d->offsets[e.u + 1];
    ++d->offsets[e.v + 1];
  }
  std::partial_sum(d->offsets.begin(), d->offsets.end(), d->offsets.begin());
  d->adjacency.resize(2 * edges.size());
  std::vector<int> fill(d->offsets.begin(), d->offsets.end() - 1);
  for (const Edge& e : edges) {
    d->adjacency[fill[e.u]++] = {e.v, e.label};
    d->adjacency[fill[e.v]++] = {e.u, e.label};
  }
  for (int v = 0; v < n; ++v) {
    std::sort(d->adjacency.begin() + d->offsets[v], d->adjacency.begin() + d->offsets[v + 1],
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }
  d->labels = std::move(vertex_labels);
  d->edges = std::move(edges);
  data_ = std::move(d);
}

int LabeledGraph::vertex_count() const noexcept { return static_cast<int>(data_->labels.size()); }

std::size_t LabeledGraph::edge_count() const noexcept { return data_->edges.size(); }

Label LabeledGraph::vertex_label(int v) const { return data_->labels.at(v); }

std::span<const Label> LabeledGraph::vertex_labels() const noexcept { return data_->labels; }

std::span<const Edge> LabeledGraph::edges() const noexcept { return data_->edges; }

std::span<const Neighbor> LabeledGraph::neighbors(int v) const {
  if (v < 0 || v >= vertex_count()) throw GraphError("vertex out of range: " + std::to_string(v));
  return std::span<const Neighbor>(data_->adjacency.data() + data_->offsets[v],
                                   data_->offsets[v + 1] - data_->offsets[v]);
}

std::optional<Label> LabeledGraph::edge_label(int u, int v) const {
  auto nbrs = neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                             [](const Neighbor& a, int x) { return a.vertex < x; });
  if (it != nbrs.end() && it->vertex == v) return it->label;
  return std::nullopt;
}

const CanonicalCode& LabeledGraph::canonical_code() const {
  std::call_once(data_->code_once, [this] { data_->code = canonical_form(*this); });
  return data_->code;
}

State::State(std::vector<LabeledGraph> graphs, int vertex_cap) : graphs_(std::move(graphs)) {
  const int total = total_vertices();
  if (total > vertex_cap) {
    throw SizeError("state has " + std::to_string(total) + " vertices, cap is " +
                    std::to_string(vertex_cap));
  }
}

int State::total_vertices() const noexcept {
  int total = 0;
  for (const auto& g : graphs_) total += g.vertex_count();
  return total;
}

ComponentAssignment assign_components(const LabeledGraph& g) {
  const int n = g.vertex_count();
  ComponentAssignment out;
  out.component.assign(n, -1);
  out.local.assign(n, -1);
  std::vector<int> stack;
  std::vector<int> members;
  for (int s = 0; s < n; ++s) {
    if (out.component[s] >= 0) continue;
    const int c = out.count++;
    members.clear();
    stack.push_back(s);
    out.component[s] = c;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (const Neighbor& nb : g.neighbors(v)) {
        if (out.component[nb.vertex] < 0) {
          out.component[nb.vertex] = c;
          stack.push_back(nb.vertex);
        }
      }
    }
    std::sort(members.begin(), members.end());
    for (std::size_t i = 0; i < members.size(); ++i) out.local[members[i]] = static_cast<int>(i);
  }
  return out;
}

std::vector<LabeledGraph> connected_components(const LabeledGraph& g) {
  const ComponentAssignment ca = assign_components(g);
  if (ca.count == 1) return {g};
  std::vector<std::vector<Label>> labels(ca.count);
  std::vector<std::vector<Edge>> edges(ca.count);
  for (int v = 0; v < g.vertex_count(); ++v) labels[ca.component[v]].push_back(g.vertex_label(v));
  for (const Edge& e : g.edges()) {
    edges[ca.component[e.u]].push_back({ca.local[e.u], ca.local[e.v], e.label});
  }
  std::vector<LabeledGraph> out;
  out.reserve(ca.count);
  for (int c = 0; c < ca.count; ++c) out.emplace_back(std::move(labels[c]), std::move(edges[c]));
  return out;
}

bool is_connected(const LabeledGraph& g) { return assign_components(g).count <= 1; }

LabeledGraph induced_subgraph(const LabeledGraph& g, std::span<const int> vertices) {
  std::vector<int> index(g.vertex_count(), -1);
  std::vector<Label> labels;
  labels.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const int v = vertices[i];
    if (v < 0 || v >= g.vertex_count() || index[v] >= 0) {
      throw GraphError("invalid vertex selection for induced subgraph");
    }
    index[v] = static_cast<int>(i);
    labels.push_back(g.vertex_label(v));
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (index[e.u] >= 0 && index[e.v] >= 0) edges.push_back({index[e.u], index[e.v], e.label});
  }
  return LabeledGraph(std::move(labels), std::move(edges));
}

LabeledGraph disjoint_union(const LabeledGraph& a, const LabeledGraph& b) {
  const int shift = a.vertex_count();
  std::vector<Label> labels(a.vertex_labels().begin(), a.vertex_labels().end());
  labels.insert(labels.end(), b.vertex_labels().begin(), b.vertex_labels().end());
  std::vector<Edge> edges(a.edges().begin(), a.edges().end());
  for (const Edge& e : b.edges()) edges.push_back({e.u + shift, e.v + shift, e.label});
  return LabeledGraph(std::move(labels), std::move(edges));
}

}  // namespace wp
