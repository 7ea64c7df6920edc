// Brute-force reference implementations and random instance generators
// shared by the unit and acceptance tests.
#ifndef WORLDPROG_TESTS_ORACLES_HPP_
#define WORLDPROG_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <utility>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "worldprog/graph.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/label.hpp"
#include "worldprog/models.hpp"
#include "worldprog/rng.hpp"

namespace oracle {

inline wp::Label L(const std::string& name) { return wp::intern(name); }

inline wp::LabeledGraph graph(const std::vector<std::string>& labels,
                              const std::vector<std::tuple<int, int, std::string>>& edges) {
  std::vector<wp::Label> ls;
  for (const auto& s : labels) ls.push_back(L(s));
  std::vector<wp::Edge> es;
  for (const auto& [u, v, l] : edges) es.push_back({u, v, L(l)});
  return wp::LabeledGraph(std::move(ls), std::move(es));
}

inline wp::LabeledGraph random_graph(wp::Rng& rng, int n, int vertex_labels, int edge_labels, double p) {
  std::vector<wp::Label> ls(n);
  for (auto& l : ls) l = L("v" + std::to_string(rng.below(vertex_labels)));
  std::vector<wp::Edge> es;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) es.push_back({u, v, L("e" + std::to_string(rng.below(edge_labels)))});
    }
  }
  return wp::LabeledGraph(std::move(ls), std::move(es));
}

inline wp::LabeledGraph random_connected(wp::Rng& rng, int n, int vertex_labels, int edge_labels, double extra) {
  std::vector<wp::Label> ls(n);
  for (auto& l : ls) l = L("v" + std::to_string(rng.below(vertex_labels)));
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::vector<wp::Edge> es;
  for (int v = 1; v < n; ++v) {
    const int u = static_cast<int>(rng.below(v));
    adj[u][v] = adj[v][u] = 1;
    es.push_back({u, v, L("e" + std::to_string(rng.below(edge_labels)))});
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!adj[u][v] && rng.bernoulli(extra)) es.push_back({u, v, L("e" + std::to_string(rng.below(edge_labels)))});
    }
  }
  return wp::LabeledGraph(std::move(ls), std::move(es));
}

/// Vertex v of g becomes vertex perm[v].
inline wp::LabeledGraph permuted(const wp::LabeledGraph& g, const std::vector<int>& perm) {
  std::vector<wp::Label> ls(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) ls[perm[v]] = g.vertex_label(v);
  std::vector<wp::Edge> es;
  for (const auto& e : g.edges()) es.push_back({perm[e.u], perm[e.v], e.label});
  return wp::LabeledGraph(std::move(ls), std::move(es));
}

inline std::vector<int> random_permutation(wp::Rng& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

/// Dense adjacency with edge label keys, 0 = no edge.
inline std::vector<std::vector<std::uint64_t>> adjacency(const wp::LabeledGraph& g) {
  std::vector<std::vector<std::uint64_t>> a(g.vertex_count(), std::vector<std::uint64_t>(g.vertex_count(), 0));
  for (const auto& e : g.edges()) a[e.u][e.v] = a[e.v][e.u] = e.label.key();
  return a;
}

/// Tries every vertex permutation.
inline bool isomorphic(const wp::LabeledGraph& a, const wp::LabeledGraph& b) {
  const int n = a.vertex_count();
  if (n != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  const auto aa = adjacency(a);
  const auto bb = adjacency(b);
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (int u = 0; u < n && ok; ++u) {
      if (a.vertex_label(u) != b.vertex_label(p[u])) ok = false;
      for (int v = u + 1; v < n && ok; ++v) ok = aa[u][v] == bb[p[u]][p[v]];
    }
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

/// Every injective map, in lexicographic order of the image tuple.
inline std::vector<std::vector<int>> embeddings(const wp::LabeledGraph& pattern, const wp::LabeledGraph& host,
                                                bool induced = true) {
  const int k = pattern.vertex_count();
  const int n = host.vertex_count();
  const auto pa = adjacency(pattern);
  const auto ha = adjacency(host);
  std::vector<std::vector<int>> out;
  std::vector<int> img(k);
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == k) {
      for (int u = 0; u < k; ++u) {
        for (int v = u + 1; v < k; ++v) {
          const auto pe = pa[u][v];
          const auto he = ha[img[u]][img[v]];
          if (pe != 0 && pe != he) return;
          if (pe == 0 && he != 0 && induced) return;
        }
      }
      out.push_back(img);
      return;
    }
    for (int h = 0; h < n; ++h) {
      if (used[h] || host.vertex_label(h) != pattern.vertex_label(i)) continue;
      used[h] = 1;
      img[i] = h;
      self(self, i + 1);
      used[h] = 0;
    }
  };
  rec(rec, 0);
  return out;
}

struct CorrespondenceScore {
  int mapped = 0;
  int edges = 0;
};

/// Best (cardinality, preserved edges) over all label-preserving partial
/// injections between the flattened states.
inline CorrespondenceScore best_correspondence(const wp::State& before, const wp::State& after) {
  std::vector<wp::LabeledGraph> bg = before.graphs();
  std::vector<wp::LabeledGraph> ag = after.graphs();
  wp::LabeledGraph b;
  for (const auto& g : bg) b = wp::disjoint_union(b, g);
  wp::LabeledGraph a;
  for (const auto& g : ag) a = wp::disjoint_union(a, g);
  const auto ba = adjacency(b);
  const auto aa = adjacency(a);
  CorrespondenceScore best{-1, -1};
  std::vector<int> img(b.vertex_count(), -1);
  std::vector<char> used(a.vertex_count(), 0);
  auto rec = [&](auto&& self, int u, int mapped) -> void {
    if (u == b.vertex_count()) {
      int edges = 0;
      for (int x = 0; x < b.vertex_count(); ++x) {
        for (int y = x + 1; y < b.vertex_count(); ++y) {
          if (ba[x][y] != 0 && img[x] >= 0 && img[y] >= 0 && aa[img[x]][img[y]] == ba[x][y]) ++edges;
        }
      }
      if (mapped > best.mapped || (mapped == best.mapped && edges > best.edges)) best = {mapped, edges};
      return;
    }
    for (int w = 0; w < a.vertex_count(); ++w) {
      if (used[w] || a.vertex_label(w) != b.vertex_label(u)) continue;
      used[w] = 1;
      img[u] = w;
      self(self, u + 1, mapped + 1);
      used[w] = 0;
      img[u] = -1;
    }
    self(self, u + 1, mapped);
  };
  rec(rec, 0, 0);
  return best;
}

inline CorrespondenceScore score(const wp::State& before, const wp::State& after, const wp::Correspondence& map) {
  CorrespondenceScore s{static_cast<int>(map.size()), 0};
  std::map<wp::VertexRef, wp::VertexRef> m(map.begin(), map.end());
  for (std::size_t gi = 0; gi < before.size(); ++gi) {
    for (const auto& e : before[gi].edges()) {
      auto iu = m.find({static_cast<int>(gi), e.u});
      auto iv = m.find({static_cast<int>(gi), e.v});
      if (iu == m.end() || iv == m.end() || iu->second.graph != iv->second.graph) continue;
      auto l = after[iu->second.graph].edge_label(iu->second.vertex, iv->second.vertex);
      if (l && *l == e.label) ++s.edges;
    }
  }
  return s;
}

/// Relative disagreement between an analytic gradient and central finite
/// differences of `loss` over every entry of `params`.
template <typename Loss>
double finite_difference_error(std::vector<double>& params, const std::vector<double>& analytic, Loss&& loss,
                               double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

inline wp::State random_state(wp::Rng& rng) {
  std::vector<wp::LabeledGraph> gs;
  const int members = 1 + static_cast<int>(rng.below(3));
  for (int i = 0; i < members; ++i) gs.push_back(random_graph(rng, 1 + static_cast<int>(rng.below(5)), 4, 2, 0.4));
  return wp::State(std::move(gs));
}

/// Worst relative gradient error of both losses on one random instance with
/// random nonzero weights.
inline std::pair<double, double> gradient_check_instance(wp::Rng& rng) {
  const wp::FeatureConfig cfg{1 + static_cast<int>(rng.below(2)), 16 + 16 * static_cast<int>(rng.below(3))};
  const std::size_t classes = 2 + rng.below(4);
  const double l2 = 0.01;

  std::vector<wp::EncodedExample> pdata;
  std::vector<wp::EncodedBinaryExample> tdata;
  const int n = 3 + static_cast<int>(rng.below(6));
  for (int i = 0; i < n; ++i) {
    const auto s = random_state(rng);
    const auto t = random_state(rng);
    pdata.push_back({wp::state_features(s, cfg), rng.below(classes)});
    tdata.push_back({wp::transition_features(s, t, cfg), static_cast<int>(rng.below(2))});
  }

  wp::PolicyModel pm(cfg, classes, 0);
  for (auto& w : pm.weights()) w = rng.uniform() - 0.5;
  for (auto& b : pm.bias()) b = rng.uniform() - 0.5;
  wp::PolicyModel pg;
  wp::policy_objective(pm, pdata, l2, &pg);
  auto ploss = [&] { return wp::policy_objective(pm, pdata, l2); };
  const double pw = finite_difference_error(pm.weights(), pg.weights(), ploss);
  const double pb = finite_difference_error(pm.bias(), pg.bias(), ploss);

  wp::TransitionModel tm(cfg, 0);
  for (auto& w : tm.weights()) w = rng.uniform() - 0.5;
  tm.bias() = rng.uniform() - 0.5;
  wp::TransitionModel tg;
  wp::transition_objective(tm, tdata, l2, &tg);
  auto tloss = [&] { return wp::transition_objective(tm, tdata, l2); };
  const double tw = finite_difference_error(tm.weights(), tg.weights(), tloss);
  std::vector<double> bias{tm.bias()};
  auto tbloss = [&] {
    tm.bias() = bias[0];
    return wp::transition_objective(tm, tdata, l2);
  };
  const double tb = finite_difference_error(bias, std::vector<double>{tg.bias()}, tbloss);
  return {std::max(pw, pb), std::max(tw, tb)};
}

/// Brute-force check of the top-k contract on one probability vector.
inline bool topk_contract_holds(const std::vector<double>& probs, const std::vector<std::pair<std::size_t, double>>& got,
                                double mass, std::size_t k_max) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::size_t want = 0;
  double cum = 0.0;
  while (want < order.size() && cum < mass) cum += probs[order[want++]];
  want = std::min(want, k_max);
  if (got.size() != want) return false;
  for (std::size_t i = 0; i < want; ++i) {
    if (got[i].first != order[i] || got[i].second != probs[order[i]]) return false;
  }
  return true;
}

}  // namespace oracle

#endif  // WORLDPROG_TESTS_ORACLES_HPP_
