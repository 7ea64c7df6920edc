#include "worldprog/envgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/label.hpp"
#include "worldprog/matching.hpp"
#include "worldprog/planner.hpp"
#include "worldprog/rng.hpp"
#include "worldprog/text_io.hpp"

namespace wp {
namespace {

constexpr int kAttemptsPerItem = 200;
constexpr std::size_t kEmbeddingSample = 256;

Label vertex_label_of(int i) { return intern(vertex_symbol(i)); }
Label edge_label_of(int i) { return intern(edge_symbol(i)); }

int other_symbol(int current, int alphabet, Rng& rng) {
  const int shift = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet - 1)));
  return (current + shift) % alphabet;
}

int symbol_index(Label l, int alphabet) {
  for (int i = 0; i < alphabet; ++i) {
    if (vertex_label_of(i) == l) return i;
  }
  return 0;
}

// Zipf-like symbol frequencies; skew 0 is uniform.
std::vector<double> symbol_weights(int alphabet, double skew) {
  std::vector<double> w(alphabet);
  for (int i = 0; i < alphabet; ++i) w[i] = std::pow(1.0 + i, -skew);
  return w;
}

LabeledGraph random_block(const GenParams& p, Rng& rng) {
  const int n = p.block_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.block_max - p.block_min + 1)));
  std::vector<Label> labels(n);
  const auto weights = symbol_weights(p.vertex_alphabet, p.label_skew);
  for (auto& l : labels) l = vertex_label_of(rng.weighted(weights));
  std::vector<Edge> edges;
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  auto add = [&](int u, int v) {
    adj[u][v] = adj[v][u] = 1;
    edges.push_back({u, v, edge_label_of(rng.weighted(symbol_weights(p.edge_alphabet, p.label_skew)))});
  };
  for (int v = 1; v < n; ++v) add(static_cast<int>(rng.below(v)), v);
  if (n >= 3 && rng.bernoulli(0.5)) {
    const int u = static_cast<int>(rng.below(n));
    const int v = static_cast<int>(rng.below(n));
    if (u != v && !adj[u][v]) add(u, v);
  }
  return LabeledGraph(std::move(labels), std::move(edges));
}

LabeledGraph relabeled(const LabeledGraph& g, int v, Label l) {
  std::vector<Label> labels(g.vertex_labels().begin(), g.vertex_labels().end());
  labels[v] = l;
  return LabeledGraph(std::move(labels), std::vector<Edge>(g.edges().begin(), g.edges().end()));
}

// Hidden rule joining vertex u of b1 with vertex v of b2. Vertex 0 of
// both sides is u and the last vertex is v; an optional vertex 1 is a
// neighbor of u whose label the join rewrites.
std::optional<RewriteRule> random_rule(const GenParams& p, const std::vector<LabeledGraph>& blocks, Rng& rng) {
  const LabeledGraph& b1 = blocks[rng.below(blocks.size())];
  const LabeledGraph& b2 = blocks[rng.below(blocks.size())];
  const int u = static_cast<int>(rng.below(b1.vertex_count()));
  const int v = static_cast<int>(rng.below(b2.vertex_count()));
  const bool three = rng.bernoulli(p.three_vertex_core) && b1.degree(u) > 0;

  std::vector<Label> split{b1.vertex_label(u)};
  std::vector<Edge> split_edges;
  std::vector<Label> joined{b1.vertex_label(u)};
  if (rng.bernoulli(p.relabel)) {
    joined[0] = vertex_label_of(other_symbol(symbol_index(split[0], p.vertex_alphabet), p.vertex_alphabet, rng));
  }
  if (three) {
    const auto nbrs = b1.neighbors(u);
    const Neighbor w = nbrs[rng.below(nbrs.size())];
    split.push_back(b1.vertex_label(w.vertex));
    joined.push_back(vertex_label_of(
        other_symbol(symbol_index(split.back(), p.vertex_alphabet), p.vertex_alphabet, rng)));
    split_edges.push_back({0, 1, w.label});
  }
  split.push_back(b2.vertex_label(v));
  joined.push_back(split.back());
  if (rng.bernoulli(p.relabel)) {
    joined.back() = vertex_label_of(other_symbol(symbol_index(split.back(), p.vertex_alphabet), p.vertex_alphabet, rng));
  }
  const int last = static_cast<int>(split.size()) - 1;
  std::vector<Edge> joined_edges = split_edges;
  joined_edges.push_back({0, last, edge_label_of(static_cast<int>(rng.below(p.edge_alphabet)))});
  Interface k;
  for (int i = 0; i <= last; ++i) k.emplace_back(i, i);
  return RewriteRule(LabeledGraph(std::move(joined), std::move(joined_edges)),
                     LabeledGraph(std::move(split), std::move(split_edges)), std::move(k));
}

struct Composition {
  LabeledGraph joined;
  std::vector<int> lhs_embedding;  // rule lhs -> joined
};

// Random vertex order, so construction history does not leak into ids.
Composition shuffled(Composition c, Rng& rng) {
  const int n = c.joined.vertex_count();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<Label> labels(n);
  for (int v = 0; v < n; ++v) labels[perm[v]] = c.joined.vertex_label(v);
  std::vector<Edge> edges;
  for (const Edge& e : c.joined.edges()) edges.push_back({perm[e.u], perm[e.v], e.label});
  for (int& x : c.lhs_embedding) x = perm[x];
  c.joined = LabeledGraph(std::move(labels), std::move(edges));
  return c;
}

Interface swapped(const Interface& k) {
  Interface out;
  out.reserve(k.size());
  for (const auto& [l, r] : k) out.emplace_back(r, l);
  return out;
}

// Joins `object` and `block` by running `rule` backwards across the pair,
// with the rule's two pieces landing in different graphs.
std::optional<Composition> compose(const RewriteRule& rule, const LabeledGraph& object,
                                   const LabeledGraph& block, Rng& rng) {
  const LabeledGraph& split = rule.rhs();
  const ComponentAssignment parts = assign_components(split);
  if (parts.count != 2) return std::nullopt;
  std::vector<int> piece[2];
  for (int v = 0; v < split.vertex_count(); ++v) piece[parts.component[v]].push_back(v);
  const int side = static_cast<int>(rng.below(2));  // piece that lands in the object
  const LabeledGraph in_object = induced_subgraph(split, piece[side]);
  const LabeledGraph in_block = induced_subgraph(split, piece[1 - side]);
  const auto eo = find_embeddings(in_object, object, kEmbeddingSample);
  if (eo.empty()) return std::nullopt;
  const auto eb = find_embeddings(in_block, block, kEmbeddingSample);
  if (eb.empty()) return std::nullopt;
  const VertexMap& mo = eo[rng.below(eo.size())];
  const VertexMap& mb = eb[rng.below(eb.size())];
  std::vector<int> image(split.vertex_count());
  for (std::size_t i = 0; i < piece[side].size(); ++i) image[piece[side][i]] = mo.image[i];
  for (std::size_t i = 0; i < piece[1 - side].size(); ++i) {
    image[piece[1 - side][i]] = mb.image[i] + object.vertex_count();
  }
  const LabeledGraph host = disjoint_union(object, block);
  const Interface back = swapped(rule.interface());
  GraphRewrite gr = rewrite_graph(split, rule.lhs(), back, host, image);
  return shuffled(Composition{std::move(gr.graph), std::move(gr.rhs_to_result)}, rng);
}

Observation deconstruction(const RewriteRule& rule, const LabeledGraph& joined,
                           const std::vector<int>& embedding) {
  const GraphRewrite gr = rewrite_graph(rule.lhs(), rule.rhs(), rule.interface(), joined, embedding);
  const ComponentAssignment comps = assign_components(gr.graph);
  std::vector<std::vector<int>> members(comps.count);
  for (int v = 0; v < gr.graph.vertex_count(); ++v) members[comps.component[v]].push_back(v);
  std::vector<LabeledGraph> after;
  for (const auto& m : members) after.push_back(induced_subgraph(gr.graph, m));
  Correspondence map;
  for (int v = 0; v < joined.vertex_count(); ++v) {
    const int r = gr.host_to_result[v];
    if (r < 0) continue;
    map.push_back({VertexRef{0, v}, VertexRef{comps.component[r], comps.local[r]}});
  }
  return Observation{State({joined}), State(std::move(after)), std::move(map)};
}

void corrupt(Observation& obs, int alphabet, Rng& rng) {
  std::vector<LabeledGraph> graphs = obs.after.graphs();
  const int total = obs.after.total_vertices();
  if (total == 0) return;
  int pick = static_cast<int>(rng.below(total));
  for (auto& g : graphs) {
    if (pick < g.vertex_count()) {
      const int cur = symbol_index(g.vertex_label(pick), alphabet);
      g = relabeled(g, pick, vertex_label_of(other_symbol(cur, alphabet, rng)));
      break;
    }
    pick -= g.vertex_count();
  }
  obs.after = State(std::move(graphs));
}

}  // namespace

std::string vertex_symbol(int i) { return std::string(1, static_cast<char>('A' + i)); }
std::string edge_symbol(int i) { return std::to_string(i + 1); }

WorldSpec gen_world(const GenParams& params, std::uint64_t seed) {
  if (params.vertex_alphabet < 2 || params.vertex_alphabet > 26) {
    throw GenerationError("vertex alphabet must be in [2, 26]");
  }
  if (params.edge_alphabet < 2 || params.edge_alphabet > 9) throw GenerationError("edge alphabet must be in [2, 9]");
  if (params.rules < 1 || params.blocks < 1) throw GenerationError("need at least one rule and one block");
  if (params.block_min < 1 || params.block_max < params.block_min) throw GenerationError("invalid block size range");

  WorldSpec world;
  world.params = params;
  world.seed = seed;
  Rng rng(derive_seed(seed, 1));
  std::unordered_set<std::string> seen;
  for (int attempt = 0; static_cast<int>(world.blocks.size()) < params.blocks; ++attempt) {
    if (attempt >= params.blocks * kAttemptsPerItem) {
      throw GenerationError("could not draw " + std::to_string(params.blocks) + " distinct blocks");
    }
    LabeledGraph b = random_block(params, rng);
    if (seen.insert(b.canonical_code().bytes).second) world.blocks.push_back(std::move(b));
  }
  seen.clear();
  for (int attempt = 0; static_cast<int>(world.rules.size()) < params.rules; ++attempt) {
    if (attempt >= params.rules * kAttemptsPerItem) {
      throw GenerationError("could not draw " + std::to_string(params.rules) + " distinct rules");
    }
    auto rule = random_rule(params, world.blocks, rng);
    if (rule && seen.insert(rule->id()).second) world.rules.push_back(std::move(*rule));
  }
  return world;
}

namespace {

struct Builder {
  const WorldSpec& world;
  const TrajectoryParams& params;
  Rng& rng;
  std::vector<Observation> observations;
  std::vector<std::size_t> used;

  // An object needing `depth` joins; construction-tree shape is random when
  // params.merge > 0.
  std::optional<LabeledGraph> build(int depth) {
    if (depth == 0) return world.blocks[rng.below(world.blocks.size())];
    const int other = params.merge > 0.0 && rng.bernoulli(params.merge)
                          ? static_cast<int>(rng.below(static_cast<std::uint64_t>(depth)))
                          : 0;
    auto left = build(depth - 1 - other);
    if (!left) return std::nullopt;
    auto right = build(other);
    if (!right) return std::nullopt;
    for (int tries = 0; tries < kAttemptsPerItem; ++tries) {
      const std::size_t r = rng.below(world.rules.size());
      auto c = compose(world.rules[r], *left, *right, rng);
      if (!c) continue;
      observations.push_back(deconstruction(world.rules[r], c->joined, c->lhs_embedding));
      used.push_back(r);
      return c->joined;
    }
    return std::nullopt;
  }
};

}  // namespace

TrajectorySet gen_trajectories(const WorldSpec& world, const TrajectoryParams& params, std::uint64_t seed) {
  if (params.depth_min < 1 || params.depth_max < params.depth_min) {
    throw PreconditionError("trajectory depth range must satisfy 1 <= min <= max");
  }
  if (world.rules.empty() || world.blocks.empty()) throw PreconditionError("world has no rules or blocks");
  TrajectorySet out;
  Rng rng(derive_seed(seed, 2));
  for (int t = 0; t < params.targets; ++t) {
    const int depth = params.depth_min +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(params.depth_max - params.depth_min + 1)));
    bool built = false;
    for (int attempt = 0; attempt < kAttemptsPerItem && !built; ++attempt) {
      Builder b{world, params, rng, {}, {}};
      auto object = b.build(depth);
      if (!object) continue;
      built = true;
      for (std::size_t k = 0; k < b.observations.size(); ++k) {
        if (params.noise > 0.0 && rng.bernoulli(params.noise)) {
          corrupt(b.observations[k], world.params.vertex_alphabet, rng);
        }
        out.observations.push_back(std::move(b.observations[k]));
        out.hidden_rule.push_back(b.used[k]);
      }
      out.targets.push_back(State({*object}));
      out.depths.push_back(depth);
    }
    if (!built) throw GenerationError("no rule composes with the blocks of this world");
  }
  return out;
}

OracleResult oracle_solvable(const State& target, const std::vector<RewriteRule>& rules,
                             const std::vector<LabeledGraph>& blocks, int max_depth, std::size_t node_cap) {
  const BlockSet goal(blocks);
  if (is_solved(target, goal)) return {true, 0};
  std::vector<State> frontier{target};
  std::unordered_set<std::string> seen{state_key(target)};
  for (int d = 1; d <= max_depth && !frontier.empty(); ++d) {
    std::vector<State> next;
    for (const State& s : frontier) {
      std::vector<std::uint8_t> active(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) active[i] = goal.contains(s[i]) ? 0 : 1;
      for (const RewriteRule& rule : rules) {
        for (Successor& succ : enumerate_applications(rule, s, std::numeric_limits<std::size_t>::max(), active)) {
          if (!seen.insert(succ.key).second) continue;
          if (seen.size() > node_cap) throw InconclusiveError("oracle node cap exceeded");
          if (is_solved(succ.state, goal)) return {true, d};
          next.push_back(std::move(succ.state));
        }
      }
    }
    frontier = std::move(next);
  }
  return {false, -1};
}

std::map<std::string, std::string> world_meta(const WorldSpec& world, const TrajectoryParams& traj,
                                              std::uint64_t traj_seed) {
  const GenParams& p = world.params;
  return {
      {"seed", std::to_string(world.seed)},
      {"vertex_alphabet", std::to_string(p.vertex_alphabet)},
      {"edge_alphabet", std::to_string(p.edge_alphabet)},
      {"rules", std::to_string(p.rules)},
      {"blocks", std::to_string(p.blocks)},
      {"block_min", std::to_string(p.block_min)},
      {"block_max", std::to_string(p.block_max)},
      {"three_vertex_core", std::to_string(p.three_vertex_core)},
      {"relabel", std::to_string(p.relabel)},
      {"targets", std::to_string(traj.targets)},
      {"depth_min", std::to_string(traj.depth_min)},
      {"depth_max", std::to_string(traj.depth_max)},
      {"noise", std::to_string(traj.noise)},
      {"trajectory_seed", std::to_string(traj_seed)},
  };
}

void save_bundle(const std::string& dir, const WorldSpec& world, const TrajectorySet& training,
                 const TrajectorySet& held_out, const std::map<std::string, std::string>& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  save_rules((root / "world.rules").string(), world.rules);
  save_states((root / "blocks.graphs").string(), {State(world.blocks, std::numeric_limits<int>::max())});
  save_observations((root / "observations.obs").string(), training.observations);
  save_states((root / "targets.graphs").string(), held_out.targets);
  std::ofstream out(root / "meta");
  if (!out) throw FormatError((root / "meta").string(), 0, "cannot open for writing");
  write_key_values(out, meta);
}

}  // namespace wp
