#include "worldprog/induction.hpp"

#include <algorithm>
#include <map>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/hash.hpp"
#include "worldprog/matching.hpp"

namespace wp {
namespace {

constexpr std::size_t kCorrespondenceNodeBudget = 2'000'000;

// A state drawn as one graph, with a way back to member coordinates.
struct FlatState {
  LabeledGraph graph;
  std::vector<VertexRef> refs;
  std::vector<int> offsets;
};

FlatState flatten(const State& s) {
  FlatState out;
  std::vector<Label> labels;
  std::vector<Edge> edges;
  for (std::size_t gi = 0; gi < s.size(); ++gi) {
    const int base = static_cast<int>(labels.size());
    out.offsets.push_back(base);
    const LabeledGraph& g = s[gi];
    for (int v = 0; v < g.vertex_count(); ++v) {
      labels.push_back(g.vertex_label(v));
      out.refs.push_back({static_cast<int>(gi), v});
    }
    for (const Edge& e : g.edges()) edges.push_back({e.u + base, e.v + base, e.label});
  }
  out.graph = LabeledGraph(std::move(labels), std::move(edges));
  return out;
}

// Dense per-member lookup table VertexRef -> optional VertexRef.
class RefMap {
 public:
  explicit RefMap(const State& s) {
    offsets_.reserve(s.size() + 1);
    int total = 0;
    for (const auto& g : s.graphs()) {
      offsets_.push_back(total);
      total += g.vertex_count();
    }
    offsets_.push_back(total);
    slots_.assign(total, std::nullopt);
  }

  bool contains(VertexRef r) const {
    return r.graph >= 0 && r.graph + 1 < static_cast<int>(offsets_.size()) && r.vertex >= 0 &&
           r.vertex < offsets_[r.graph + 1] - offsets_[r.graph];
  }
  std::optional<VertexRef>& operator[](VertexRef r) { return slots_[offsets_[r.graph] + r.vertex]; }
  const std::optional<VertexRef>& operator[](VertexRef r) const {
    return slots_[offsets_[r.graph] + r.vertex];
  }

 private:
  std::vector<int> offsets_;
  std::vector<std::optional<VertexRef>> slots_;
};

class CorrespondenceSearch {
 public:
  CorrespondenceSearch(const LabeledGraph& before, const LabeledGraph& after)
      : b_(before), a_(after), nb_(before.vertex_count()) {
    std::map<std::uint64_t, int> before_count;
    std::map<std::uint64_t, int> after_count;
    for (Label l : b_.vertex_labels()) ++before_count[l.key()];
    for (Label l : a_.vertex_labels()) ++after_count[l.key()];
    for (const auto& [key, cb] : before_count) {
      auto it = after_count.find(key);
      const int ca = it == after_count.end() ? 0 : it->second;
      skips_[key] = cb - std::min(cb, ca);
    }
    later_edges_.assign(nb_ + 1, 0);
    for (const Edge& e : b_.edges()) ++later_edges_[std::max(e.u, e.v)];
    for (int i = nb_ - 1; i >= 0; --i) later_edges_[i] += later_edges_[i + 1];
    assign_.assign(nb_, -1);
    used_.assign(a_.vertex_count(), 0);
  }

  std::vector<int> run() {
    extend(0, 0);
    return best_;
  }

 private:
  void extend(int u, int score) {
    if (++nodes_ > kCorrespondenceNodeBudget) {
      throw SizeError("correspondence search exceeded its node budget; supply an explicit map");
    }
    if (has_best_ && score + later_edges_[u] <= best_score_) return;
    if (u == nb_) {
      has_best_ = true;
      best_score_ = score;
      best_ = assign_;
      return;
    }
    const Label lu = b_.vertex_label(u);
    for (int w = 0; w < a_.vertex_count(); ++w) {
      if (used_[w] || a_.vertex_label(w) != lu) continue;
      int gain = 0;
      for (const Neighbor& nb : b_.neighbors(u)) {
        if (nb.vertex >= u || assign_[nb.vertex] < 0) continue;
        auto al = a_.edge_label(w, assign_[nb.vertex]);
        if (al && *al == nb.label) ++gain;
      }
      assign_[u] = w;
      used_[w] = 1;
      extend(u + 1, score + gain);
      used_[w] = 0;
      assign_[u] = -1;
    }
    int& skips = skips_[lu.key()];
    if (skips > 0) {
      --skips;
      extend(u + 1, score);
      ++skips;
    }
  }

  const LabeledGraph& b_;
  const LabeledGraph& a_;
  int nb_;
  std::map<std::uint64_t, int> skips_;
  std::vector<int> later_edges_;
  std::vector<int> assign_;
  std::vector<char> used_;
  std::vector<int> best_;
  int best_score_ = -1;
  bool has_best_ = false;
  std::size_t nodes_ = 0;
};

std::vector<std::pair<std::uint64_t, VertexRef>> mapped_neighborhood(const State& s, VertexRef v,
                                                                      const RefMap& map,
                                                                      bool& has_unmapped) {
  std::vector<std::pair<std::uint64_t, VertexRef>> out;
  for (const Neighbor& nb : s[v.graph].neighbors(v.vertex)) {
    const auto& img = map[{v.graph, nb.vertex}];
    if (!img) {
      has_unmapped = true;
      continue;
    }
    out.emplace_back(nb.label.key(), *img);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::uint64_t, VertexRef>> own_neighborhood(const State& s, VertexRef v) {
  std::vector<std::pair<std::uint64_t, VertexRef>> out;
  for (const Neighbor& nb : s[v.graph].neighbors(v.vertex)) {
    out.emplace_back(nb.label.key(), VertexRef{v.graph, nb.vertex});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Vertices within `radius` hops of `seeds` (same member only).
std::vector<VertexRef> ball(const State& s, const std::vector<VertexRef>& seeds, int radius) {
  std::map<VertexRef, int> dist;
  std::vector<VertexRef> frontier;
  for (const VertexRef& r : seeds) {
    if (dist.emplace(r, 0).second) frontier.push_back(r);
  }
  for (int d = 1; d <= radius; ++d) {
    std::vector<VertexRef> next;
    for (const VertexRef& r : frontier) {
      for (const Neighbor& nb : s[r.graph].neighbors(r.vertex)) {
        VertexRef x{r.graph, nb.vertex};
        if (dist.emplace(x, d).second) next.push_back(x);
      }
    }
    frontier = std::move(next);
  }
  std::vector<VertexRef> out;
  for (const auto& [r, d] : dist) out.push_back(r);
  return out;
}

}  // namespace

void validate_correspondence(const Observation& obs, const Correspondence& map) {
  RefMap fwd(obs.before);
  RefMap bwd(obs.after);
  for (const auto& [b, a] : map) {
    if (!fwd.contains(b) || !bwd.contains(a)) {
      throw GraphError("correspondence references a missing vertex");
    }
    if (fwd[b] || bwd[a]) throw GraphError("correspondence is not injective");
    fwd[b] = a;
    bwd[a] = b;
  }
}

Correspondence infer_correspondence(const State& before, const State& after) {
  const int total = before.total_vertices() + after.total_vertices();
  if (total > kCorrespondenceVertexCap) {
    throw SizeError("correspondence inference supports at most " +
                    std::to_string(kCorrespondenceVertexCap) + " combined vertices, got " +
                    std::to_string(total));
  }
  const FlatState fb = flatten(before);
  const FlatState fa = flatten(after);
  const std::vector<int> assign = CorrespondenceSearch(fb.graph, fa.graph).run();
  Correspondence out;
  for (std::size_t u = 0; u < assign.size(); ++u) {
    if (assign[u] >= 0) out.emplace_back(fb.refs[u], fa.refs[assign[u]]);
  }
  return out;
}

ChangedSets diff_pair(const Observation& obs) {
  if (!obs.correspondence) throw PreconditionError("diff_pair requires a correspondence");
  validate_correspondence(obs, *obs.correspondence);
  RefMap fwd(obs.before);
  RefMap bwd(obs.after);
  for (const auto& [b, a] : *obs.correspondence) {
    fwd[b] = a;
    bwd[a] = b;
  }

  ChangedSets out;
  for (std::size_t gi = 0; gi < obs.before.size(); ++gi) {
    for (int v = 0; v < obs.before[gi].vertex_count(); ++v) {
      const VertexRef u{static_cast<int>(gi), v};
      const auto& img = fwd[u];
      if (!img) {
        out.before.push_back(u);
        continue;
      }
      bool unmapped = false;
      const auto mine = mapped_neighborhood(obs.before, u, fwd, unmapped);
      const auto theirs = own_neighborhood(obs.after, *img);
      for (const auto& [label, w] : theirs) {
        if (!bwd[w]) unmapped = true;
      }
      const bool changed = unmapped ||
                           obs.before[u.graph].vertex_label(u.vertex) !=
                               obs.after[img->graph].vertex_label(img->vertex) ||
                           mine != theirs;
      if (changed) {
        out.before.push_back(u);
        out.after.push_back(*img);
      }
    }
  }
  for (std::size_t gi = 0; gi < obs.after.size(); ++gi) {
    for (int v = 0; v < obs.after[gi].vertex_count(); ++v) {
      const VertexRef w{static_cast<int>(gi), v};
      if (!bwd[w]) out.after.push_back(w);
    }
  }
  std::sort(out.before.begin(), out.before.end());
  std::sort(out.after.begin(), out.after.end());
  return out;
}

RewriteRule extract_rule(const Observation& obs, int radius) {
  if (radius < 0) throw PreconditionError("radius must be >= 0");
  Observation mapped{obs.before, obs.after, obs.correspondence};
  if (!mapped.correspondence) mapped.correspondence = infer_correspondence(obs.before, obs.after);
  const ChangedSets changed = diff_pair(mapped);
  if (changed.before.empty() && changed.after.empty()) {
    throw InductionError(InductionError::Kind::kNoOpObservation, "observation changes nothing");
  }
  if (changed.before.empty()) {
    throw InductionError(InductionError::Kind::kDisconnectedCore,
                         "observation consumes no vertex; a rule needs a non-empty pattern");
  }
  const int g0 = changed.before.front().graph;
  for (const VertexRef& r : changed.before) {
    if (r.graph != g0) {
      throw InductionError(InductionError::Kind::kDisconnectedCore,
                           "changed vertices span several state members");
    }
  }

  RefMap fwd(obs.before);
  RefMap bwd(obs.after);
  for (const auto& [b, a] : *mapped.correspondence) {
    fwd[b] = a;
    bwd[a] = b;
  }
  std::vector<char> in_lhs(obs.before[g0].vertex_count(), 0);
  for (const VertexRef& r : changed.before) in_lhs[r.vertex] = 1;
  for (const VertexRef& r : ball(obs.before, changed.before, radius)) in_lhs[r.vertex] = 1;
  {
    const auto after_ball = ball(obs.after, changed.after, radius);
    for (const VertexRef& w : after_ball) {
      const auto& pre = bwd[w];
      if (!pre) continue;
      if (pre->graph != g0) {
        throw InductionError(InductionError::Kind::kDisconnectedCore,
                             "context reaches a different state member");
      }
      in_lhs[pre->vertex] = 1;
    }
  }

  std::vector<int> lhs_vertices;
  for (int v = 0; v < static_cast<int>(in_lhs.size()); ++v) {
    if (in_lhs[v]) lhs_vertices.push_back(v);
  }
  std::vector<VertexRef> rhs_vertices = changed.after;
  for (int v : lhs_vertices) {
    const auto& img = fwd[{g0, v}];
    if (img) rhs_vertices.push_back(*img);
  }
  std::sort(rhs_vertices.begin(), rhs_vertices.end());
  rhs_vertices.erase(std::unique(rhs_vertices.begin(), rhs_vertices.end()), rhs_vertices.end());

  LabeledGraph lhs = induced_subgraph(obs.before[g0], lhs_vertices);
  if (!is_connected(lhs)) {
    throw InductionError(InductionError::Kind::kDisconnectedCore,
                         "changed core is disconnected at radius " + std::to_string(radius) +
                             "; raise the radius");
  }

  std::map<VertexRef, int> rhs_index;
  std::vector<Label> rhs_labels;
  for (const VertexRef& w : rhs_vertices) {
    rhs_index[w] = static_cast<int>(rhs_labels.size());
    rhs_labels.push_back(obs.after[w.graph].vertex_label(w.vertex));
  }
  std::vector<Edge> rhs_edges;
  for (const VertexRef& w : rhs_vertices) {
    for (const Neighbor& nb : obs.after[w.graph].neighbors(w.vertex)) {
      if (nb.vertex <= w.vertex) continue;
      auto it = rhs_index.find({w.graph, nb.vertex});
      if (it != rhs_index.end()) rhs_edges.push_back({rhs_index[w], it->second, nb.label});
    }
  }
  LabeledGraph rhs(std::move(rhs_labels), std::move(rhs_edges));

  Interface k;
  for (std::size_t i = 0; i < lhs_vertices.size(); ++i) {
    const auto& img = fwd[{g0, lhs_vertices[i]}];
    if (!img) continue;
    auto it = rhs_index.find(*img);
    if (it != rhs_index.end()) k.emplace_back(static_cast<int>(i), it->second);
  }

  RewriteRule rule(std::move(lhs), std::move(rhs), std::move(k));
  Application app{rule.id(), static_cast<std::size_t>(g0), VertexMap{lhs_vertices}};
  if (state_key(apply_rule(rule, obs.before, app)) != state_key(obs.after)) {
    throw InductionError(InductionError::Kind::kNotRederivable,
                         "extracted rule does not reproduce the observed successor");
  }
  return rule;
}

bool rederives(const RewriteRule& rule, const Observation& obs) {
  const std::string target = state_key(obs.after);
  bool found = false;
  for (std::size_t i = 0; i < obs.before.size() && !found; ++i) {
    for_each_embedding(rule.lhs(), obs.before[i], [&](std::span<const int> image) {
      Application app{rule.id(), i, VertexMap{std::vector<int>(image.begin(), image.end())}};
      try {
        found = state_key(apply_rule(rule, obs.before, app)) == target;
      } catch (const SizeError&) {
      }
      return !found;
    });
  }
  return found;
}

ActionLibrary::ActionLibrary(std::vector<RewriteRule> rules) {
  for (auto& r : rules) add(r, r.support());
}

std::size_t ActionLibrary::add(const RewriteRule& rule, int support) {
  auto it = index_.find(rule.id());
  if (it != index_.end()) {
    RewriteRule& existing = rules_[it->second];
    if (existing.code() != rule.code()) {
      throw GraphError("rule id collision on " + rule.id());
    }
    existing.set_support(existing.support() + support);
    return it->second;
  }
  const std::size_t ordinal = rules_.size();
  rules_.push_back(rule);
  rules_.back().set_support(support);
  index_.emplace(rule.id(), ordinal);
  return ordinal;
}

std::optional<std::size_t> ActionLibrary::ordinal_of(const std::string& rule_id) const {
  auto it = index_.find(rule_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t ActionLibrary::hash_id() const {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& r : rules_) {
    h = fnv1a64(r.id(), h);
    h = fnv1a64("\n", h);
  }
  return h;
}

LibraryBuild build_library(const std::vector<Observation>& observations, int radius,
                           int min_support) {
  if (observations.empty()) throw PreconditionError("build_library needs at least one observation");
  ActionLibrary all;
  std::vector<std::optional<std::size_t>> raw(observations.size());
  LibraryBuild out;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    try {
      raw[i] = all.add(extract_rule(observations[i], radius));
    } catch (const Error& e) {
      out.failures.push_back({i, e.what()});
    }
  }
  std::vector<std::optional<std::size_t>> remap(all.size());
  for (std::size_t r = 0; r < all.size(); ++r) {
    if (all[r].support() >= min_support) remap[r] = out.library.add(all[r], all[r].support());
  }
  out.labels.resize(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (raw[i]) out.labels[i] = remap[*raw[i]];
  }
  if (out.library.empty()) {
    throw InductionError(InductionError::Kind::kEmptyLibrary,
                         "no rule could be induced from " + std::to_string(observations.size()) +
                             " observations");
  }
  return out;
}

std::vector<std::optional<std::size_t>> label_observations(const ActionLibrary& library,
                                                           const std::vector<Observation>& observations,
                                                           int radius) {
  std::vector<std::optional<std::size_t>> labels(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    try {
      labels[i] = library.ordinal_of(extract_rule(observations[i], radius).id());
    } catch (const Error&) {
    }
  }
  return labels;
}

}  // namespace wp
