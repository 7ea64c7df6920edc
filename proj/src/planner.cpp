#include "worldprog/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/features.hpp"
#include "worldprog/matching.hpp"
#include "worldprog/rng.hpp"

namespace wp {
namespace {

using Clock = std::chrono::steady_clock;

// Embeddings tried per rule when sampling a rollout step.
constexpr std::size_t kRolloutEmbeddingScan = 64;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One step of a found solution: rule ordinal and the key it must reach.
struct SolutionStep {
  std::size_t rule = 0;
  std::string key;
};

class Expander {
 public:
  Expander(const World& world, const PlannerParams& params, const BlockSet& blocks)
      : world_(world), params_(params), blocks_(blocks) {
    if (!world.library || !world.policy) throw PreconditionError("world program needs a library and a policy");
    if (world.policy->classes() != world.library->size()) {
      throw ModelError("policy dimension does not match the rule library");
    }
  }

  std::size_t expansions() const noexcept { return expansions_; }

  std::vector<std::uint8_t> active_members(const State& s) const {
    std::vector<std::uint8_t> active(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) active[i] = blocks_.contains(s[i]) ? 0 : 1;
    return active;
  }

  std::vector<Child> expand(const State& state) {
    ++expansions_;
    std::vector<Child> children;
    const auto active = active_members(state);
    const auto n_active = static_cast<double>(std::count(active.begin(), active.end(), 1));
    if (n_active == 0) return children;
    const std::string parent_key = state_key(state);
    std::unordered_map<std::string, std::size_t> by_key;
    std::vector<Successor> survivors;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (!active[i]) continue;
      const MemberInfo& info = member(state[i]);
      std::vector<std::uint8_t> only(state.size(), 0);
      only[i] = 1;
      for (const RankedRule& rr : info.topk) {
        const RewriteRule& rule = (*world_.library)[rr.ordinal];
        std::vector<Successor> succ;
        try {
          succ = enumerate_applications(rule, state, params_.embedding_cap, only);
        } catch (const SizeError&) {
          continue;
        }
        survivors.clear();
        for (auto& s : succ) {
          if (s.key == parent_key) continue;
          if (!passes_filter(info, state, s.state, i)) continue;
          survivors.push_back(std::move(s));
        }
        if (survivors.empty()) continue;
        const double prior = rr.prob / n_active / static_cast<double>(survivors.size());
        for (auto& s : survivors) {
          auto [it, fresh] = by_key.emplace(s.key, children.size());
          if (fresh) {
            children.push_back({rr.ordinal, std::move(s.application), std::move(s.state), std::move(s.key), prior});
          } else {
            children[it->second].prior += prior;
          }
        }
      }
    }
    return children;
  }

  // Samples one successor: a random unsolved member, a rule from its top-k
  // distribution, then a uniformly chosen application passing the filters.
  std::optional<Child> sample(const State& state, Rng& rng) {
    const auto active = active_members(state);
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (active[i]) members.push_back(i);
    }
    rng.shuffle(members);
    std::optional<std::string> parent_key;
    for (std::size_t i : members) {
      const MemberInfo& info = member(state[i]);
      std::vector<double> weights;
      for (const auto& rr : info.topk) weights.push_back(rr.prob);
      for (;;) {
        const int pick = rng.weighted(weights);
        if (pick < 0) break;
        weights[pick] = 0.0;
        const std::size_t ordinal = info.topk[pick].ordinal;
        const RewriteRule& rule = (*world_.library)[ordinal];
        std::vector<VertexMap> maps = find_embeddings(rule.lhs(), state[i], kRolloutEmbeddingScan);
        rng.shuffle(maps);
        for (auto& m : maps) {
          Application app{rule.id(), i, std::move(m)};
          State next;
          try {
            next = apply_rule(rule, state, app);
          } catch (const SizeError&) {
            continue;
          }
          std::string key = state_key(next);
          if (!parent_key) parent_key = state_key(state);
          if (key == *parent_key) continue;
          if (!passes_filter(info, state, next, i)) continue;
          return Child{ordinal, std::move(app), std::move(next), std::move(key), info.topk[pick].prob};
        }
      }
    }
    return std::nullopt;
  }

 private:
  struct MemberInfo {
    std::vector<RankedRule> topk;
    SparseFeatures features;
  };

  const MemberInfo& member(const LabeledGraph& g) {
    const std::string& code = g.canonical_code().bytes;
    auto it = members_.find(code);
    if (it != members_.end()) return it->second;
    MemberInfo info;
    info.features = state_features(State({g}), world_.policy->config());
    info.topk = policy_topk(policy_distribution(*world_.policy, info.features), params_.mass, params_.k_max);
    return members_.emplace(code, std::move(info)).first->second;
  }

  // Scores the member-level transition: the rewritten member against the
  // components that replaced it.
  bool passes_filter(const MemberInfo& info, const State& parent, const State& next, std::size_t i) {
    if (!world_.transition) return true;
    const TransitionModel& t = *world_.transition;
    const std::size_t produced = next.size() + 1 - parent.size();
    std::vector<LabeledGraph> parts(next.graphs().begin() + i, next.graphs().begin() + i + produced);
    const SparseFeatures before = t.config() == world_.policy->config()
                                      ? info.features
                                      : state_features(State({parent[i]}), t.config());
    const SparseFeatures after = state_features(State(std::move(parts)), t.config());
    return t.probability(transition_features(before, after, t.config())) >= params_.tau;
  }

  const World& world_;
  const PlannerParams& params_;
  const BlockSet& blocks_;
  std::unordered_map<std::string, MemberInfo> members_;
  std::size_t expansions_ = 0;
};

struct AttemptOutcome {
  bool solved = false;
  bool exhausted = false;
  std::size_t iterations = 0;
  std::size_t root_visits = 0;
  std::vector<SolutionStep> steps;
};

struct Deadline {
  Clock::time_point start;
  double seconds = 0.0;
  bool passed() const { return seconds > 0.0 && seconds_since(start) > seconds; }
};

class TreeSearch {
 public:
  TreeSearch(Expander& expander, const BlockSet& blocks, const PlannerParams& params,
             Algorithm algorithm, Rng& rng)
      : expander_(expander), blocks_(blocks), params_(params), algorithm_(algorithm), rng_(rng) {}

  AttemptOutcome run(const State& root_state, std::size_t max_iterations, const Deadline& deadline) {
    AttemptOutcome out;
    node_for(root_state, state_key(root_state), 0);
    std::vector<int> path;
    std::vector<SolutionStep> rollout_steps;
    while (out.iterations < max_iterations && !deadline.passed()) {
      ++out.iterations;
      path.assign(1, 0);
      rollout_steps.clear();
      double value = 0.0;
      int solved_edge = -1;
      int node = 0;
      for (;;) {
        if (nodes_[node].terminal) break;
        if (!nodes_[node].expanded) {
          if (nodes_[node].depth >= params_.d_max) {
            mark_dead(node);
            break;
          }
          solved_edge = expand(node);
          if (solved_edge >= 0) {
            path.push_back(nodes_[node].edges[solved_edge].child);
            value = 1.0;
            break;
          }
          if (nodes_[node].edges.empty()) {
            mark_dead(node);
            break;
          }
          value = rollout(nodes_[node].state, nodes_[node].depth, rollout_steps);
          break;
        }
        const int next = select(node, path);
        if (next < 0) break;
        node = next;
        path.push_back(node);
      }
      for (int v : path) {
        nodes_[v].visits += 1;
        nodes_[v].value += value;
      }
      if (value > 0.0) {
        out.solved = true;
        for (std::size_t k = 1; k < path.size(); ++k) {
          out.steps.push_back({edge_rule(path[k - 1], path[k]), nodes_[path[k]].key});
        }
        out.steps.insert(out.steps.end(), rollout_steps.begin(), rollout_steps.end());
        break;
      }
      update_exhaustion(path);
      if (nodes_[0].exhausted) {
        out.exhausted = true;
        break;
      }
    }
    out.root_visits = static_cast<std::size_t>(nodes_[0].visits);
    return out;
  }

 private:
  struct TreeEdge {
    int child = 0;
    std::size_t rule = 0;
    double prior = 0.0;
  };

  struct Node {
    State state;
    std::string key;
    int depth = 0;
    bool expanded = false;
    bool terminal = false;
    bool exhausted = false;
    double visits = 0.0;
    double value = 0.0;
    std::vector<TreeEdge> edges;
  };

  int node_for(const State& s, const std::string& key, int depth) {
    auto [it, fresh] = index_.emplace(key, static_cast<int>(nodes_.size()));
    if (fresh) nodes_.push_back(Node{s, key, depth, false, false, false, 0.0, 0.0, {}});
    return it->second;
  }

  void mark_dead(int node) {
    nodes_[node].terminal = true;
    nodes_[node].exhausted = true;
  }

  // Returns the index of an edge leading to a solved state, or -1.
  int expand(int node) {
    std::vector<Child> children = expander_.expand(nodes_[node].state);
    nodes_[node].expanded = true;
    const int depth = nodes_[node].depth + 1;
    std::vector<TreeEdge> edges;
    edges.reserve(children.size());
    int solved = -1;
    for (auto& c : children) {
      const bool done = is_solved(c.state, blocks_);
      const int child = node_for(c.state, c.key, depth);
      edges.push_back({child, c.rule, c.prior});
      if (done && solved < 0) solved = static_cast<int>(edges.size()) - 1;
    }
    nodes_[node].edges = std::move(edges);
    return solved;
  }

  std::size_t edge_rule(int parent, int child) const {
    for (const auto& e : nodes_[parent].edges) {
      if (e.child == child) return e.rule;
    }
    throw std::logic_error("path edge missing from tree");
  }

  int select(int node, const std::vector<int>& path) {
    const Node& nd = nodes_[node];
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    const double parent_visits = std::max(nd.visits, 1.0);
    for (const TreeEdge& e : nd.edges) {
      const Node& ch = nodes_[e.child];
      if (ch.exhausted) continue;
      if (std::find(path.begin(), path.end(), e.child) != path.end()) continue;
      double score = 0.0;
      const double q = ch.visits > 0 ? ch.value / ch.visits : 0.0;
      if (algorithm_ == Algorithm::kUct) {
        if (ch.visits == 0) return e.child;
        score = q + params_.c_uct * std::sqrt(std::log(parent_visits) / ch.visits);
      } else {
        score = q + params_.c_puct * e.prior * std::sqrt(parent_visits) / (1.0 + ch.visits);
      }
      if (score > best_score) {
        best_score = score;
        best = e.child;
      }
    }
    return best;
  }

  void update_exhaustion(const std::vector<int>& path) {
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      Node& nd = nodes_[*it];
      if (nd.exhausted) continue;
      if (!nd.expanded) break;
      const bool all = std::all_of(nd.edges.begin(), nd.edges.end(),
                                   [&](const TreeEdge& e) { return nodes_[e.child].exhausted; });
      if (!all) break;
      nd.exhausted = true;
    }
  }

  double rollout(const State& start, int depth, std::vector<SolutionStep>& steps) {
    State cur = start;
    for (int d = depth; d < params_.d_max; ++d) {
      auto step = expander_.sample(cur, rng_);
      if (!step) return 0.0;
      steps.push_back({step->rule, step->key});
      cur = std::move(step->state);
      if (is_solved(cur, blocks_)) return 1.0;
    }
    return 0.0;
  }

  Expander& expander_;
  const BlockSet& blocks_;
  const PlannerParams& params_;
  Algorithm algorithm_;
  Rng& rng_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> index_;
};

AttemptOutcome run_mcs(Expander& expander, const BlockSet& blocks, const PlannerParams& params,
                       const State& root, std::size_t max_iterations, const Deadline& deadline, Rng& rng) {
  AttemptOutcome out;
  while (out.iterations < max_iterations && !deadline.passed()) {
    ++out.iterations;
    State cur = root;
    std::vector<SolutionStep> steps;
    for (int d = 0; d < params.d_max; ++d) {
      auto step = expander.sample(cur, rng);
      if (!step) break;
      steps.push_back({step->rule, step->key});
      cur = std::move(step->state);
      if (is_solved(cur, blocks)) {
        out.solved = true;
        out.steps = std::move(steps);
        return out;
      }
    }
  }
  return out;
}

int uncovered_vertices(const State& s, const BlockSet& blocks) {
  int total = 0;
  for (const auto& g : s.graphs()) {
    if (!blocks.contains(g)) total += g.vertex_count();
  }
  return total;
}

AttemptOutcome run_best_first(Expander& expander, const BlockSet& blocks, const PlannerParams& params,
                              Algorithm algorithm, const State& root, std::size_t max_iterations,
                              const Deadline& deadline, Rng& rng) {
  struct BfsNode {
    State state;
    std::string key;
    int parent = -1;
    std::size_t rule = 0;
    int depth = 0;
    double cost = 0.0;
  };
  struct Entry {
    double priority;
    std::uint64_t seq;
    int node;
    bool operator>(const Entry& o) const {
      return priority != o.priority ? priority > o.priority : seq > o.seq;
    }
  };
  const bool neural = algorithm == Algorithm::kBfsNeural;
  std::vector<BfsNode> nodes;
  std::unordered_map<std::string, double> best_cost;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::uint64_t seq = 0;

  nodes.push_back({root, state_key(root), -1, 0, 0, 0.0});
  best_cost[nodes[0].key] = 0.0;
  frontier.push({0.0, seq++, 0});

  AttemptOutcome out;
  auto finish = [&](int last) {
    std::vector<SolutionStep> rev;
    for (int v = last; nodes[v].parent >= 0; v = nodes[v].parent) rev.push_back({nodes[v].rule, nodes[v].key});
    out.steps.assign(rev.rbegin(), rev.rend());
    out.solved = true;
  };

  while (!frontier.empty() && out.iterations < max_iterations && !deadline.passed()) {
    const Entry top = frontier.top();
    frontier.pop();
    if (neural && nodes[top.node].cost > best_cost[nodes[top.node].key]) continue;
    ++out.iterations;
    if (nodes[top.node].depth >= params.d_max) continue;
    std::vector<Child> children = expander.expand(nodes[top.node].state);
    rng.shuffle(children);
    for (auto& c : children) {
      const double cost = nodes[top.node].cost - std::log(std::max(c.prior, 1e-300));
      auto it = best_cost.find(c.key);
      if (it != best_cost.end() && (!neural || cost >= it->second)) continue;
      best_cost[c.key] = cost;
      const int id = static_cast<int>(nodes.size());
      const int depth = nodes[top.node].depth + 1;
      const double priority = neural ? cost : static_cast<double>(uncovered_vertices(c.state, blocks));
      nodes.push_back({std::move(c.state), c.key, top.node, c.rule, depth, cost});
      if (is_solved(nodes[id].state, blocks)) {
        finish(id);
        return out;
      }
      frontier.push({priority, seq++, id});
    }
  }
  out.exhausted = frontier.empty();
  return out;
}

// Rebuilds concrete applications for a solution expressed as (rule, key)
// steps, starting from the caller's own target instance.
std::vector<PlanStep> materialize(const State& target, const std::vector<SolutionStep>& steps,
                                  const ActionLibrary& library) {
  std::vector<PlanStep> plan;
  State cur = target;
  for (const SolutionStep& step : steps) {
    const RewriteRule& rule = library[step.rule];
    std::optional<PlanStep> found;
    for (std::size_t i = 0; i < cur.size() && !found; ++i) {
      for_each_embedding(rule.lhs(), cur[i], [&](std::span<const int> image) {
        Application app{rule.id(), i, VertexMap{std::vector<int>(image.begin(), image.end())}};
        State next = apply_rule(rule, cur, app);
        if (state_key(next) == step.key) {
          found = PlanStep{rule.id(), std::move(app), std::move(next)};
          return false;
        }
        return true;
      });
    }
    if (!found) throw std::logic_error("solution step could not be re-applied");
    cur = found->successor;
    plan.push_back(std::move(*found));
  }
  return plan;
}

}  // namespace

std::string_view algorithm_token(Algorithm a) {
  switch (a) {
    case Algorithm::kPuct: return "puct";
    case Algorithm::kUct: return "uct";
    case Algorithm::kMcs: return "mcs";
    case Algorithm::kBfsNeural: return "bfs-neural";
    case Algorithm::kBfsHeuristic: return "bfs-heuristic";
  }
  return "?";
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kPuct: return "PUCT-MCTS";
    case Algorithm::kUct: return "UCT-MCTS";
    case Algorithm::kMcs: return "MCS";
    case Algorithm::kBfsNeural: return "BFS (neural)";
    case Algorithm::kBfsHeuristic: return "BFS (heuristic)";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view token) {
  for (Algorithm a : kAllAlgorithms) {
    if (algorithm_token(a) == token) return a;
  }
  return std::nullopt;
}

BlockSet::BlockSet(std::span<const LabeledGraph> blocks) {
  for (const auto& b : blocks) codes_.insert(b.canonical_code().bytes);
}

bool BlockSet::contains(const LabeledGraph& g) const { return codes_.count(g.canonical_code().bytes) > 0; }

bool is_solved(const State& state, const BlockSet& blocks) {
  return std::all_of(state.graphs().begin(), state.graphs().end(),
                     [&](const LabeledGraph& g) { return blocks.contains(g); });
}

bool is_solved(const State& state, std::span<const LabeledGraph> blocks) {
  return is_solved(state, BlockSet(blocks));
}

std::vector<Child> expand(const State& state, const World& world, const PlannerParams& params,
                          const BlockSet& blocks) {
  Expander expander(world, params, blocks);
  return expander.expand(state);
}

PlanResult plan(const Problem& problem, Algorithm algorithm, const World& world,
                const PlannerParams& params, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PlanResult result;
  const BlockSet blocks(problem.blocks);
  if (is_solved(problem.target, blocks)) {
    result.solved = true;
    result.wall_seconds = seconds_since(t0);
    return result;
  }
  if (problem.budget.max_iterations == 0 || problem.budget.restarts < 1) {
    throw PreconditionError("planning budget must be positive");
  }
  Expander expander(world, params, blocks);
  for (int attempt = 0; attempt < problem.budget.restarts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const Deadline deadline{Clock::now(), problem.budget.wall_clock_seconds};
    AttemptOutcome outcome;
    switch (algorithm) {
      case Algorithm::kPuct:
      case Algorithm::kUct: {
        TreeSearch search(expander, blocks, params, algorithm, rng);
        outcome = search.run(problem.target, problem.budget.max_iterations, deadline);
        break;
      }
      case Algorithm::kMcs:
        outcome = run_mcs(expander, blocks, params, problem.target, problem.budget.max_iterations, deadline, rng);
        break;
      case Algorithm::kBfsNeural:
      case Algorithm::kBfsHeuristic:
        outcome = run_best_first(expander, blocks, params, algorithm, problem.target,
                                 problem.budget.max_iterations, deadline, rng);
        break;
    }
    ++result.attempts;
    result.iterations += outcome.iterations;
    result.root_visits = outcome.root_visits;
    result.final_attempt_iterations = outcome.iterations;
    if (outcome.solved) {
      result.solved = true;
      result.plan = materialize(problem.target, outcome.steps, *world.library);
      break;
    }
    if (outcome.exhausted) {
      result.exhausted = true;
      break;
    }
  }
  result.nodes_expanded = expander.expansions();
  result.wall_seconds = seconds_since(t0);
  return result;
}

State replay_plan(const State& target, const std::vector<PlanStep>& plan, const ActionLibrary& library) {
  State cur = target;
  for (const auto& step : plan) {
    auto ordinal = library.ordinal_of(step.rule_id);
    if (!ordinal) throw PreconditionError("plan uses unknown rule " + step.rule_id);
    cur = apply_rule(library[*ordinal], cur, step.application);
  }
  return cur;
}

void write_plan(std::ostream& out, const PlanResult& result) {
  for (std::size_t i = 0; i < result.plan.size(); ++i) {
    const PlanStep& s = result.plan[i];
    out << "STEP " << i + 1 << ' ' << s.rule_id << ' ' << s.application.target;
    const auto& image = s.application.embedding.image;
    for (std::size_t p = 0; p < image.size(); ++p) out << " (" << p << ',' << image[p] << ')';
    out << '\n';
    for (const auto& g : s.successor.graphs()) {
      for (int v = 0; v < g.vertex_count(); ++v) out << "v " << v << ' ' << label_name(g.vertex_label(v)) << '\n';
      for (const Edge& e : g.edges()) out << "e " << e.u << ' ' << e.v << ' ' << label_name(e.label) << '\n';
    }
    out << "--\n";
  }
  out << "SUMMARY solved=" << (result.solved ? 1 : 0) << " iterations=" << result.iterations
      << " wall=" << result.wall_seconds << " nodes=" << result.nodes_expanded
      << " attempts=" << result.attempts << '\n';
}

}  // namespace wp
