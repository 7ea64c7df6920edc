#ifndef WORLDPROG_PLANNER_HPP_
#define WORLDPROG_PLANNER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "worldprog/graph.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/models.hpp"
#include "worldprog/rewrite.hpp"

namespace wp {

enum class Algorithm { kPuct, kUct, kMcs, kBfsNeural, kBfsHeuristic };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::kPuct, Algorithm::kMcs, Algorithm::kUct,
                                               Algorithm::kBfsNeural, Algorithm::kBfsHeuristic};

/// Command-line token: puct, uct, mcs, bfs-neural, bfs-heuristic.
std::string_view algorithm_token(Algorithm a);
/// Report name, e.g. "PUCT-MCTS".
std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view token);

struct Budget {
  std::size_t max_iterations = 10'000;
  double wall_clock_seconds = 0.0;  // <= 0 disables the wall-clock cap
  int restarts = 3;                 // total attempts
};

struct PlannerParams {
  double c_puct = 3.0;
  double c_uct = 1.414;
  int d_max = 15;
  double mass = 0.99;
  std::size_t k_max = 50;
  std::size_t embedding_cap = 8;
  /// Successors scoring below tau under the transition model are dropped.
  double tau = 0.5;
};

/// The induced world program (A, A(s), T).
struct World {
  const ActionLibrary* library = nullptr;
  const PolicyModel* policy = nullptr;
  const TransitionModel* transition = nullptr;
};

/// Goal test: canonical codes of the building blocks.
class BlockSet {
 public:
  BlockSet() = default;
  explicit BlockSet(std::span<const LabeledGraph> blocks);

  bool contains(const LabeledGraph& g) const;
  bool empty() const noexcept { return codes_.empty(); }
  std::size_t size() const noexcept { return codes_.size(); }

 private:
  std::unordered_set<std::string> codes_;
};

/// Every member is isomorphic to some block (vacuously true when empty).
bool is_solved(const State& state, const BlockSet& blocks);
bool is_solved(const State& state, std::span<const LabeledGraph> blocks);

struct Child {
  std::size_t rule = 0;  // ordinal in the library
  Application application;
  State state;
  std::string key;
  double prior = 0.0;
};

/// Successors considered by every agent. Members that are already blocks are
/// left alone; the policy is evaluated per remaining member and its mass
/// split evenly across those members. Per member: top-k rules by prior mass,
/// at most `embedding_cap` distinct applications per rule, successors below
/// tau or equal to the parent dropped, and each rule's prior split evenly
/// over its surviving applications. Children reaching the same state are
/// merged by summing priors.
std::vector<Child> expand(const State& state, const World& world, const PlannerParams& params,
                          const BlockSet& blocks);

struct Problem {
  State target;
  std::vector<LabeledGraph> blocks;
  Budget budget;
};

struct PlanStep {
  std::string rule_id;
  Application application;
  State successor;
};

struct PlanResult {
  bool solved = false;
  /// The reachable tree under the expansion rules was fully explored.
  bool exhausted = false;
  std::vector<PlanStep> plan;
  std::size_t iterations = 0;
  std::size_t attempts = 0;
  std::size_t nodes_expanded = 0;
  double wall_seconds = 0.0;
  /// N(root) - iterations of the final attempt (tree searches only).
  std::size_t root_visits = 0;
  std::size_t final_attempt_iterations = 0;
};

/// Runs one agent. Each attempt gets up to budget.max_iterations iterations
/// (tree iterations, rollouts or best-first expansions) and a fresh seed;
/// search stops at the first solved state.
PlanResult plan(const Problem& problem, Algorithm algorithm, const World& world,
                const PlannerParams& params, std::uint64_t seed);

/// Re-applies the plan from `target`; returns the final state. Throws
/// PreconditionError when a step does not apply.
State replay_plan(const State& target, const std::vector<PlanStep>& plan, const ActionLibrary& library);

/// One record per step, then a summary line.
void write_plan(std::ostream& out, const PlanResult& result);

}  // namespace wp

#endif  // WORLDPROG_PLANNER_HPP_
