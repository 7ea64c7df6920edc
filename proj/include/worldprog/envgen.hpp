#ifndef WORLDPROG_ENVGEN_HPP_
#define WORLDPROG_ENVGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "worldprog/graph.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/rewrite.hpp"

namespace wp {

struct GenParams {
  int vertex_alphabet = 6;
  int edge_alphabet = 2;
  int rules = 12;
  int blocks = 8;
  int block_min = 3;
  int block_max = 6;
  double three_vertex_core = 0.3;  // probability of a core with a relabeled neighbor
  double relabel = 0.5;            // per cut endpoint
  double label_skew = 1.0;         // Zipf exponent of symbol frequencies
};

/// Hidden deconstruction rules cut one bridge between two pieces. Each
/// rule's lhs is the joined core and its rhs the two separated pieces.
struct WorldSpec {
  GenParams params;
  std::uint64_t seed = 0;
  std::vector<RewriteRule> rules;
  std::vector<LabeledGraph> blocks;
};

/// Throws GenerationError for infeasible parameters.
WorldSpec gen_world(const GenParams& params, std::uint64_t seed);

std::string vertex_symbol(int i);
std::string edge_symbol(int i);

struct TrajectoryParams {
  int targets = 200;
  int depth_min = 2;
  int depth_max = 5;
  double noise = 0.0;  // probability of corrupting one after-state label
  double merge = 0.5;  // probability that a join combines two composite objects
};

struct TrajectorySet {
  std::vector<Observation> observations;
  std::vector<std::size_t> hidden_rule;  // per observation
  std::vector<State> targets;
  std::vector<int> depths;  // construction depth per target
};

/// Builds each target by composing blocks with reversed hidden rules and
/// records one deconstruction observation per build step.
TrajectorySet gen_trajectories(const WorldSpec& world, const TrajectoryParams& params,
                               std::uint64_t seed);

inline constexpr std::size_t kOracleNodeCap = 1'000'000;

struct OracleResult {
  bool solvable = false;
  int depth = -1;
};

/// Exhaustive breadth-first search with state-key deduplication. Throws
/// InconclusiveError when more than `node_cap` states are generated.
OracleResult oracle_solvable(const State& target, const std::vector<RewriteRule>& rules,
                             const std::vector<LabeledGraph>& blocks, int max_depth,
                             std::size_t node_cap = kOracleNodeCap);

std::map<std::string, std::string> world_meta(const WorldSpec& world, const TrajectoryParams& traj,
                                              std::uint64_t traj_seed);

/// Writes world.rules, blocks.graphs, observations.obs, targets.graphs and
/// meta into `dir`, creating it if needed.
void save_bundle(const std::string& dir, const WorldSpec& world, const TrajectorySet& training,
                 const TrajectorySet& held_out, const std::map<std::string, std::string>& meta);

}  // namespace wp

#endif  // WORLDPROG_ENVGEN_HPP_
