#ifndef WORLDPROG_INDUCTION_HPP_
#define WORLDPROG_INDUCTION_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "worldprog/graph.hpp"
#include "worldprog/rewrite.hpp"

namespace wp {

/// A vertex of a state: (member index, vertex id).
struct VertexRef {
  int graph = 0;
  int vertex = 0;

  friend auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

/// Injective partial map from before-vertices to after-vertices.
using Correspondence = std::vector<std::pair<VertexRef, VertexRef>>;

struct Observation {
  State before;
  State after;
  std::optional<Correspondence> correspondence;
};

/// Throws GraphError when the map is not injective or references missing
/// vertices.
void validate_correspondence(const Observation& obs, const Correspondence& map);

/// Combined vertex bound for infer_correspondence.
inline constexpr int kCorrespondenceVertexCap = 64;

/// Maximum-cardinality label-preserving vertex correspondence; among those,
/// one preserving the most labeled edges. Ties resolve to the
/// lexicographically smallest assignment in before-vertex order. Throws
/// SizeError above the vertex cap or when the branch-and-bound search
/// exceeds its node budget.
Correspondence infer_correspondence(const State& before, const State& after);

struct ChangedSets {
  std::vector<VertexRef> before;
  std::vector<VertexRef> after;
};

/// Vertices touched by the transition. Requires a correspondence.
ChangedSets diff_pair(const Observation& obs);

/// Extracts the rewrite rule that explains `obs`, with `radius` hops of
/// unchanged context around the changed core. The result is verified to
/// re-derive the observation.
RewriteRule extract_rule(const Observation& obs, int radius = 0);

/// True when applying `rule` somewhere in obs.before yields obs.after up to
/// isomorphism.
bool rederives(const RewriteRule& rule, const Observation& obs);

/// The learned action set: deduplicated rules with dense ordinals.
class ActionLibrary {
 public:
  ActionLibrary() = default;
  explicit ActionLibrary(std::vector<RewriteRule> rules);

  /// Adds the rule or bumps the support of an identical one. Returns the
  /// ordinal.
  std::size_t add(const RewriteRule& rule, int support = 1);

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const RewriteRule& operator[](std::size_t ordinal) const { return rules_.at(ordinal); }
  const std::vector<RewriteRule>& rules() const noexcept { return rules_; }

  std::optional<std::size_t> ordinal_of(const std::string& rule_id) const;

  /// Digest of the rule ids in ordinal order; binds model files to a
  /// library.
  std::uint64_t hash_id() const;

 private:
  std::vector<RewriteRule> rules_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct InductionFailure {
  std::size_t observation = 0;
  std::string reason;
};

struct LibraryBuild {
  ActionLibrary library;
  /// Rule ordinal per observation; empty for failed or pruned ones.
  std::vector<std::optional<std::size_t>> labels;
  std::vector<InductionFailure> failures;
};

/// Induces rules from every observation, merges duplicates by canonical
/// rule id and drops rules below `min_support`. Throws InductionError when
/// nothing survives.
LibraryBuild build_library(const std::vector<Observation>& observations, int radius = 0,
                           int min_support = 1);

/// Library ordinal of each observation's extracted rule; empty when
/// extraction fails or the rule is not in the library.
std::vector<std::optional<std::size_t>> label_observations(const ActionLibrary& library,
                                                           const std::vector<Observation>& observations,
                                                           int radius = 0);

}  // namespace wp

#endif  // WORLDPROG_INDUCTION_HPP_
