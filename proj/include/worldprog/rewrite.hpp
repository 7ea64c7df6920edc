#ifndef WORLDPROG_REWRITE_HPP_
#define WORLDPROG_REWRITE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "worldprog/graph.hpp"

namespace wp {

/// Preserved vertices: pairs (lhs vertex, rhs vertex).
using Interface = std::vector<std::pair<int, int>>;

/// Graph rewriting rule L ~> R with preserved interface K.
///
/// The pattern is connected and non-empty and is matched inside a single
/// state member. The replacement may be disconnected. Labels on interface
/// vertices may differ between the two sides.
class RewriteRule {
 public:
  /// Throws UnsupportedRuleError for an empty or disconnected lhs and
  /// GraphError for a malformed interface.
  RewriteRule(LabeledGraph lhs, LabeledGraph rhs, Interface interface, int support = 1);

  const LabeledGraph& lhs() const noexcept { return lhs_; }
  const LabeledGraph& rhs() const noexcept { return rhs_; }
  const Interface& interface() const noexcept { return interface_; }

  /// 16 hex digits derived from the canonical code; invariant under
  /// re-indexing of either side.
  const std::string& id() const noexcept { return id_; }
  const CanonicalCode& code() const noexcept { return code_; }

  int support() const noexcept { return support_; }
  void set_support(int support) { support_ = support; }

  /// rhs vertex preserved from lhs vertex `l`, or -1.
  int rhs_of(int l) const { return lhs_to_rhs_.at(l); }

 private:
  LabeledGraph lhs_;
  LabeledGraph rhs_;
  Interface interface_;
  std::vector<int> lhs_to_rhs_;
  CanonicalCode code_;
  std::string id_;
  int support_ = 1;
};

struct Application {
  std::string rule_id;
  std::size_t target = 0;  // index of the rewritten state member
  VertexMap embedding;     // lhs -> target member
};

/// Result of rewriting one graph, with vertex provenance.
struct GraphRewrite {
  LabeledGraph graph;
  std::vector<int> host_to_result;  // -1 for deleted host vertices
  std::vector<int> rhs_to_result;
};

/// Low-level rewrite of `host` at an induced embedding of `lhs`, without the
/// rule invariants. Deleted vertices drop all their edges; edges from
/// preserved images to unmatched vertices persist.
GraphRewrite rewrite_graph(const LabeledGraph& lhs, const LabeledGraph& rhs,
                           std::span<const std::pair<int, int>> interface,
                           const LabeledGraph& host, std::span<const int> embedding);

/// Applies `rule` at `app`. The rewritten member is replaced in place by its
/// connected components. Throws PreconditionError for an invalid embedding
/// and SizeError when the successor exceeds `vertex_cap`.
State apply_rule(const RewriteRule& rule, const State& state, const Application& app,
                 int vertex_cap = kDefaultVertexCap);

struct Successor {
  Application application;
  State state;
  std::string key;
};

/// Distinct successors (by state_key), in embedding order over members.
/// At most `cap` entries are returned. When `active` is non-empty, members
/// with active[i] == 0 are skipped.
std::vector<Successor> enumerate_applications(const RewriteRule& rule, const State& state,
                                              std::size_t cap,
                                              std::span<const std::uint8_t> active = {});

/// Swaps the sides and inverts the interface. Throws UnsupportedRuleError
/// when the rhs is disconnected or empty.
RewriteRule reverse_rule(const RewriteRule& rule);

}  // namespace wp

#endif  // WORLDPROG_REWRITE_HPP_
