#include "worldprog/rewrite.hpp"

#include <algorithm>
#include <unordered_set>
#include <limits>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/hash.hpp"
#include "worldprog/matching.hpp"

namespace wp {
namespace {

constexpr std::uint64_t kLhsTag = 0x4c48535f53494445ULL;
constexpr std::uint64_t kRhsTag = 0x5248535f53494445ULL;
constexpr std::uint64_t kInterfaceTag = 0x4b5f494e54455246ULL;

// Embeddings scanned per requested successor before giving up on finding
// more distinct ones.
constexpr std::size_t kScanFactor = 64;

Label tagged(Label l, std::uint64_t tag) { return Label(hash_combine(tag, l.key())); }

// lhs and rhs drawn side by side with tagged labels, interface pairs joined
// by a dedicated edge label.
CanonicalCode rule_code(const LabeledGraph& lhs, const LabeledGraph& rhs, const Interface& k) {
  const int shift = lhs.vertex_count();
  std::vector<Label> labels;
  labels.reserve(shift + rhs.vertex_count());
  for (Label l : lhs.vertex_labels()) labels.push_back(tagged(l, kLhsTag));
  for (Label l : rhs.vertex_labels()) labels.push_back(tagged(l, kRhsTag));
  std::vector<Edge> edges;
  for (const Edge& e : lhs.edges()) edges.push_back({e.u, e.v, tagged(e.label, kLhsTag)});
  for (const Edge& e : rhs.edges()) edges.push_back({e.u + shift, e.v + shift, tagged(e.label, kRhsTag)});
  for (const auto& [l, r] : k) edges.push_back({l, r + shift, Label(kInterfaceTag)});
  return canonical_form(LabeledGraph(std::move(labels), std::move(edges)));
}

}  // namespace

RewriteRule::RewriteRule(LabeledGraph lhs, LabeledGraph rhs, Interface interface, int support)
    : lhs_(std::move(lhs)), rhs_(std::move(rhs)), interface_(std::move(interface)), support_(support) {
  if (lhs_.empty()) throw UnsupportedRuleError("rule lhs must be non-empty");
  if (!is_connected(lhs_)) throw UnsupportedRuleError("rule lhs must be connected");
  lhs_to_rhs_.assign(lhs_.vertex_count(), -1);
  std::vector<int> rhs_used(rhs_.vertex_count(), 0);
  for (const auto& [l, r] : interface_) {
    if (l < 0 || l >= lhs_.vertex_count() || r < 0 || r >= rhs_.vertex_count()) {
      throw GraphError("interface pair references a missing vertex");
    }
    if (lhs_to_rhs_[l] >= 0 || rhs_used[r]) throw GraphError("interface is not injective");
    lhs_to_rhs_[l] = r;
    rhs_used[r] = 1;
  }
  std::sort(interface_.begin(), interface_.end());
  code_ = rule_code(lhs_, rhs_, interface_);
  id_ = hex_digest(code_.bytes);
}

GraphRewrite rewrite_graph(const LabeledGraph& lhs, const LabeledGraph& rhs,
                           std::span<const std::pair<int, int>> interface,
                           const LabeledGraph& host, std::span<const int> embedding) {
  const int nh = host.vertex_count();
  std::vector<int> lhs_to_rhs(lhs.vertex_count(), -1);
  std::vector<int> rhs_from_lhs(rhs.vertex_count(), -1);
  for (const auto& [l, r] : interface) {
    lhs_to_rhs[l] = r;
    rhs_from_lhs[r] = l;
  }
  std::vector<int> matched(nh, -1);
  for (int l = 0; l < lhs.vertex_count(); ++l) matched[embedding[l]] = l;

  GraphRewrite out;
  out.host_to_result.assign(nh, -1);
  out.rhs_to_result.assign(rhs.vertex_count(), -1);
  std::vector<Label> labels;
  labels.reserve(nh + rhs.vertex_count());
  for (int h = 0; h < nh; ++h) {
    const int l = matched[h];
    if (l >= 0 && lhs_to_rhs[l] < 0) continue;
    out.host_to_result[h] = static_cast<int>(labels.size());
    labels.push_back(l >= 0 ? rhs.vertex_label(lhs_to_rhs[l]) : host.vertex_label(h));
  }
  for (int r = 0; r < rhs.vertex_count(); ++r) {
    if (rhs_from_lhs[r] >= 0) {
      out.rhs_to_result[r] = out.host_to_result[embedding[rhs_from_lhs[r]]];
    } else {
      out.rhs_to_result[r] = static_cast<int>(labels.size());
      labels.push_back(rhs.vertex_label(r));
    }
  }

  std::vector<Edge> edges;
  edges.reserve(host.edge_count() + rhs.edge_count());
  for (const Edge& e : host.edges()) {
    if (matched[e.u] >= 0 && matched[e.v] >= 0) continue;
    const int a = out.host_to_result[e.u];
    const int b = out.host_to_result[e.v];
    if (a >= 0 && b >= 0) edges.push_back({a, b, e.label});
  }
  for (const Edge& e : rhs.edges()) {
    edges.push_back({out.rhs_to_result[e.u], out.rhs_to_result[e.v], e.label});
  }
  out.graph = LabeledGraph(std::move(labels), std::move(edges));
  return out;
}

State apply_rule(const RewriteRule& rule, const State& state, const Application& app,
                 int vertex_cap) {
  if (app.target >= state.size()) throw PreconditionError("application targets a missing member");
  const LabeledGraph& host = state[app.target];
  if (!verify_embedding(rule.lhs(), host, app.embedding)) {
    throw PreconditionError("embedding does not match rule " + rule.id());
  }
  GraphRewrite rw = rewrite_graph(rule.lhs(), rule.rhs(), rule.interface(), host, app.embedding.image);
  std::vector<LabeledGraph> members;
  members.reserve(state.size() + 2);
  for (std::size_t i = 0; i < app.target; ++i) members.push_back(state[i]);
  for (auto& c : connected_components(rw.graph)) {
    if (!c.empty()) members.push_back(std::move(c));
  }
  for (std::size_t i = app.target + 1; i < state.size(); ++i) members.push_back(state[i]);
  return State(std::move(members), vertex_cap);
}

std::vector<Successor> enumerate_applications(const RewriteRule& rule, const State& state,
                                              std::size_t cap,
                                              std::span<const std::uint8_t> active) {
  if (cap == 0) throw PreconditionError("application cap must be >= 1");
  std::vector<Successor> out;
  std::unordered_set<std::string> seen;
  std::size_t scanned = 0;
  const std::size_t scan_limit =
      cap > std::numeric_limits<std::size_t>::max() / kScanFactor ? std::numeric_limits<std::size_t>::max() : cap * kScanFactor;
  for (std::size_t i = 0; i < state.size() && out.size() < cap && scanned < scan_limit; ++i) {
    if (!active.empty() && !active[i]) continue;
    for_each_embedding(rule.lhs(), state[i], [&](std::span<const int> image) {
      ++scanned;
      Application app{rule.id(), i, VertexMap{std::vector<int>(image.begin(), image.end())}};
      State next = apply_rule(rule, state, app);
      std::string key = state_key(next);
      if (seen.insert(key).second) {
        out.push_back({std::move(app), std::move(next), std::move(key)});
      }
      return out.size() < cap && scanned < scan_limit;
    });
  }
  return out;
}

RewriteRule reverse_rule(const RewriteRule& rule) {
  if (rule.rhs().empty() || !is_connected(rule.rhs())) {
    throw UnsupportedRuleError("reverse of rule " + rule.id() + " would have a disconnected lhs");
  }
  Interface inverted;
  inverted.reserve(rule.interface().size());
  for (const auto& [l, r] : rule.interface()) inverted.emplace_back(r, l);
  return RewriteRule(rule.rhs(), rule.lhs(), std::move(inverted), rule.support());
}

}  // namespace wp
