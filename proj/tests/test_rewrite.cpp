#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/matching.hpp"
#include "worldprog/rewrite.hpp"

using oracle::graph;

namespace {

wp::RewriteRule bond_cut() {
  return wp::RewriteRule(graph({"A", "B"}, {{0, 1, "s"}}), graph({"A", "B"}, {}), {{0, 0}, {1, 1}});
}

wp::Application at(const wp::RewriteRule& r, std::size_t target, std::vector<int> image) {
  return {r.id(), target, wp::VertexMap{std::move(image)}};
}

}  // namespace

TEST_SUITE("rewrite") {
  TEST_CASE("rule invariants") {
    CHECK_THROWS_AS(wp::RewriteRule(wp::LabeledGraph(), graph({"A"}, {}), {}), wp::UnsupportedRuleError);
    CHECK_THROWS_AS(wp::RewriteRule(graph({"A", "B"}, {}), graph({"A"}, {}), {}), wp::UnsupportedRuleError);
    CHECK_THROWS_AS(wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {{0, 1}}), wp::GraphError);
    CHECK_THROWS_AS(wp::RewriteRule(graph({"A", "A"}, {{0, 1, "s"}}), graph({"A"}, {}), {{0, 0}, {1, 0}}),
                    wp::GraphError);
  }

  TEST_CASE("rule id is invariant under re-indexing") {
    const auto r1 = wp::RewriteRule(graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}}),
                                    graph({"A", "B", "C"}, {{0, 1, "s"}}), {{0, 0}, {1, 1}, {2, 2}});
    const auto r2 = wp::RewriteRule(graph({"C", "A", "B"}, {{1, 2, "s"}, {2, 0, "s"}}),
                                    graph({"B", "C", "A"}, {{2, 0, "s"}}), {{0, 1}, {1, 2}, {2, 0}});
    CHECK(r1.id() == r2.id());
    CHECK(r1.id().size() == 16);
    // Same graphs, different interface.
    const auto r3 = wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {{0, 0}});
    const auto r4 = wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {});
    CHECK(r3.id() != r4.id());
  }

  TEST_CASE("identity rewrite leaves the state unchanged") {
    const auto r = wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {{0, 0}});
    const wp::State s({graph({"A", "B"}, {{0, 1, "s"}})});
    const auto next = wp::apply_rule(r, s, at(r, 0, {0}));
    CHECK(wp::state_key(next) == wp::state_key(s));
  }

  TEST_CASE("bond deletion splits the graph") {
    const auto r = bond_cut();
    const wp::State s({graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}})});
    const auto next = wp::apply_rule(r, s, at(r, 0, {0, 1}));
    REQUIRE(next.size() == 2);
    CHECK(next.total_vertices() == 3);
    const wp::State want({graph({"A"}, {}), graph({"B", "C"}, {{0, 1, "s"}})});
    CHECK(wp::state_key(next) == wp::state_key(want));
  }

  TEST_CASE("vertex replaced by a triangle") {
    const auto r = wp::RewriteRule(graph({"X"}, {}), graph({"A", "A", "A"}, {{0, 1, "s"}, {1, 2, "s"}, {0, 2, "s"}}), {});
    const wp::State s({graph({"X"}, {})});
    const auto next = wp::apply_rule(r, s, at(r, 0, {0}));
    const wp::State want({graph({"A", "A", "A"}, {{0, 1, "s"}, {1, 2, "s"}, {2, 0, "s"}})});
    CHECK(wp::state_key(next) == wp::state_key(want));
  }

  TEST_CASE("dangling edges of deleted vertices are removed") {
    const auto r = wp::RewriteRule(graph({"X"}, {}), graph({"Y"}, {}), {});
    const wp::State s({graph({"A", "X", "B"}, {{0, 1, "s"}, {1, 2, "s"}})});
    const auto next = wp::apply_rule(r, s, at(r, 0, {1}));
    const wp::State want({graph({"A"}, {}), graph({"Y"}, {}), graph({"B"}, {})});
    CHECK(wp::state_key(next) == wp::state_key(want));
  }

  TEST_CASE("interface vertices keep outside edges and take rhs labels") {
    const auto r = wp::RewriteRule(graph({"A"}, {}), graph({"B"}, {}), {{0, 0}});
    const wp::State s({graph({"A", "C"}, {{0, 1, "d"}})});
    const auto next = wp::apply_rule(r, s, at(r, 0, {0}));
    CHECK(wp::state_key(next) == wp::state_key(wp::State({graph({"B", "C"}, {{0, 1, "d"}})})));
  }

  TEST_CASE("other members are untouched and order is kept") {
    const auto r = bond_cut();
    const auto other = graph({"Q", "R"}, {{0, 1, "s"}});
    const wp::State s({other, graph({"A", "B"}, {{0, 1, "s"}}), other});
    const auto next = wp::apply_rule(r, s, at(r, 1, {0, 1}));
    REQUIRE(next.size() == 4);
    CHECK(next[0].canonical_code().bytes == other.canonical_code().bytes);
    CHECK(next[3].canonical_code().bytes == other.canonical_code().bytes);
  }

  TEST_CASE("invalid applications") {
    const auto r = bond_cut();
    const wp::State s({graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}})});
    CHECK_THROWS_AS(wp::apply_rule(r, s, at(r, 0, {0, 2})), wp::PreconditionError);
    CHECK_THROWS_AS(wp::apply_rule(r, s, at(r, 3, {0, 1})), wp::PreconditionError);
    CHECK_THROWS_AS(wp::apply_rule(r, s, at(r, 0, {0})), wp::PreconditionError);
    const auto grow = wp::RewriteRule(graph({"A"}, {}), graph({"A", "A", "A"}, {{0, 1, "s"}, {1, 2, "s"}}), {{0, 0}});
    CHECK_THROWS_AS(wp::apply_rule(grow, s, at(grow, 0, {0}), 4), wp::SizeError);
  }

  TEST_CASE("enumerate_applications examples") {
    const auto identity = wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {{0, 0}});
    const wp::State s({graph({"A", "A", "A"}, {{0, 1, "s"}, {1, 2, "s"}})});
    const auto same = wp::enumerate_applications(identity, s, 10);
    REQUIRE_FALSE(same.empty());
    CHECK(same[0].key == wp::state_key(s));

    const auto relabel = wp::RewriteRule(graph({"A"}, {}), graph({"B"}, {}), {{0, 0}});
    CHECK(oracle::embeddings(relabel.lhs(), s[0]).size() == 3);
    const auto succ = wp::enumerate_applications(relabel, s, 10);
    CHECK(succ.size() == 2);  // the two path ends are symmetric
    for (const auto& x : succ) CHECK(x.key == wp::state_key(x.state));

    const auto absent = wp::RewriteRule(graph({"Z"}, {}), graph({"B"}, {}), {{0, 0}});
    CHECK(wp::enumerate_applications(absent, s, 10).empty());
    CHECK_THROWS_AS(wp::enumerate_applications(relabel, s, 0), wp::PreconditionError);
    CHECK(wp::enumerate_applications(relabel, s, 1).size() == 1);
  }

  TEST_CASE("enumerate_applications respects the active mask") {
    const auto relabel = wp::RewriteRule(graph({"A"}, {}), graph({"B"}, {}), {{0, 0}});
    const wp::State s({graph({"A"}, {}), graph({"A", "C"}, {{0, 1, "s"}})});
    const std::vector<std::uint8_t> only_second{0, 1};
    const auto succ = wp::enumerate_applications(relabel, s, 10, only_second);
    REQUIRE(succ.size() == 1);
    CHECK(succ[0].application.target == 1);
  }

  TEST_CASE("distinct successors equal the oracle's count") {
    wp::Rng rng(23);
    const auto relabel = wp::RewriteRule(graph({"v0"}, {}), graph({"v1"}, {}), {{0, 0}});
    for (int i = 0; i < 40; ++i) {
      const auto g = oracle::random_graph(rng, 1 + static_cast<int>(rng.below(7)), 2, 2, 0.4);
      const wp::State s({g});
      std::set<std::string> keys;
      for (const auto& img : oracle::embeddings(relabel.lhs(), g)) {
        keys.insert(wp::state_key(wp::apply_rule(relabel, s, at(relabel, 0, img))));
      }
      CHECK(wp::enumerate_applications(relabel, s, 1000).size() == keys.size());
    }
  }

  TEST_CASE("reverse_rule") {
    const auto identity = wp::RewriteRule(graph({"A"}, {}), graph({"A"}, {}), {{0, 0}});
    CHECK(wp::reverse_rule(identity).id() == identity.id());
    const auto ab = wp::RewriteRule(graph({"A"}, {}), graph({"B"}, {}), {{0, 0}});
    const auto ba = wp::RewriteRule(graph({"B"}, {}), graph({"A"}, {}), {{0, 0}});
    CHECK(wp::reverse_rule(ab).id() == ba.id());
    CHECK(wp::reverse_rule(wp::reverse_rule(ab)).id() == ab.id());
    CHECK_THROWS_AS(wp::reverse_rule(bond_cut()), wp::UnsupportedRuleError);
  }

  TEST_CASE("round trip through the reversed rule") {
    const auto join = wp::RewriteRule(graph({"A", "B"}, {{0, 1, "s"}}), graph({"A", "B"}, {{0, 1, "d"}}), {{0, 0}, {1, 1}});
    const wp::State s({graph({"C", "A", "B"}, {{0, 1, "s"}, {1, 2, "s"}})});
    const auto next = wp::apply_rule(join, s, at(join, 0, {1, 2}));
    const auto back = wp::reverse_rule(join);
    bool recovered = false;
    for (const auto& succ : wp::enumerate_applications(back, next, 100)) recovered |= succ.key == wp::state_key(s);
    CHECK(recovered);
  }

  TEST_CASE("isomorphism equivariance") {
    wp::Rng rng(29);
    const auto cut = wp::RewriteRule(graph({"v0", "v1"}, {{0, 1, "e0"}}), graph({"v0", "v1"}, {}), {{0, 0}, {1, 1}});
    int checked = 0;
    for (int i = 0; i < 80; ++i) {
      const auto g = oracle::random_graph(rng, 6, 2, 1, 0.5);
      const auto embs = oracle::embeddings(cut.lhs(), g);
      if (embs.empty()) continue;
      const auto& img = embs[rng.below(embs.size())];
      const auto perm = oracle::random_permutation(rng, 6);
      const auto a = wp::apply_rule(cut, wp::State({g}), at(cut, 0, img));
      const auto b = wp::apply_rule(cut, wp::State({oracle::permuted(g, perm)}), at(cut, 0, {perm[img[0]], perm[img[1]]}));
      CHECK(wp::state_key(a) == wp::state_key(b));
      ++checked;
    }
    CHECK(checked > 20);
  }
}
