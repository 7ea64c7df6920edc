#include <doctest.h>

#include "oracles.hpp"
#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/matching.hpp"

using oracle::graph;

namespace {

wp::Correspondence identity_map(const wp::State& s) {
  wp::Correspondence m;
  for (std::size_t g = 0; g < s.size(); ++g) {
    for (int v = 0; v < s[g].vertex_count(); ++v) m.push_back({{static_cast<int>(g), v}, {static_cast<int>(g), v}});
  }
  return m;
}

// Path A-B-C losing its A-B bond: after = {A}, {B-C}.
wp::Observation bond_loss() {
  wp::State before({graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}})});
  wp::State after({graph({"A"}, {}), graph({"B", "C"}, {{0, 1, "s"}})});
  wp::Correspondence m{{{0, 0}, {0, 0}}, {{0, 1}, {1, 0}}, {{0, 2}, {1, 1}}};
  return {before, after, m};
}

wp::Observation relabel_middle() {
  wp::State before({graph({"A", "B", "C", "D"}, {{0, 1, "s"}, {1, 2, "s"}, {2, 3, "s"}})});
  wp::State after({graph({"A", "X", "C", "D"}, {{0, 1, "s"}, {1, 2, "s"}, {2, 3, "s"}})});
  return {before, after, identity_map(before)};
}

}  // namespace

TEST_SUITE("induction") {
  TEST_CASE("correspondence validation") {
    auto obs = bond_loss();
    CHECK_NOTHROW(wp::validate_correspondence(obs, *obs.correspondence));
    wp::Correspondence dup{{{0, 0}, {0, 0}}, {{0, 1}, {0, 0}}};
    CHECK_THROWS_AS(wp::validate_correspondence(obs, dup), wp::GraphError);
    wp::Correspondence missing{{{0, 7}, {0, 0}}};
    CHECK_THROWS_AS(wp::validate_correspondence(obs, missing), wp::GraphError);
  }

  TEST_CASE("infer_correspondence examples") {
    const wp::State s({graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}})});
    const auto id = wp::infer_correspondence(s, s);
    CHECK(id == identity_map(s));

    const auto obs = bond_loss();
    const auto m = wp::infer_correspondence(obs.before, obs.after);
    CHECK(m.size() == 3);
    CHECK(oracle::score(obs.before, obs.after, m).edges == oracle::best_correspondence(obs.before, obs.after).edges);

    const wp::State other({graph({"X", "Y"}, {{0, 1, "s"}})});
    CHECK(wp::infer_correspondence(s, other).empty());
  }

  TEST_CASE("infer_correspondence is optimal on small random pairs") {
    wp::Rng rng(31);
    for (int i = 0; i < 60; ++i) {
      const wp::State b({oracle::random_graph(rng, 1 + static_cast<int>(rng.below(4)), 2, 2, 0.5)});
      const wp::State a({oracle::random_graph(rng, 1 + static_cast<int>(rng.below(3)), 2, 2, 0.5),
                         oracle::random_graph(rng, 1 + static_cast<int>(rng.below(2)), 2, 2, 0.5)});
      const auto m = wp::infer_correspondence(b, a);
      wp::Observation obs{b, a, m};
      CHECK_NOTHROW(wp::validate_correspondence(obs, m));
      const auto want = oracle::best_correspondence(b, a);
      const auto got = oracle::score(b, a, m);
      CHECK(got.mapped == want.mapped);
      CHECK(got.edges == want.edges);
    }
  }

  TEST_CASE("infer_correspondence size bound") {
    std::vector<std::string> labels(33, "A");
    const wp::State big({graph(labels, {})});
    CHECK_THROWS_AS(wp::infer_correspondence(big, big), wp::SizeError);
  }

  TEST_CASE("diff_pair examples") {
    const wp::State s({graph({"A", "B"}, {{0, 1, "s"}})});
    const auto none = wp::diff_pair({s, s, identity_map(s)});
    CHECK(none.before.empty());
    CHECK(none.after.empty());

    const auto rel = wp::diff_pair(relabel_middle());
    CHECK(rel.before == std::vector<wp::VertexRef>{{0, 1}});
    CHECK(rel.after == std::vector<wp::VertexRef>{{0, 1}});

    const auto cut = wp::diff_pair(bond_loss());
    CHECK(cut.before == std::vector<wp::VertexRef>{{0, 0}, {0, 1}});
    CHECK(cut.after == std::vector<wp::VertexRef>{{0, 0}, {1, 0}});

    CHECK_THROWS_AS(wp::diff_pair({s, s, std::nullopt}), wp::PreconditionError);
  }

  TEST_CASE("extract_rule examples") {
    const auto obs = bond_loss();
    const auto r = wp::extract_rule(obs, 0);
    CHECK(r.lhs().vertex_count() == 2);
    CHECK(r.lhs().edge_count() == 1);
    CHECK(r.rhs().vertex_count() == 2);
    CHECK(r.rhs().edge_count() == 0);
    CHECK(r.interface().size() == 2);
    CHECK(wp::rederives(r, obs));

    const auto relabel = wp::extract_rule(relabel_middle(), 0);
    CHECK(relabel.lhs().vertex_count() == 1);
    CHECK(relabel.rhs().vertex_count() == 1);
    CHECK(wp::label_name(relabel.rhs().vertex_label(0)) == "X");

    const auto wide = wp::extract_rule(relabel_middle(), 1);
    CHECK(wide.lhs().vertex_count() == 3);
    CHECK(wp::rederives(wide, relabel_middle()));
    // The narrower pattern embeds in the wider one.
    CHECK_FALSE(wp::find_embeddings(relabel.lhs(), wide.lhs(), 1).empty());
  }

  TEST_CASE("extract_rule without a correspondence") {
    auto obs = bond_loss();
    obs.correspondence.reset();
    CHECK(wp::extract_rule(obs, 0).id() == wp::extract_rule(bond_loss(), 0).id());
  }

  TEST_CASE("extract_rule errors") {
    const wp::State s({graph({"A", "B"}, {{0, 1, "s"}})});
    try {
      wp::extract_rule({s, s, identity_map(s)}, 0);
      FAIL("expected an error");
    } catch (const wp::InductionError& e) {
      CHECK(e.kind() == wp::InductionError::Kind::kNoOpObservation);
    }
    // Two relabels three hops apart.
    const wp::State before({graph({"A", "B", "C", "D"}, {{0, 1, "s"}, {1, 2, "s"}, {2, 3, "s"}})});
    const wp::State after({graph({"X", "B", "C", "Y"}, {{0, 1, "s"}, {1, 2, "s"}, {2, 3, "s"}})});
    try {
      wp::extract_rule({before, after, identity_map(before)}, 0);
      FAIL("expected an error");
    } catch (const wp::InductionError& e) {
      CHECK(e.kind() == wp::InductionError::Kind::kDisconnectedCore);
    }
    CHECK(wp::rederives(wp::extract_rule({before, after, identity_map(before)}, 1), {before, after, identity_map(before)}));
  }

  TEST_CASE("context growth is monotone on random relabels") {
    wp::Rng rng(37);
    for (int i = 0; i < 30; ++i) {
      const auto g = oracle::random_connected(rng, 6, 2, 2, 0.2);
      std::vector<wp::Label> labels(g.vertex_labels().begin(), g.vertex_labels().end());
      labels[rng.below(6)] = wp::intern("Z");
      const wp::State before({g});
      const wp::State after({wp::LabeledGraph(labels, {g.edges().begin(), g.edges().end()})});
      const wp::Observation obs{before, after, identity_map(before)};
      const auto r0 = wp::extract_rule(obs, 0);
      const auto r1 = wp::extract_rule(obs, 1);
      const auto r2 = wp::extract_rule(obs, 2);
      CHECK(wp::rederives(r0, obs));
      CHECK(wp::rederives(r1, obs));
      CHECK(wp::rederives(r2, obs));
      CHECK_FALSE(wp::find_embeddings(r0.lhs(), r1.lhs(), 1).empty());
      CHECK_FALSE(wp::find_embeddings(r1.lhs(), r2.lhs(), 1).empty());
    }
  }

  TEST_CASE("build_library examples") {
    const std::vector<wp::Observation> copies(4, bond_loss());
    const auto one = wp::build_library(copies);
    REQUIRE(one.library.size() == 1);
    CHECK(one.library[0].support() == 4);
    for (const auto& l : one.labels) CHECK(l == std::optional<std::size_t>(0));

    // The same edit with permuted vertex ids.
    wp::State before({graph({"C", "A", "B"}, {{1, 2, "s"}, {2, 0, "s"}})});
    wp::State after({graph({"B", "C"}, {{0, 1, "s"}}), graph({"A"}, {})});
    wp::Correspondence m{{{0, 1}, {1, 0}}, {{0, 2}, {0, 0}}, {{0, 0}, {0, 1}}};
    const auto two = wp::build_library({bond_loss(), {before, after, m}});
    REQUIRE(two.library.size() == 1);
    CHECK(two.library[0].support() == 2);

    const auto distinct = wp::build_library({bond_loss(), relabel_middle()});
    CHECK(distinct.library.size() == 2);
    CHECK(distinct.labels[0] != distinct.labels[1]);
  }

  TEST_CASE("build_library filtering and failures") {
    const wp::State s({graph({"A"}, {})});
    const wp::Observation noop{s, s, identity_map(s)};
    const auto lib = wp::build_library({bond_loss(), noop, bond_loss(), relabel_middle()}, 0, 2);
    CHECK(lib.library.size() == 1);
    CHECK(lib.failures.size() == 1);
    CHECK(lib.failures[0].observation == 1);
    CHECK_FALSE(lib.labels[1].has_value());
    CHECK_FALSE(lib.labels[3].has_value());
    CHECK(lib.labels[0] == std::optional<std::size_t>(0));
    CHECK_THROWS_AS(wp::build_library({noop}), wp::InductionError);
    CHECK_THROWS_AS(wp::build_library({}), wp::PreconditionError);
  }

  TEST_CASE("label_observations and library lookup") {
    const auto build = wp::build_library({bond_loss(), relabel_middle()});
    const auto labels = wp::label_observations(build.library, {relabel_middle(), bond_loss()});
    CHECK(labels[0] == build.labels[1]);
    CHECK(labels[1] == build.labels[0]);
    CHECK(build.library.ordinal_of(build.library[1].id()) == std::optional<std::size_t>(1));
    CHECK_FALSE(build.library.ordinal_of("0000000000000000").has_value());
  }
}
