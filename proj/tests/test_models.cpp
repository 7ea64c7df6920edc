#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/models.hpp"

using oracle::graph;

namespace {

wp::RewriteRule cut_rule(const std::string& a, const std::string& b) {
  return wp::RewriteRule(graph({a, b}, {{0, 1, "s"}}), graph({a, b}, {}), {{0, 0}, {1, 1}});
}

wp::Observation path_cut() {
  wp::State before({graph({"A", "B", "C"}, {{0, 1, "s"}, {1, 2, "s"}})});
  wp::State after({graph({"A"}, {}), graph({"B", "C"}, {{0, 1, "s"}})});
  return {before, after, std::nullopt};
}

wp::ActionLibrary two_rules() { return wp::ActionLibrary({cut_rule("A", "B"), cut_rule("B", "C")}); }

/// States of class c carry the label "S<c>" plus random filler.
std::vector<wp::PolicyExample> sentinel_examples(wp::Rng& rng, int n) {
  std::vector<wp::PolicyExample> out;
  for (int i = 0; i < n; ++i) {
    const std::size_t c = rng.below(2);
    auto filler = oracle::random_connected(rng, 2 + static_cast<int>(rng.below(4)), 3, 2, 0.2);
    out.push_back({wp::State({filler, graph({"S" + std::to_string(c)}, {})}), c});
  }
  return out;
}

wp::TransitionExample forbidden_example(wp::Rng& rng) {
  const auto g = oracle::random_connected(rng, 3 + static_cast<int>(rng.below(4)), 3, 2, 0.2);
  std::vector<wp::Label> labels(g.vertex_labels().begin(), g.vertex_labels().end());
  const int label = static_cast<int>(rng.below(2));
  labels[rng.below(labels.size())] = oracle::L(label ? "ok" : "forbidden");
  const wp::State after({wp::LabeledGraph(labels, {g.edges().begin(), g.edges().end()})});
  return {wp::State({g}), after, label};
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("gradients match finite differences") {
    wp::Rng rng(53);
    for (int i = 0; i < 10; ++i) {
      const auto [policy, transition] = oracle::gradient_check_instance(rng);
      CHECK(policy < 1e-4);
      CHECK(transition < 1e-4);
    }
  }

  TEST_CASE("zero-weight models") {
    const wp::PolicyModel pm(wp::FeatureConfig{2, 64}, 4, 0);
    const wp::State s({graph({"A", "B"}, {{0, 1, "s"}})});
    for (double p : wp::policy_distribution(pm, s)) CHECK(p == doctest::Approx(0.25));
    const wp::TransitionModel tm(wp::FeatureConfig{2, 64}, 0);
    CHECK(wp::score_transition(tm, s, s) == 0.5);
    CHECK(wp::score_transition(tm, s, wp::State({graph({"A"}, {})})) == 0.5);
  }

  TEST_CASE("zero epochs stay uniform") {
    wp::Rng rng(59);
    const auto examples = sentinel_examples(rng, 10);
    wp::TrainingHyper h;
    h.epochs = 0;
    const auto model = wp::train_policy(two_rules(), examples, h);
    for (double p : wp::policy_distribution(model, examples[0].state)) CHECK(p == doctest::Approx(0.5));
    CHECK(model.library_hash() == two_rules().hash_id());
  }

  TEST_CASE("policy training errors") {
    wp::Rng rng(61);
    const auto examples = sentinel_examples(rng, 4);
    CHECK_THROWS_AS(wp::train_policy(wp::ActionLibrary({cut_rule("A", "B")}), examples, {}), wp::ModelError);
    CHECK_THROWS_AS(wp::train_policy(two_rules(), std::vector<wp::PolicyExample>{}, {}), wp::ModelError);
    std::vector<wp::PolicyExample> bad{{examples[0].state, 5}};
    CHECK_THROWS_AS(wp::train_policy(two_rules(), bad, {}), wp::ModelError);
  }

  TEST_CASE("separable policy is learned") {
    wp::Rng rng(67);
    const auto examples = sentinel_examples(rng, 60);
    wp::TrainingHyper h;
    h.seed = 3;
    h.epochs = 100;
    const auto model = wp::train_policy(two_rules(), examples, h);
    for (const auto& e : examples) {
      const auto p = wp::policy_distribution(model, e.state);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(p[e.label] > 0.9);
    }
  }

  TEST_CASE("training loss decreases") {
    wp::Rng rng(71);
    const auto examples = sentinel_examples(rng, 40);
    const auto data = wp::encode_policy_examples(examples, {});
    double last = 1e9;
    for (int epochs : {0, 1, 3, 10}) {
      wp::TrainingHyper h;
      h.epochs = epochs;
      const double loss = wp::policy_objective(wp::train_policy(two_rules(), examples, h), data, h.l2);
      CHECK(loss < last);
      last = loss;
    }
  }

  TEST_CASE("training is seeded") {
    wp::Rng rng(73);
    const auto examples = sentinel_examples(rng, 50);
    wp::TrainingHyper h;
    h.seed = 9;
    const auto a = wp::train_policy(two_rules(), examples, h);
    const auto b = wp::train_policy(two_rules(), examples, h);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
    h.seed = 10;
    CHECK(wp::train_policy(two_rules(), examples, h).weights() != a.weights());
  }

  TEST_CASE("top-k examples") {
    const std::vector<double> p{0.6, 0.3, 0.08, 0.02};
    CHECK(wp::policy_topk(p, 0.99, 50).size() == 4);
    CHECK(wp::policy_topk(p, 0.85, 50).size() == 2);
    const std::vector<double> peaked{0.995, 0.004, 0.001};
    CHECK(wp::policy_topk(peaked, 0.99, 50).size() == 1);
    const std::vector<double> uniform(200, 1.0 / 200);
    const auto top = wp::policy_topk(uniform, 0.99, 50);
    REQUIRE(top.size() == 50);
    for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i].ordinal == i);
    const std::vector<double> tied{0.25, 0.5, 0.25};
    const auto t = wp::policy_topk(tied, 0.6, 50);
    REQUIRE(t.size() == 2);
    CHECK(t[0].ordinal == 1);
    CHECK(t[1].ordinal == 0);
    CHECK_THROWS_AS(wp::policy_topk(p, 1.0, 50), wp::PreconditionError);
    CHECK_THROWS_AS(wp::policy_topk(p, 0.0, 50), wp::PreconditionError);
  }

  TEST_CASE("top-k contract on random vectors") {
    wp::Rng rng(79);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> p(1 + rng.below(80));
      for (auto& x : p) x = std::pow(rng.uniform(), 4.0);
      const double sum = std::accumulate(p.begin(), p.end(), 0.0);
      if (sum == 0.0) continue;
      for (auto& x : p) x /= sum;
      std::vector<std::pair<std::size_t, double>> got;
      for (const auto& r : wp::policy_topk(p, 0.99, 50)) got.push_back({r.ordinal, r.prob});
      CHECK(oracle::topk_contract_holds(p, got, 0.99, 50));
    }
  }

  TEST_CASE("transition dataset examples") {
    const auto obs = path_cut();
    const auto pos_only = wp::make_transition_dataset(two_rules(), {obs}, 0, 1);
    REQUIRE(pos_only.size() == 1);
    CHECK(pos_only[0].label == 1);

    const auto exact = wp::make_transition_dataset(wp::ActionLibrary({cut_rule("A", "B")}), {obs}, 8, 1);
    CHECK(exact.size() == 1);

    // Brute force: the wrong rule's successors differ from the observed one.
    const auto wrong = wp::enumerate_applications(cut_rule("B", "C"), obs.before, 100);
    REQUIRE_FALSE(wrong.empty());
    for (const auto& s : wrong) CHECK(s.key != wp::state_key(obs.after));
    const auto mixed = wp::make_transition_dataset(two_rules(), {obs}, 8, 1);
    int negatives = 0;
    for (const auto& e : mixed) {
      if (e.label == 0) {
        ++negatives;
        CHECK(wp::state_key(e.after) == wrong[0].key);
      }
    }
    CHECK(negatives >= 1);
    CHECK(negatives <= 8);
    CHECK(wp::make_transition_dataset(two_rules(), {obs}, 8, 1).size() == mixed.size());
    CHECK_THROWS_AS(wp::make_transition_dataset(wp::ActionLibrary(), {obs}, 1, 1), wp::PreconditionError);
  }

  TEST_CASE("transition features") {
    const wp::FeatureConfig cfg{1, 32};
    const wp::State s({graph({"A", "B"}, {{0, 1, "s"}})});
    const auto x = wp::transition_features(s, s, cfg);
    CHECK(x == wp::state_features(s, cfg));
    const wp::State t({graph({"A"}, {}), graph({"B"}, {})});
    for (const auto& [j, v] : wp::transition_features(s, t, cfg)) CHECK(j < 64u);
  }

  TEST_CASE("forbidden labels are learned") {
    wp::Rng rng(83);
    std::vector<wp::TransitionExample> train;
    std::vector<wp::TransitionExample> held;
    for (int i = 0; i < 200; ++i) train.push_back(forbidden_example(rng));
    for (int i = 0; i < 100; ++i) held.push_back(forbidden_example(rng));
    const auto model = wp::train_transition(train, {});
    int correct = 0;
    for (const auto& e : held) {
      const double p = wp::score_transition(model, e.before, e.after);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      correct += (p >= 0.5) == (e.label == 1);
    }
    CHECK(correct > 90);
  }

  TEST_CASE("transition training errors") {
    wp::Rng rng(89);
    std::vector<wp::TransitionExample> one_class;
    while (one_class.size() < 5) {
      auto e = forbidden_example(rng);
      if (e.label == 1) one_class.push_back(e);
    }
    CHECK_THROWS_AS(wp::train_transition(one_class, {}), wp::ModelError);
    CHECK_THROWS_AS(wp::train_transition(std::vector<wp::TransitionExample>{}, {}), wp::ModelError);
    wp::TransitionModel m;
    CHECK_THROWS_AS(m.set_threshold(1.5), wp::PreconditionError);
  }

  TEST_CASE("model files round trip") {
    wp::Rng rng(97);
    wp::PolicyModel pm(wp::FeatureConfig{1, 32}, 3, 0xabcdef);
    for (auto& w : pm.weights()) w = rng.uniform() - 0.5;
    for (auto& b : pm.bias()) b = rng.uniform();
    std::stringstream ps;
    wp::write_policy(ps, pm);
    const auto pr = wp::read_policy(ps);
    CHECK(pr.config() == pm.config());
    CHECK(pr.classes() == 3);
    CHECK(pr.library_hash() == 0xabcdef);
    CHECK(pr.weights() == pm.weights());
    CHECK(pr.bias() == pm.bias());

    wp::TransitionModel tm(wp::FeatureConfig{2, 16}, 7, 0.3);
    for (auto& w : tm.weights()) w = rng.uniform();
    tm.bias() = -1.25;
    std::stringstream ts;
    wp::write_transition(ts, tm);
    const auto tr = wp::read_transition(ts);
    CHECK(tr.weights() == tm.weights());
    CHECK(tr.bias() == tm.bias());
    CHECK(tr.threshold() == tm.threshold());
    CHECK(tr.library_hash() == 7);

    std::stringstream wrong(ps.str());
    std::stringstream ps2;
    wp::write_policy(ps2, pm);
    CHECK_THROWS_AS(wp::read_transition(ps2), wp::FormatError);
    std::string cut = ts.str().substr(0, 20);
    std::stringstream truncated(cut);
    CHECK_THROWS_AS(wp::read_transition(truncated), wp::FormatError);
  }
}
