// worldprog: generate worlds, induce world programs and plan with them.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "worldprog/bench.hpp"
#include "worldprog/envgen.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/models.hpp"
#include "worldprog/planner.hpp"
#include "worldprog/rng.hpp"
#include "worldprog/text_io.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Shared {
  std::uint64_t seed = 0;
  int radius = 0;
  int min_support = 1;
  double mass = 0.99;
  double tau = 0.5;
  std::size_t iters = 10'000;
  double time_cap = 0.0;
  int restarts = 3;
  std::string world;
};

std::string resolve(const std::string& given, const Shared& shared, const char* file, const char* flag) {
  if (!given.empty()) return given;
  if (shared.world.empty()) throw UsageError(std::string("either ") + flag + " or --world is required");
  return (std::filesystem::path(shared.world) / file).string();
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wp::FormatError(path, 0, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wp::FormatError(path, 0, "cannot open for writing");
  return out;
}

struct Models {
  wp::ActionLibrary library;
  wp::PolicyModel policy;
  std::optional<wp::TransitionModel> transition;
  std::vector<wp::LabeledGraph> blocks;

  wp::World world() const { return {&library, &policy, transition ? &*transition : nullptr}; }
};

struct ModelPaths {
  std::string library, policy, transition, blocks;
  bool no_transition = false;
};

void add_model_options(CLI::App* cmd, ModelPaths& p) {
  cmd->add_option("--library", p.library, "induced rule library");
  cmd->add_option("--policy", p.policy, "policy model file");
  cmd->add_option("--transition", p.transition, "transition model file");
  cmd->add_option("--blocks", p.blocks, "building blocks");
  cmd->add_flag("--no-transition", p.no_transition, "plan without the transition filter");
}

Models load_models(const ModelPaths& p, const Shared& shared) {
  Models m;
  m.library = wp::load_library(resolve(p.library, shared, "library.rules", "--library"));
  const std::string policy_path = resolve(p.policy, shared, "policy.bin", "--policy");
  auto pin = open_in(policy_path);
  m.policy = wp::read_policy(pin, policy_path);
  if (m.policy.library_hash() != m.library.hash_id() || m.policy.classes() != m.library.size()) {
    throw wp::ModelError(policy_path + ": policy was trained for a different library");
  }
  if (!p.no_transition) {
    const std::string path = resolve(p.transition, shared, "transition.bin", "--transition");
    auto tin = open_in(path);
    m.transition = wp::read_transition(tin, path);
    if (m.transition->library_hash() != m.library.hash_id()) {
      throw wp::ModelError(path + ": transition model was trained for a different library");
    }
  }
  m.blocks = wp::load_graphs(resolve(p.blocks, shared, "blocks.graphs", "--blocks"));
  if (m.blocks.empty()) throw wp::FormatError(p.blocks, 0, "no building blocks");
  return m;
}

wp::PlannerParams planner_params(const Shared& s) {
  wp::PlannerParams p;
  p.mass = s.mass;
  p.tau = s.tau;
  return p;
}

wp::Budget budget(const Shared& s) {
  if (s.iters == 0 || s.restarts < 1) throw UsageError("--iters and --restarts must be positive");
  return {s.iters, s.time_cap, s.restarts};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induce world programs from observed graph transitions and plan with them."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  Shared s;
  app.add_option("--seed", s.seed, "random seed");
  app.add_option("--radius", s.radius, "context radius for rule extraction")->check(CLI::NonNegativeNumber);
  app.add_option("--min-support", s.min_support, "minimum observations per rule")->check(CLI::PositiveNumber);
  app.add_option("--mass", s.mass, "policy top-k cumulative mass")->check(CLI::Range(0.0, 1.0));
  app.add_option("--tau", s.tau, "transition filter threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--iters", s.iters, "iteration budget per attempt");
  app.add_option("--time-cap", s.time_cap, "wall-clock seconds per attempt, 0 disables");
  app.add_option("--restarts", s.restarts, "attempts per plan");
  app.add_option("--world", s.world, "bundle directory supplying default file paths");

  // gen-env
  auto* gen = app.add_subcommand("gen-env", "generate a synthetic world bundle");
  std::string gen_out;
  wp::GenParams gp;
  wp::TrajectoryParams held;
  int train_targets = 200;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--vertex-alphabet", gp.vertex_alphabet);
  gen->add_option("--edge-alphabet", gp.edge_alphabet);
  gen->add_option("--rules", gp.rules);
  gen->add_option("--blocks", gp.blocks);
  gen->add_option("--block-min", gp.block_min);
  gen->add_option("--block-max", gp.block_max);
  gen->add_option("--label-skew", gp.label_skew);
  gen->add_option("--targets", held.targets, "held-out planning targets");
  gen->add_option("--train-targets", train_targets, "objects whose construction is observed");
  gen->add_option("--depth-min", held.depth_min);
  gen->add_option("--depth-max", held.depth_max);
  gen->add_option("--noise", held.noise, "label corruption rate of observations")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--merge", held.merge, "probability of joining two composite objects")->check(CLI::Range(0.0, 1.0));

  // induce
  auto* induce = app.add_subcommand("induce", "induce a rule library from observations");
  std::string obs_path, library_out;
  induce->add_option("--observations", obs_path);
  induce->add_option("--out", library_out);

  // train
  auto* train = app.add_subcommand("train", "train policy and transition models");
  std::string train_library, train_obs, policy_out, transition_out;
  wp::TrainingHyper hyper;
  wp::FeatureConfig features;
  int negatives = 4;
  train->add_option("--library", train_library);
  train->add_option("--observations", train_obs);
  train->add_option("--policy-out", policy_out);
  train->add_option("--transition-out", transition_out);
  train->add_option("--epochs", hyper.epochs)->check(CLI::PositiveNumber);
  train->add_option("--step", hyper.step);
  train->add_option("--l2", hyper.l2);
  train->add_option("--batch", hyper.batch)->check(CLI::PositiveNumber);
  train->add_option("--negatives", negatives, "counterfactuals per observation")->check(CLI::PositiveNumber);
  train->add_option("--bits", features.bits)->check(CLI::PositiveNumber);
  train->add_option("--feature-radius", features.radius)->check(CLI::NonNegativeNumber);

  // plan
  auto* plan = app.add_subcommand("plan", "plan the deconstruction of one target");
  ModelPaths plan_models;
  std::string plan_targets, plan_out, plan_agent = "puct";
  std::size_t plan_index = 0;
  add_model_options(plan, plan_models);
  plan->add_option("--targets", plan_targets, "states file");
  plan->add_option("--index", plan_index, "target within the file");
  plan->add_option("--agent", plan_agent, "puct, uct, mcs, bfs-neural or bfs-heuristic");
  plan->add_option("--out", plan_out, "plan record file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "compare planning agents");
  ModelPaths bench_models;
  std::string bench_targets, rows_out;
  std::vector<std::string> agent_tokens{"puct", "mcs", "uct", "bfs-neural", "bfs-heuristic"};
  int repeats = 3;
  std::size_t limit = 0;
  add_model_options(bench, bench_models);
  bench->add_option("--targets", bench_targets, "states file");
  bench->add_option("--agents", agent_tokens, "comma separated agents")->delimiter(',');
  bench->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  bench->add_option("--limit", limit, "use only the first N targets");
  bench->add_option("--rows", rows_out, "machine-readable rows file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const std::string dir = gen_out.empty() ? s.world : gen_out;
      if (dir.empty()) throw UsageError("gen-env needs --out or --world");
      const wp::WorldSpec world = wp::gen_world(gp, s.seed);
      wp::TrajectoryParams tp = held;
      tp.targets = train_targets;
      const std::uint64_t train_seed = wp::derive_seed(s.seed, 100);
      const std::uint64_t held_seed = wp::derive_seed(s.seed, 200);
      const wp::TrajectorySet training = wp::gen_trajectories(world, tp, train_seed);
      wp::TrajectoryParams hp = held;
      hp.noise = 0.0;
      const wp::TrajectorySet targets = wp::gen_trajectories(world, hp, held_seed);
      auto meta = wp::world_meta(world, tp, train_seed);
      meta["held_out_seed"] = std::to_string(held_seed);
      meta["held_out_targets"] = std::to_string(held.targets);
      wp::save_bundle(dir, world, training, targets, meta);
      std::cout << "world " << dir << ": " << world.rules.size() << " hidden rules, " << world.blocks.size()
                << " blocks, " << training.observations.size() << " observations, " << targets.targets.size()
                << " targets\n";
    } else if (*induce) {
      const auto observations = wp::load_observations(resolve(obs_path, s, "observations.obs", "--observations"));
      const wp::LibraryBuild build = wp::build_library(observations, s.radius, s.min_support);
      const std::string out = resolve(library_out, s, "library.rules", "--out");
      wp::save_rules(out, build.library.rules());
      for (const auto& f : build.failures) std::cerr << "observation " << f.observation << ": " << f.reason << '\n';
      std::cout << "induced " << build.library.size() << " rules from " << observations.size() << " observations ("
                << build.failures.size() << " failed)\n";
    } else if (*train) {
      const wp::ActionLibrary library = wp::load_library(resolve(train_library, s, "library.rules", "--library"));
      const auto observations =
          wp::load_observations(resolve(train_obs, s, "observations.obs", "--observations"));
      const auto labels = wp::label_observations(library, observations, s.radius);
      hyper.seed = s.seed;
      const auto examples = wp::policy_examples(observations, labels);
      const wp::PolicyModel policy = wp::train_policy(library, examples, hyper, features);
      const auto dataset = wp::make_transition_dataset(library, observations, negatives, wp::derive_seed(s.seed, 7));
      const wp::TransitionModel transition =
          wp::train_transition(dataset, hyper, features, library.hash_id());
      auto pout = open_out(resolve(policy_out, s, "policy.bin", "--policy-out"));
      wp::write_policy(pout, policy);
      auto tout = open_out(resolve(transition_out, s, "transition.bin", "--transition-out"));
      wp::write_transition(tout, transition);
      std::cout << "trained policy on " << examples.size() << " examples and transition model on "
                << dataset.size() << " examples\n";
    } else if (*plan) {
      const auto agent = wp::parse_algorithm(plan_agent);
      if (!agent) throw UsageError("unknown agent '" + plan_agent + "'");
      const Models m = load_models(plan_models, s);
      const auto targets = wp::load_states(resolve(plan_targets, s, "targets.graphs", "--targets"));
      if (plan_index >= targets.size()) throw UsageError("--index is past the last target");
      const wp::Problem problem{targets[plan_index], m.blocks, budget(s)};
      const wp::PlanResult result = wp::plan(problem, *agent, m.world(), planner_params(s), s.seed);
      if (plan_out.empty()) {
        wp::write_plan(std::cout, result);
      } else {
        auto out = open_out(plan_out);
        wp::write_plan(out, result);
      }
    } else if (*bench) {
      wp::BenchConfig config;
      config.agents.clear();
      for (const auto& t : agent_tokens) {
        const auto a = wp::parse_algorithm(t);
        if (!a) throw UsageError("unknown agent '" + t + "'");
        config.agents.push_back(*a);
      }
      config.budget = budget(s);
      config.params = planner_params(s);
      config.repeats = repeats;
      config.seed = s.seed;
      const Models m = load_models(bench_models, s);
      auto targets = wp::load_states(resolve(bench_targets, s, "targets.graphs", "--targets"));
      if (limit > 0 && limit < targets.size()) targets.resize(limit);
      if (targets.empty()) throw wp::FormatError(bench_targets, 0, "no targets");
      const wp::BenchReport report = wp::run_benchmark(targets, m.blocks, m.world(), config);
      wp::write_report_table(std::cout, report);
      if (rows_out.empty()) {
        wp::write_report_rows(std::cout, report);
      } else {
        auto out = open_out(rows_out);
        wp::write_report_rows(out, report);
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const wp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
