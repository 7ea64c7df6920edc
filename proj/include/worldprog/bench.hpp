#ifndef WORLDPROG_BENCH_HPP_
#define WORLDPROG_BENCH_HPP_

#include <cstdint>
#include <functional>
#include <iterator>
#include <iosfwd>
#include <vector>

#include "worldprog/planner.hpp"

namespace wp {

struct BenchConfig {
  std::vector<Algorithm> agents{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  Budget budget;
  PlannerParams params;
  int repeats = 3;
  std::uint64_t seed = 0;
};

struct BenchRow {
  Algorithm agent = Algorithm::kPuct;
  double solved_percent = 0.0;  // mean over repeats
  double stddev = 0.0;          // population std dev of solved % over repeats
  double seconds_per_plan = 0.0;
  double iterations_per_plan = 0.0;
};

struct BenchCell {
  Algorithm agent = Algorithm::kPuct;
  int repeat = 0;
  std::size_t target = 0;
  std::uint64_t seed = 0;
  PlanResult result;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchCell> cells;
};

/// Seed of one (repeat, target) cell; shared by all agents.
std::uint64_t cell_seed(std::uint64_t seed, int repeat, std::size_t target);

using BenchProgress = std::function<void(const BenchCell&)>;

/// Throws PreconditionError without targets, agents or repeats.
BenchReport run_benchmark(const std::vector<State>& targets, const std::vector<LabeledGraph>& blocks,
                          const World& world, const BenchConfig& config, const BenchProgress& progress = {});

/// Aligned table: agent, %solved, stddev, s/plan, iters/plan.
void write_report_table(std::ostream& out, const BenchReport& report);

/// Tab-separated `ROW` lines with the same columns, agent as its token.
void write_report_rows(std::ostream& out, const BenchReport& report);

}  // namespace wp

#endif  // WORLDPROG_BENCH_HPP_
