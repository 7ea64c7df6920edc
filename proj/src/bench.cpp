#include "worldprog/bench.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "worldprog/errors.hpp"
#include "worldprog/rng.hpp"

namespace wp {

std::uint64_t cell_seed(std::uint64_t seed, int repeat, std::size_t target) {
  return derive_seed(seed, static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(target));
}

BenchReport run_benchmark(const std::vector<State>& targets, const std::vector<LabeledGraph>& blocks,
                          const World& world, const BenchConfig& config, const BenchProgress& progress) {
  if (targets.empty()) throw PreconditionError("benchmark needs at least one target");
  if (config.agents.empty()) throw PreconditionError("benchmark needs at least one agent");
  if (config.repeats < 1) throw PreconditionError("benchmark needs at least one repeat");
  BenchReport report;
  const double n = static_cast<double>(targets.size());
  for (Algorithm agent : config.agents) {
    std::vector<double> solved_pct;
    double seconds = 0.0;
    double iterations = 0.0;
    for (int rep = 0; rep < config.repeats; ++rep) {
      std::size_t solved = 0;
      for (std::size_t t = 0; t < targets.size(); ++t) {
        BenchCell cell{agent, rep, t, cell_seed(config.seed, rep, t), {}};
        Problem problem{targets[t], blocks, config.budget};
        cell.result = plan(problem, agent, world, config.params, cell.seed);
        solved += cell.result.solved ? 1 : 0;
        seconds += cell.result.wall_seconds;
        iterations += static_cast<double>(cell.result.iterations);
        if (progress) progress(cell);
        report.cells.push_back(std::move(cell));
      }
      solved_pct.push_back(100.0 * static_cast<double>(solved) / n);
    }
    BenchRow row;
    row.agent = agent;
    double mean = 0.0;
    for (double p : solved_pct) mean += p;
    mean /= static_cast<double>(solved_pct.size());
    double var = 0.0;
    for (double p : solved_pct) var += (p - mean) * (p - mean);
    row.solved_percent = mean;
    row.stddev = std::sqrt(var / static_cast<double>(solved_pct.size()));
    const double plans = n * config.repeats;
    row.seconds_per_plan = seconds / plans;
    row.iterations_per_plan = iterations / plans;
    report.rows.push_back(row);
  }
  return report;
}

void write_report_table(std::ostream& out, const BenchReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %9s %8s %10s %12s\n", "agent", "%solved", "stddev", "s/plan", "iters/plan");
  out << line;
  for (const BenchRow& r : report.rows) {
    const std::string name(algorithm_name(r.agent));
    std::snprintf(line, sizeof line, "%-16s %9.2f %8.2f %10.4f %12.1f\n", name.c_str(), r.solved_percent, r.stddev,
                  r.seconds_per_plan, r.iterations_per_plan);
    out << line;
  }
}

void write_report_rows(std::ostream& out, const BenchReport& report) {
  for (const BenchRow& r : report.rows) {
    out << "ROW\t" << algorithm_token(r.agent) << '\t' << r.solved_percent << '\t' << r.stddev << '\t'
        << r.seconds_per_plan << '\t' << r.iterations_per_plan << '\n';
  }
}

}  // namespace wp
