#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmform/scenario.hpp"
#include "swarmform/trace.hpp"

namespace swarmform {

struct RunResult {
  int population = 0;
  int run = 0;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> convergence_steps;
  double post_error = 0;  // NaN when not converged
  std::string failure;    // non-empty if the run threw
};

struct SummaryRow {
  int population = 0;
  int runs = 0;
  double mean_convergence_steps = 0;
  double std_convergence_steps = 0;
  double mean_post_error = 0;
  double std_post_error = 0;
  int n_not_converged = 0;
};

struct BatchResult {
  std::vector<SummaryRow> rows;
  std::vector<RunResult> runs;  // population-major, run order within
};

/// Seed of run `run` at population `population`, derived from the base seed.
std::uint64_t derive_seed(std::uint64_t base, int population, int run);

/// Called once per finished run, possibly from a worker thread.
using RunSink = std::function<void(const RunResult&, const Trace&)>;

/// Runs every (population, seed) pair and aggregates convergence time and
/// post-convergence error per population. A failing run is recorded and the
/// batch carries on. `threads` == 0 means hardware concurrency.
BatchResult scalability_batch(const std::vector<int>& populations, int runs_per,
                              const ScenarioConfig& base, unsigned threads = 1,
                              const RunSink& sink = {});

SummaryRow summarize(int population, const std::vector<RunResult>& runs);

extern const char* const kSummaryHeader;
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace swarmform
