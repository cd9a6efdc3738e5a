#include "swarmform/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "swarmform/sim.hpp"

namespace swarmform {

const char* const kSummaryHeader =
    "population,runs,mean_convergence_steps,std_convergence_steps,"
    "mean_post_error,std_post_error,n_not_converged";

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, int population, int run) {
  std::uint64_t z = splitmix64(base);
  z = splitmix64(z ^ static_cast<std::uint64_t>(population));
  return splitmix64(z ^ static_cast<std::uint64_t>(run));
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

RunResult run_one(const ScenarioConfig& base, int population, int run,
                  const RunSink& sink) {
  RunResult res;
  res.population = population;
  res.run = run;
  res.seed = derive_seed(base.seed, population, run);
  try {
    ScenarioConfig cfg = base;
    cfg.n_robots = population;
    cfg.seed = res.seed;
    const Trace trace = swarmform::run(cfg);
    res.convergence_steps = convergence_time(trace, cfg.convergence.threshold,
                                             cfg.convergence.dwell);
    res.post_error = res.convergence_steps
                         ? mean_error_from(trace, *res.convergence_steps)
                         : std::numeric_limits<double>::quiet_NaN();
    if (sink) sink(res, trace);
  } catch (const std::exception& e) {
    res.failure = e.what();
    res.post_error = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace

SummaryRow summarize(int population, const std::vector<RunResult>& runs) {
  SummaryRow row;
  row.population = population;
  std::vector<double> conv, post;
  for (const auto& r : runs) {
    if (r.population != population) continue;
    ++row.runs;
    if (r.convergence_steps) {
      conv.push_back(static_cast<double>(*r.convergence_steps));
      post.push_back(r.post_error);
    } else {
      ++row.n_not_converged;
    }
  }
  std::tie(row.mean_convergence_steps, row.std_convergence_steps) = mean_std(conv);
  std::tie(row.mean_post_error, row.std_post_error) = mean_std(post);
  return row;
}

BatchResult scalability_batch(const std::vector<int>& populations, int runs_per,
                              const ScenarioConfig& base, unsigned threads,
                              const RunSink& sink) {
  if (runs_per < 1) throw std::invalid_argument("runs_per must be >= 1");
  for (int p : populations) {
    if (p < 3 || p % 2 == 0) {
      throw ConfigError("populations", "population sizes must be odd and >= 3");
    }
  }

  struct Job {
    int population;
    int run;
  };
  std::vector<Job> jobs;
  for (int p : populations) {
    for (int r = 0; r < runs_per; ++r) jobs.push_back({p, r});
  }

  BatchResult out;
  out.runs.resize(jobs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      out.runs[j] = run_one(base, jobs[j].population, jobs[j].run, sink);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (int p : populations) out.rows.push_back(summarize(p, out.runs));
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g,%d\n", r.population,
                  r.runs, r.mean_convergence_steps, r.std_convergence_steps,
                  r.mean_post_error, r.std_post_error, r.n_not_converged);
    os << buf;
  }
}

}  // namespace swarmform
