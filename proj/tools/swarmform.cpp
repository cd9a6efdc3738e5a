// swarmform: run formation-control scenarios and scalability batches.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmform/batch.hpp"
#include "swarmform/config_io.hpp"
#include "swarmform/sim.hpp"
#include "swarmform/trace.hpp"

namespace fs = std::filesystem;
using namespace swarmform;

namespace {

// Files written so far; removed again if the command fails.
class OutputSet {
 public:
  void write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      out << content;
      if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
      fs::remove(tmp);
      throw std::runtime_error("cannot write " + path.string() + ": " + ec.message());
    }
    std::lock_guard lock(mu_);
    written_.push_back(path);
  }

  void rollback() {
    std::lock_guard lock(mu_);
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

 private:
  std::mutex mu_;
  std::vector<fs::path> written_;
};

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string populations = "5,7,9,11";
  int runs = 10;
};

ScenarioConfig load(const Options& o) {
  std::vector<std::string> overrides = o.sets;
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  return parse_config(o.config, overrides);
}

std::vector<int> parse_populations(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("populations", "not an integer: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("populations", "empty list");
  return out;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("SWARMFORM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

int cmd_validate(const Options& o) {
  const ScenarioConfig cfg = load(o);
  std::cout << "ok: " << o.config << " (n_robots=" << cfg.n_robots
            << ", max_steps=" << cfg.max_steps << ")\n";
  return 0;
}

int cmd_run(const Options& o, OutputSet& outputs) {
  const ScenarioConfig cfg = load(o);
  const Trace trace = run(cfg);
  fs::create_directories(o.out);
  outputs.write(fs::path(o.out) / "trace.csv", format_trace_csv(trace));
  outputs.write(fs::path(o.out) / "config.json", config_to_json(cfg));

  const std::int64_t last = trace.steps() - 1;
  std::printf("robot_id,final_err_norm\n");
  for (std::size_t s = 0; s < trace.robots(); ++s) {
    const TraceRecord& r = trace.at(last, s);
    if (r.robot_id == trace.leader_id) continue;
    std::printf("%d,%.6g\n", r.robot_id, r.err_norm);
  }
  return 0;
}

int cmd_batch(const Options& o, OutputSet& outputs) {
  const ScenarioConfig cfg = load(o);
  const std::vector<int> pops = parse_populations(o.populations);
  if (o.runs < 1) throw ConfigError("runs", "must be >= 1");
  for (int p : pops) {
    ScenarioConfig probe = cfg;
    probe.n_robots = p;
    probe.validate();
  }
  const fs::path dir(o.out);
  fs::create_directories(dir / "traces");
  outputs.write(dir / "config.json", config_to_json(cfg));

  const BatchResult res = scalability_batch(
      pops, o.runs, cfg, thread_cap(), [&](const RunResult& r, const Trace& t) {
        const std::string name = "n" + std::to_string(r.population) + "_run" +
                                 std::to_string(r.run) + ".csv";
        outputs.write(dir / "traces" / name, format_trace_csv(t));
      });

  std::ostringstream summary;
  write_summary_csv(summary, res.rows);
  outputs.write(dir / "summary.csv", summary.str());
  std::cout << summary.str();
  for (const auto& r : res.runs) {
    if (!r.failure.empty()) {
      std::cerr << "run n=" << r.population << " #" << r.run
                << " failed: " << r.failure << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower swarm formation simulator with online BSO-tuned PID"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario JSON file")->required();
    sub->add_option("--set", o.sets, "Override KEY=VALUE (dotted keys), repeatable")
        ->take_all();
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario");
  add_common(run_cmd);
  run_cmd->add_option("--out", o.out, "Output directory");
  run_cmd->add_option("--seed", o.seed, "Seed override");

  CLI::App* batch_cmd = app.add_subcommand("batch", "Scalability batch");
  add_common(batch_cmd);
  batch_cmd->add_option("--out", o.out, "Output directory");
  batch_cmd->add_option("--seed", o.seed, "Base seed override");
  batch_cmd->add_option("--populations", o.populations, "Comma-separated odd swarm sizes");
  batch_cmd->add_option("--runs", o.runs, "Seeds per population");

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  add_common(validate_cmd);

  CLI11_PARSE(app, argc, argv);

  OutputSet outputs;
  try {
    if (*validate_cmd) return cmd_validate(o);
    if (*run_cmd) return cmd_run(o, outputs);
    if (*batch_cmd) return cmd_batch(o, outputs);
  } catch (const ConfigError& e) {
    outputs.rollback();
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    outputs.rollback();
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
