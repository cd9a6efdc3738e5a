#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace swarmform::bso {

using Rng = std::mt19937_64;
using Vector = Eigen::VectorXd;

/// Scalar objective, lower is better. Throwing or returning NaN marks the
/// candidate as infeasible (+inf fitness).
using Evaluator = std::function<double(const Vector&)>;

inline constexpr double kUnevaluated = std::numeric_limits<double>::infinity();

struct Solution {
  Vector position;
  double fitness = kUnevaluated;
  std::int64_t evaluated_at = -1;  // iteration/step of last evaluation; -1 = stale
};

struct BsoConfig {
  int population_size = 20;
  double perc_e = 20.0;  // percent of the population kept as elitists
  double p_e = 0.2;      // probability of drawing the base from elitists
  double p_one = 0.8;    // probability of a one-parent base
  int max_iter = 2000;   // T in the step-size schedule
  double slope = 20.0;   // k in the step-size schedule
  double disruption_prob = 0.2;
  Vector lower;
  Vector upper;
  bool update_inside_loop = true;

  int dimension() const { return static_cast<int>(lower.size()); }

  /// Uniform box bounds in `dim` dimensions.
  static BsoConfig with_box(int dim, double lo, double hi);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Objective-space clustering: the best ceil(N * perc_e / 100) solutions are
/// elitists, the rest normals. Both lists are sorted by ascending fitness.
struct Population {
  std::vector<Solution> elites;
  std::vector<Solution> normals;

  std::size_t size() const { return elites.size() + normals.size(); }
  Solution& at(std::size_t i);
  const Solution& at(std::size_t i) const;
  /// Elites followed by normals.
  std::vector<Solution> flatten() const;
  const Solution& best() const;
};

std::size_t elite_count(std::size_t n, double perc_e);

/// Stable sort by fitness, then split. Throws on empty input.
Population cluster_objective_space(std::vector<Solution> solutions,
                                   double perc_e);

/// Picks the base vector for a new idea: one member, or a random convex
/// combination of two distinct members, of the elite or the normal cluster.
Vector select_base(const Population& pop, double p_e, double p_one, Rng& rng);

/// logsig((T/2 - t) / k) * r with r ~ U(0, 1).
double step_size(std::int64_t t, const BsoConfig& cfg, Rng& rng);

double logsig(double z);

/// base + N(0, 1) * xi per dimension, clamped to the bounds.
Solution perturb(const Vector& base, double xi, const BsoConfig& cfg, Rng& rng);

Solution generate_new(const Vector& base, std::int64_t t, const BsoConfig& cfg,
                      Rng& rng);

/// With probability disruption_prob, replaces one coordinate of one random
/// individual with a uniform in-bounds value and marks it stale. Returns
/// whether it fired.
bool disrupt(Population& pop, const BsoConfig& cfg, Rng& rng);

/// Uniform random position inside the bounds.
Vector random_position(const BsoConfig& cfg, Rng& rng);

/// Calls the evaluator, mapping exceptions and NaN to +inf.
double safe_evaluate(const Evaluator& f, const Vector& x);

struct OptimizeResult {
  Solution best;
  std::vector<double> best_history;  // best-ever fitness after each iteration
  std::size_t evaluations = 0;
};

/// Offline BSO-OS: evaluate, cluster, generate one idea per slot with greedy
/// replacement, disrupt; repeated for cfg.max_iter iterations.
OptimizeResult bso_os_optimize(const Evaluator& f, const BsoConfig& cfg,
                               Rng& rng);

/// N random solutions evaluated at step `t`, clustered.
Population initialize_population(const Evaluator& f, const BsoConfig& cfg,
                                 std::int64_t t, Rng& rng);

/// One online tuning step: a single new candidate is generated, evaluated and
/// merged; the worst of the N+1 is dropped and the population re-clustered.
/// Returns the best elite.
const Solution& online_tuner_step(Population& pop, const Evaluator& f,
                                  const BsoConfig& cfg, std::int64_t t,
                                  Rng& rng);

/// Re-evaluates the `count` members with the oldest evaluations against the
/// current situation, then re-clusters. Called every step with
/// count = ceil(N / R), each member's fitness is at most R steps old.
void refresh_stalest(Population& pop, const Evaluator& f, const BsoConfig& cfg,
                     std::int64_t t, std::size_t count);

}  // namespace swarmform::bso
