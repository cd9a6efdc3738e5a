#include "swarmform/bso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swarmform::bso {

namespace {

// U(0, 1) excluding both endpoints.
double open_unit(Rng& rng) {
  std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), 1.0);
  return u(rng);
}

bool bernoulli(double p, Rng& rng) { return open_unit(rng) < p; }

std::size_t uniform_index(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(rng);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("bso: " + what);
}

}  // namespace

BsoConfig BsoConfig::with_box(int dim, double lo, double hi) {
  BsoConfig cfg;
  cfg.lower = Vector::Constant(dim, lo);
  cfg.upper = Vector::Constant(dim, hi);
  return cfg;
}

void BsoConfig::validate() const {
  require(population_size >= 2, "population_size must be >= 2");
  require(perc_e > 0 && perc_e < 100, "perc_e must lie in (0, 100)");
  require(p_e >= 0 && p_e <= 1, "p_e must lie in [0, 1]");
  require(p_one >= 0 && p_one <= 1, "p_one must lie in [0, 1]");
  require(disruption_prob >= 0 && disruption_prob <= 1,
          "disruption_prob must lie in [0, 1]");
  require(max_iter >= 1, "max_iter must be >= 1");
  require(slope > 0, "slope must be > 0");
  require(lower.size() > 0 && lower.size() == upper.size(),
          "bounds must be non-empty and of equal dimension");
  require((lower.array() <= upper.array()).all(), "lower bound exceeds upper");
  // The two-cluster split needs at least one normal.
  require(elite_count(population_size, perc_e) <
              static_cast<std::size_t>(population_size),
          "perc_e leaves no normals for this population_size");
}

Solution& Population::at(std::size_t i) {
  return i < elites.size() ? elites[i] : normals.at(i - elites.size());
}

const Solution& Population::at(std::size_t i) const {
  return i < elites.size() ? elites[i] : normals.at(i - elites.size());
}

std::vector<Solution> Population::flatten() const {
  std::vector<Solution> all;
  all.reserve(size());
  all.insert(all.end(), elites.begin(), elites.end());
  all.insert(all.end(), normals.begin(), normals.end());
  return all;
}

const Solution& Population::best() const {
  if (!elites.empty()) return elites.front();
  if (normals.empty()) throw std::logic_error("bso: empty population");
  return normals.front();
}

std::size_t elite_count(std::size_t n, double perc_e) {
  // Guard against 20% of 20 evaluating to 4.0000000001.
  const double raw = static_cast<double>(n) * perc_e / 100.0;
  return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

Population cluster_objective_space(std::vector<Solution> solutions,
                                   double perc_e) {
  if (solutions.empty()) {
    throw std::invalid_argument("bso: cannot cluster an empty population");
  }
  std::stable_sort(solutions.begin(), solutions.end(),
                   [](const Solution& a, const Solution& b) {
                     return a.fitness < b.fitness;
                   });
  const auto n_elite =
      static_cast<std::ptrdiff_t>(elite_count(solutions.size(), perc_e));
  Population pop;
  pop.elites.assign(std::make_move_iterator(solutions.begin()),
                    std::make_move_iterator(solutions.begin() + n_elite));
  pop.normals.assign(std::make_move_iterator(solutions.begin() + n_elite),
                     std::make_move_iterator(solutions.end()));
  return pop;
}

Vector select_base(const Population& pop, double p_e, double p_one, Rng& rng) {
  const bool from_elites = bernoulli(p_e, rng);
  const auto& cluster = from_elites ? pop.elites : pop.normals;
  if (cluster.empty()) {
    throw std::logic_error(std::string("bso: empty ") +
                           (from_elites ? "elite" : "normal") + " cluster");
  }
  const bool one = bernoulli(p_one, rng);
  if (one || cluster.size() < 2) {
    return cluster[uniform_index(cluster.size(), rng)].position;
  }
  const std::size_t a = uniform_index(cluster.size(), rng);
  std::size_t b = uniform_index(cluster.size() - 1, rng);
  if (b >= a) ++b;
  const double r = open_unit(rng);
  return r * cluster[a].position + (1.0 - r) * cluster[b].position;
}

double logsig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double step_size(std::int64_t t, const BsoConfig& cfg, Rng& rng) {
  const double z =
      (0.5 * cfg.max_iter - static_cast<double>(t)) / cfg.slope;
  return logsig(z) * open_unit(rng);
}

Solution perturb(const Vector& base, double xi, const BsoConfig& cfg,
                 Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Solution s;
  s.position = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    s.position(i) += gauss(rng) * xi;
  }
  s.position = s.position.cwiseMax(cfg.lower).cwiseMin(cfg.upper);
  return s;
}

Solution generate_new(const Vector& base, std::int64_t t, const BsoConfig& cfg,
                      Rng& rng) {
  const double xi = step_size(t, cfg, rng);
  return perturb(base, xi, cfg, rng);
}

bool disrupt(Population& pop, const BsoConfig& cfg, Rng& rng) {
  if (pop.size() == 0 || !bernoulli(cfg.disruption_prob, rng)) return false;
  Solution& victim = pop.at(uniform_index(pop.size(), rng));
  const auto dim = static_cast<std::size_t>(victim.position.size());
  const auto d = static_cast<Eigen::Index>(uniform_index(dim, rng));
  std::uniform_real_distribution<double> u(cfg.lower(d), cfg.upper(d));
  victim.position(d) = std::clamp(u(rng), cfg.lower(d), cfg.upper(d));
  victim.evaluated_at = -1;
  return true;
}

Vector random_position(const BsoConfig& cfg, Rng& rng) {
  Vector x(cfg.dimension());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::uniform_real_distribution<double> u(cfg.lower(i), cfg.upper(i));
    x(i) = std::clamp(u(rng), cfg.lower(i), cfg.upper(i));
  }
  return x;
}

double safe_evaluate(const Evaluator& f, const Vector& x) {
  try {
    const double v = f(x);
    return std::isnan(v) ? kUnevaluated : v;
  } catch (...) {
    return kUnevaluated;
  }
}

namespace {

struct CountingEvaluator {
  const Evaluator& f;
  std::size_t count = 0;

  void operator()(Solution& s, std::int64_t t) {
    s.fitness = safe_evaluate(f, s.position);
    s.evaluated_at = t;
    ++count;
  }
};

void track_best(Solution& best, const Solution& s) {
  if (s.fitness < best.fitness || best.position.size() == 0) best = s;
}

}  // namespace

OptimizeResult bso_os_optimize(const Evaluator& f, const BsoConfig& cfg,
                               Rng& rng) {
  cfg.validate();
  CountingEvaluator eval{f};
  OptimizeResult out;

  std::vector<Solution> members(static_cast<std::size_t>(cfg.population_size));
  for (auto& m : members) {
    m.position = random_position(cfg, rng);
    eval(m, 0);
    track_best(out.best, m);
  }

  for (int t = 0; t < cfg.max_iter; ++t) {
    // Evaluation pass: only individuals touched by the last disruption.
    for (auto& m : members) {
      if (m.evaluated_at < 0) {
        eval(m, t);
        track_best(out.best, m);
      }
    }

    Population pop = cluster_objective_space(std::move(members), cfg.perc_e);
    members = pop.flatten();

    std::vector<Solution> next;
    if (!cfg.update_inside_loop) next.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      Solution cand = generate_new(select_base(pop, cfg.p_e, cfg.p_one, rng),
                                   t, cfg, rng);
      eval(cand, t);
      track_best(out.best, cand);
      if (cfg.update_inside_loop) {
        if (cand.fitness < members[i].fitness) members[i] = std::move(cand);
      } else {
        next.push_back(std::move(cand));
      }
    }
    if (!cfg.update_inside_loop) members = std::move(next);

    pop = cluster_objective_space(std::move(members), cfg.perc_e);
    disrupt(pop, cfg, rng);
    members = pop.flatten();

    out.best_history.push_back(out.best.fitness);
  }

  out.evaluations = eval.count;
  return out;
}

Population initialize_population(const Evaluator& f, const BsoConfig& cfg,
                                 std::int64_t t, Rng& rng) {
  cfg.validate();
  std::vector<Solution> members(static_cast<std::size_t>(cfg.population_size));
  for (auto& m : members) {
    m.position = random_position(cfg, rng);
    m.fitness = safe_evaluate(f, m.position);
    m.evaluated_at = t;
  }
  return cluster_objective_space(std::move(members), cfg.perc_e);
}

const Solution& online_tuner_step(Population& pop, const Evaluator& f,
                                  const BsoConfig& cfg, std::int64_t t,
                                  Rng& rng) {
  Solution cand =
      generate_new(select_base(pop, cfg.p_e, cfg.p_one, rng), t, cfg, rng);
  cand.fitness = safe_evaluate(f, cand.position);
  cand.evaluated_at = t;

  std::vector<Solution> all = pop.flatten();
  all.push_back(std::move(cand));
  // Stable sort keeps the newcomer behind equally fit incumbents, so a tie
  // for last place drops the newcomer.
  std::stable_sort(all.begin(), all.end(),
                   [](const Solution& a, const Solution& b) {
                     return a.fitness < b.fitness;
                   });
  all.pop_back();
  pop = cluster_objective_space(std::move(all), cfg.perc_e);
  return pop.best();
}

void refresh_stalest(Population& pop, const Evaluator& f, const BsoConfig& cfg,
                     std::int64_t t, std::size_t count) {
  std::vector<Solution> all = pop.flatten();
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return all[a].evaluated_at < all[b].evaluated_at;
                   });
  count = std::min(count, all.size());
  for (std::size_t k = 0; k < count; ++k) {
    Solution& s = all[order[k]];
    s.fitness = safe_evaluate(f, s.position);
    s.evaluated_at = t;
  }
  pop = cluster_objective_space(std::move(all), cfg.perc_e);
}

}  // namespace swarmform::bso
