#include "swarmform/bso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gtest/gtest.h"

namespace swarmform::bso {
namespace {

std::vector<Solution> with_fitness(const std::vector<double>& f) {
  std::vector<Solution> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Solution s;
    s.position = Vector::Constant(1, static_cast<double>(i));
    s.fitness = f[i];
    s.evaluated_at = 0;
    out.push_back(s);
  }
  return out;
}

void expect_partition(const Population& pop) {
  if (pop.elites.empty() || pop.normals.empty()) return;
  double worst_elite = -INFINITY;
  for (const auto& e : pop.elites) worst_elite = std::max(worst_elite, e.fitness);
  for (const auto& n : pop.normals) EXPECT_LE(worst_elite, n.fitness);
}

TEST(Cluster, TwoLowestBecomeElites) {
  std::vector<double> f;
  for (int i = 0; i < 20; ++i) f.push_back(std::fmod(i * 7.3, 11.0) + i * 0.001);
  const Population pop = cluster_objective_space(with_fitness(f), 10.0);
  ASSERT_EQ(pop.elites.size(), 2u);
  std::vector<double> sorted = f;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(pop.elites[0].fitness, sorted[0]);
  EXPECT_EQ(pop.elites[1].fitness, sorted[1]);
  EXPECT_EQ(pop.size(), 20u);
  expect_partition(pop);
}

TEST(Cluster, PairSplitsOneOne) {
  const Population pop = cluster_objective_space(with_fitness({3, 1}), 50.0);
  ASSERT_EQ(pop.elites.size(), 1u);
  ASSERT_EQ(pop.normals.size(), 1u);
  EXPECT_EQ(pop.best().fitness, 1.0);
}

TEST(Cluster, TiesKeepInputOrder) {
  const Population pop = cluster_objective_space(with_fitness(std::vector<double>(10, 2.0)), 20.0);
  ASSERT_EQ(pop.elites.size(), 2u);
  EXPECT_EQ(pop.elites[0].position(0), 0.0);
  EXPECT_EQ(pop.elites[1].position(0), 1.0);
  EXPECT_EQ(pop.normals[0].position(0), 2.0);
}

TEST(Cluster, RejectsEmpty) {
  EXPECT_THROW(cluster_objective_space({}, 20.0), std::invalid_argument);
}

TEST(Cluster, EliteCountRoundsUp) {
  EXPECT_EQ(elite_count(20, 20.0), 4u);
  EXPECT_EQ(elite_count(20, 21.0), 5u);
  EXPECT_EQ(elite_count(7, 10.0), 1u);
}

TEST(SelectBase, SingleMemberClusterFallsBack) {
  Population pop;
  pop.elites = with_fitness({1.0});
  pop.normals = with_fitness({2.0});
  pop.normals[0].position(0) = 42.0;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vector x = select_base(pop, 0.0, 0.0, rng);  // normals, two-parent
    EXPECT_EQ(x(0), 42.0);
  }
}

TEST(SelectBase, EqualParentsGiveThatPoint) {
  Population pop;
  pop.elites = with_fitness({1.0});
  pop.normals = with_fitness({2.0, 3.0});
  pop.normals[0].position = Vector::Constant(3, 1.5);
  pop.normals[1].position = Vector::Constant(3, 1.5);
  Rng rng(2);
  const Vector x = select_base(pop, 0.0, 0.0, rng);
  EXPECT_TRUE(x.isApprox(Vector::Constant(3, 1.5)));
}

TEST(SelectBase, TwoParentsShareOneWeight) {
  Population pop;
  pop.elites = with_fitness({1.0});
  pop.normals = with_fitness({2.0, 3.0});
  pop.normals[0].position = Vector::Zero(9);
  pop.normals[1].position = Vector::Ones(9);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector x = select_base(pop, 0.0, 0.0, rng);
    EXPECT_GT(x(0), 0.0);
    EXPECT_LT(x(0), 1.0);
    for (int d = 1; d < 9; ++d) EXPECT_EQ(x(d), x(0));
  }
}

TEST(SelectBase, EmptyClusterIsAnError) {
  Population pop;
  pop.elites = with_fitness({1.0});
  Rng rng(4);
  EXPECT_THROW(select_base(pop, 0.0, 1.0, rng), std::logic_error);
}

TEST(StepSize, MidpointHalvesTheDraw) {
  BsoConfig cfg = BsoConfig::with_box(1, 0, 1);
  cfg.max_iter = 2000;
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double xi = step_size(1000, cfg, rng);
    EXPECT_GT(xi, 0.0);
    EXPECT_LT(xi, 0.5);
  }
}

TEST(StepSize, SaturatesAtTheEnds) {
  BsoConfig cfg = BsoConfig::with_box(1, 0, 1);
  cfg.max_iter = 2000;
  cfg.slope = 20;
  EXPECT_NEAR(logsig(50), 1.0, 1e-20);
  EXPECT_NEAR(logsig(-50), 0.0, 1e-20);
  EXPECT_DOUBLE_EQ(logsig(0), 0.5);
  Rng a(6), b(6);
  const double xi0 = step_size(0, cfg, a);
  const double r = std::uniform_real_distribution<double>(
      std::nextafter(0.0, 1.0), 1.0)(b);
  EXPECT_NEAR(xi0, r, 1e-15);
  EXPECT_LT(step_size(2000, cfg, a), 1e-21);
}

TEST(Perturb, ZeroStepKeepsBase) {
  const BsoConfig cfg = BsoConfig::with_box(4, -1, 1);
  Rng rng(7);
  const Vector base = Vector::Constant(4, 0.25);
  const Solution s = perturb(base, 0.0, cfg, rng);
  EXPECT_EQ(s.position, base);
  EXPECT_EQ(s.fitness, kUnevaluated);
}

TEST(Perturb, ClampsToBounds) {
  const BsoConfig cfg = BsoConfig::with_box(4, -1, 1);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Solution s = perturb(Vector::Constant(4, 1.0), 5.0, cfg, rng);
    EXPECT_TRUE((s.position.array() <= 1.0).all());
    EXPECT_TRUE((s.position.array() >= -1.0).all());
  }
}

TEST(Perturb, ZeroMeanPerDimension) {
  const BsoConfig cfg = BsoConfig::with_box(3, -100, 100);
  Rng rng(9);
  const Vector base(Eigen::Vector3d(1.0, -2.0, 3.0));
  const double xi = 0.7;
  const int n = 10000;
  Vector sum = Vector::Zero(3);
  for (int i = 0; i < n; ++i) sum += perturb(base, xi, cfg, rng).position;
  const double sigma = xi / std::sqrt(static_cast<double>(n));
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(sum(d) / n, base(d), 3 * sigma);
}

TEST(Disrupt, ChangesOneCoordinateOrNothing) {
  BsoConfig cfg = BsoConfig::with_box(5, -2, 3);
  Rng rng(10);
  std::vector<Solution> members;
  for (int i = 0; i < 10; ++i) {
    Solution s;
    s.position = random_position(cfg, rng);
    s.fitness = i;
    s.evaluated_at = 0;
    members.push_back(s);
  }
  for (int trial = 0; trial < 200; ++trial) {
    Population pop = cluster_objective_space(members, 20.0);
    const std::vector<Solution> before = pop.flatten();
    const bool fired = disrupt(pop, cfg, rng);
    const std::vector<Solution> after = pop.flatten();
    int changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      for (int d = 0; d < 5; ++d) {
        if (before[i].position(d) != after[i].position(d)) {
          ++changed;
          EXPECT_GE(after[i].position(d), -2.0);
          EXPECT_LE(after[i].position(d), 3.0);
          EXPECT_EQ(after[i].evaluated_at, -1);
        }
      }
    }
    EXPECT_EQ(changed, fired ? 1 : 0);
  }
}

TEST(Disrupt, NeverFiresAtZeroProbability) {
  BsoConfig cfg = BsoConfig::with_box(2, 0, 1);
  cfg.disruption_prob = 0.0;
  Rng rng(11);
  Population pop = cluster_objective_space(with_fitness({1, 2, 3}), 34.0);
  EXPECT_FALSE(disrupt(pop, cfg, rng));
}

TEST(BsoConfig, ValidateNamesProblems) {
  BsoConfig cfg = BsoConfig::with_box(2, 0, 1);
  EXPECT_NO_THROW(cfg.validate());
  cfg.perc_e = 100;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = BsoConfig::with_box(2, 1, 0);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = BsoConfig::with_box(2, 0, 1);
  cfg.population_size = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = BsoConfig::with_box(2, 0, 1);
  cfg.slope = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SafeEvaluate, MapsFailuresToInfinity) {
  const Vector x = Vector::Zero(1);
  EXPECT_EQ(safe_evaluate([](const Vector&) -> double { throw std::runtime_error("x"); }, x),
            kUnevaluated);
  EXPECT_EQ(safe_evaluate([](const Vector&) { return std::nan(""); }, x), kUnevaluated);
  EXPECT_EQ(safe_evaluate([](const Vector&) { return 2.5; }, x), 2.5);
}

// Equal-budget uniform random search, used as the oracle BSO must beat.
double random_search(const Evaluator& f, const BsoConfig& cfg, std::size_t budget,
                     Rng& rng, Vector* where = nullptr) {
  double best = kUnevaluated;
  for (std::size_t i = 0; i < budget; ++i) {
    const Vector x = random_position(cfg, rng);
    const double v = f(x);
    if (v < best) {
      best = v;
      if (where) *where = x;
    }
  }
  return best;
}

TEST(Optimize, FindsPointAndBeatsRandomSearch) {
  BsoConfig cfg = BsoConfig::with_box(2, -5, 5);
  cfg.max_iter = 100;
  const Vector p(Eigen::Vector2d(1.3, -2.1));
  const Evaluator f = [&](const Vector& x) { return (x - p).norm(); };
  int close = 0, wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const OptimizeResult res = bso_os_optimize(f, cfg, rng);
    if ((res.best.position - p).norm() < 0.05) ++close;
    Rng rs(seed + 1000);
    if (res.best.fitness < random_search(f, cfg, res.evaluations, rs)) ++wins;
  }
  EXPECT_GE(close, 9);
  EXPECT_GE(wins, 9);
}

TEST(Optimize, BestHistoryNeverIncreases) {
  BsoConfig cfg = BsoConfig::with_box(3, -5, 5);
  cfg.max_iter = 200;
  Rng rng(12);
  const OptimizeResult res =
      bso_os_optimize([](const Vector& x) { return x.squaredNorm(); }, cfg, rng);
  ASSERT_EQ(res.best_history.size(), 200u);
  for (std::size_t i = 1; i < res.best_history.size(); ++i) {
    EXPECT_LE(res.best_history[i], res.best_history[i - 1]);
  }
  EXPECT_EQ(res.best.fitness, res.best_history.back());
}

TEST(Optimize, ConstantFitness) {
  BsoConfig cfg = BsoConfig::with_box(2, -1, 1);
  cfg.max_iter = 20;
  Rng rng(13);
  const OptimizeResult res = bso_os_optimize([](const Vector&) { return 4.0; }, cfg, rng);
  EXPECT_EQ(res.best.fitness, 4.0);
  EXPECT_TRUE((res.best.position.array().abs() <= 1.0).all());
}

TEST(Optimize, SingleIterationEvaluatesOnePass) {
  BsoConfig cfg = BsoConfig::with_box(2, -1, 1);
  cfg.max_iter = 1;
  Rng rng(14);
  const OptimizeResult res =
      bso_os_optimize([](const Vector& x) { return x.norm(); }, cfg, rng);
  EXPECT_EQ(res.evaluations, 2u * cfg.population_size);
  EXPECT_EQ(res.best_history.size(), 1u);
}

TEST(Optimize, GenerationalReplacementRuns) {
  BsoConfig cfg = BsoConfig::with_box(2, -5, 5);
  cfg.max_iter = 50;
  cfg.update_inside_loop = false;
  Rng rng(15);
  const OptimizeResult res =
      bso_os_optimize([](const Vector& x) { return x.norm(); }, cfg, rng);
  EXPECT_LT(res.best.fitness, 1.0);
}

class OnlineTuner : public ::testing::Test {
 protected:
  BsoConfig cfg_ = BsoConfig::with_box(2, -5, 5);
  Rng rng_{16};
  Evaluator sphere_ = [](const Vector& x) { return x.squaredNorm(); };
};

TEST_F(OnlineTuner, KeepsSizeAndPartition) {
  Population pop = initialize_population(sphere_, cfg_, 0, rng_);
  for (int t = 1; t < 300; ++t) {
    refresh_stalest(pop, sphere_, cfg_, t, 2);
    online_tuner_step(pop, sphere_, cfg_, t, rng_);
    ASSERT_EQ(pop.size(), static_cast<std::size_t>(cfg_.population_size));
    ASSERT_EQ(pop.elites.size(), elite_count(cfg_.population_size, cfg_.perc_e));
    expect_partition(pop);
  }
  EXPECT_LT(pop.best().fitness, 0.01);
}

TEST_F(OnlineTuner, WorseNewcomerChangesNothing) {
  Population pop = initialize_population(sphere_, cfg_, 0, rng_);
  const std::vector<Solution> before = pop.flatten();
  // Everything the evaluator sees from now on scores worse than any member.
  const Evaluator awful = [](const Vector&) { return 1e9; };
  online_tuner_step(pop, awful, cfg_, 1, rng_);
  const std::vector<Solution> after = pop.flatten();
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(after[i].position, before[i].position);
    EXPECT_EQ(after[i].fitness, before[i].fitness);
  }
}

TEST_F(OnlineTuner, RanksByEvaluatedFitness) {
  Population pop = initialize_population(sphere_, cfg_, 0, rng_);
  online_tuner_step(pop, sphere_, cfg_, 1, rng_);
  const std::vector<Solution> all = pop.flatten();
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_LE(sphere_(all[i - 1].position), sphere_(all[i].position));
  }
}

TEST_F(OnlineTuner, ZeroEvaluatorKeepsInvariants) {
  const Evaluator zero = [](const Vector&) { return 0.0; };
  Population pop = initialize_population(zero, cfg_, 0, rng_);
  for (int t = 1; t < 50; ++t) online_tuner_step(pop, zero, cfg_, t, rng_);
  EXPECT_EQ(pop.size(), static_cast<std::size_t>(cfg_.population_size));
  EXPECT_EQ(pop.best().fitness, 0.0);
}

TEST_F(OnlineTuner, RefreshTouchesTheStalest) {
  Population pop = initialize_population(sphere_, cfg_, 0, rng_);
  for (int t = 1; t <= 10; ++t) refresh_stalest(pop, sphere_, cfg_, t, 2);
  for (const auto& s : pop.flatten()) EXPECT_GE(s.evaluated_at, 1);
}

}  // namespace
}  // namespace swarmform::bso
