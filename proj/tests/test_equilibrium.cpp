#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "case1.hpp"
#include "epec/dispatch.hpp"
#include "epec/equilibrium.hpp"
#include "epec/error.hpp"

using namespace epec;
using epec::testing::case1;

namespace {

Scenario case1_with(const std::string& gencos) {
  return load_scenario(R"({
    "technologies": [{"id": "ST", "marginal_cost": 2.0, "capex": 15.0, "invest_limit": 300},
                     {"id": "CT", "marginal_cost": 3.0, "capex": 9.9, "invest_limit": 200},
                     {"id": "CCGT", "marginal_cost": 4.0, "capex": 10.0, "invest_limit": 100}],
    "gencos": )" + gencos + R"(,
    "load": [1493, 1471, 1440, 1421, 1428, 1462, 1507, 1529, 1549, 1581, 1593, 1597],
    "voll": 1000})");
}

// Base score plus one stump on the first slot, so theta varies with the buildout.
std::vector<GbtModel> toy_models(std::size_t slots) {
  std::vector<GbtModel> models;
  for (std::size_t s = 0; s < slots; ++s) {
    GbtModel m;
    m.base_score = 1e5 * static_cast<double>(s + 1);
    m.learning_rate = 1.0;
    for (std::size_t f = 0; f < slots; ++f) m.feature_names.push_back("k" + std::to_string(f));
    Tree t;
    t.nodes = {TreeNode{0, 400.0, 1, 2, 0.0}, TreeNode{-1, 0, -1, -1, 5e4}, TreeNode{-1, 0, -1, -1, -3e4}};
    m.trees.push_back(t);
    models.push_back(m);
  }
  return models;
}

SolveConfig quick_config(std::uint64_t seed) {
  SolveConfig c;
  c.de.seed = seed;
  c.n_starts = 2;
  return c;
}

class OffsetEvaluator final : public ProfitEvaluator {
 public:
  OffsetEvaluator(const ProfitEvaluator& inner, double offset)
      : ProfitEvaluator(inner.scenario()), inner_(inner), offset_(offset) {}
  EvaluatorKind kind() const override { return inner_.kind(); }
  double profit(std::size_t genco, std::span<const double> invest,
                const std::vector<GencoStrategy>& strategies) const override {
    return inner_.profit(genco, invest, strategies) + offset_;
  }

 private:
  const ProfitEvaluator& inner_;
  double offset_;
};

const EquilibriumResult& benchmark_equilibrium() {
  static const EquilibriumResult r = [] {
    SolveConfig c;
    c.de.seed = 1;
    return diagonalize(BenchmarkEvaluator(case1()), zero_strategies(case1()), c);
  }();
  return r;
}

}  // namespace

TEST(HybridProfit, NoHoldingsNoProfit) {
  const Scenario& sc = case1();
  const auto models = toy_models(3);
  auto s = zero_strategies(sc);
  s[1].invest = {100, 50, 25};
  s[2].invest = {10, 0, 0};
  const std::vector<double> zero{0, 0, 0};
  EXPECT_EQ(hybrid_profit(0, zero, s, models, sc), 0.0);
}

TEST(HybridProfit, SoleOwnerTakesWholeTheta) {
  const Scenario sc = load_scenario(R"({
    "technologies": [{"id": "A", "marginal_cost": 1, "capex": 5, "fom": 0.5, "invest_limit": 100},
                     {"id": "B", "marginal_cost": 2, "capex": 7, "invest_limit": 100}],
    "gencos": [{"existing": {"A": 20}}], "load": [50], "voll": 100})");
  const auto models = toy_models(2);
  const std::vector<double> x{30, 60};
  const std::vector<double> k{50, 60};
  const double theta = predict(models[0], k) + predict(models[1], k);
  const double expected = theta - (5 * 30 + 7 * 60) - 0.5 * 50;
  EXPECT_DOUBLE_EQ(hybrid_profit(0, x, zero_strategies(sc), models, sc), expected);
}

TEST(HybridProfit, SharesSumToOne) {
  const Scenario sc = case1_with(R"([{"existing": {"ST": 40}}, {}, {"existing": {"CT": 15}}])");
  const auto models = toy_models(3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = zero_strategies(sc);
    for (auto& g : s) g.invest = {300 * u(rng), 200 * u(rng), trial % 4 == 0 ? 0.0 : 100 * u(rng)};
    const Buildout k = installed_capacity(sc, s);
    double sum = 0.0, costs = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      sum += hybrid_profit(j, s[j].invest, s, models, sc);
      for (std::size_t slot = 0; slot < 3; ++slot) costs += sc.gencos()[j].capex[slot] * s[j].invest[slot];
    }
    for (std::size_t slot = 0; slot < 3; ++slot)
      if (k.mw[slot] > 0.0) theta += predict(models[slot], k.mw);
    EXPECT_NEAR(sum + costs, theta, 1e-6 * std::abs(theta)) << "trial " << trial;
  }
}

TEST(HybridEvaluator, ChecksModels) {
  EXPECT_THROW(HybridEvaluator(case1(), toy_models(2)), ValidationError);
  auto models = toy_models(3);
  models[1].feature_names.pop_back();
  EXPECT_THROW(HybridEvaluator(case1(), models), ValidationError);
  EXPECT_NO_THROW(HybridEvaluator(case1(), toy_models(3)));
}

TEST(ExactProfit, SoleGencoSteamTurbine) {
  const Scenario sc = case1_with("1");
  const std::vector<double> x{300, 0, 0};
  EXPECT_DOUBLE_EQ(exact_profit(0, x, zero_strategies(sc), sc), 3'588'300.0);
  const std::vector<double> zero{0, 0, 0};
  EXPECT_EQ(exact_profit(0, zero, zero_strategies(sc), sc), 0.0);
}

TEST(ExactProfit, AccountingIdentity) {
  const Scenario sc = case1_with(R"([{"existing": {"ST": 40}}, {}, {"existing": {"CCGT": 15}}])");
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = zero_strategies(sc);
    for (auto& g : s) g.invest = {300 * u(rng), 200 * u(rng), 100 * u(rng)};
    double sum = 0.0, costs = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      sum += exact_profit(j, s[j].invest, s, sc);
      for (std::size_t slot = 0; slot < 3; ++slot) costs += sc.gencos()[j].capex[slot] * s[j].invest[slot];
    }
    const auto op = simulate(sc, installed_capacity(sc, s)).operational_profit;
    const double market = std::accumulate(op.begin(), op.end(), 0.0);
    EXPECT_NEAR(sum + costs, market, 1e-6) << "trial " << trial;
  }
}

TEST(BestResponse, EmptySystemBuildsToTheLimits) {
  const BenchmarkEvaluator ev(case1());
  DeConfig de;
  de.seed = 3;
  const BestResponse br = best_response(0, zero_strategies(case1()), ev, de, 2);
  EXPECT_NEAR(br.strategy.invest[0], 300, 1e-6);
  EXPECT_NEAR(br.strategy.invest[1], 200, 1e-6);
  EXPECT_NEAR(br.strategy.invest[2], 100, 1e-6);
  EXPECT_FALSE(br.kept_incumbent);
}

TEST(BestResponse, NewcomerAgainstMinLoadRivals) {
  // Rivals already hold 1,421 MW. A Genco with no holdings loses nothing
  // when the balanced period's price falls, so entering still pays.
  const Scenario sc = case1_with(R"([{}, {"existing": {"ST": 900, "CT": 403, "CCGT": 118}}])");
  const BenchmarkEvaluator ev(sc);
  DeConfig de;
  de.seed = 8;
  const BestResponse br = best_response(0, zero_strategies(sc), ev, de, 2);
  EXPECT_GT(br.profit, 0.0);
  EXPECT_GT(std::accumulate(br.strategy.invest.begin(), br.strategy.invest.end(), 0.0), 0.0);
}

TEST(BestResponse, IncumbentAtMinLoadStaysPut) {
  // Holding the capacity that balances the minimum-load period, adding more
  // gives up that period's scarcity rent on everything already owned.
  const Scenario sc = case1_with(R"([{"existing": {"ST": 600, "CT": 400, "CCGT": 200}}, {}])");
  auto s = zero_strategies(sc);
  s[0].invest = {221, 0, 0};
  const BenchmarkEvaluator ev(sc);
  DeConfig de;
  de.seed = 8;
  const BestResponse br = best_response(0, s, ev, de, 2);
  EXPECT_TRUE(br.kept_incumbent || br.profit - br.incumbent_profit < 1e-3 * std::abs(br.incumbent_profit));
}

TEST(BestResponse, ConstantOffsetKeepsArgmax) {
  const BenchmarkEvaluator ev(case1());
  const OffsetEvaluator shifted(ev, 1024.0);
  auto s = zero_strategies(case1());
  s[1].invest = {250, 100, 50};
  s[2].invest = {120, 30, 0};
  DeConfig de;
  de.seed = 21;
  const BestResponse a = best_response(0, s, ev, de, 2);
  const BestResponse b = best_response(0, s, shifted, de, 2);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.strategy.invest[k], b.strategy.invest[k], 1e-6);
}

TEST(Diagonalize, SingleGencoConvergesInTwoSweeps) {
  const Scenario sc = case1_with("1");
  const EquilibriumResult r = diagonalize(BenchmarkEvaluator(sc), zero_strategies(sc), quick_config(2));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  // Alone in the market, capacity above every load only lowers prices.
  EXPECT_LE(r.total_mw(sc), 600.0 + 1e-9);
}

TEST(Diagonalize, BenchmarkReachesMinLoad) {
  const EquilibriumResult& r = benchmark_equilibrium();
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.total_mw(case1()), 1421.0, 1.0);
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations));
  for (const auto& rec : r.trace) EXPECT_EQ(rec.objective.size(), 3u);
  EXPECT_NEAR(r.trace.back().total_mw, r.total_mw(case1()), 1e-9);
  EXPECT_LT(r.trace.back().max_change, 0.5);
  // First sweep: Gencos 1 and 2 build to the limits on an empty system.
  EXPECT_GE(r.trace.front().total_mw, 1200.0);
}

TEST(Diagonalize, Deterministic) {
  SolveConfig c;
  c.de.seed = 1;
  c.de.workers = 3;
  const EquilibriumResult r = diagonalize(BenchmarkEvaluator(case1()), zero_strategies(case1()), c);
  EXPECT_EQ(r.strategies, benchmark_equilibrium().strategies);
}

TEST(Diagonalize, RejectsBadInput) {
  const BenchmarkEvaluator ev(case1());
  SolveConfig c;
  c.epsilon = 0.0;
  EXPECT_THROW(diagonalize(ev, zero_strategies(case1()), c), ValidationError);
  auto s = zero_strategies(case1());
  s[0].invest[0] = 301;
  EXPECT_THROW(diagonalize(ev, s, SolveConfig{}), ValidationError);
  s.pop_back();
  EXPECT_THROW(diagonalize(ev, s, SolveConfig{}), ValidationError);
}

TEST(VerifyNash, BenchmarkEquilibriumCertified) {
  const NashReport rep = verify_nash(benchmark_equilibrium(), BenchmarkEvaluator(case1()), 1e-3, quick_config(1));
  EXPECT_TRUE(rep.certified);
  EXPECT_LE(rep.max_relative_gain, 1e-3);
}

TEST(VerifyNash, PerturbationDetected) {
  EquilibriumResult r = benchmark_equilibrium();
  // Pick a Genco with room for 50 MW more steam.
  std::size_t j = 0;
  while (j < 3 && r.strategies[j].invest[0] > 250.0) ++j;
  ASSERT_LT(j, 3u);
  r.strategies[j].invest[0] += 50.0;
  const BenchmarkEvaluator ev(case1());
  const NashReport rep = verify_nash(r, ev, 1e-3, quick_config(1));
  EXPECT_FALSE(rep.certified);
  EXPECT_GT(rep.relative_gain[j], 1e-3);
  EXPECT_GT(rep.gain[j], 0.0);
}

TEST(StrategiesCsv, RoundTripAndErrors) {
  const Scenario& sc = case1();
  std::ostringstream os;
  write_strategies_csv(os, sc, benchmark_equilibrium().strategies);
  std::istringstream in(os.str());
  EXPECT_EQ(read_strategies_csv(in, sc), benchmark_equilibrium().strategies);

  std::istringstream bad_header("g,r,t,e,x\n");
  EXPECT_THROW(read_strategies_csv(bad_header, sc), SchemaError);
  std::istringstream missing("genco,region,technology,existing_mw,invest_mw\nG1,sys,ST,0,1\n");
  EXPECT_THROW(read_strategies_csv(missing, sc), SchemaError);
  std::string over = os.str();
  over.replace(over.find("G1,sys,ST,0,"), 12, "G1,sys,ST,0,999999");
  std::istringstream out_of_bounds(over);
  EXPECT_THROW(read_strategies_csv(out_of_bounds, sc), ValidationError);
}

TEST(TraceCsv, OneRowPerSweep) {
  std::ostringstream os;
  write_trace_csv(os, case1(), benchmark_equilibrium());
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "iteration,total_mw,max_change,objective_G1,objective_G2,objective_G3");
  EXPECT_EQ(static_cast<int>(std::count(s.begin(), s.end(), '\n')), benchmark_equilibrium().iterations + 1);
}

TEST(EvaluatorKind, Parse) {
  EXPECT_EQ(parse_evaluator_kind("hybrid"), EvaluatorKind::hybrid);
  EXPECT_EQ(parse_evaluator_kind("benchmark"), EvaluatorKind::benchmark);
  EXPECT_THROW(parse_evaluator_kind("milp"), ValidationError);
}
