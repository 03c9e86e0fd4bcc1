#include "epec/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "epec/dispatch.hpp"
#include "epec/error.hpp"
#include "epec/format.hpp"
#include "epec/parallel.hpp"

namespace epec {

std::vector<GencoStrategy> zero_strategies(const Scenario& scenario) {
  return std::vector<GencoStrategy>(scenario.num_gencos(),
                                    GencoStrategy{std::vector<double>(scenario.num_slots(), 0.0)});
}

namespace {

void check_profile(const Scenario& sc, const std::vector<GencoStrategy>& strategies) {
  if (strategies.size() != sc.num_gencos())
    throw ValidationError("strategy profile has " + std::to_string(strategies.size()) + " Gencos, scenario has " +
                          std::to_string(sc.num_gencos()));
  for (const auto& s : strategies) {
    if (s.invest.size() != sc.num_slots()) throw ValidationError("strategy has the wrong number of slots");
  }
}

}  // namespace

Buildout installed_capacity(const Scenario& sc, const std::vector<GencoStrategy>& strategies, std::size_t genco,
                            std::span<const double> invest) {
  check_profile(sc, strategies);
  if (invest.size() != sc.num_slots()) throw ValidationError("investment vector has the wrong number of slots");
  Buildout k = sc.existing_buildout();
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    const std::span<const double> x = j == genco ? invest : std::span<const double>(strategies[j].invest);
    for (std::size_t s = 0; s < k.mw.size(); ++s) k.mw[s] += x[s];
  }
  return k;
}

Buildout installed_capacity(const Scenario& sc, const std::vector<GencoStrategy>& strategies) {
  check_profile(sc, strategies);
  return installed_capacity(sc, strategies, 0, strategies.front().invest);
}

namespace {

// Sums share-weighted revenue and subtracts investment and fixed costs.
double genco_profit(const Scenario& sc, std::size_t genco, std::span<const double> invest, const Buildout& total,
                    std::span<const double> slot_revenue) {
  const auto& g = sc.gencos()[genco];
  double profit = 0.0;
  for (std::size_t s = 0; s < sc.num_slots(); ++s) {
    const double own = g.existing[s] + invest[s];
    if (total.mw[s] > 0.0) profit += slot_revenue[s] * own / total.mw[s];
    profit -= g.capex[s] * invest[s] + sc.technologies()[sc.tech_of(s)].fom * own;
  }
  return profit;
}

}  // namespace

double hybrid_profit(std::size_t genco, std::span<const double> invest, const std::vector<GencoStrategy>& strategies,
                     std::span<const GbtModel> models, const Scenario& sc) {
  if (models.size() != sc.num_slots()) throw ValidationError("hybrid_profit: need one model per slot");
  const Buildout total = installed_capacity(sc, strategies, genco, invest);
  std::vector<double> theta(sc.num_slots());
  for (std::size_t s = 0; s < theta.size(); ++s) theta[s] = predict(models[s], total.mw);
  return genco_profit(sc, genco, invest, total, theta);
}

double exact_profit(std::size_t genco, std::span<const double> invest, const std::vector<GencoStrategy>& strategies,
                    const Scenario& sc) {
  const Buildout total = installed_capacity(sc, strategies, genco, invest);
  const DispatchResult d = simulate(sc, total);
  return genco_profit(sc, genco, invest, total, d.operational_profit);
}

std::string to_string(EvaluatorKind kind) { return kind == EvaluatorKind::hybrid ? "hybrid" : "benchmark"; }

EvaluatorKind parse_evaluator_kind(const std::string& text) {
  if (text == "hybrid") return EvaluatorKind::hybrid;
  if (text == "benchmark") return EvaluatorKind::benchmark;
  throw ValidationError("unknown evaluator '" + text + "' (expected hybrid or benchmark)");
}

HybridEvaluator::HybridEvaluator(const Scenario& scenario, std::vector<GbtModel> models)
    : ProfitEvaluator(scenario), models_(std::move(models)) {
  if (models_.size() != scenario.num_slots())
    throw ValidationError("HybridEvaluator: got " + std::to_string(models_.size()) + " models for " +
                          std::to_string(scenario.num_slots()) + " slots");
  for (const auto& m : models_) {
    if (m.feature_names.size() != scenario.num_slots())
      throw ValidationError("HybridEvaluator: model '" + m.target_name + "' expects " +
                            std::to_string(m.feature_names.size()) + " inputs, scenario has " +
                            std::to_string(scenario.num_slots()) + " slots");
  }
}

std::vector<GbtModel> load_models(const Scenario& sc, const std::filesystem::path& dir) {
  std::vector<GbtModel> models;
  for (std::size_t s = 0; s < sc.num_slots(); ++s)
    models.push_back(load_model(dir / ("profit_" + sc.slot_label(s) + ".json")));
  return models;
}

BestResponse best_response(std::size_t genco, const std::vector<GencoStrategy>& strategies,
                           const ProfitEvaluator& evaluator, const DeConfig& de, int n_starts) {
  const Scenario& sc = evaluator.scenario();
  check_profile(sc, strategies);
  if (genco >= sc.num_gencos()) throw ValidationError("best_response: no such Genco");

  DeConfig cfg = de;
  cfg.bounds.clear();
  for (double lim : sc.gencos()[genco].invest_limit) cfg.bounds.push_back(Interval{0.0, lim});

  const Objective negated = [&](std::span<const double> x) { return -evaluator.profit(genco, x, strategies); };
  const SearchResult sr = multi_start(negated, cfg, n_starts);

  BestResponse br;
  br.incumbent_profit = evaluator.profit(genco, strategies[genco].invest, strategies);
  if (-sr.best_f > br.incumbent_profit) {
    br.strategy.invest = sr.best_x;
    br.profit = -sr.best_f;
  } else {
    br.strategy = strategies[genco];
    br.profit = br.incumbent_profit;
    br.kept_incumbent = true;
  }
  return br;
}

double EquilibriumResult::total_mw(const Scenario& scenario) const {
  return installed_capacity(scenario, strategies).total();
}

EquilibriumResult diagonalize(const ProfitEvaluator& evaluator, std::vector<GencoStrategy> initial,
                              const SolveConfig& config) {
  const Scenario& sc = evaluator.scenario();
  check_profile(sc, initial);
  if (!(config.epsilon > 0.0)) throw ValidationError("diagonalize: epsilon must be > 0");
  if (config.max_iterations < 1) throw ValidationError("diagonalize: max_iterations must be >= 1");
  for (std::size_t j = 0; j < initial.size(); ++j) {
    for (std::size_t s = 0; s < sc.num_slots(); ++s) {
      const double x = initial[j].invest[s];
      if (!(x >= 0.0 && x <= sc.gencos()[j].invest_limit[s]))
        throw ValidationError("diagonalize: initial strategy of " + sc.gencos()[j].name + " is out of bounds");
    }
  }

  EquilibriumResult res;
  res.strategies = std::move(initial);
  for (int n = 1; n <= config.max_iterations; ++n) {
    SweepRecord rec;
    for (std::size_t j = 0; j < sc.num_gencos(); ++j) {
      DeConfig de = config.de;
      de.seed = derive_seed(config.de.seed, j);
      BestResponse br = best_response(j, res.strategies, evaluator, de, config.n_starts);
      for (std::size_t s = 0; s < sc.num_slots(); ++s)
        rec.max_change = std::max(rec.max_change, std::abs(br.strategy.invest[s] - res.strategies[j].invest[s]));
      res.strategies[j] = std::move(br.strategy);
      rec.objective.push_back(br.profit);
    }
    rec.total_mw = res.total_mw(sc);
    res.trace.push_back(rec);
    res.iterations = n;
    if (rec.max_change < config.epsilon) {
      res.converged = true;
      break;
    }
  }
  return res;
}

NashReport verify_nash(const EquilibriumResult& result, const ProfitEvaluator& evaluator, double delta,
                       const SolveConfig& config) {
  const Scenario& sc = evaluator.scenario();
  check_profile(sc, result.strategies);
  NashReport rep;
  rep.certified = true;
  for (std::size_t j = 0; j < sc.num_gencos(); ++j) {
    DeConfig de = config.de;
    // A stream distinct from the one diagonalization used.
    de.seed = derive_seed(derive_seed(config.de.seed, 0x4e415348), j);
    const BestResponse br = best_response(j, result.strategies, evaluator, de, config.n_starts);
    const double gain = std::max(0.0, br.profit - br.incumbent_profit);
    const double rel = gain / std::max(std::abs(br.incumbent_profit), 1.0);
    rep.incumbent_profit.push_back(br.incumbent_profit);
    rep.best_profit.push_back(br.profit);
    rep.gain.push_back(gain);
    rep.relative_gain.push_back(rel);
    rep.max_relative_gain = std::max(rep.max_relative_gain, rel);
    if (rel > delta) rep.certified = false;
  }
  return rep;
}

void write_strategies_csv(std::ostream& out, const Scenario& sc, const std::vector<GencoStrategy>& strategies) {
  check_profile(sc, strategies);
  out << "genco,region,technology,existing_mw,invest_mw\n";
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    for (std::size_t s = 0; s < sc.num_slots(); ++s) {
      out << sc.gencos()[j].name << ',' << sc.regions()[sc.region_of(s)] << ','
          << sc.technologies()[sc.tech_of(s)].id << ',' << fmt_double(sc.gencos()[j].existing[s]) << ','
          << fmt_double(strategies[j].invest[s]) << '\n';
    }
  }
}

std::vector<GencoStrategy> read_strategies_csv(std::istream& in, const Scenario& sc) {
  auto rows = read_csv(in);
  const std::vector<std::string> header{"genco", "region", "technology", "existing_mw", "invest_mw"};
  if (rows.empty() || rows.front() != header)
    throw SchemaError("strategies CSV header must be 'genco,region,technology,existing_mw,invest_mw'");
  auto strategies = zero_strategies(sc);
  std::vector<std::vector<char>> seen(sc.num_gencos(), std::vector<char>(sc.num_slots(), 0));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "strategies CSV line " + std::to_string(i + 1);
    if (r.size() != header.size()) throw SchemaError(where + ": expected 5 fields");
    std::size_t j = 0, reg = 0, tech = 0;
    while (j < sc.num_gencos() && sc.gencos()[j].name != r[0]) ++j;
    while (reg < sc.num_regions() && sc.regions()[reg] != r[1]) ++reg;
    while (tech < sc.num_technologies() && sc.technologies()[tech].id != r[2]) ++tech;
    if (j == sc.num_gencos()) throw SchemaError(where + ": unknown Genco '" + r[0] + "'");
    if (reg == sc.num_regions()) throw SchemaError(where + ": unknown region '" + r[1] + "'");
    if (tech == sc.num_technologies()) throw SchemaError(where + ": unknown technology '" + r[2] + "'");
    const std::size_t s = sc.slot(reg, tech);
    const double x = parse_double(r[4], where + " invest_mw");
    if (!(x >= 0.0 && x <= sc.gencos()[j].invest_limit[s]))
      throw ValidationError(where + ": invest_mw outside [0, invest_limit]");
    strategies[j].invest[s] = x;
    seen[j][s] = 1;
  }
  for (std::size_t j = 0; j < sc.num_gencos(); ++j)
    for (std::size_t s = 0; s < sc.num_slots(); ++s)
      if (!seen[j][s])
        throw SchemaError("strategies CSV has no row for " + sc.gencos()[j].name + " " + sc.slot_label(s));
  return strategies;
}

void write_trace_csv(std::ostream& out, const Scenario& sc, const EquilibriumResult& result) {
  out << "iteration,total_mw,max_change";
  for (const auto& g : sc.gencos()) out << ",objective_" << g.name;
  out << '\n';
  for (std::size_t n = 0; n < result.trace.size(); ++n) {
    const auto& rec = result.trace[n];
    out << n + 1 << ',' << fmt_double(rec.total_mw) << ',' << fmt_double(rec.max_change);
    for (double v : rec.objective) out << ',' << fmt_double(v);
    out << '\n';
  }
}

}  // namespace epec
