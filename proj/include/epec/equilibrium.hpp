#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epec/optimizer.hpp"
#include "epec/scenario.hpp"
#include "epec/surrogate.hpp"

namespace epec {

/// New investment of one Genco per slot, in MW, within [0, invest_limit].
struct GencoStrategy {
  std::vector<double> invest;

  bool operator==(const GencoStrategy&) const = default;
};

std::vector<GencoStrategy> zero_strategies(const Scenario& scenario);

/// Total installed capacity per slot: every Genco's existing plus invested
/// capacity, with Genco `genco` playing `invest` instead of its entry in
/// `strategies`.
Buildout installed_capacity(const Scenario& scenario, const std::vector<GencoStrategy>& strategies,
                            std::size_t genco, std::span<const double> invest);
Buildout installed_capacity(const Scenario& scenario, const std::vector<GencoStrategy>& strategies);

/// Profit with market revenue predicted by one surrogate per slot:
///   sum_s [ theta_s(K) * own_s / K_s - capex_js * x_s - fom_s * own_s ],
/// own_s = existing_js + x_s. A slot with K_s = 0 contributes no revenue.
double hybrid_profit(std::size_t genco, std::span<const double> invest, const std::vector<GencoStrategy>& strategies,
                     std::span<const GbtModel> models, const Scenario& scenario);

/// Profit with revenue from exact dispatch of the total buildout: each
/// slot's operational profit is shared pro rata by installed capacity.
double exact_profit(std::size_t genco, std::span<const double> invest, const std::vector<GencoStrategy>& strategies,
                    const Scenario& scenario);

enum class EvaluatorKind { hybrid, benchmark };

std::string to_string(EvaluatorKind kind);
EvaluatorKind parse_evaluator_kind(const std::string& text);

/// A Genco's upper-level objective given everybody else's strategy.
/// Implementations are immutable and safe to call concurrently.
class ProfitEvaluator {
 public:
  explicit ProfitEvaluator(const Scenario& scenario) : scenario_(scenario) {}
  virtual ~ProfitEvaluator() = default;

  virtual EvaluatorKind kind() const = 0;
  virtual double profit(std::size_t genco, std::span<const double> invest,
                        const std::vector<GencoStrategy>& strategies) const = 0;

  const Scenario& scenario() const { return scenario_; }

 private:
  const Scenario& scenario_;
};

class BenchmarkEvaluator final : public ProfitEvaluator {
 public:
  using ProfitEvaluator::ProfitEvaluator;
  EvaluatorKind kind() const override { return EvaluatorKind::benchmark; }
  double profit(std::size_t genco, std::span<const double> invest,
                const std::vector<GencoStrategy>& strategies) const override {
    return exact_profit(genco, invest, strategies, scenario());
  }
};

class HybridEvaluator final : public ProfitEvaluator {
 public:
  /// One model per slot, in slot order. Throws ValidationError if a model's
  /// input width differs from the slot count.
  HybridEvaluator(const Scenario& scenario, std::vector<GbtModel> models);
  EvaluatorKind kind() const override { return EvaluatorKind::hybrid; }
  double profit(std::size_t genco, std::span<const double> invest,
                const std::vector<GencoStrategy>& strategies) const override {
    return hybrid_profit(genco, invest, strategies, models_, scenario());
  }
  const std::vector<GbtModel>& models() const { return models_; }

 private:
  std::vector<GbtModel> models_;
};

/// Loads `<dir>/profit_<region>_<tech>.json` for every slot.
std::vector<GbtModel> load_models(const Scenario& scenario, const std::filesystem::path& dir);

/// Settings shared by best responses inside diagonalization and Nash checks.
struct SolveConfig {
  DeConfig de;        // bounds and seed are filled in per Genco
  int n_starts = 4;
  double epsilon = 0.5;  // MW
  int max_iterations = 20;
};

struct BestResponse {
  GencoStrategy strategy;
  double profit = 0.0;
  double incumbent_profit = 0.0;
  bool kept_incumbent = false;
};

/// Multi-start DE maximization of the evaluator over [0, invest_limit] per
/// slot, the others held at `strategies`. The current strategy of `genco`
/// is returned unchanged when the search does not strictly beat it.
BestResponse best_response(std::size_t genco, const std::vector<GencoStrategy>& strategies,
                           const ProfitEvaluator& evaluator, const DeConfig& de, int n_starts);

struct SweepRecord {
  std::vector<double> objective;  // profit each Genco obtained at its solve
  double total_mw = 0.0;          // installed capacity after the sweep
  double max_change = 0.0;        // largest per-coordinate move in the sweep
};

struct EquilibriumResult {
  std::vector<GencoStrategy> strategies;
  bool converged = false;
  int iterations = 0;
  std::vector<SweepRecord> trace;

  double total_mw(const Scenario& scenario) const;
};

/// Gauss-Seidel best-response iteration in Genco order. Converged when no
/// coordinate moves by epsilon or more within a sweep; otherwise reported
/// as not converged after max_iterations sweeps. Each Genco's DE seed is
/// derived from (de.seed, genco) only, so a Genco facing unchanged rivals
/// reproduces its previous answer.
EquilibriumResult diagonalize(const ProfitEvaluator& evaluator, std::vector<GencoStrategy> initial,
                              const SolveConfig& config);

struct NashReport {
  std::vector<double> incumbent_profit;
  std::vector<double> best_profit;
  std::vector<double> gain;           // best - incumbent, >= 0
  std::vector<double> relative_gain;  // gain / max(|incumbent|, 1)
  double max_relative_gain = 0.0;
  bool certified = false;
};

/// Recomputes every Genco's best response against the reported profile;
/// certified when no relative gain exceeds `delta`.
NashReport verify_nash(const EquilibriumResult& result, const ProfitEvaluator& evaluator, double delta,
                       const SolveConfig& config);

/// CSV: genco,region,technology,existing_mw,invest_mw
void write_strategies_csv(std::ostream& out, const Scenario& scenario, const std::vector<GencoStrategy>& strategies);
std::vector<GencoStrategy> read_strategies_csv(std::istream& in, const Scenario& scenario);
/// CSV: iteration,total_mw,max_change,objective_<genco>...
void write_trace_csv(std::ostream& out, const Scenario& scenario, const EquilibriumResult& result);

}  // namespace epec
