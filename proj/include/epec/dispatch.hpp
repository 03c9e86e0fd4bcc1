#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "epec/scenario.hpp"

namespace epec {

struct PeriodResult {
  std::vector<double> quantities;  // MW per technology, declaration order
  double unmet = 0.0;              // MW
  double price = 0.0;              // money/MWh, dual of the balance row
};

struct DispatchResult {
  /// periods[r][t]
  std::vector<std::vector<PeriodResult>> periods;
  /// Sum over periods of (price - marginal_cost) * quantity, per slot.
  std::vector<double> operational_profit;

  /// Sum over regions and periods of price * served demand.
  double total_payout() const;
};

/// Clears one period of the single-node economic dispatch by merit order.
///
/// Technologies are stacked in ascending marginal cost (ties by declaration
/// order) until demand is met; any remainder is unmet at `voll`.
///
/// Capacity and demand within a relative 1e-9 of each other count as an
/// exact balance.
///
/// Price conventions:
///  - shortage (unmet > 0): voll;
///  - demand exactly equal to total capacity with no headroom left: voll,
///    the upper end of the dual interval;
///  - otherwise the cost of the last dispatched technology if it has slack,
///    else the cost of the cheapest technology with headroom.
PeriodResult clear_period(std::span<const double> capacities, double demand,
                          std::span<const double> costs, double voll);

/// Objective of the per-period dispatch LP for a cleared result.
double dispatch_cost(const PeriodResult& result, std::span<const double> costs, double voll);

/// Runs clear_period for every region and period of `scenario` with the
/// given installed capacity.
DispatchResult simulate(const Scenario& scenario, const Buildout& buildout);

/// CSV dump: region, period, demand, price, unmet, q_<tech>...
void write_dispatch_csv(std::ostream& out, const Scenario& scenario, const DispatchResult& result);

}  // namespace epec
