#include "epec/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "epec/error.hpp"
#include "epec/format.hpp"

namespace epec {

double DispatchResult::total_payout() const {
  double payout = 0.0;
  for (const auto& region : periods) {
    for (const auto& p : region) {
      const double served = std::accumulate(p.quantities.begin(), p.quantities.end(), 0.0);
      payout += p.price * served;
    }
  }
  return payout;
}

PeriodResult clear_period(std::span<const double> capacities, double demand,
                          std::span<const double> costs, double voll) {
  if (capacities.size() != costs.size())
    throw ValidationError("clear_period: capacities and costs differ in length");
  const std::size_t n = costs.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

  // Capacity within tol of demand counts as an exact balance, so buildouts
  // assembled from fractional shares clear like their exact sums.
  const double tol = 1e-9 * std::max(1.0, std::abs(demand));
  PeriodResult res;
  res.quantities.assign(n, 0.0);
  double remaining = demand;
  std::ptrdiff_t last = -1;  // merit-order position of the last unit with output
  for (std::size_t k = 0; k < n && remaining > 0.0; ++k) {
    const std::size_t g = order[k];
    const double q = std::min(std::max(capacities[g], 0.0), remaining);
    if (q <= 0.0) continue;
    res.quantities[g] = q;
    remaining -= q;
    last = static_cast<std::ptrdiff_t>(k);
  }

  if (remaining > tol) {
    res.unmet = remaining;
    res.price = voll;
    return res;
  }
  if (remaining > 0.0) {
    res.price = voll;
    return res;
  }

  if (last >= 0) {
    const std::size_t g = order[static_cast<std::size_t>(last)];
    if (res.quantities[g] + tol < capacities[g]) {
      res.price = costs[g];
      return res;
    }
  }
  // The marginal unit is at its limit: the next MW comes from the cheapest
  // technology that still has headroom, or from unmet demand if none does.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = order[k];
    if (res.quantities[g] + tol < capacities[g]) {
      res.price = costs[g];
      return res;
    }
  }
  res.price = voll;
  return res;
}

double dispatch_cost(const PeriodResult& result, std::span<const double> costs, double voll) {
  double c = voll * result.unmet;
  for (std::size_t g = 0; g < costs.size(); ++g) c += costs[g] * result.quantities[g];
  return c;
}

DispatchResult simulate(const Scenario& scenario, const Buildout& buildout) {
  if (buildout.mw.size() != scenario.num_slots())
    throw ValidationError("simulate: buildout has " + std::to_string(buildout.mw.size()) +
                          " entries, scenario has " + std::to_string(scenario.num_slots()) + " slots");
  for (double v : buildout.mw) {
    if (!(v >= 0.0)) throw ValidationError("simulate: buildout entries must be >= 0");
  }
  const std::size_t ntech = scenario.num_technologies();
  std::vector<double> costs(ntech);
  for (std::size_t g = 0; g < ntech; ++g) costs[g] = scenario.technologies()[g].marginal_cost;

  DispatchResult out;
  out.operational_profit.assign(scenario.num_slots(), 0.0);
  out.periods.resize(scenario.num_regions());
  for (std::size_t r = 0; r < scenario.num_regions(); ++r) {
    std::span<const double> caps(buildout.mw.data() + r * ntech, ntech);
    const auto& demand = scenario.loads()[r].demand;
    out.periods[r].reserve(demand.size());
    for (double d : demand) {
      PeriodResult p = clear_period(caps, d, costs, scenario.voll());
      for (std::size_t g = 0; g < ntech; ++g)
        out.operational_profit[scenario.slot(r, g)] += (p.price - costs[g]) * p.quantities[g];
      out.periods[r].push_back(std::move(p));
    }
  }
  return out;
}

void write_dispatch_csv(std::ostream& out, const Scenario& scenario, const DispatchResult& result) {
  out << "region,period,demand,price,unmet";
  for (const auto& t : scenario.technologies()) out << ",q_" << t.id;
  out << '\n';
  for (std::size_t r = 0; r < result.periods.size(); ++r) {
    for (std::size_t t = 0; t < result.periods[r].size(); ++t) {
      const auto& p = result.periods[r][t];
      out << scenario.regions()[r] << ',' << t + 1 << ',' << fmt_double(scenario.loads()[r].demand[t])
          << ',' << fmt_double(p.price) << ',' << fmt_double(p.unmet);
      for (double q : p.quantities) out << ',' << fmt_double(q);
      out << '\n';
    }
  }
}

}  // namespace epec
