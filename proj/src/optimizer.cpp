#include "epec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "epec/error.hpp"
#include "epec/parallel.hpp"

namespace epec {

int DeConfig::population_size() const {
  if (population > 0) return population;
  return std::max(4, 10 * static_cast<int>(bounds.size()));
}

void DeConfig::validate() const {
  if (bounds.empty()) throw ValidationError("DeConfig: need at least one coordinate");
  for (const auto& b : bounds) {
    if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo <= b.hi))
      throw ValidationError("DeConfig: bounds need finite lo <= hi");
  }
  if (population_size() < 4) throw ValidationError("DeConfig: population must be >= 4");
  if (!(weight > 0.0 && weight <= 2.0)) throw ValidationError("DeConfig: weight F must be in (0, 2]");
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ValidationError("DeConfig: crossover CR must be in [0, 1]");
  if (max_generations < 0) throw ValidationError("DeConfig: max_generations must be >= 0");
  if (!(tolerance >= 0.0)) throw ValidationError("DeConfig: tolerance must be >= 0");
}

namespace {

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(n)));
}

}  // namespace

SearchResult minimize(const Objective& objective, const DeConfig& config) {
  config.validate();
  const std::size_t dim = config.bounds.size();
  const auto np = static_cast<std::size_t>(config.population_size());
  std::mt19937_64 rng(config.seed);

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& x : pop) {
    for (std::size_t d = 0; d < dim; ++d) {
      const auto& b = config.bounds[d];
      x[d] = b.lo + unit_uniform(rng()) * (b.hi - b.lo);
    }
  }
  std::vector<double> fit(np);
  parallel_for(np, config.workers, [&](std::size_t i) { fit[i] = safe_eval(objective, pop[i]); });

  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  };
  auto spread = [&] {
    auto [lo, hi] = std::minmax_element(fit.begin(), fit.end());
    return *hi - *lo;
  };

  SearchResult res;
  std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
  std::vector<double> trial_fit(np);
  int gen = 0;
  while (gen < config.max_generations && !(spread() < config.tolerance)) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t a, b, c;
      do a = pick(rng, np); while (a == i);
      do b = pick(rng, np); while (b == i || b == a);
      do c = pick(rng, np); while (c == i || c == a || c == b);
      const std::size_t forced = pick(rng, dim);
      for (std::size_t d = 0; d < dim; ++d) {
        const bool take = d == forced || unit_uniform(rng()) < config.crossover;
        double v = take ? pop[a][d] + config.weight * (pop[b][d] - pop[c][d]) : pop[i][d];
        trial[i][d] = std::clamp(v, config.bounds[d].lo, config.bounds[d].hi);
      }
    }
    parallel_for(np, config.workers, [&](std::size_t i) { trial_fit[i] = safe_eval(objective, trial[i]); });
    for (std::size_t i = 0; i < np; ++i) {
      if (trial_fit[i] <= fit[i]) {
        pop[i].swap(trial[i]);
        fit[i] = trial_fit[i];
      }
    }
    ++gen;
    res.history.push_back(fit[best_index()]);
  }

  const std::size_t best = best_index();
  res.best_x = pop[best];
  res.best_f = fit[best];
  res.generations_used = gen;
  return res;
}

SearchResult multi_start(const Objective& objective, const DeConfig& config, int n_starts) {
  if (n_starts < 1) throw ValidationError("multi_start: n_starts must be >= 1");
  config.validate();
  std::vector<SearchResult> runs(static_cast<std::size_t>(n_starts));
  const unsigned outer = resolve_workers(config.workers);
  parallel_for(runs.size(), outer, [&](std::size_t k) {
    DeConfig c = config;
    c.seed = k == 0 ? config.seed : derive_seed(config.seed, k);
    // Parallelism goes to whichever level has more work.
    c.workers = n_starts > 1 ? 1u : config.workers;
    runs[k] = minimize(objective, c);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].best_f < runs[best].best_f) best = k;
  return runs[best];
}

}  // namespace epec
