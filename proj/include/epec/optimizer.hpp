#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "epec/scenario.hpp"

namespace epec {

using Objective = std::function<double(std::span<const double>)>;

/// Differential evolution settings (DE/rand/1/bin).
struct DeConfig {
  std::vector<Interval> bounds;
  int population = 0;  // 0 -> 10 * dimension (at least 4)
  double weight = 0.8;
  double crossover = 0.9;
  int max_generations = 1000;
  double tolerance = 1e-8;  // stop when max f - min f over the population falls below this
  std::uint64_t seed = 0;
  unsigned workers = 1;  // parallel objective evaluations per generation

  int population_size() const;
  void validate() const;
};

struct SearchResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  int generations_used = 0;
  std::vector<double> history;  // best f after each generation

  bool operator==(const SearchResult&) const = default;
};

/// Minimizes `objective` over the box with DE/rand/1/bin: mutant
/// a + F (b - c) from three distinct members other than the target, binomial
/// crossover with one forced coordinate, trial coordinates clipped to the
/// box, greedy one-to-one selection.
///
/// All random draws for a generation happen before its evaluations, so the
/// result does not depend on `workers`. With workers > 1 the objective must
/// be safe to call concurrently.
SearchResult minimize(const Objective& objective, const DeConfig& config);

/// Runs `n_starts` independent minimizations and keeps the best (ties go to
/// the earlier start). Start 0 uses config.seed, so n_starts = 1 is exactly
/// minimize(). Starts run on config.workers threads.
SearchResult multi_start(const Objective& objective, const DeConfig& config, int n_starts);

}  // namespace epec
