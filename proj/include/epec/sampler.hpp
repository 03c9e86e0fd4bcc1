#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "epec/scenario.hpp"

namespace epec {

/// Training data: one row per sampled buildout.
struct Dataset {
  std::vector<std::string> feature_names;  // k_<region>_<tech>
  std::vector<std::string> target_names;   // profit_<region>_<tech>
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t rows() const { return inputs.size(); }
  std::size_t target_index(const std::string& name) const;
  /// Column `target` of targets as a vector.
  std::vector<double> target_column(std::size_t target) const;

  bool operator==(const Dataset&) const = default;
};

/// n buildouts with each coordinate drawn independently and uniformly from
/// its interval. Row i draws from its own stream derived from (seed, i), so
/// the result is independent of how rows are later distributed to workers.
std::vector<Buildout> sample_buildouts(std::size_t n, const std::vector<Interval>& bounds, std::uint64_t seed);

/// A buildout totalling `total_mw`, split across slots in proportion to the
/// upper sampling bounds. Used for payout-versus-capacity sweeps.
Buildout proportional_buildout(const Scenario& scenario, double total_mw);

/// Simulates every buildout; targets are per-slot operational profit.
/// `workers` = 0 defers to resolve_workers(). Output is identical for any
/// worker count.
Dataset generate_dataset(const Scenario& scenario, const std::vector<Buildout>& buildouts,
                         unsigned workers = 1);

void write_dataset(const Dataset& ds, std::ostream& out);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

/// Deterministic shuffle of row indices split into (train, test), with
/// round(test_fraction * n) test rows.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed);

/// Rows `idx` of a matrix.
std::vector<std::vector<double>> select_rows(const std::vector<std::vector<double>>& m,
                                             const std::vector<std::size_t>& idx);
std::vector<double> select(const std::vector<double>& v, const std::vector<std::size_t>& idx);

}  // namespace epec
