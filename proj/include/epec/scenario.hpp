#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epec {

struct Technology {
  std::string id;
  double marginal_cost = 0.0;  // money/MWh
  double capex = 0.0;          // money/MW, default for every Genco/region
  double fom = 0.0;            // money/MW
  double invest_limit = 0.0;   // MW per Genco, default for every region

  bool operator==(const Technology&) const = default;
};

struct LoadProfile {
  std::vector<double> demand;  // MW per period

  bool operator==(const LoadProfile&) const = default;
};

/// A closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
};

/// Per-Genco data, each vector indexed by Scenario::slot(region, tech).
struct Genco {
  std::string name;
  std::vector<double> existing;      // MW
  std::vector<double> capex;         // money/MW
  std::vector<double> invest_limit;  // MW

  bool operator==(const Genco&) const = default;
};

/// Installed capacity per (region, technology) slot, in MW.
struct Buildout {
  std::vector<double> mw;

  double total() const;
  bool operator==(const Buildout&) const = default;
};

/// The full game definition. Every per-(region, technology) quantity is
/// stored in a flat vector indexed by `slot(r, g) = r * num_technologies + g`;
/// a single-region system still carries one region id.
///
/// Instances are validated on construction and immutable afterwards.
class Scenario {
 public:
  Scenario(std::string name, std::vector<std::string> regions,
           std::vector<Technology> technologies, std::vector<Genco> gencos,
           std::vector<LoadProfile> loads, double voll,
           std::vector<Interval> sampling_bounds = {});

  const std::string& name() const { return name_; }
  const std::vector<std::string>& regions() const { return regions_; }
  const std::vector<Technology>& technologies() const { return technologies_; }
  const std::vector<Genco>& gencos() const { return gencos_; }
  /// One load profile per region, all with the same period count.
  const std::vector<LoadProfile>& loads() const { return loads_; }
  double voll() const { return voll_; }

  std::size_t num_regions() const { return regions_.size(); }
  std::size_t num_technologies() const { return technologies_.size(); }
  std::size_t num_gencos() const { return gencos_.size(); }
  std::size_t num_periods() const { return loads_.front().demand.size(); }
  std::size_t num_slots() const { return regions_.size() * technologies_.size(); }

  std::size_t slot(std::size_t region, std::size_t tech) const {
    return region * technologies_.size() + tech;
  }
  std::size_t region_of(std::size_t slot) const { return slot / technologies_.size(); }
  std::size_t tech_of(std::size_t slot) const { return slot % technologies_.size(); }
  /// "<region>_<tech>", used for CSV column names and model file names.
  std::string slot_label(std::size_t slot) const;

  double max_marginal_cost() const;

  /// Explicit bounds from the config if present, else
  /// [0, sum_j K^max_j + sum_j K^0_j] per slot.
  const std::vector<Interval>& sampling_bounds() const { return sampling_bounds_; }
  bool has_explicit_sampling_bounds() const { return explicit_bounds_; }

  /// Sum of every Genco's existing capacity.
  Buildout existing_buildout() const;

  bool operator==(const Scenario&) const = default;

 private:
  void validate() const;

  std::string name_;
  std::vector<std::string> regions_;
  std::vector<Technology> technologies_;
  std::vector<Genco> gencos_;
  std::vector<LoadProfile> loads_;
  double voll_ = 0.0;
  std::vector<Interval> sampling_bounds_;
  bool explicit_bounds_ = false;
};

/// Parses a JSON scenario config. Throws ParseError (with line and column)
/// on malformed text or missing fields, ValidationError on invariant
/// violations.
Scenario load_scenario(std::string_view config_text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Serializes to the same config format in canonical form (MW units, every
/// per-slot value explicit). `load_scenario(to_config_text(s)) == s`.
std::string to_config_text(const Scenario& scenario);

/// Elementwise sum of per-Genco capacity vectors. Throws ValidationError on
/// mismatched lengths or negative entries.
Buildout total_buildout(std::span<const Buildout> strategies);

}  // namespace epec
