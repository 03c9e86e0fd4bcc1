#include "epec/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "epec/dispatch.hpp"
#include "epec/error.hpp"
#include "epec/format.hpp"
#include "epec/parallel.hpp"

namespace epec {

std::size_t Dataset::target_index(const std::string& name) const {
  for (std::size_t i = 0; i < target_names.size(); ++i)
    if (target_names[i] == name) return i;
  throw SchemaError("dataset has no target column '" + name + "'");
}

std::vector<double> Dataset::target_column(std::size_t target) const {
  std::vector<double> col;
  col.reserve(targets.size());
  for (const auto& row : targets) col.push_back(row.at(target));
  return col;
}

Buildout proportional_buildout(const Scenario& scenario, double total_mw) {
  const auto& bounds = scenario.sampling_bounds();
  double sum = 0.0;
  for (const auto& b : bounds) sum += b.hi;
  if (!(sum > 0.0)) throw ValidationError("proportional_buildout: sampling bounds have zero total");
  Buildout out;
  out.mw.reserve(bounds.size());
  for (const auto& b : bounds) out.mw.push_back(total_mw * b.hi / sum);
  return out;
}

std::vector<Buildout> sample_buildouts(std::size_t n, const std::vector<Interval>& bounds, std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample_buildouts: n must be > 0");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo <= b.hi && b.lo >= 0.0))
      throw ValidationError("sample_buildouts: bound " + std::to_string(i) + " must satisfy 0 <= lo <= hi");
  }
  std::vector<Buildout> out(n);
  for (std::size_t row = 0; row < n; ++row) {
    std::mt19937_64 rng(derive_seed(seed, row));
    auto& mw = out[row].mw;
    mw.resize(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const double u = unit_uniform(rng());
      mw[i] = bounds[i].lo == bounds[i].hi ? bounds[i].lo : bounds[i].lo + u * (bounds[i].hi - bounds[i].lo);
    }
  }
  return out;
}

Dataset generate_dataset(const Scenario& scenario, const std::vector<Buildout>& buildouts, unsigned workers) {
  if (buildouts.empty()) throw ValidationError("generate_dataset: no buildouts");
  Dataset ds;
  for (std::size_t s = 0; s < scenario.num_slots(); ++s) {
    ds.feature_names.push_back("k_" + scenario.slot_label(s));
    ds.target_names.push_back("profit_" + scenario.slot_label(s));
  }
  ds.inputs.resize(buildouts.size());
  ds.targets.resize(buildouts.size());
  parallel_for(buildouts.size(), workers, [&](std::size_t i) {
    try {
      ds.targets[i] = simulate(scenario, buildouts[i]).operational_profit;
    } catch (const Error& e) {
      throw ValidationError("generate_dataset: row " + std::to_string(i) + ": " + e.what());
    }
    ds.inputs[i] = buildouts[i].mw;
  });
  return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  bool first = true;
  for (const auto& n : ds.feature_names) {
    out << (first ? "" : ",") << n;
    first = false;
  }
  for (const auto& n : ds.target_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    first = true;
    for (double v : ds.inputs[i]) {
      out << (first ? "" : ",") << fmt_double(v);
      first = false;
    }
    for (double v : ds.targets[i]) out << ',' << fmt_double(v);
    out << '\n';
  }
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  write_dataset(ds, out);
  if (!out) throw IoError("error writing dataset " + path.string());
}

Dataset read_dataset(std::istream& in) {
  auto rows = read_csv(in);
  if (rows.empty()) throw SchemaError("dataset is empty: expected a header row");
  const auto& header = rows.front();

  Dataset ds;
  std::size_t nfeat = 0;
  while (nfeat < header.size() && header[nfeat].rfind("k_", 0) == 0) ds.feature_names.push_back(header[nfeat++]);
  if (nfeat == 0) throw SchemaError("dataset header has no k_<region>_<tech> feature columns");
  for (std::size_t c = nfeat; c < header.size(); ++c) {
    if (header[c].rfind("profit_", 0) != 0)
      throw SchemaError("dataset header column '" + header[c] + "' is neither k_* nor profit_*");
    ds.target_names.push_back(header[c]);
  }
  for (const auto& f : ds.feature_names) {
    const std::string want = "profit_" + f.substr(2);
    if (std::find(ds.target_names.begin(), ds.target_names.end(), want) == ds.target_names.end())
      throw SchemaError("dataset is missing target column '" + want + "'");
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw SchemaError("dataset line " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                        " fields, header has " + std::to_string(header.size()));
    std::vector<double> x, y;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double v = parse_double(row[c], "dataset line " + std::to_string(r + 1) + " column " + header[c]);
      (c < nfeat ? x : y).push_back(v);
    }
    ds.inputs.push_back(std::move(x));
    ds.targets.push_back(std::move(y));
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  try {
    return read_dataset(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ValidationError("train_test_split: test_fraction must be in [0, 1)");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(derive_seed(seed, 0x5917));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  const auto ntest = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ntest));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(ntest), idx.end());
  return s;
}

std::vector<std::vector<double>> select_rows(const std::vector<std::vector<double>>& m,
                                             const std::vector<std::size_t>& idx) {
  std::vector<std::vector<double>> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(m.at(i));
  return out;
}

std::vector<double> select(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v.at(i));
  return out;
}

}  // namespace epec
