#include "epec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "epec/error.hpp"
#include "json.hpp"

namespace epec {

using nlohmann::json;

double Buildout::total() const {
  double sum = 0.0;
  for (double v : mw) sum += v;
  return sum;
}

Scenario::Scenario(std::string name, std::vector<std::string> regions,
                   std::vector<Technology> technologies, std::vector<Genco> gencos,
                   std::vector<LoadProfile> loads, double voll,
                   std::vector<Interval> sampling_bounds)
    : name_(std::move(name)),
      regions_(std::move(regions)),
      technologies_(std::move(technologies)),
      gencos_(std::move(gencos)),
      loads_(std::move(loads)),
      voll_(voll),
      sampling_bounds_(std::move(sampling_bounds)) {
  validate();
  explicit_bounds_ = !sampling_bounds_.empty();
  if (!explicit_bounds_) {
    sampling_bounds_.assign(num_slots(), Interval{});
    for (const auto& g : gencos_) {
      for (std::size_t s = 0; s < num_slots(); ++s) {
        sampling_bounds_[s].hi += g.invest_limit[s] + g.existing[s];
      }
    }
  }
}

std::string Scenario::slot_label(std::size_t s) const {
  return regions_[region_of(s)] + "_" + technologies_[tech_of(s)].id;
}

double Scenario::max_marginal_cost() const {
  double m = 0.0;
  for (const auto& t : technologies_) m = std::max(m, t.marginal_cost);
  return m;
}

Buildout Scenario::existing_buildout() const {
  Buildout b{std::vector<double>(num_slots(), 0.0)};
  for (const auto& g : gencos_) {
    for (std::size_t s = 0; s < num_slots(); ++s) b.mw[s] += g.existing[s];
  }
  return b;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void Scenario::validate() const {
  if (regions_.empty()) invalid("scenario needs at least one region");
  if (technologies_.empty()) invalid("scenario needs at least one technology");
  if (gencos_.empty()) invalid("genco count must be >= 1");
  {
    auto sorted = regions_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      invalid("region ids must be unique");
  }
  std::map<std::string, int> seen;
  for (const auto& t : technologies_) {
    if (t.id.empty()) invalid("technology id must be non-empty");
    if (seen[t.id]++) invalid("duplicate technology id '" + t.id + "'");
    if (!finite_nonneg(t.marginal_cost))
      invalid("technology '" + t.id + "': marginal_cost must be >= 0");
    if (!finite_nonneg(t.capex)) invalid("technology '" + t.id + "': capex must be >= 0");
    if (!finite_nonneg(t.fom)) invalid("technology '" + t.id + "': fom must be >= 0");
    if (!(std::isfinite(t.invest_limit) && t.invest_limit > 0.0))
      invalid("technology '" + t.id + "': invest_limit must be > 0");
  }
  const std::size_t slots = num_slots();
  for (const auto& g : gencos_) {
    if (g.existing.size() != slots || g.capex.size() != slots || g.invest_limit.size() != slots)
      invalid("genco '" + g.name + "': per-slot vectors must have one entry per (region, technology)");
    for (std::size_t s = 0; s < slots; ++s) {
      if (!finite_nonneg(g.existing[s]))
        invalid("genco '" + g.name + "': existing capacity must be >= 0");
      if (!finite_nonneg(g.capex[s])) invalid("genco '" + g.name + "': capex must be >= 0");
      if (!(std::isfinite(g.invest_limit[s]) && g.invest_limit[s] > 0.0))
        invalid("genco '" + g.name + "': invest_limit must be > 0");
    }
  }
  if (loads_.size() != regions_.size()) invalid("need one load profile per region");
  for (const auto& l : loads_) {
    if (l.demand.empty()) invalid("load profile needs at least one period");
    if (l.demand.size() != loads_.front().demand.size())
      invalid("all regions must have the same number of load periods");
    for (double d : l.demand) {
      if (!(std::isfinite(d) && d > 0.0)) invalid("every load D_t must be > 0");
    }
  }
  if (!(std::isfinite(voll_) && voll_ > max_marginal_cost()))
    invalid("voll (" + std::to_string(voll_) + ") must exceed the highest marginal cost (" +
            std::to_string(max_marginal_cost()) + ")");
  if (!sampling_bounds_.empty()) {
    if (sampling_bounds_.size() != slots) invalid("sampling_bounds must cover every slot");
    for (const auto& b : sampling_bounds_) {
      if (!(finite_nonneg(b.lo) && std::isfinite(b.hi) && b.lo <= b.hi))
        invalid("sampling bounds need 0 <= lo <= hi");
    }
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string line_context(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1, line_start = 0;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
      line_start = i + 1;
    } else {
      ++col;
    }
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string_view::npos) line_end = text.size();
  std::ostringstream os;
  os << "line " << line << ", column " << col << ": `"
     << text.substr(line_start, line_end - line_start) << "`";
  return os.str();
}

[[noreturn]] void missing(const std::string& path) {
  throw ParseError("scenario config: missing required field '" + path + "'");
}

double number_at(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) missing(path + key);
  if (!it->is_number()) throw ParseError("scenario config: '" + path + key + "' must be a number");
  return it->get<double>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError("scenario config: '" + path + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError("scenario config: '" + path + "' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

double power_unit_factor(const std::string& unit) {
  if (unit == "MW") return 1.0;
  if (unit == "GW") return 1000.0;
  if (unit == "kW") return 0.001;
  throw ParseError("scenario config: unknown power_unit '" + unit + "' (expected kW, MW or GW)");
}

struct SlotIndex {
  const std::vector<std::string>& regions;
  const std::vector<Technology>& techs;

  std::size_t tech(const std::string& id, const std::string& path) const {
    for (std::size_t g = 0; g < techs.size(); ++g)
      if (techs[g].id == id) return g;
    throw ParseError("scenario config: '" + path + "' names unknown technology '" + id + "'");
  }
  std::size_t region(const std::string& id, const std::string& path) const {
    for (std::size_t r = 0; r < regions.size(); ++r)
      if (regions[r] == id) return r;
    throw ParseError("scenario config: '" + path + "' names unknown region '" + id + "'");
  }
  bool is_region(const std::string& id) const {
    return std::find(regions.begin(), regions.end(), id) != regions.end();
  }
};

// A per-slot map is either {tech: value}, applied to every region, or
// {region: {tech: value}}. `apply` receives (slot, json value).
template <typename F>
void for_each_slot_entry(const json& j, const SlotIndex& idx, const std::string& path, F&& apply) {
  if (!j.is_object()) throw ParseError("scenario config: '" + path + "' must be an object");
  const std::size_t ntech = idx.techs.size();
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() && idx.is_region(key)) {
      std::size_t r = idx.region(key, path);
      for (const auto& [tkey, tval] : value.items()) {
        apply(r * ntech + idx.tech(tkey, path + "." + key), tval, path + "." + key + "." + tkey);
      }
    } else {
      std::size_t g = idx.tech(key, path);
      for (std::size_t r = 0; r < idx.regions.size(); ++r) apply(r * ntech + g, value, path + "." + key);
    }
  }
}

void fill_slot_numbers(const json& j, const SlotIndex& idx, const std::string& path,
                       std::vector<double>& out, double scale) {
  for_each_slot_entry(j, idx, path, [&](std::size_t s, const json& v, const std::string& p) {
    if (!v.is_number()) throw ParseError("scenario config: '" + p + "' must be a number");
    out[s] = v.get<double>() * scale;
  });
}

Scenario from_json(const json& root) {
  if (!root.is_object()) throw ParseError("scenario config: top level must be an object");
  const double unit = power_unit_factor(root.value("power_unit", std::string("MW")));
  // Money amounts are quoted per power unit; convert to per-MW.
  const double per_unit = 1.0 / unit;

  std::string name = root.value("name", std::string("scenario"));

  std::vector<std::string> regions;
  if (auto it = root.find("regions"); it != root.end()) {
    if (!it->is_array()) throw ParseError("scenario config: 'regions' must be an array of ids");
    for (const auto& r : *it) {
      if (!r.is_string()) throw ParseError("scenario config: 'regions' entries must be strings");
      regions.push_back(r.get<std::string>());
    }
  } else {
    regions.push_back("sys");
  }

  auto tit = root.find("technologies");
  if (tit == root.end()) missing("technologies");
  if (!tit->is_array()) throw ParseError("scenario config: 'technologies' must be an array");
  std::vector<Technology> techs;
  for (std::size_t i = 0; i < tit->size(); ++i) {
    const json& t = (*tit)[i];
    const std::string path = "technologies[" + std::to_string(i) + "].";
    if (!t.is_object()) throw ParseError("scenario config: '" + path + "' must be an object");
    Technology tech;
    if (!t.contains("id") || !t["id"].is_string()) missing(path + "id");
    tech.id = t["id"].get<std::string>();
    tech.marginal_cost = number_at(t, "marginal_cost", path) * per_unit;
    tech.capex = number_at(t, "capex", path) * per_unit;
    tech.fom = (t.contains("fom") ? number_at(t, "fom", path) : 0.0) * per_unit;
    tech.invest_limit = number_at(t, "invest_limit", path) * unit;
    techs.push_back(std::move(tech));
  }
  const SlotIndex idx{regions, techs};
  const std::size_t slots = regions.size() * techs.size();

  auto make_genco = [&](std::string gname) {
    Genco g;
    g.name = std::move(gname);
    g.existing.assign(slots, 0.0);
    g.capex.resize(slots);
    g.invest_limit.resize(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      g.capex[s] = techs[s % techs.size()].capex;
      g.invest_limit[s] = techs[s % techs.size()].invest_limit;
    }
    return g;
  };

  auto git = root.find("gencos");
  if (git == root.end()) missing("gencos");
  std::vector<Genco> gencos;
  if (git->is_number_integer()) {
    const auto n = git->get<long long>();
    if (n < 1) throw ValidationError("genco count must be >= 1");
    for (long long j = 0; j < n; ++j) gencos.push_back(make_genco("G" + std::to_string(j + 1)));
  } else if (git->is_array()) {
    for (std::size_t j = 0; j < git->size(); ++j) {
      const json& gj = (*git)[j];
      const std::string path = "gencos[" + std::to_string(j) + "]";
      if (!gj.is_object()) throw ParseError("scenario config: '" + path + "' must be an object");
      Genco g = make_genco(gj.value("name", "G" + std::to_string(j + 1)));
      if (gj.contains("existing")) fill_slot_numbers(gj["existing"], idx, path + ".existing", g.existing, unit);
      if (gj.contains("capex")) fill_slot_numbers(gj["capex"], idx, path + ".capex", g.capex, per_unit);
      if (gj.contains("invest_limit"))
        fill_slot_numbers(gj["invest_limit"], idx, path + ".invest_limit", g.invest_limit, unit);
      gencos.push_back(std::move(g));
    }
  } else {
    throw ParseError("scenario config: 'gencos' must be a count or an array of objects");
  }

  auto lit = root.find("load");
  if (lit == root.end()) missing("load");
  std::vector<LoadProfile> loads(regions.size());
  if (lit->is_array()) {
    auto d = numbers(*lit, "load");
    for (double& v : d) v *= unit;
    for (auto& l : loads) l.demand = d;
  } else if (lit->is_object()) {
    for (std::size_t r = 0; r < regions.size(); ++r) {
      auto it = lit->find(regions[r]);
      if (it == lit->end()) missing("load." + regions[r]);
      loads[r].demand = numbers(*it, "load." + regions[r]);
      for (double& v : loads[r].demand) v *= unit;
    }
  } else {
    throw ParseError("scenario config: 'load' must be an array or an object keyed by region");
  }

  const double voll = number_at(root, "voll", "") * per_unit;

  std::vector<Interval> bounds;
  if (auto bit = root.find("sampling_bounds"); bit != root.end()) {
    bounds.assign(slots, Interval{std::nan(""), std::nan("")});
    for_each_slot_entry(*bit, idx, "sampling_bounds", [&](std::size_t s, const json& v, const std::string& p) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ParseError("scenario config: '" + p + "' must be [lo, hi]");
      bounds[s] = Interval{v[0].get<double>() * unit, v[1].get<double>() * unit};
    });
    for (std::size_t s = 0; s < slots; ++s) {
      if (std::isnan(bounds[s].lo))
        throw ParseError("scenario config: 'sampling_bounds' has no entry for slot " + std::to_string(s));
    }
  }

  return Scenario(std::move(name), std::move(regions), std::move(techs), std::move(gencos),
                  std::move(loads), voll, std::move(bounds));
}

}  // namespace

Scenario load_scenario(std::string_view config_text) {
  json root;
  try {
    root = json::parse(config_text.begin(), config_text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError("scenario config: syntax error at " + line_context(config_text, e.byte) + " (" +
                     e.what() + ")");
  }
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario config: ") + e.what());
  }
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_config_text(const Scenario& sc) {
  json root;
  root["name"] = sc.name();
  root["power_unit"] = "MW";
  root["voll"] = sc.voll();
  root["regions"] = sc.regions();
  json techs = json::array();
  for (const auto& t : sc.technologies()) {
    techs.push_back({{"id", t.id},
                     {"marginal_cost", t.marginal_cost},
                     {"capex", t.capex},
                     {"fom", t.fom},
                     {"invest_limit", t.invest_limit}});
  }
  root["technologies"] = techs;

  auto slot_map = [&](const std::vector<double>& v) {
    json m = json::object();
    for (std::size_t r = 0; r < sc.num_regions(); ++r) {
      json inner = json::object();
      for (std::size_t g = 0; g < sc.num_technologies(); ++g)
        inner[sc.technologies()[g].id] = v[sc.slot(r, g)];
      m[sc.regions()[r]] = inner;
    }
    return m;
  };

  json gencos = json::array();
  for (const auto& g : sc.gencos()) {
    gencos.push_back({{"name", g.name},
                      {"existing", slot_map(g.existing)},
                      {"capex", slot_map(g.capex)},
                      {"invest_limit", slot_map(g.invest_limit)}});
  }
  root["gencos"] = gencos;

  json load = json::object();
  for (std::size_t r = 0; r < sc.num_regions(); ++r) load[sc.regions()[r]] = sc.loads()[r].demand;
  root["load"] = load;

  if (sc.has_explicit_sampling_bounds()) {
    json b = json::object();
    for (std::size_t r = 0; r < sc.num_regions(); ++r) {
      json inner = json::object();
      for (std::size_t g = 0; g < sc.num_technologies(); ++g) {
        const auto& iv = sc.sampling_bounds()[sc.slot(r, g)];
        inner[sc.technologies()[g].id] = {iv.lo, iv.hi};
      }
      b[sc.regions()[r]] = inner;
    }
    root["sampling_bounds"] = b;
  }
  return root.dump(2) + "\n";
}

Buildout total_buildout(std::span<const Buildout> strategies) {
  if (strategies.empty()) return Buildout{};
  const std::size_t n = strategies.front().mw.size();
  Buildout total{std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    const auto& s = strategies[j];
    if (s.mw.size() != n)
      throw ValidationError("total_buildout: strategy " + std::to_string(j) + " has " +
                            std::to_string(s.mw.size()) + " entries, expected " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!(s.mw[i] >= 0.0))
        throw ValidationError("total_buildout: strategy " + std::to_string(j) + " has a negative entry");
      total.mw[i] += s.mw[i];
    }
  }
  return total;
}

}  // namespace epec
