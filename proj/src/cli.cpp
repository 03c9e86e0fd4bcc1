#include "epec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "epec/capacity_auction.hpp"
#include "epec/dispatch.hpp"
#include "epec/equilibrium.hpp"
#include "epec/error.hpp"
#include "epec/format.hpp"
#include "epec/parallel.hpp"
#include "epec/sampler.hpp"
#include "epec/scenario.hpp"
#include "epec/surrogate.hpp"

namespace epec {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Stage indices for splitting the single --seed flag.
enum Stage : std::uint64_t { stage_sample = 1, stage_train = 2, stage_solve = 3, stage_validate = 4, stage_verify = 5 };

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  return f;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  return f;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

struct Common {
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Base seed; each stage derives its own stream from it")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads (0: EPEC_WORKERS or hardware concurrency)")
      ->capture_default_str();
}

/// Collects the run record written next to every output.
class Manifest {
 public:
  Manifest(std::string subcommand, const CLI::App* app, const Common* common)
      : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "epec";
    doc_["version"] = kToolVersion;
    doc_["subcommand"] = std::move(subcommand);
    json overrides = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      const auto& res = opt->results();
      if (res.size() == 1)
        overrides[opt->get_name()] = res.front();
      else
        overrides[opt->get_name()] = res;
    }
    doc_["overrides"] = overrides;
    if (common) {
      doc_["seeds"]["base"] = common->seed;
      doc_["workers"] = resolve_workers(common->workers);
    }
    doc_["outputs"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }
  void stage_seed(const char* stage, std::uint64_t seed) { doc_["seeds"][stage] = seed; }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

  void write(const fs::path& path) {
    doc_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto f = open_out(path);
    f << doc_.dump(2) << "\n";
    if (!f) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

json de_json(const SolveConfig& c) {
  return {{"population", c.de.population},   {"weight", c.de.weight},       {"crossover", c.de.crossover},
          {"max_generations", c.de.max_generations}, {"tolerance", c.de.tolerance}, {"starts", c.n_starts},
          {"epsilon", c.epsilon},          {"max_iterations", c.max_iterations}};
}

// ---- sweep ----

struct SweepOptions {
  std::string path;
  double from = 1000.0;
  double to = 1700.0;
  double step = 1.0;
};

void add_sweep(CLI::App* sub, SweepOptions& s) {
  sub->add_option("--sweep", s.path, "Write a payout-versus-total-capacity CSV here");
  sub->add_option("--sweep-from", s.from, "First total capacity of the sweep (MW)")->capture_default_str();
  sub->add_option("--sweep-to", s.to, "Last total capacity of the sweep (MW)")->capture_default_str();
  sub->add_option("--sweep-step", s.step, "Sweep increment (MW)")->capture_default_str();
}

/// total_mw,payout,operational_profit[,surrogate_profit]
void write_sweep(const fs::path& path, const SweepOptions& s, const Scenario& sc,
                 const std::vector<GbtModel>* models) {
  if (!(s.step > 0.0) || !(s.to >= s.from)) throw ValidationError("sweep: need step > 0 and to >= from");
  auto f = open_out(path);
  f << "total_mw,payout,operational_profit" << (models ? ",surrogate_profit" : "") << "\n";
  const auto n = static_cast<long>(std::floor((s.to - s.from) / s.step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double k = s.from + static_cast<double>(i) * s.step;
    const Buildout b = proportional_buildout(sc, k);
    const DispatchResult d = simulate(sc, b);
    double op = 0.0;
    for (double v : d.operational_profit) op += v;
    f << fmt_double(k) << "," << fmt_double(d.total_payout()) << "," << fmt_double(op);
    if (models) {
      double pred = 0.0;
      for (const auto& m : *models) pred += predict(m, b.mw);
      f << "," << fmt_double(pred);
    }
    f << "\n";
  }
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

// ---- sample ----

struct SampleOptions {
  std::string scenario;
  std::string out;
  std::size_t rows = 5000;
  SweepOptions sweep;
  Common common;
};

int do_sample(const SampleOptions& o, const CLI::App* app, std::ostream& out) {
  Manifest man("sample", app, &o.common);
  const Scenario sc = load_scenario_file(o.scenario);
  const std::uint64_t seed = derive_seed(o.common.seed, stage_sample);
  man.stage_seed("sample", seed);
  man["scenario"] = o.scenario;
  json bounds = json::array();
  for (const auto& b : sc.sampling_bounds()) bounds.push_back({b.lo, b.hi});
  man["config"] = {{"rows", o.rows}, {"sampling_bounds", bounds}};

  const auto buildouts = sample_buildouts(o.rows, sc.sampling_bounds(), seed);
  const Dataset ds = generate_dataset(sc, buildouts, o.common.workers);
  auto f = open_out(o.out);
  write_dataset(ds, f);
  man.output(o.out);
  out << "wrote " << ds.rows() << " rows to " << o.out << "\n";

  if (!o.sweep.path.empty()) {
    write_sweep(o.sweep.path, o.sweep, sc, nullptr);
    man.output(o.sweep.path);
    out << "wrote sweep to " << o.sweep.path << "\n";
  }
  man.write(o.out + ".manifest.json");
  return 0;
}

// ---- train ----

struct TrainOptions {
  std::string dataset;
  std::string out_dir;
  std::vector<std::string> targets;
  TrainConfig config;
  double test_fraction = 0.25;
  double valid_fraction = 0.1;
  std::string scenario;
  SweepOptions sweep;
  Common common;
};

int do_train(TrainOptions o, const CLI::App* app, std::ostream& out) {
  Manifest man("train", app, &o.common);
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) throw ValidationError("--test-fraction must be in (0, 1)");
  if (!(o.valid_fraction >= 0.0 && o.valid_fraction < 1.0))
    throw ValidationError("--valid-fraction must be in [0, 1)");
  if (!o.sweep.path.empty() && o.scenario.empty()) throw ValidationError("--sweep needs --scenario");

  const Dataset ds = read_dataset(fs::path(o.dataset));
  const std::uint64_t seed = derive_seed(o.common.seed, stage_train);
  man.stage_seed("train", seed);
  o.config.seed = seed;
  o.config.validate();

  std::vector<std::size_t> which;
  if (o.targets.empty()) {
    for (std::size_t t = 0; t < ds.target_names.size(); ++t) which.push_back(t);
  } else {
    for (const auto& name : o.targets) {
      const bool bare = name.rfind("profit_", 0) != 0;
      which.push_back(ds.target_index(bare ? "profit_" + name : name));
    }
  }

  const Split split = train_test_split(ds.rows(), o.test_fraction, seed);
  // Early stopping watches a slice of the training rows, never the test rows.
  Split inner{split.train, {}};
  if (o.valid_fraction > 0.0) {
    const Split s = train_test_split(split.train.size(), o.valid_fraction, derive_seed(seed, 1));
    inner.train.clear();
    for (auto i : s.train) inner.train.push_back(split.train[i]);
    for (auto i : s.test) inner.test.push_back(split.train[i]);
  }
  if (inner.train.size() < 2) throw ValidationError("train: fewer than 2 training rows after splitting");
  const auto x_fit = select_rows(ds.inputs, inner.train);
  const auto x_valid = select_rows(ds.inputs, inner.test);
  const auto x_train = select_rows(ds.inputs, split.train);
  const auto x_test = select_rows(ds.inputs, split.test);

  make_dir(o.out_dir);
  const fs::path dir(o.out_dir);
  const fs::path acc_path = dir / "accuracy.csv";
  auto acc = open_out(acc_path);
  acc << "target,train_rows,test_rows,trees,train_mean_relative,test_mean_relative,"
         "train_aggregate_relative,test_aggregate_relative,train_rmse,test_rmse\n";
  out << "target  trees  train_rel  test_rel  train_agg  test_agg\n";

  std::vector<GbtModel> models;
  for (std::size_t t : which) {
    const auto y = ds.target_column(t);
    const auto y_fit = select(y, inner.train);
    GbtModel m = inner.test.empty() ? fit(x_fit, y_fit, o.config, ds.feature_names)
                                    : fit(x_fit, y_fit, o.config, x_valid, select(y, inner.test), ds.feature_names);
    m.target_name = ds.target_names[t];
    const Accuracy a = evaluate(m, x_train, select(y, split.train));
    const Accuracy b = evaluate(m, x_test, select(y, split.test));
    const fs::path mp = dir / (ds.target_names[t] + ".json");
    save_model(m, mp);
    man.output(mp);
    acc << ds.target_names[t] << "," << split.train.size() << "," << split.test.size() << "," << m.trees.size()
        << "," << fmt_double(a.mean_relative) << "," << fmt_double(b.mean_relative) << ","
        << fmt_double(a.aggregate_relative) << "," << fmt_double(b.aggregate_relative) << "," << fmt_double(a.rmse)
        << "," << fmt_double(b.rmse) << "\n";
    out << ds.target_names[t] << "  " << m.trees.size() << "  " << a.mean_relative << "  " << b.mean_relative << "  "
        << a.aggregate_relative << "  " << b.aggregate_relative << "\n";
    models.push_back(std::move(m));
  }
  if (!acc) throw IoError("failed writing '" + acc_path.string() + "'");
  man.output(acc_path);

  if (!o.sweep.path.empty()) {
    const Scenario sc = load_scenario_file(o.scenario);
    if (which.size() != sc.num_slots()) throw ValidationError("--sweep needs a model for every slot");
    for (std::size_t s = 0; s < sc.num_slots(); ++s) {
      if (s >= ds.feature_names.size() || ds.feature_names[s] != "k_" + sc.slot_label(s))
        throw SchemaError("dataset columns do not match the slots of scenario '" + o.scenario + "'");
    }
    std::vector<GbtModel> ordered;
    for (std::size_t s = 0; s < sc.num_slots(); ++s) {
      for (const auto& m : models)
        if (m.target_name == "profit_" + sc.slot_label(s)) ordered.push_back(m);
    }
    if (ordered.size() != sc.num_slots()) throw ValidationError("--sweep needs a model for every slot");
    write_sweep(o.sweep.path, o.sweep, sc, &ordered);
    man.output(o.sweep.path);
    man["scenario"] = o.scenario;
  }

  man["dataset"] = o.dataset;
  man["config"] = {{"rounds", o.config.n_rounds},
                   {"max_depth", o.config.max_depth},
                   {"learning_rate", o.config.learning_rate},
                   {"l2_leaf_reg", o.config.l2_leaf_reg},
                   {"min_split_gain", o.config.min_split_gain},
                   {"early_stopping_rounds", o.config.early_stopping_rounds},
                   {"total_feature", o.config.total_feature},
                   {"test_fraction", o.test_fraction},
                   {"valid_fraction", o.valid_fraction}};
  man.write(dir / "manifest.json");
  return 0;
}

// ---- solve / validate ----

struct SolveOptions {
  std::string scenario;
  std::string evaluator = "benchmark";
  std::string models;
  std::string initial;
  std::string out_dir;
  SolveConfig config;
  std::optional<double> verify_delta;
  Common common;
};

void add_solve_options(CLI::App* sub, SolveOptions& o) {
  sub->add_option("--scenario", o.scenario, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", o.out_dir, "Directory for strategies.csv, trace.csv, summary.json")->required();
  sub->add_option("--epsilon", o.config.epsilon, "Convergence threshold on per-coordinate moves (MW)")
      ->capture_default_str();
  sub->add_option("--max-iter", o.config.max_iterations, "Maximum diagonalization sweeps")->capture_default_str();
  sub->add_option("--starts", o.config.n_starts, "DE restarts per best response")->capture_default_str();
  sub->add_option("--population", o.config.de.population, "DE population (0: 10 x dimension)")->capture_default_str();
  sub->add_option("--generations", o.config.de.max_generations, "DE generation cap")->capture_default_str();
  sub->add_option("--verify-delta", o.verify_delta,
                  "Also check every Genco's best response against the result; certified when no relative gain "
                  "exceeds this");
  add_common(sub, o.common);
}

std::vector<GencoStrategy> read_strategies(const fs::path& path, const Scenario& sc) {
  auto f = open_in(path);
  return read_strategies_csv(f, sc);
}

json write_result(const fs::path& dir, const Scenario& sc, const EquilibriumResult& r, Manifest& man) {
  make_dir(dir);
  const fs::path sp = dir / "strategies.csv";
  const fs::path tp = dir / "trace.csv";
  {
    auto f = open_out(sp);
    write_strategies_csv(f, sc, r.strategies);
    if (!f) throw IoError("failed writing '" + sp.string() + "'");
  }
  {
    auto f = open_out(tp);
    write_trace_csv(f, sc, r);
    if (!f) throw IoError("failed writing '" + tp.string() + "'");
  }
  man.output(sp);
  man.output(tp);
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"total_mw", r.total_mw(sc)}};
}

void write_json(const fs::path& path, const json& j, Manifest& man) {
  auto f = open_out(path);
  f << j.dump(2) << "\n";
  if (!f) throw IoError("failed writing '" + path.string() + "'");
  man.output(path);
}

json verify(const EquilibriumResult& r, const ProfitEvaluator& ev, double delta, SolveConfig cfg,
            std::uint64_t seed, const fs::path& dir, Manifest& man, std::ostream& out) {
  cfg.de.seed = seed;
  const NashReport rep = verify_nash(r, ev, delta, cfg);
  const fs::path np = dir / "nash.csv";
  auto f = open_out(np);
  f << "genco,incumbent_profit,best_profit,gain,relative_gain\n";
  const Scenario& sc = ev.scenario();
  for (std::size_t j = 0; j < sc.num_gencos(); ++j) {
    f << sc.gencos()[j].name << "," << fmt_double(rep.incumbent_profit[j]) << "," << fmt_double(rep.best_profit[j])
      << "," << fmt_double(rep.gain[j]) << "," << fmt_double(rep.relative_gain[j]) << "\n";
  }
  if (!f) throw IoError("failed writing '" + np.string() + "'");
  man.output(np);
  out << "nash check: max relative gain " << rep.max_relative_gain << (rep.certified ? " (certified)" : " (NOT certified)")
      << "\n";
  return {{"delta", delta}, {"max_relative_gain", rep.max_relative_gain}, {"certified", rep.certified}};
}

int do_solve(SolveOptions o, const CLI::App* app, std::ostream& out, std::ostream& err) {
  Manifest man("solve", app, &o.common);
  const Scenario sc = load_scenario_file(o.scenario);
  const EvaluatorKind kind = parse_evaluator_kind(o.evaluator);
  if (kind == EvaluatorKind::hybrid && o.models.empty()) throw ValidationError("--evaluator hybrid needs --models");

  std::unique_ptr<ProfitEvaluator> ev;
  if (kind == EvaluatorKind::hybrid)
    ev = std::make_unique<HybridEvaluator>(sc, load_models(sc, o.models));
  else
    ev = std::make_unique<BenchmarkEvaluator>(sc);

  const std::uint64_t seed = derive_seed(o.common.seed, stage_solve);
  man.stage_seed("solve", seed);
  o.config.de.seed = seed;
  o.config.de.workers = o.common.workers;
  const auto initial = o.initial.empty() ? zero_strategies(sc) : read_strategies(o.initial, sc);

  const EquilibriumResult r = diagonalize(*ev, initial, o.config);
  const fs::path dir(o.out_dir);
  json summary = {{"evaluator", to_string(kind)}};
  summary.update(write_result(dir, sc, r, man));
  out << to_string(kind) << " equilibrium: total " << r.total_mw(sc) << " MW after " << r.iterations << " sweeps"
      << (r.converged ? "" : " (not converged)") << "\n";
  if (!r.converged) err << "warning: diagonalization did not converge within " << o.config.max_iterations << " sweeps\n";

  if (o.verify_delta) {
    const std::uint64_t vs = derive_seed(o.common.seed, stage_verify);
    man.stage_seed("verify", vs);
    summary["nash"] = verify(r, *ev, *o.verify_delta, o.config, vs, dir, man, out);
  }
  write_json(dir / "summary.json", summary, man);

  man["scenario"] = o.scenario;
  man["evaluator"] = to_string(kind);
  if (!o.models.empty()) man["models"] = o.models;
  if (!o.initial.empty()) man["initial"] = o.initial;
  man["config"] = de_json(o.config);
  man.write(dir / "manifest.json");
  return 0;
}

struct ValidateOptions {
  SolveOptions solve;
  std::string strategies;
};

int do_validate(ValidateOptions v, const CLI::App* app, std::ostream& out, std::ostream& err) {
  SolveOptions& o = v.solve;
  Manifest man("validate", app, &o.common);
  const Scenario sc = load_scenario_file(o.scenario);
  const auto hybrid = read_strategies(v.strategies, sc);
  const double hybrid_total = installed_capacity(sc, hybrid).total();

  const std::uint64_t seed = derive_seed(o.common.seed, stage_validate);
  man.stage_seed("validate", seed);
  o.config.de.seed = seed;
  o.config.de.workers = o.common.workers;

  const BenchmarkEvaluator ev(sc);
  const EquilibriumResult r = diagonalize(ev, hybrid, o.config);
  const fs::path dir(o.out_dir);
  json summary = write_result(dir, sc, r, man);
  summary["start_total_mw"] = hybrid_total;
  summary["change_mw"] = r.total_mw(sc) - hybrid_total;
  out << "replugged " << hybrid_total << " MW into the benchmark: total " << r.total_mw(sc) << " MW after "
      << r.iterations << " sweeps" << (r.converged ? "" : " (not converged)") << "\n";
  if (!r.converged) err << "warning: diagonalization did not converge within " << o.config.max_iterations << " sweeps\n";

  if (o.verify_delta) {
    const std::uint64_t vs = derive_seed(o.common.seed, stage_verify);
    man.stage_seed("verify", vs);
    summary["nash"] = verify(r, ev, *o.verify_delta, o.config, vs, dir, man, out);
  }
  write_json(dir / "summary.json", summary, man);

  man["scenario"] = o.scenario;
  man["strategies"] = v.strategies;
  man["config"] = de_json(o.config);
  man.write(dir / "manifest.json");
  return 0;
}

// ---- auction ----

struct AuctionOptions {
  std::string segments;
  std::string offers;
  std::string out;
};

int do_auction(const AuctionOptions& o, const CLI::App* app, std::ostream& out) {
  Manifest man("auction", app, nullptr);
  std::vector<DemandSegment> segs;
  std::vector<CapacityOffer> offers;
  {
    auto f = open_in(o.segments);
    segs = read_segments_csv(f);
  }
  {
    auto f = open_in(o.offers);
    offers = read_offers_csv(f);
  }
  const AuctionResult r = clear_auction(segs, offers);
  if (o.out.empty()) {
    write_auction_csv(out, r);
    return 0;
  }
  {
    auto f = open_out(o.out);
    write_auction_csv(f, r);
    if (!f) throw IoError("failed writing '" + o.out + "'");
  }
  man.output(o.out);
  man["segments"] = o.segments;
  man["offers"] = o.offers;
  man.write(o.out + ".manifest.json");
  out << "clearing price " << r.clearing_price << ", cleared " << r.cleared_quantity() << " MW, welfare "
      << r.welfare << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generation-investment equilibrium with surrogate market models"};
  app.name("epec");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SampleOptions so;
  auto* sample = app.add_subcommand("sample", "Sample buildouts and simulate the market to build a training set");
  sample->add_option("--scenario", so.scenario, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("--out", so.out, "Dataset CSV to write")->required();
  sample->add_option("-n,--rows", so.rows, "Number of sampled buildouts")->capture_default_str()->check(
      CLI::PositiveNumber);
  add_sweep(sample, so.sweep);
  add_common(sample, so.common);

  TrainOptions to;
  to.config.total_feature = true;
  auto* train = app.add_subcommand("train", "Fit one boosted-tree profit model per slot");
  train->add_option("--dataset", to.dataset, "Dataset CSV from `sample`")->required()->check(CLI::ExistingFile);
  train->add_option("--out-dir", to.out_dir, "Directory for profit_<slot>.json models and accuracy.csv")
      ->required();
  train->add_option("--target", to.targets, "Target column(s) to train (default: all)");
  train->add_option("--rounds", to.config.n_rounds, "Boosting rounds")->capture_default_str();
  train->add_option("--depth", to.config.max_depth, "Maximum tree depth")->capture_default_str();
  train->add_option("--learning-rate", to.config.learning_rate, "Shrinkage")->capture_default_str();
  train->add_option("--l2", to.config.l2_leaf_reg, "L2 penalty on leaf weights (lambda)")->capture_default_str();
  train->add_option("--gamma", to.config.min_split_gain, "Minimum split gain")->capture_default_str();
  train->add_option("--early-stopping", to.config.early_stopping_rounds,
                    "Rounds without validation improvement before stopping (0: off)")
      ->capture_default_str();
  train->add_flag("--total-feature,!--no-total-feature", to.config.total_feature,
                  "Give the trees total installed capacity as an extra input (default: on)");
  train->add_option("--test-fraction", to.test_fraction, "Held-out share of rows")->capture_default_str();
  train->add_option("--valid-fraction", to.valid_fraction,
                    "Share of training rows used for early stopping (0: no early stopping)")
      ->capture_default_str();
  train->add_option("--scenario", to.scenario, "Scenario config, needed for --sweep")->check(CLI::ExistingFile);
  add_sweep(train, to.sweep);
  add_common(train, to.common);

  SolveOptions sv;
  auto* solve = app.add_subcommand("solve", "Find an investment equilibrium by diagonalization");
  add_solve_options(solve, sv);
  solve->add_option("--evaluator", sv.evaluator, "Profit evaluator: hybrid or benchmark")
      ->capture_default_str()
      ->check(CLI::IsMember({"hybrid", "benchmark"}));
  solve->add_option("--models", sv.models, "Model directory from `train` (hybrid)")->check(CLI::ExistingDirectory);
  solve->add_option("--initial", sv.initial, "Starting strategies CSV (default: no new investment)")
      ->check(CLI::ExistingFile);

  ValidateOptions vo;
  auto* validate = app.add_subcommand("validate", "Restart benchmark diagonalization from a hybrid solution");
  add_solve_options(validate, vo.solve);
  validate->add_option("--strategies", vo.strategies, "strategies.csv from `solve --evaluator hybrid`")
      ->required()
      ->check(CLI::ExistingFile);

  AuctionOptions ao;
  auto* auction = app.add_subcommand("auction", "Clear a capacity auction");
  auction->add_option("--segments", ao.segments, "Demand segments CSV: price_intercept,slope,max_quantity")
      ->required()
      ->check(CLI::ExistingFile);
  auction->add_option("--offers", ao.offers, "Offers CSV: bid,pmax,derate")->required()->check(CLI::ExistingFile);
  auction->add_option("--out", ao.out, "Result CSV (default: stdout)");

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    err << "epec: unknown subcommand '" << argv[1] << "' (expected sample, train, solve, validate or auction)\n";
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) return do_sample(so, sample, out);
    if (*train) return do_train(to, train, out);
    if (*solve) return do_solve(sv, solve, out, err);
    if (*validate) return do_validate(vo, validate, out, err);
    if (*auction) return do_auction(ao, auction, out);
  } catch (const std::exception& e) {
    err << "epec: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace epec
