#include "epec/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "epec/error.hpp"
#include "json.hpp"

namespace epec {

namespace {

constexpr const char* kFormatTag = "epec-gbt";
constexpr int kFormatVersion = 1;

}  // namespace

double Tree::leaf_value(std::span<const double> x) const {
  int k = 0;
  while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(k)];
    k = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

int Tree::depth() const {
  std::function<int(int)> rec = [&](int k) -> int {
    const auto& n = nodes[static_cast<std::size_t>(k)];
    return n.is_leaf() ? 0 : 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes.empty() ? 0 : rec(0);
}

void TrainConfig::validate() const {
  if (n_rounds < 0) throw ValidationError("TrainConfig: n_rounds must be >= 0");
  if (max_depth < 1) throw ValidationError("TrainConfig: max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw ValidationError("TrainConfig: learning_rate must be in (0, 1]");
  if (!(l2_leaf_reg >= 0.0)) throw ValidationError("TrainConfig: l2_leaf_reg must be >= 0");
  if (!(min_split_gain >= 0.0)) throw ValidationError("TrainConfig: min_split_gain must be >= 0");
  if (early_stopping_rounds < 0) throw ValidationError("TrainConfig: early_stopping_rounds must be >= 0");
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<std::vector<std::size_t>>& sorted,
              const TrainConfig& cfg)
      : x_(x), sorted_(sorted), cfg_(cfg), node_of_(x.size()) {}

  /// Builds one tree on `residual`; leaf_of receives each row's leaf value.
  Tree build(const std::vector<double>& residual, std::vector<double>& row_value) {
    struct Work {
      int feature = -1;
      double threshold = 0.0;
      int left = -1, right = -1;
      double g = 0.0;
      std::size_t n = 0;
    };
    std::vector<Work> nodes(1);
    std::fill(node_of_.begin(), node_of_.end(), 0);
    for (double r : residual) nodes[0].g += r;
    nodes[0].n = residual.size();

    const double lambda = cfg_.l2_leaf_reg;
    auto score = [lambda](double g, double n) { return g * g / (n + lambda); };

    std::vector<int> active{0};
    for (int depth = 0; depth < cfg_.max_depth && !active.empty(); ++depth) {
      std::vector<Candidate> best(nodes.size());
      std::vector<char> is_active(nodes.size(), 0);
      for (int k : active) is_active[static_cast<std::size_t>(k)] = 1;

      std::vector<double> gl(nodes.size());
      std::vector<std::size_t> nl(nodes.size());
      std::vector<double> last(nodes.size());
      for (std::size_t f = 0; f < sorted_.size(); ++f) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(nl.begin(), nl.end(), 0);
        for (std::size_t i : sorted_[f]) {
          const auto k = static_cast<std::size_t>(node_of_[i]);
          if (!is_active[k]) continue;
          const double xi = x_[i][f];
          if (nl[k] > 0 && xi > last[k]) {
            const auto& nd = nodes[k];
            const double gr = nd.g - gl[k];
            const double nr = static_cast<double>(nd.n - nl[k]);
            const double gain = 0.5 * (score(gl[k], static_cast<double>(nl[k])) + score(gr, nr) -
                                       score(nd.g, static_cast<double>(nd.n))) -
                                cfg_.min_split_gain;
            if (gain > best[k].gain) {
              double thr = 0.5 * (last[k] + xi);
              if (!(thr > last[k])) thr = xi;
              best[k] = Candidate{gain, static_cast<int>(f), thr};
            }
          }
          gl[k] += residual[i];
          ++nl[k];
          last[k] = xi;
        }
      }

      std::vector<int> next;
      for (int k : active) {
        const auto& c = best[static_cast<std::size_t>(k)];
        if (c.feature < 0) continue;
        const int l = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes.push_back({});
        auto& nd = nodes[static_cast<std::size_t>(k)];
        nd.feature = c.feature;
        nd.threshold = c.threshold;
        nd.left = l;
        nd.right = l + 1;
        next.push_back(l);
        next.push_back(l + 1);
      }
      if (next.empty()) break;
      for (std::size_t i = 0; i < x_.size(); ++i) {
        const auto& nd = nodes[static_cast<std::size_t>(node_of_[i])];
        if (nd.feature < 0) continue;
        const int child = x_[i][static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        node_of_[i] = child;
        nodes[static_cast<std::size_t>(child)].g += residual[i];
        ++nodes[static_cast<std::size_t>(child)].n;
      }
      active = std::move(next);
    }

    // Emit in preorder.
    Tree tree;
    std::vector<double> leaf_val(nodes.size(), 0.0);
    std::function<int(int)> emit = [&](int k) -> int {
      const auto& w = nodes[static_cast<std::size_t>(k)];
      const int pos = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      if (w.feature < 0) {
        const double v = w.g / (static_cast<double>(w.n) + lambda);
        leaf_val[static_cast<std::size_t>(k)] = v;
        tree.nodes[static_cast<std::size_t>(pos)].value = v;
        return pos;
      }
      const int l = emit(w.left);
      const int r = emit(w.right);
      auto& out = tree.nodes[static_cast<std::size_t>(pos)];
      out.feature = w.feature;
      out.threshold = w.threshold;
      out.left = l;
      out.right = r;
      return pos;
    };
    emit(0);
    row_value.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) row_value[i] = leaf_val[static_cast<std::size_t>(node_of_[i])];
    return tree;
  }

 private:
  const std::vector<std::vector<double>>& x_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  const TrainConfig& cfg_;
  std::vector<int> node_of_;
};

double mse(std::span<const double> pred, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

void check_matrix(const std::vector<std::vector<double>>& x, std::size_t rows, std::size_t width, const char* what) {
  if (x.size() != rows) throw ValidationError(std::string(what) + ": inputs and targets differ in row count");
  for (const auto& row : x) {
    if (row.size() != width) throw ValidationError(std::string(what) + ": ragged input matrix");
    for (double v : row)
      if (std::isnan(v)) throw ValidationError(std::string(what) + ": missing value in inputs");
  }
}

std::vector<std::vector<double>> with_total(const std::vector<std::vector<double>>& x) {
  std::vector<std::vector<double>> out = x;
  for (auto& row : out) row.push_back(std::accumulate(row.begin(), row.end(), 0.0));
  return out;
}

GbtModel fit_impl(const std::vector<std::vector<double>>& x, std::span<const double> y, const TrainConfig& cfg,
                  const std::vector<std::vector<double>>* vx, std::span<const double> vy,
                  std::vector<std::string> names, FitTrace* trace) {
  cfg.validate();
  if (x.size() < 2) throw ValidationError("fit: need at least 2 rows");
  const std::size_t width = x.front().size();
  check_matrix(x, y.size(), width, "fit");
  for (double v : y)
    if (std::isnan(v)) throw ValidationError("fit: missing value in targets");
  if (vx) check_matrix(*vx, vy.size(), width, "fit (validation)");
  if (names.empty()) {
    for (std::size_t f = 0; f < width; ++f) names.push_back("x" + std::to_string(f));
  }
  if (names.size() != width) throw ValidationError("fit: feature_names length differs from input width");
  if (cfg.total_feature) {
    std::vector<std::vector<double>> xt = with_total(x);
    std::optional<std::vector<std::vector<double>>> vxt;
    if (vx) vxt = with_total(*vx);
    TrainConfig inner = cfg;
    inner.total_feature = false;
    std::vector<std::string> wide = names;
    wide.push_back("total");
    GbtModel m = fit_impl(xt, y, inner, vxt ? &*vxt : nullptr, vy, std::move(wide), trace);
    m.feature_names.pop_back();
    m.config.total_feature = true;
    return m;
  }

  GbtModel model;
  model.feature_names = std::move(names);
  model.learning_rate = cfg.learning_rate;
  model.config = cfg;
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<std::vector<std::size_t>> sorted(width);
  for (std::size_t f = 0; f < width; ++f) {
    auto& s = sorted[f];
    s.resize(x.size());
    std::iota(s.begin(), s.end(), 0);
    std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
  }

  std::vector<double> pred(x.size(), model.base_score);
  std::vector<double> vpred(vx ? vx->size() : 0, model.base_score);
  std::vector<double> residual(x.size()), row_value;
  const bool early = vx && cfg.early_stopping_rounds > 0;
  double best_valid = vx ? mse(vpred, vy) : 0.0;
  std::size_t best_round = 0;

  FitTrace local;
  FitTrace& tr = trace ? *trace : local;
  tr = FitTrace{};

  TreeBuilder builder(x, sorted, cfg);
  for (int round = 0; round < cfg.n_rounds; ++round) {
    for (std::size_t i = 0; i < x.size(); ++i) residual[i] = y[i] - pred[i];
    Tree tree = builder.build(residual, row_value);
    if (tree.nodes.size() == 1) break;  // no split improves the fit any more
    for (std::size_t i = 0; i < x.size(); ++i) pred[i] += cfg.learning_rate * row_value[i];
    tr.train_mse.push_back(mse(pred, y));
    if (vx) {
      for (std::size_t i = 0; i < vx->size(); ++i) vpred[i] += cfg.learning_rate * tree.leaf_value((*vx)[i]);
      const double v = mse(vpred, vy);
      tr.valid_mse.push_back(v);
      if (v < best_valid) {
        best_valid = v;
        best_round = model.trees.size() + 1;
      }
    }
    model.trees.push_back(std::move(tree));
    if (early && model.trees.size() - best_round >= static_cast<std::size_t>(cfg.early_stopping_rounds)) break;
  }
  if (early) {
    model.trees.resize(best_round);
    tr.train_mse.resize(best_round);
  }
  tr.best_round = static_cast<int>(model.trees.size());
  return model;
}

}  // namespace

GbtModel fit(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
             const TrainConfig& config, std::vector<std::string> feature_names, FitTrace* trace) {
  return fit_impl(inputs, targets, config, nullptr, {}, std::move(feature_names), trace);
}

GbtModel fit(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
             const TrainConfig& config, const std::vector<std::vector<double>>& valid_inputs,
             std::span<const double> valid_targets, std::vector<std::string> feature_names, FitTrace* trace) {
  return fit_impl(inputs, targets, config, &valid_inputs, valid_targets, std::move(feature_names), trace);
}

double predict(const GbtModel& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size())
    throw ValidationError("predict: input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.feature_names.size()));
  double sum = 0.0;
  if (model.config.total_feature) {
    std::vector<double> xt(x.begin(), x.end());
    xt.push_back(std::accumulate(x.begin(), x.end(), 0.0));
    for (const auto& t : model.trees) sum += t.leaf_value(xt);
  } else {
    for (const auto& t : model.trees) sum += t.leaf_value(x);
  }
  return model.base_score + model.learning_rate * sum;
}

Accuracy evaluate(const GbtModel& model, const std::vector<std::vector<double>>& inputs,
                  std::span<const double> targets) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw ValidationError("evaluate: need a nonempty set with matching targets");
  double rel = 0.0, abs_err = 0.0, abs_y = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double e = std::abs(predict(model, inputs[i]) - targets[i]);
    rel += e / std::max(std::abs(targets[i]), 1.0);
    abs_err += e;
    abs_y += std::abs(targets[i]);
    sq += e * e;
  }
  const auto n = static_cast<double>(inputs.size());
  Accuracy a;
  a.mean_relative = rel / n;
  a.aggregate_relative = abs_y > 0.0 ? abs_err / abs_y : (abs_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  a.rmse = std::sqrt(sq / n);
  return a;
}

// ---------------------------------------------------------------------------
// Persistence

using nlohmann::json;

std::string model_to_text(const GbtModel& model) {
  json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["config"] = {{"n_rounds", model.config.n_rounds},
                 {"max_depth", model.config.max_depth},
                 {"learning_rate", model.config.learning_rate},
                 {"l2_leaf_reg", model.config.l2_leaf_reg},
                 {"min_split_gain", model.config.min_split_gain},
                 {"seed", model.config.seed},
                 {"early_stopping_rounds", model.config.early_stopping_rounds},
                 {"total_feature", model.config.total_feature}};
  j["feature_names"] = model.feature_names;
  j["target_name"] = model.target_name;
  j["base_score"] = model.base_score;
  j["learning_rate"] = model.learning_rate;
  json trees = json::array();
  for (const auto& t : model.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf())
        nodes.push_back({{"leaf", n.value}});
      else
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}});
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump(1) + "\n";
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw ParseError("model file: " + what); }

Tree tree_from_preorder(const json& arr, std::size_t width) {
  if (!arr.is_array() || arr.empty()) malformed("tree must be a nonempty array");
  Tree t;
  t.nodes.resize(arr.size());
  std::size_t pos = 0;
  std::function<int(int)> rec = [&](int depth) -> int {
    if (pos >= arr.size()) malformed("tree preorder ends early");
    if (depth > 64) malformed("tree is too deep");
    const auto k = pos++;
    const json& n = arr[k];
    if (n.contains("leaf")) {
      if (!n["leaf"].is_number()) malformed("leaf value must be a number");
      t.nodes[k].value = n["leaf"].get<double>();
      return static_cast<int>(k);
    }
    if (!n.contains("feature") || !n.contains("threshold") || !n["feature"].is_number_integer() ||
        !n["threshold"].is_number())
      malformed("internal node needs integer 'feature' and numeric 'threshold'");
    const auto f = n["feature"].get<long long>();
    if (f < 0 || static_cast<std::size_t>(f) >= width) malformed("feature index out of range");
    const double thr = n["threshold"].get<double>();
    if (!std::isfinite(thr)) malformed("threshold must be finite");
    t.nodes[k].feature = static_cast<int>(f);
    t.nodes[k].threshold = thr;
    const int l = rec(depth + 1);
    const int r = rec(depth + 1);
    t.nodes[k].left = l;
    t.nodes[k].right = r;
    return static_cast<int>(k);
  };
  rec(0);
  if (pos != arr.size()) malformed("tree has trailing nodes");
  return t;
}

}  // namespace

GbtModel model_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON (") + e.what() + ")");
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != kFormatTag) malformed("missing 'epec-gbt' format tag");
    if (!j.contains("version") || !j["version"].is_number_integer()) malformed("missing version");
    if (j["version"].get<int>() != kFormatVersion)
      throw ParseError("model file: version " + std::to_string(j["version"].get<int>()) + " is not supported (expected " +
                       std::to_string(kFormatVersion) + ")");
    GbtModel m;
    const json& c = j.at("config");
    m.config.n_rounds = c.at("n_rounds").get<int>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.l2_leaf_reg = c.at("l2_leaf_reg").get<double>();
    m.config.min_split_gain = c.at("min_split_gain").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.early_stopping_rounds = c.at("early_stopping_rounds").get<int>();
    m.config.total_feature = c.value("total_feature", false);
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.target_name = j.value("target_name", std::string());
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_preorder(t, m.feature_names.size() + (m.config.total_feature ? 1 : 0)));
    return m;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

void save_model(const GbtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model " + path.string());
  out << model_to_text(model);
  if (!out) throw IoError("error writing model " + path.string());
}

GbtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return model_from_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace epec
