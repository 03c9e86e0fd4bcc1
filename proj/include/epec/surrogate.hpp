#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace epec {

/// One node of a regression tree. Internal nodes send x[feature] < threshold
/// to `left`, everything else to `right`. Leaves carry an unshrunk weight.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes stored in preorder; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double leaf_value(std::span<const double> x) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

struct TrainConfig {
  int n_rounds = 300;
  int max_depth = 5;
  double learning_rate = 0.1;
  double l2_leaf_reg = 1.0;     // lambda
  double min_split_gain = 0.0;  // gamma
  std::uint64_t seed = 0;       // recorded for provenance; training is deterministic
  /// Stop when validation MSE has not improved for this many rounds
  /// (only when a validation set is passed to fit; 0 disables).
  int early_stopping_rounds = 25;
  /// Append the row sum as one more input, addressed by trees as feature
  /// index == input width. Callers still pass the plain input vector.
  bool total_feature = false;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Gradient-boosted regression tree ensemble:
/// predict(x) = base_score + learning_rate * sum_t trees[t].leaf_value(x).
struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 1.0;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<Tree> trees;
  TrainConfig config;

  bool operator==(const GbtModel&) const = default;
};

/// Per-round training diagnostics.
struct FitTrace {
  std::vector<double> train_mse;  // after each kept round
  std::vector<double> valid_mse;  // empty without a validation set
  int best_round = 0;             // number of trees kept
};

/// Squared-error gradient boosting with exact greedy splits over sorted
/// unique feature values. Each round fits one tree to the current
/// residuals: leaf weight sum(r) / (n + lambda), split gain
/// 1/2 [G_L^2/(n_L+lambda) + G_R^2/(n_R+lambda) - G^2/(n+lambda)] - gamma.
/// Boosting stops early once no split has positive gain.
GbtModel fit(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
             const TrainConfig& config, std::vector<std::string> feature_names = {},
             FitTrace* trace = nullptr);

/// As above, with early stopping on `valid_*` and truncation to the best round.
GbtModel fit(const std::vector<std::vector<double>>& inputs, std::span<const double> targets,
             const TrainConfig& config, const std::vector<std::vector<double>>& valid_inputs,
             std::span<const double> valid_targets, std::vector<std::string> feature_names = {},
             FitTrace* trace = nullptr);

/// Throws ValidationError if x has the wrong length.
double predict(const GbtModel& model, std::span<const double> x);

struct Accuracy {
  /// mean(|pred - y| / max(|y|, 1))
  double mean_relative = 0.0;
  /// sum|pred - y| / sum|y|
  double aggregate_relative = 0.0;
  double rmse = 0.0;
};

Accuracy evaluate(const GbtModel& model, const std::vector<std::vector<double>>& inputs,
                  std::span<const double> targets);

/// Self-describing JSON: format tag, version, config echo, base score and
/// trees in preorder. Doubles are written in shortest round-trip form, so a
/// reloaded model predicts bit-identically.
std::string model_to_text(const GbtModel& model);
GbtModel model_from_text(const std::string& text);
void save_model(const GbtModel& model, const std::filesystem::path& path);
GbtModel load_model(const std::filesystem::path& path);

}  // namespace epec
