#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lorecast::predictor {

/// Binary regression tree stored as a flat node array; node 0 is the root.
/// A row goes left when `x[feature] < threshold`, right otherwise.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output

    [[nodiscard]] bool leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes;

  [[nodiscard]] double eval(std::span<const double> x) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct BoostConfig {
  int n_trees = 200;
  int max_depth = 6;
  double learning_rate = 0.05;
  int min_leaf_rows = 2;
  std::uint64_t seed = 0;
  double row_subsample = 1.0;      // fraction of rows drawn per tree
  double feature_subsample = 1.0;  // fraction of features drawn per tree

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct Ensemble {
  double base_score = 0.0;
  double learning_rate = 0.05;
  std::vector<RegressionTree> trees;

  /// base_score + learning_rate * sum of tree outputs.
  [[nodiscard]] double predict(std::span<const double> x) const;
  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Row-major feature matrix.
struct Matrix {
  std::size_t cols = 0;
  std::vector<double> data;

  [[nodiscard]] std::size_t rows() const { return cols == 0 ? 0 : data.size() / cols; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

/// Fits a squared-error boosted ensemble. When `mse_trace` is given it
/// receives the training MSE after each tree.
Ensemble fit(const Matrix& x, const std::vector<double>& y, const BoostConfig& cfg,
             std::vector<double>* mse_trace = nullptr);

}  // namespace lorecast::predictor
