#include "lorecast/predictor/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace lorecast::predictor {

double RegressionTree::eval(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes[i].value;
}

double Ensemble::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.eval(x);
  return base_score + learning_rate * sum;
}

void BoostConfig::validate() const {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be at least 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw std::invalid_argument(fmt::format("learning_rate must be in (0, 1], got {}", learning_rate));
  if (min_leaf_rows < 1) throw std::invalid_argument("min_leaf_rows must be at least 1");
  if (!(row_subsample > 0.0 && row_subsample <= 1.0))
    throw std::invalid_argument("row_subsample must be in (0, 1]");
  if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
    throw std::invalid_argument("feature_subsample must be in (0, 1]");
}

namespace {

// Uniform draw in [0, 1) from the raw generator output, so results do not
// depend on the standard library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<double>& residual, const BoostConfig& cfg,
              std::vector<int> features)
      : x_(x), r_(residual), cfg_(cfg), features_(std::move(features)) {}

  // `sorted[k]` lists the node's rows ordered by feature features_[k].
  RegressionTree build(std::vector<std::vector<int>> sorted) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(sorted), 0);
    return tree;
  }

 private:
  double value(std::size_t row, int feature) const {
    return x_.data[row * x_.cols + static_cast<std::size_t>(feature)];
  }

  Split best_split(const std::vector<std::vector<int>>& sorted, double total, std::size_t n) const {
    Split best;
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf_rows);
    const double parent = total * total / static_cast<double>(n);
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const int f = features_[k];
      const auto& rows = sorted[k];
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += r_[static_cast<std::size_t>(rows[i])];
        const double a = value(static_cast<std::size_t>(rows[i]), f);
        const double b = value(static_cast<std::size_t>(rows[i + 1]), f);
        if (!(a < b)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        // Strictly greater keeps the lowest feature index, then the lowest
        // threshold, on ties.
        if (gain > best.gain) {
          double mid = a + (b - a) / 2.0;
          if (!(mid > a)) mid = b;
          best = {true, f, mid, gain};
        }
      }
    }
    return best;
  }

  void grow(RegressionTree& tree, std::size_t at, std::vector<std::vector<int>> sorted, int depth) {
    const auto& rows = sorted.front();
    const std::size_t n = rows.size();
    double total = 0.0;
    for (int r : rows) total += r_[static_cast<std::size_t>(r)];
    tree.nodes[at].value = total / static_cast<double>(n);

    if (depth >= cfg_.max_depth || n < 2 * static_cast<std::size_t>(cfg_.min_leaf_rows)) return;
    const Split split = best_split(sorted, total, n);
    // Gains this small are rounding noise in the sums.
    if (!split.found || split.gain <= 1e-12 * std::max(1.0, std::fabs(total))) return;

    std::vector<std::vector<int>> left(sorted.size());
    std::vector<std::vector<int>> right(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      for (int r : sorted[k]) {
        if (value(static_cast<std::size_t>(r), split.feature) < split.threshold)
          left[k].push_back(r);
        else
          right[k].push_back(r);
      }
    }
    sorted.clear();
    sorted.shrink_to_fit();

    const auto li = tree.nodes.size();
    tree.nodes.emplace_back();
    const auto ri = tree.nodes.size();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[at];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = static_cast<int>(li);
    node.right = static_cast<int>(ri);
    node.value = 0.0;
    grow(tree, li, std::move(left), depth + 1);
    grow(tree, ri, std::move(right), depth + 1);
  }

  const Matrix& x_;
  const std::vector<double>& r_;
  const BoostConfig& cfg_;
  std::vector<int> features_;
};

}  // namespace

Ensemble fit(const Matrix& x, const std::vector<double>& y, const BoostConfig& cfg,
             std::vector<double>* mse_trace) {
  cfg.validate();
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("cannot fit on zero rows");
  if (y.size() != n) throw std::invalid_argument("target length does not match row count");

  Ensemble model;
  model.learning_rate = cfg.learning_rate;
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  // Global per-feature sort, reused by every tree.
  std::vector<std::vector<int>> order(x.cols);
  for (std::size_t f = 0; f < x.cols; ++f) {
    auto& idx = order[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return x.data[static_cast<std::size_t>(a) * x.cols + f] <
             x.data[static_cast<std::size_t>(b) * x.cols + f];
    });
  }

  std::vector<double> pred(n, model.base_score);
  std::vector<double> residual(n);
  std::mt19937_64 rng(cfg.seed);

  for (int t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];

    std::vector<char> use_row(n, 1);
    if (cfg.row_subsample < 1.0) {
      std::size_t kept = 0;
      for (auto& u : use_row) kept += (u = unit(rng) < cfg.row_subsample);
      if (kept == 0) use_row[static_cast<std::size_t>(rng() % n)] = 1;
    }
    std::vector<int> features;
    for (std::size_t f = 0; f < x.cols; ++f)
      if (cfg.feature_subsample >= 1.0 || unit(rng) < cfg.feature_subsample)
        features.push_back(static_cast<int>(f));
    if (features.empty()) features.push_back(static_cast<int>(rng() % x.cols));

    std::vector<std::vector<int>> sorted;
    sorted.reserve(features.size());
    for (int f : features) {
      auto& rows = sorted.emplace_back();
      for (int r : order[static_cast<std::size_t>(f)])
        if (use_row[static_cast<std::size_t>(r)]) rows.push_back(r);
    }

    TreeBuilder builder(x, residual, cfg, std::move(features));
    auto tree = builder.build(std::move(sorted));
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += cfg.learning_rate * tree.eval(x.row(i));
      sq += (y[i] - pred[i]) * (y[i] - pred[i]);
    }
    if (mse_trace) mse_trace->push_back(sq / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace lorecast::predictor
