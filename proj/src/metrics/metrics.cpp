#include "lorecast/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lorecast::metrics {
namespace {

void check_set(const EvalSet& set, std::size_t min_rows) {
  if (set.pairs.size() < min_rows)
    throw std::invalid_argument(fmt::format("metric needs at least {} row(s), got {}", min_rows,
                                            set.pairs.size()));
  for (const auto& p : set.pairs) {
    if (!std::isfinite(p.forecast) || !std::isfinite(p.truth))
      throw std::invalid_argument("metric input contains a non-finite value");
  }
}

double mean_truth(const EvalSet& set) {
  double s = 0.0;
  for (const auto& p : set.pairs) s += p.truth;
  return s / static_cast<double>(set.pairs.size());
}

double mean_forecast(const EvalSet& set) {
  double s = 0.0;
  for (const auto& p : set.pairs) s += p.forecast;
  return s / static_cast<double>(set.pairs.size());
}

double nonzero_mean_truth(const EvalSet& set, const char* metric) {
  const double m = mean_truth(set);
  if (m == 0.0)
    throw UndefinedMetric(fmt::format("{} is undefined when the mean truth is zero{}", metric,
                                      set.label.empty() ? "" : " (" + set.label + ")"));
  return m;
}

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(fmt::format("{} must be in [0, 1], got {}", name, v));
}

}  // namespace

double apme(const EvalSet& set) {
  check_set(set, 1);
  const double mt = nonzero_mean_truth(set, "APME");
  return 100.0 * std::abs(mean_forecast(set) - mt) / mt;
}

double nrmse(const EvalSet& set) {
  check_set(set, 1);
  const double mt = nonzero_mean_truth(set, "NRMSE");
  double sq = 0.0;
  for (const auto& p : set.pairs) sq += (p.truth - p.forecast) * (p.truth - p.forecast);
  return 100.0 * std::sqrt(sq / static_cast<double>(set.pairs.size())) / mt;
}

double r_squared(const EvalSet& set) {
  check_set(set, 2);
  const double mt = mean_truth(set);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& p : set.pairs) {
    ss_res += (p.truth - p.forecast) * (p.truth - p.forecast);
    ss_tot += (p.truth - mt) * (p.truth - mt);
  }
  if (ss_tot == 0.0) throw UndefinedMetric("R^2 is undefined when every truth value is equal");
  return 1.0 - ss_res / ss_tot;
}

double syntax_rate(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("syntax rate of an empty list");
  return static_cast<double>(std::count(outcomes.begin(), outcomes.end(), true)) /
         static_cast<double>(outcomes.size());
}

double conditional_accuracy(double rho, double e) {
  check_fraction(rho, "syntax rate");
  check_fraction(e, "error fraction");
  return rho * (1.0 - e) * 100.0;
}

double conditional_error(double rho, double e) { return 100.0 - conditional_accuracy(rho, e); }

bool binary_correct(const std::vector<bool>& attempts) {
  if (attempts.empty()) throw std::invalid_argument("binary correctness of no attempts");
  return std::all_of(attempts.begin(), attempts.end(), [](bool b) { return b; });
}

MetricsReport evaluate(const EvalSet& set) {
  MetricsReport r;
  r.label = set.label;
  r.n = set.pairs.size();
  r.apme_percent = apme(set);
  r.nrmse_percent = nrmse(set);
  r.mean_forecast = mean_forecast(set);
  r.mean_truth = mean_truth(set);
  if (set.pairs.size() >= 2) {
    try {
      r.r2 = r_squared(set);
    } catch (const UndefinedMetric&) {
    }
  }
  return r;
}

ConditionalReport conditional(const std::vector<ConditionalRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("conditional metrics of an empty list");
  ConditionalReport r;
  r.n = rows.size();
  EvalSet correct;
  std::vector<bool> outcomes;
  for (const auto& row : rows) {
    outcomes.push_back(row.syntax_ok);
    if (row.syntax_ok) correct.pairs.push_back({row.forecast, row.truth});
  }
  r.n_correct = correct.pairs.size();
  r.rho = syntax_rate(outcomes);
  if (correct.pairs.empty()) {
    r.accuracy_percent = 0.0;
    r.error_percent = 100.0;
    return r;
  }
  r.e_percent = apme(correct);
  // APME can exceed 100%; beyond that the accuracy is simply zero.
  r.accuracy_percent = conditional_accuracy(r.rho, std::min(*r.e_percent / 100.0, 1.0));
  r.error_percent = 100.0 - r.accuracy_percent;
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j{{"label", r.label},
                   {"n", r.n},
                   {"apme_percent", r.apme_percent},
                   {"nrmse_percent", r.nrmse_percent},
                   {"mean_forecast", r.mean_forecast},
                   {"mean_truth", r.mean_truth}};
  j["r2"] = r.r2 ? nlohmann::json(*r.r2) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ConditionalReport& r) {
  nlohmann::json j{{"n", r.n},
                   {"n_syntax_correct", r.n_correct},
                   {"syntax_rate", r.rho},
                   {"conditional_accuracy_percent", r.accuracy_percent},
                   {"conditional_error_percent", r.error_percent}};
  j["e_percent"] = r.e_percent ? nlohmann::json(*r.e_percent) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lorecast::metrics
