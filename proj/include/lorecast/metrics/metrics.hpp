#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lorecast::metrics {

/// A metric whose formula has no value for the given data (zero mean truth,
/// zero truth variance).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Pair {
  double forecast = 0.0;
  double truth = 0.0;
};

struct EvalSet {
  std::vector<Pair> pairs;
  std::string label;
};

/// 100 * |mean(forecast) - mean(truth)| / mean(truth).
double apme(const EvalSet& set);
/// 100 * sqrt(mean((truth - forecast)^2)) / mean(truth).
double nrmse(const EvalSet& set);
/// 1 - SS_res / SS_tot, with SS_tot taken about the truth mean.
double r_squared(const EvalSet& set);

/// Fraction of true outcomes.
double syntax_rate(const std::vector<bool>& outcomes);

/// rho * (1 - e) * 100, with rho and e as fractions in [0, 1].
double conditional_accuracy(double rho, double e);
double conditional_error(double rho, double e);

/// True when every attempt succeeded.
bool binary_correct(const std::vector<bool>& attempts);

struct MetricsReport {
  std::string label;
  std::size_t n = 0;
  double apme_percent = 0.0;
  double nrmse_percent = 0.0;
  std::optional<double> r2;  // absent when fewer than 2 rows or constant truth
  double mean_forecast = 0.0;
  double mean_truth = 0.0;
};

/// All metrics of one set. Throws UndefinedMetric when APME/NRMSE are
/// undefined; R^2 is left empty instead.
MetricsReport evaluate(const EvalSet& set);

/// A design in a conditional evaluation: forecasts exist only when the
/// generated code was syntax-correct.
struct ConditionalRow {
  bool syntax_ok = false;
  double forecast = 0.0;
  double truth = 0.0;
};

struct ConditionalReport {
  std::size_t n = 0;
  std::size_t n_correct = 0;
  double rho = 0.0;
  std::optional<double> e_percent;  // APME over the syntax-correct rows
  double accuracy_percent = 0.0;
  double error_percent = 100.0;
};

/// rho over all rows, E over the syntax-correct subset. With no correct row
/// the accuracy is 0 and E is left empty.
ConditionalReport conditional(const std::vector<ConditionalRow>& rows);

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const ConditionalReport& r);

}  // namespace lorecast::metrics
