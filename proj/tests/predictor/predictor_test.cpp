#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lorecast/features/extract.hpp"
#include "lorecast/predictor/model.hpp"
#include "lorecast/predictor/synth.hpp"
#include "lorecast/verilog/parser.hpp"
#include "lorecast/verilog/printer.hpp"
#include "test_support.hpp"

namespace lf = lorecast::features;
namespace lp = lorecast::predictor;
using Code = lp::PredictorError::Code;

namespace {

lf::FeatureVector zero_vector() {
  lf::FeatureVector fv;
  fv.values.assign(lf::feature_names().size(), 0.0);
  return fv;
}

lf::FeatureVector random_vector(std::mt19937_64& rng) {
  auto fv = zero_vector();
  for (auto& v : fv.values) v = static_cast<double>(rng() % 400);
  return fv;
}

const lp::Dataset& synthetic() {
  static const lp::Dataset data = lp::synthetic_dataset({500, 0, 0.01});
  return data;
}

lp::Dataset small_synthetic() {
  lp::Dataset d;
  d.rows.assign(synthetic().rows.begin(), synthetic().rows.begin() + 120);
  return d;
}

lp::TrainConfig quick() {
  lp::TrainConfig cfg;
  cfg.n_trees = 30;
  return cfg;
}

template <typename F>
Code code_of(F&& f) {
  try {
    f();
  } catch (const lp::PredictorError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no PredictorError thrown";
  return Code::Io;
}

double mse(const lp::Ensemble& m, const lp::Matrix& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - m.predict(x.row(i));
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST(Train, ConstantTargetIsReproduced) {
  lp::Dataset data;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 40; ++i) data.rows.push_back({"", random_vector(rng), 100.0, 2.5});
  const auto model = lp::train(data, quick());
  for (int i = 0; i < 20; ++i) {
    const auto f = lp::predict(model, random_vector(rng));
    EXPECT_NEAR(f.power_uW, 100.0, 1e-6);
    EXPECT_NEAR(f.tns_ns, 2.5, 1e-9);
  }
  const auto ev = lp::evaluate(model, data);
  EXPECT_NEAR(ev.power.apme_percent, 0.0, 1e-6);
  EXPECT_NEAR(ev.power.nrmse_percent, 0.0, 1e-6);
}

// Best single split found by trying every midpoint and scoring the SSE of
// the two halves directly.
struct BruteSplit {
  double threshold;
  double left_mean;
  double right_mean;
  double sse;
};

BruteSplit brute_force_split(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  BruteSplit best{0, 0, 0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double t = (xs[k] + xs[k + 1]) / 2.0;
    double sl = 0, sr = 0;
    int nl = 0, nr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] < t ? (sl += y[i], ++nl) : (sr += y[i], ++nr));
    const double ml = sl / nl, mr = sr / nr;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - (x[i] < t ? ml : mr), 2);
    if (sse < best.sse) best = {t, ml, mr, sse};
  }
  return best;
}

TEST(Train, StepFunctionIsFitByOneSplit) {
  lp::Matrix x{1, {}};
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) {
    const double f = i * 0.1;
    x.data.push_back(f);
    y.push_back(f < 5.0 ? 0.0 : 50.0);
  }
  lp::BoostConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  const auto model = lp::fit(x, y, cfg);
  EXPECT_LT(mse(model, x, y), 1e-6);

  const auto oracle = brute_force_split(x.data, y);
  const auto& root = model.trees.at(0).nodes.at(0);
  ASSERT_FALSE(root.leaf());
  EXPECT_DOUBLE_EQ(root.threshold, oracle.threshold);
  EXPECT_NEAR(model.predict(std::vector<double>{0.0}), oracle.left_mean, 1e-9);
  EXPECT_NEAR(model.predict(std::vector<double>{9.9}), oracle.right_mean, 1e-9);

  // The default configuration also drives the step to near zero error.
  lp::BoostConfig defaults;
  defaults.n_trees = 600;
  EXPECT_LT(mse(lp::fit(x, y, defaults), x, y), 1e-6);
}

TEST(Train, RootSplitMatchesBruteForceOnNoisyData) {
  std::mt19937_64 rng(11);
  lp::Matrix x{1, {}};
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    const double f = static_cast<double>(rng() % 50);
    x.data.push_back(f);
    y.push_back(std::sin(f / 7.0) * 10.0 + static_cast<double>(rng() % 100) / 50.0);
  }
  lp::BoostConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  cfg.min_leaf_rows = 1;
  const auto model = lp::fit(x, y, cfg);
  const auto oracle = brute_force_split(x.data, y);
  EXPECT_DOUBLE_EQ(model.trees[0].nodes[0].threshold, oracle.threshold);
  EXPECT_NEAR(mse(model, x, y) * 60.0, oracle.sse, 1e-9);
}

TEST(Train, GainTiesPreferLowestFeatureThenThreshold) {
  lp::BoostConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  cfg.min_leaf_rows = 1;

  // Splits at 1.5 and 2.5 have equal gain.
  lp::Matrix x{1, {1.0, 2.0, 3.0}};
  auto m = lp::fit(x, {0.0, 10.0, 0.0}, cfg);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, 1.5);

  // Identical columns: feature 0 wins.
  lp::Matrix twin{2, {1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0}};
  m = lp::fit(twin, {0.0, 0.0, 8.0, 8.0}, cfg);
  EXPECT_EQ(m.trees[0].nodes[0].feature, 0);
}

TEST(Predict, HandBuiltTreeAndTieRule) {
  lp::Ensemble e;
  e.base_score = 1.0;
  e.learning_rate = 0.5;
  lp::RegressionTree t;
  t.nodes = {{2, 4.0, 1, 2, 0.0}, {-1, 0, -1, -1, 6.0}, {-1, 0, -1, -1, -2.0}};
  e.trees = {t, t};
  std::vector<double> x(5, 0.0);
  x[2] = 3.0;
  EXPECT_DOUBLE_EQ(e.predict(x), 1.0 + 0.5 * (6.0 + 6.0));
  x[2] = 4.0;  // equal to the threshold goes right
  EXPECT_DOUBLE_EQ(e.predict(x), 1.0 + 0.5 * (-2.0 + -2.0));
  x[2] = std::nextafter(4.0, 0.0);
  EXPECT_DOUBLE_EQ(e.predict(x), 7.0);
}

TEST(Predict, InverseTransformAndClamp) {
  lp::TrainedModel m;
  m.schema_hash = lf::schema_hash();
  m.power = {lp::Transform::Log1p, {std::log1p(250.0), 0.05, {}}};
  m.tns = {lp::Transform::Identity, {-3.0, 0.05, {}}};
  const auto f = lp::predict(m, zero_vector());
  EXPECT_NEAR(f.power_uW, 250.0, 1e-9);
  EXPECT_EQ(f.tns_ns, 0.0);
}

TEST(Predict, SchemaMismatchIsRejected) {
  const auto model = lp::train(small_synthetic(), quick());
  auto fv = zero_vector();
  fv.schema_version = lf::kSchemaVersion + 1;
  EXPECT_EQ(code_of([&] { lp::predict(model, fv); }), Code::SchemaMismatch);
  fv = zero_vector();
  fv.values.pop_back();
  EXPECT_EQ(code_of([&] { lp::predict(model, fv); }), Code::SchemaMismatch);
}

TEST(Train, ErrorsAreDistinct) {
  EXPECT_EQ(code_of([] { lp::train({}, {}); }), Code::EmptyDataset);

  auto data = small_synthetic();
  data.schema_version = 99;
  EXPECT_EQ(code_of([&] { lp::train(data, quick()); }), Code::SchemaMismatch);

  data = small_synthetic();
  data.rows[3].features.values.resize(5);
  EXPECT_EQ(code_of([&] { lp::train(data, quick()); }), Code::SchemaMismatch);

  data = small_synthetic();
  data.rows[7].power_uW = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { lp::train(data, quick()); }), Code::NonFiniteTarget);

  data = small_synthetic();
  data.rows[7].tns_ns = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { lp::train(data, quick()); }), Code::NonFiniteTarget);

  auto cfg = quick();
  cfg.learning_rate = 0.0;
  EXPECT_EQ(code_of([&] { lp::train(small_synthetic(), cfg); }), Code::InvalidConfig);
  cfg = quick();
  cfg.max_depth = 0;
  EXPECT_EQ(code_of([&] { lp::train(small_synthetic(), cfg); }), Code::InvalidConfig);
}

TEST(Train, DeterministicBytes) {
  const auto a = lp::serialize_model(lp::train(small_synthetic(), quick()));
  const auto b = lp::serialize_model(lp::train(small_synthetic(), quick()));
  EXPECT_EQ(a, b);

  auto cfg = quick();
  cfg.row_subsample = 0.7;
  cfg.feature_subsample = 0.5;
  cfg.seed = 42;
  const auto c = lp::serialize_model(lp::train(small_synthetic(), cfg));
  EXPECT_EQ(c, lp::serialize_model(lp::train(small_synthetic(), cfg)));
  EXPECT_NE(c, a);
}

TEST(Train, TrainingMseIsNonIncreasing) {
  const auto& data = synthetic();
  lp::Matrix x{lf::feature_names().size(), {}};
  std::vector<double> power, tns;
  for (const auto& r : data.rows) {
    x.data.insert(x.data.end(), r.features.values.begin(), r.features.values.end());
    power.push_back(std::log1p(r.power_uW));
    tns.push_back(r.tns_ns);
  }
  for (const auto* y : {&power, &tns}) {
    std::vector<double> trace;
    lp::fit(x, *y, {}, &trace);
    ASSERT_EQ(trace.size(), 200u);
    for (std::size_t i = 1; i < trace.size(); ++i)
      EXPECT_LE(trace[i], trace[i - 1] * (1.0 + 1e-12)) << "tree " << i;
  }
}

TEST(Train, IdentityPredictionsStayNearTargetRange) {
  const auto& data = synthetic();
  const auto model = lp::train(data, {});
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : data.rows) {
    lo = std::min(lo, r.tns_ns);
    hi = std::max(hi, r.tns_ns);
  }
  const double eps = 1e-6 * (hi - lo);
  std::vector<lf::FeatureVector> inputs;
  for (const auto& r : data.rows) inputs.push_back(r.features);
  for (const auto& path : lorecast::testing::corpus_files()) {
    auto parsed = lorecast::verilog::parse(lorecast::testing::read_file(path));
    ASSERT_TRUE(parsed.ok());
    inputs.push_back(lf::extract_features(parsed.forest, {5.0, 0.7, lf::Effort::High}));
  }
  for (const auto& fv : inputs) {
    const double p = lp::predict(model, fv).tns_ns;
    EXPECT_GE(p, lo - eps);
    EXPECT_LE(p, hi + eps);
  }
}

TEST(Evaluate, MeanPredictorHasZeroRSquared) {
  const auto data = small_synthetic();
  double sp = 0, st = 0;
  for (const auto& r : data.rows) sp += r.power_uW, st += r.tns_ns;
  lp::TrainedModel m;
  m.schema_hash = lf::schema_hash();
  lp::RegressionTree zero;
  zero.nodes.push_back({});
  m.power = {lp::Transform::Identity, {sp / data.rows.size(), 0.05, {zero}}};
  m.tns = {lp::Transform::Identity, {st / data.rows.size(), 0.05, {zero}}};
  const auto ev = lp::evaluate(m, data);
  EXPECT_NEAR(*ev.power.r2, 0.0, 1e-12);
  EXPECT_NEAR(*ev.tns.r2, 0.0, 1e-12);
  EXPECT_EQ(code_of([&] { lp::evaluate(m, {}); }), Code::EmptyDataset);
}

TEST(Evaluate, HeldOutSyntheticLinearTargets) {
  lp::Dataset train, test;
  const auto& data = synthetic();
  for (std::size_t i = 0; i < data.rows.size(); ++i)
    (i % 5 == 4 ? test : train).rows.push_back(data.rows[i]);
  const auto model = lp::train(train, {});
  const auto ev = lp::evaluate(model, test);
  EXPECT_GE(*ev.power.r2, 0.9);
  EXPECT_GE(*ev.tns.r2, 0.9);
}

TEST(ModelFile, RoundTripPreservesEverything) {
  auto model = lp::train(small_synthetic(), quick());
  model.timestamp = "2026-01-01T00:00:00Z";
  const auto path = std::filesystem::temp_directory_path() / "lorecast_roundtrip.lcmodel.json";
  lp::save_model(model, path);
  const auto loaded = lp::load_model(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded, model);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto fv = random_vector(rng);
    const auto a = lp::predict(model, fv), b = lp::predict(loaded, fv);
    EXPECT_EQ(a.power_uW, b.power_uW);
    EXPECT_EQ(a.tns_ns, b.tns_ns);
  }
}

TEST(ModelFile, HeaderMismatchesAreDistinct) {
  const auto text = lp::serialize_model(lp::train(small_synthetic(), quick()));
  auto edit = [&](auto&& mutate) {
    auto j = nlohmann::json::parse(text);
    mutate(j);
    return j.dump();
  };
  EXPECT_EQ(code_of([&] { lp::deserialize_model(edit([](auto& j) { j["format_version"] = 2; })); }),
            Code::VersionMismatch);
  EXPECT_EQ(code_of([&] { lp::deserialize_model(edit([](auto& j) { j["schema_version"] = 7; })); }),
            Code::SchemaMismatch);
  EXPECT_EQ(code_of([&] {
              lp::deserialize_model(edit([](auto& j) { j["schema_hash"] = "0000000000000000"; }));
            }),
            Code::SchemaHashMismatch);
  EXPECT_EQ(code_of([&] {
              lp::deserialize_model(
                  edit([](auto& j) { j["power"]["trees"][0][0]["left"] = 0; }));
            }),
            Code::CorruptFile);
  EXPECT_EQ(code_of([&] {
              lp::deserialize_model(
                  edit([](auto& j) { j["tns"]["trees"][0][0]["feature"] = 32; }));
            }),
            Code::CorruptFile);
  EXPECT_EQ(code_of([&] { lp::deserialize_model(edit([](auto& j) { j["power"]["trees"] = nlohmann::json::array(); })); }),
            Code::CorruptFile);
}

TEST(ModelFile, TruncationIsReportedAsCorrupt) {
  const auto text = lp::serialize_model(lp::train(small_synthetic(), quick()));
  std::mt19937_64 rng(17);
  for (int i = 0; i < 60; ++i) {
    const auto cut = static_cast<std::size_t>(rng() % (text.size() - 2));
    EXPECT_EQ(code_of([&] { lp::deserialize_model(text.substr(0, cut)); }), Code::CorruptFile)
        << "cut at " << cut;
  }
  EXPECT_EQ(code_of([] { lp::load_model("/nonexistent/model.lcmodel.json"); }), Code::Io);
}

TEST(Dataset, CsvRoundTripAndAbsoluteTns) {
  auto data = small_synthetic();
  data.rows.resize(10);
  data.rows[2].tns_ns = 1.25;
  std::stringstream ss;
  lp::write_dataset_csv(ss, data);
  std::string text = ss.str();
  // A negative TNS in the file is stored as its magnitude.
  const auto pos = text.find(",1.25\n");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 6, ",-1.25\n");
  std::istringstream in(text);
  const auto back = lp::read_dataset_csv(in);
  ASSERT_EQ(back.rows.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(back.rows[i].design, data.rows[i].design);
    EXPECT_EQ(back.rows[i].features.values, data.rows[i].features.values);
    EXPECT_EQ(back.rows[i].power_uW, data.rows[i].power_uW);
    EXPECT_EQ(back.rows[i].tns_ns, data.rows[i].tns_ns);
  }
}

TEST(Dataset, HeaderWithoutDesignColumnAndBadHeader) {
  std::string header;
  for (auto n : lf::feature_names()) header += std::string(n) + ",";
  std::string row;
  for (std::size_t i = 0; i < lf::feature_names().size(); ++i) row += "1,";
  std::istringstream ok(header + "power_uW,tns_ns\n" + row + "10,-2\n");
  const auto data = lp::read_dataset_csv(ok);
  ASSERT_EQ(data.rows.size(), 1u);
  EXPECT_EQ(data.rows[0].tns_ns, 2.0);

  std::istringstream bad("design,reg_bit_total,power_uW,tns_ns\nx,1,2,3\n");
  EXPECT_EQ(code_of([&] { lp::read_dataset_csv(bad); }), Code::SchemaMismatch);
  std::istringstream short_row(header + "power_uW,tns_ns\n1,2,3\n");
  EXPECT_EQ(code_of([&] { lp::read_dataset_csv(short_row); }), Code::SchemaMismatch);
}

TEST(Synthetic, GeneratedDesignsParseAndRoundTrip) {
  for (const auto& d : lp::synthetic_designs(300, 9)) {
    const auto parsed = lorecast::verilog::parse(d.source);
    ASSERT_TRUE(parsed.ok()) << d.source << lorecast::verilog::render_report(parsed.report, d.name);
    const auto again = lorecast::verilog::parse(lorecast::verilog::pretty_print(parsed.forest));
    ASSERT_TRUE(again.ok());
    EXPECT_TRUE(lorecast::verilog::isomorphic(again.forest, parsed.forest));
  }
  EXPECT_EQ(lp::synthetic_designs(5, 1)[4].source, lp::synthetic_designs(5, 1)[4].source);
}
