#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_schema_check.hpp"
#include "lorecast/cli/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using lorecast::cli::run;
using lorecast::testing::fixture;
using lorecast::testing::read_file;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const lorecast::cli::Env& env = {}) {
  std::ostringstream out, err;
  const int code = run(args, out, err, env);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / fs::path("lorecast-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string f(const std::string& rel) { return fixture(rel).string(); }

const std::string kModel = "models/synthetic.lcmodel.json";

}  // namespace

TEST(Cli, HelpExitsZeroAndUnknownCommandIsUsage) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  auto r = invoke({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"check"}).code, 2);
}

TEST(Cli, CheckCleanAndBroken) {
  auto ok = invoke({"check", f("corpus/counter.v")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  auto doc = json::parse(ok.out);
  EXPECT_TRUE(doc["ok"].get<bool>());
  EXPECT_TRUE(doc["diagnostics"].empty());

  TempDir tmp;
  const auto bad = tmp.file("bad.v");
  write(bad, "module m(input a, output b);\n  assign b = a\nendmodule\n");
  auto r = invoke({"check", bad});
  EXPECT_EQ(r.code, 1);
  doc = json::parse(r.out);
  EXPECT_FALSE(doc["ok"].get<bool>());
  ASSERT_FALSE(doc["diagnostics"].empty());
  // The missing ';' belongs to the assign on line 2.
  EXPECT_EQ(doc["diagnostics"][0]["line"].get<int>(), 2);
}

TEST(Cli, MissingFileIsUsageErrorOnStderr) {
  auto r = invoke({"check", "/nonexistent/x.v"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("cannot read"), std::string::npos);
}

TEST(Cli, FeaturesJsonAndCsv) {
  auto r = invoke({"features", f("corpus/alu.v"), "--clock", "2.0"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["schema_version"].get<int>(), 1);
  EXPECT_DOUBLE_EQ(doc["clock_period_ns"].get<double>(), 2.0);

  auto csv = invoke({"features", f("corpus/alu.v"), "--clock", "2.0", "--format", "csv"});
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 2);
  EXPECT_EQ(csv.out.rfind("schema_version,", 0), 0u);
}

TEST(Cli, FeaturesWithoutClockIsUsageError) {
  auto r = invoke({"features", f("corpus/alu.v")});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, FeaturesOfBrokenFileIsDomainFailure) {
  TempDir tmp;
  write(tmp.file("b.v"), "module m;\n  wire\nendmodule\n");
  auto r = invoke({"features", tmp.file("b.v"), "--clock", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MatchRateIdentityIsHundred) {
  auto r = invoke({"match-rate", f("corpus/alu.v"), f("corpus/alu.v")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out)["smr_percent"].get<double>(), 100.0);
}

TEST(Cli, EvalOnTheGpt4Table) {
  auto r = invoke({"eval", f("tables/lorecast_gpt4.csv"), f("tables/truth.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_NEAR(doc["power"]["apme_percent"].get<double>(), 1.47, 0.05);
  EXPECT_NEAR(doc["power"]["nrmse_percent"].get<double>(), 3.47, 0.1);
  EXPECT_NEAR(doc["tns"]["apme_percent"].get<double>(), 0.72, 0.05);
  EXPECT_GE(doc["power"]["r2"].get<double>(), 0.99);
  EXPECT_TRUE(doc.contains("conditional"));
}

TEST(Cli, EvalWithNoSyntaxCorrectRowsIsDomainFailure) {
  TempDir tmp;
  write(tmp.file("p.csv"), "design,syntax,power_uW,tns_ns\nright_shifter,0,,\n");
  auto r = invoke({"eval", tmp.file("p.csv"), f("tables/truth.csv"), "--target", "power"});
  EXPECT_EQ(r.code, 1);
  auto doc = json::parse(r.out);
  EXPECT_TRUE(doc["power"].contains("error"));
  EXPECT_DOUBLE_EQ(doc["conditional"]["power"]["syntax_rate"].get<double>(), 0.0);
}

TEST(Cli, EvalUnknownDesignIsDomainFailure) {
  TempDir tmp;
  write(tmp.file("p.csv"), "design,power_uW,tns_ns\nnot_a_design,1,1\n");
  EXPECT_EQ(invoke({"eval", tmp.file("p.csv"), f("tables/truth.csv")}).code, 1);
}

TEST(Cli, TrainIsReproducibleWithoutTimestamp) {
  TempDir tmp;
  ASSERT_EQ(invoke({"synth", "-n", "120", "--seed", "3", "-o", tmp.file("d.csv")}).code, 0);
  const std::vector<std::string> base = {"train", tmp.file("d.csv"), "--trees", "20", "--no-timestamp", "-o"};
  auto a = base, b = base;
  a.push_back(tmp.file("a.json"));
  b.push_back(tmp.file("b.json"));
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  EXPECT_EQ(read_file(tmp.file("a.json")), read_file(tmp.file("b.json")));

  auto stamped = base;
  stamped.erase(stamped.begin() + 4);
  stamped.push_back(tmp.file("c.json"));
  ASSERT_EQ(invoke(stamped).code, 0);
  EXPECT_FALSE(json::parse(read_file(tmp.file("c.json")))["metadata"]["timestamp"].get<std::string>().empty());
}

TEST(Cli, TrainRejectsSchemaMismatchAndBadConfig) {
  TempDir tmp;
  write(tmp.file("d.csv"), "design,a,b\nx,1,2\n");
  EXPECT_EQ(invoke({"train", tmp.file("d.csv"), "-o", tmp.file("m.json")}).code, 1);
  ASSERT_EQ(invoke({"synth", "-n", "20", "-o", tmp.file("s.csv")}).code, 0);
  EXPECT_EQ(invoke({"train", tmp.file("s.csv"), "-o", tmp.file("m.json"), "--lr", "0"}).code, 2);
}

TEST(Cli, ForecastDirectCode) {
  auto r = invoke({"forecast", f("corpus/counter.v"), "-m", f(kModel), "--clock", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["status"], "ok");
  EXPECT_EQ(doc["model_id_used"], "direct");
  const auto schema = json::parse(read_file(lorecast::testing::source_path("schemas/forecast_result.schema.json")));
  EXPECT_TRUE(lorecast::testing::schema_errors(schema, doc).empty());
}

TEST(Cli, ForecastSpecThroughReplay) {
  auto r = invoke({"forecast", f("promptgen/counter.json"), "-m", f(kModel), "--clock", "2", "--replay",
                   f("replay/counter_fix.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["session"]["attempt_count"].get<int>(), 2);
  EXPECT_GE(doc["forecast"]["power_uW"].get<double>(), 0.0);
}

TEST(Cli, RefusalIsExitOneWithoutForecast) {
  auto r = invoke({"forecast", f("promptgen/counter.json"), "-m", f(kModel), "--clock", "2", "--replay",
                   f("replay/counter_broken.jsonl")});
  EXPECT_EQ(r.code, 1);
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["status"], "refused");
  EXPECT_FALSE(doc.contains("forecast"));
  EXPECT_FALSE(doc["diagnostics"].empty());
  EXPECT_EQ(doc["session"]["outcome"], "MaxIterationsExhausted");
}

TEST(Cli, BackendFailureIsExitThree) {
  auto r = invoke({"forecast", f("promptgen/counter.json"), "-m", f(kModel), "--clock", "2", "--endpoint",
                   "http://127.0.0.1:1/v1", "--model-id", "m", "--timeout", "0.3", "--max-attempts", "1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("network"), std::string::npos);
}

TEST(Cli, ForecastWithoutBackendOrModelIsUsage) {
  EXPECT_EQ(invoke({"forecast", f("promptgen/counter.json"), "-m", f(kModel), "--clock", "2"}).code, 2);
  EXPECT_EQ(invoke({"forecast", f("corpus/counter.v"), "--clock", "2"}).code, 2);
  EXPECT_EQ(invoke({"forecast", f("corpus/counter.v"), "-m", "/nonexistent.json", "--clock", "2"}).code, 2);
}

TEST(Cli, BatchExitReflectsWorstItem) {
  TempDir tmp;
  write(tmp.file("bad.v"), "module m(;\nendmodule\n");
  auto r = invoke({"forecast", "--batch", "-j", "2", f("corpus/counter.v"), tmp.file("bad.v"), "-m", f(kModel),
                   "--clock", "2"});
  EXPECT_EQ(r.code, 1);
  auto doc = json::parse(r.out);
  ASSERT_EQ(doc["items"].size(), 2u);
  EXPECT_EQ(doc["items"][0]["status"], "ok");
  EXPECT_EQ(doc["items"][1]["status"], "refused");
  EXPECT_DOUBLE_EQ(doc["syntax_rate"].get<double>(), 0.5);
}

TEST(Cli, GenerateWritesCodeAndSession) {
  TempDir tmp;
  auto r = invoke({"generate", f("promptgen/counter.json"), "--replay", f("replay/counter_ok.json"), "-o",
                   tmp.file("out.v"), "--session-dir", tmp.file("sessions")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_file(tmp.file("out.v")).find("module up_counter"), std::string::npos);
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["outcome"], "SyntaxOk");
  ASSERT_TRUE(doc["log_path"].is_string());
  EXPECT_TRUE(fs::exists(doc["log_path"].get<std::string>()));
}

TEST(Cli, GenerateExhaustedIsDomainFailure) {
  auto r = invoke({"generate", f("promptgen/counter.json"), "--replay", f("replay/counter_broken.jsonl"),
                   "--max-iterations", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["attempts"].size(), 3u);
}

TEST(Cli, InvalidSpecIsUsageError) {
  TempDir tmp;
  write(tmp.file("s.json"), R"({"module_name": "module", "ports": [], "behavior": "x"})");
  EXPECT_EQ(invoke({"generate", tmp.file("s.json"), "--replay", f("replay/counter_ok.json")}).code, 2);
}

TEST(Cli, JsonOutputIsASingleDocument) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"check", f("corpus/alu.v")},
           {"features", f("corpus/alu.v"), "--clock", "1"},
           {"match-rate", f("corpus/alu.v"), f("corpus/counter.v")},
           {"eval", f("tables/rtllm.csv"), f("tables/truth.csv")},
           {"config"}}) {
    auto r = invoke(args);
    EXPECT_NO_THROW((void)json::parse(r.out)) << args[0];
  }
}

// Each setting can come from four layers. For every subset of layers that
// set it, the highest one present must win.
TEST(Cli, ConfigPrecedenceMatrix) {
  TempDir tmp;
  const auto cfg_path = tmp.file("cfg.json");
  write(cfg_path, R"({"max_iterations": 4, "eda": {"clock_period_ns": 4.0, "effort": "low"},
                      "backend": {"model_id": "file-model"}})");

  struct Setting {
    std::string flag, env_var, env_value, flag_value;
    std::function<json(const json&)> get;
    json def, file, env, cli;
  };
  const std::vector<Setting> settings = {
      {"--max-iterations", "LORECAST_MAX_ITERATIONS", "6", "8", [](const json& d) { return d["max_iterations"]; },
       10, 4, 6, 8},
      {"--clock", "LORECAST_CLOCK_NS", "6.0", "8.0", [](const json& d) { return d["eda"]["clock_period_ns"]; },
       nullptr, 4.0, 6.0, 8.0},
      {"--effort", "LORECAST_EFFORT", "medium", "high", [](const json& d) { return d["eda"]["effort"]; }, "medium",
       "low", "medium", "high"},
      {"--model-id", "LORECAST_MODEL_ID", "env-model", "cli-model",
       [](const json& d) { return d["backend"]["model_id"]; }, "", "file-model", "env-model", "cli-model"},
  };

  for (const auto& s : settings) {
    for (int mask = 0; mask < 8; ++mask) {
      const bool use_file = mask & 1, use_env = mask & 2, use_flag = mask & 4;
      std::vector<std::string> args = {"config"};
      lorecast::cli::Env env;
      if (use_file) args = {"--config", cfg_path, "config"};
      if (use_env) env[s.env_var] = s.env_value;
      if (use_flag) {
        args.push_back(s.flag);
        args.push_back(s.flag_value);
      }
      auto r = invoke(args, env);
      ASSERT_EQ(r.code, 0) << r.err;
      const json expected = use_flag ? s.cli : use_env ? s.env : use_file ? s.file : s.def;
      EXPECT_EQ(s.get(json::parse(r.out)), expected) << s.flag << " mask=" << mask;
    }
  }
}

TEST(Cli, ConfigFileFromEnvironment) {
  TempDir tmp;
  write(tmp.file("c.json"), R"({"eda": {"target_utilization": 0.5}})");
  auto r = invoke({"config"}, {{"LORECAST_CONFIG", tmp.file("c.json")}});
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(r.out)["eda"]["target_utilization"].get<double>(), 0.5);
}

TEST(Cli, BadConfigValuesAreUsageErrors) {
  TempDir tmp;
  write(tmp.file("c.json"), "{ not json");
  EXPECT_EQ(invoke({"--config", tmp.file("c.json"), "config"}).code, 2);
  EXPECT_EQ(invoke({"config"}, {{"LORECAST_MAX_ITERATIONS", "ten"}}).code, 2);
  EXPECT_EQ(invoke({"config", "--effort", "extreme"}).code, 2);
  EXPECT_EQ(invoke({"config", "--util", "1.5"}).code, 2);
  EXPECT_EQ(invoke({"check", f("corpus/alu.v"), "--format", "csv"}).code, 2);
}
