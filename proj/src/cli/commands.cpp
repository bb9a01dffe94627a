#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/cli/cli.hpp"
#include "lorecast/csv.hpp"
#include "lorecast/features/extract.hpp"
#include "lorecast/features/structure.hpp"
#include "lorecast/llm/client.hpp"
#include "lorecast/metrics/metrics.hpp"
#include "lorecast/pipeline/pipeline.hpp"
#include "lorecast/predictor/model.hpp"
#include "lorecast/predictor/synth.hpp"
#include "lorecast/promptgen/promptgen.hpp"
#include "lorecast/verilog/parser.hpp"

namespace lorecast::cli {

using nlohmann::json;

namespace {

// Bad arguments, missing files and configuration problems.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed request whose answer is "no": refusal, failed check.
class DomainFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path));
  out << text;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Env& env;
  CliConfig cfg;

  void emit(const json& doc) const { out << doc.dump(2) << '\n'; }
};

// ---------------------------------------------------------------------------
// Shared option groups

struct Options {
  std::string config_path;
  ConfigOverrides o;
};

void add_format(CLI::App* cmd, Options& opt) {
  cmd->add_option("--format", opt.o.output_format, "Output format: json, csv or text");
}

void add_eda(CLI::App* cmd, Options& opt) {
  cmd->add_option("--clock", opt.o.clock_period_ns, "Target clock period in ns");
  cmd->add_option("--util", opt.o.target_utilization, "Target placement utilization (0, 1]");
  cmd->add_option("--effort", opt.o.effort, "Implementation effort: low, medium or high");
}

void add_backend(CLI::App* cmd, Options& opt) {
  cmd->add_option("--endpoint", opt.o.endpoint_url, "Chat-completions endpoint URL");
  cmd->add_option("--model-id", opt.o.model_id, "LLM model identifier");
  cmd->add_option("--timeout", opt.o.timeout_s, "Per-request timeout in seconds");
  cmd->add_option("--max-attempts", opt.o.max_attempts, "Attempts per request on retryable errors");
  cmd->add_option("--replay", opt.o.replay_path, "Serve responses from a replay script instead");
  cmd->add_option("--max-iterations", opt.o.max_iterations, "Generation attempts per design");
  cmd->add_option("--template-dir", opt.o.template_dir, "Directory overriding prompt templates");
  cmd->add_option("--session-dir", opt.o.session_dir, "Directory for session logs");
}

std::unique_ptr<llm::LlmBackend> make_backend(const Context& ctx) {
  const auto& b = ctx.cfg.backend;
  if (!b.replay_path.empty())
    return std::make_unique<llm::ReplayBackend>(llm::ReplayScript::load(b.replay_path));
  if (b.endpoint_url.empty())
    throw UsageError("no LLM backend configured (set --endpoint and --model-id, or --replay)");
  if (b.model_id.empty()) throw UsageError("no model id configured (--model-id)");
  auto key = ctx.env.find("LORECAST_API_KEY");
  return std::make_unique<llm::HttpBackend>(llm::HttpConfig{
      b.endpoint_url, b.model_id, b.timeout_s, key == ctx.env.end() ? "" : key->second});
}

pipeline::PipelineOptions pipeline_options(const Context& ctx) {
  pipeline::PipelineOptions p;
  p.max_iterations = ctx.cfg.max_iterations;
  p.model_id = ctx.cfg.backend.model_id;
  p.retry.max_attempts = ctx.cfg.backend.max_attempts;
  if (!ctx.cfg.template_dir.empty()) p.templates = promptgen::TemplateSet::from_directory(ctx.cfg.template_dir);
  if (!ctx.cfg.session_dir.empty()) p.session_dir = ctx.cfg.session_dir;
  return p;
}

features::EdaParams eda_of(const Context& ctx) {
  try {
    return ctx.cfg.eda();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

verilog::Forest parse_or_fail(const Context& ctx, const std::string& path) {
  const auto source = read_text(path);
  auto parsed = verilog::parse(source);
  if (!parsed.ok()) {
    ctx.err << verilog::render_report(parsed.report, path);
    throw DomainFailure(fmt::format("{} has syntax errors", path));
  }
  return std::move(parsed.forest);
}

json attempts_summary(const pipeline::GenerationSession& s) {
  json list = json::array();
  for (const auto& a : s.attempts)
    list.push_back({{"index", a.index},
                    {"prompt_kind", pipeline::prompt_kind_name(a.prompt_kind)},
                    {"code_found", a.extracted_code.has_value()},
                    {"syntax_ok", a.syntax_report && a.syntax_report->ok()},
                    {"diagnostics", a.syntax_report ? a.syntax_report->diagnostics.size() : 1}});
  return list;
}

json last_diagnostics(const pipeline::GenerationSession& s) {
  if (s.attempts.empty() || !s.attempts.back().syntax_report) return json::array();
  return pipeline::to_json(*s.attempts.back().syntax_report)["diagnostics"];
}

// ---------------------------------------------------------------------------
// Commands

int cmd_check(Context& ctx, const std::string& path) {
  const auto source = read_text(path);
  const auto report = verilog::check_syntax(source);
  if (ctx.cfg.output_format == Format::Text) {
    ctx.out << verilog::render_report(report, path);
  } else {
    auto doc = pipeline::to_json(report);
    doc["file"] = path;
    ctx.emit(doc);
  }
  return report.ok() ? kOk : kDomainFailure;
}

int cmd_features(Context& ctx, const std::string& path) {
  const auto fv = features::extract_features(parse_or_fail(ctx, path), eda_of(ctx));
  if (fv.unresolved_widths > 0)
    ctx.err << fmt::format("note: {} width expression(s) did not fold and were counted as 1 bit\n",
                           fv.unresolved_widths);
  switch (ctx.cfg.output_format) {
    case Format::Json: ctx.emit(features::to_json(fv)); break;
    case Format::Csv: ctx.out << features::csv_header() << '\n' << features::to_csv_row(fv) << '\n'; break;
    case Format::Text:
      for (std::size_t i = 0; i < fv.values.size(); ++i)
        ctx.out << fmt::format("{:<26} {}\n", features::feature_names()[i], fv.values[i]);
      break;
  }
  return kOk;
}

int cmd_match_rate(Context& ctx, const std::string& a, const std::string& b, int min_nodes, bool no_normalize) {
  const auto fa = parse_or_fail(ctx, a);
  const auto fb = parse_or_fail(ctx, b);
  features::SubtreeMatchConfig cfg;
  cfg.min_subtree_nodes = min_nodes;
  cfg.normalize_identifiers = !no_normalize;
  const double smr = features::subtree_match_rate(fa, fb, cfg);
  if (ctx.cfg.output_format == Format::Text)
    ctx.out << fmt::format("{:.2f}\n", smr);
  else
    ctx.emit({{"smr_percent", smr},
              {"min_subtree_nodes", cfg.min_subtree_nodes},
              {"normalize_identifiers", cfg.normalize_identifiers}});
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::string output;
  predictor::TrainConfig cfg;
  std::string power_transform = "log1p";
  std::string tns_transform = "identity";
  bool no_timestamp = false;
};

int cmd_train(Context& ctx, TrainArgs& args) {
  const auto data = predictor::load_dataset(args.data);
  args.cfg.power_transform = predictor::parse_transform(args.power_transform);
  args.cfg.tns_transform = predictor::parse_transform(args.tns_transform);
  auto model = predictor::train(data, args.cfg);
  if (!args.no_timestamp) model.timestamp = utc_timestamp();
  predictor::save_model(model, args.output);
  ctx.emit({{"output", args.output},
            {"rows", model.row_count},
            {"n_trees", args.cfg.n_trees},
            {"predictor_version", pipeline::predictor_version(model)},
            {"timestamp", model.timestamp}});
  return kOk;
}

struct SynthArgs {
  std::size_t count = 500;
  std::uint64_t seed = 0;
  double noise = 0.01;
  std::string output;
  std::string designs_dir;
};

int cmd_synth(Context& ctx, const SynthArgs& args) {
  const auto data = predictor::synthetic_dataset({args.count, args.seed, args.noise});
  predictor::save_dataset(data, args.output);
  if (!args.designs_dir.empty()) {
    std::filesystem::create_directories(args.designs_dir);
    for (const auto& d : predictor::synthetic_designs(args.count, args.seed))
      write_text((std::filesystem::path(args.designs_dir) / (d.name + ".v")).string(), d.source);
  }
  ctx.emit({{"output", args.output}, {"rows", data.rows.size()}, {"seed", args.seed}, {"noise", args.noise}});
  return kOk;
}

int cmd_generate(Context& ctx, const std::string& spec_path, const std::string& output) {
  const auto spec = promptgen::load_spec(spec_path);
  auto backend = make_backend(ctx);
  const auto session = pipeline::generate_with_ipref(spec, *backend, pipeline_options(ctx));
  if (session.final_code && !output.empty()) write_text(output, *session.final_code);

  if (ctx.cfg.output_format == Format::Text) {
    if (session.final_code) ctx.out << *session.final_code;
  } else {
    auto doc = pipeline::to_json(session, false);
    doc["attempts"] = attempts_summary(session);
    doc["output"] = output.empty() ? json() : json(output);
    ctx.emit(doc);
  }
  switch (session.outcome) {
    case pipeline::Outcome::SyntaxOk: return kOk;
    case pipeline::Outcome::BackendFailed:
      ctx.err << "backend failure: " << session.backend_error << '\n';
      return kBackendFailure;
    default:
      ctx.err << fmt::format("generation ended with {} after {} attempt(s)\n",
                             pipeline::outcome_name(session.outcome), session.attempts.size());
      return kDomainFailure;
  }
}

pipeline::DesignInput load_input(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".json") return promptgen::load_spec(path);
  return pipeline::DirectCode{read_text(path)};
}

json outcome_json(const pipeline::ForecastOutcome& o) {
  if (const auto* r = std::get_if<pipeline::ForecastResult>(&o)) return pipeline::to_json(*r);
  const auto& refusal = std::get<pipeline::Refusal>(o);
  auto doc = pipeline::to_json(refusal);
  doc["diagnostics"] = last_diagnostics(refusal.session);
  return doc;
}

int outcome_code(const pipeline::ForecastOutcome& o) {
  if (std::holds_alternative<pipeline::ForecastResult>(o)) return kOk;
  return std::get<pipeline::Refusal>(o).session.outcome == pipeline::Outcome::BackendFailed ? kBackendFailure
                                                                                             : kDomainFailure;
}

int cmd_forecast(Context& ctx, const std::vector<std::string>& inputs, bool batch, std::size_t jobs) {
  if (inputs.size() > 1 && !batch) throw UsageError("several inputs given; add --batch");
  if (ctx.cfg.model_path.empty()) throw UsageError("no model given (-m/--model or LORECAST_MODEL)");
  const auto model = predictor::load_model(ctx.cfg.model_path);
  const auto eda = eda_of(ctx);
  const auto opts = pipeline_options(ctx);

  std::vector<pipeline::DesignInput> designs;
  bool any_spec = false;
  for (const auto& p : inputs) {
    designs.push_back(load_input(p));
    any_spec = any_spec || std::holds_alternative<promptgen::DesignSpec>(designs.back());
  }

  if (!batch) {
    std::unique_ptr<llm::LlmBackend> backend;
    if (any_spec) backend = make_backend(ctx);
    const auto out = pipeline::forecast(designs[0], model, eda, backend.get(), opts);
    if (ctx.cfg.output_format == Format::Text) {
      if (const auto* r = std::get_if<pipeline::ForecastResult>(&out))
        ctx.out << fmt::format("power_uW {}\ntns_ns {}\n", r->forecast.power_uW, r->forecast.tns_ns);
    } else {
      ctx.emit(outcome_json(out));
    }
    if (const auto* refusal = std::get_if<pipeline::Refusal>(&out)) ctx.err << "refused: " << refusal->reason << '\n';
    return outcome_code(out);
  }

  if (any_spec) make_backend(ctx);  // fail early on a missing backend configuration
  pipeline::BackendFactory factory = [&](std::size_t) { return make_backend(ctx); };
  const auto result = pipeline::batch_forecast(designs, model, eda, factory, opts, std::max<std::size_t>(jobs, 1));
  json items = json::array();
  int code = kOk;
  for (std::size_t i = 0; i < result.items.size(); ++i) {
    auto doc = outcome_json(result.items[i]);
    doc["input"] = inputs[i];
    items.push_back(std::move(doc));
    code = std::max(code, outcome_code(result.items[i]));
  }
  ctx.emit({{"syntax_rate", result.syntax_rate}, {"items", std::move(items)}});
  return code;
}

// Table with named columns, read from a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  }
};

Table read_table(const std::string& path) {
  std::istringstream in(read_text(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw UsageError(fmt::format("'{}' is empty", path));
  for (auto c : csv::split(line)) t.columns.emplace_back(c);
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> row;
    for (auto c : csv::split(line)) row.emplace_back(c);
    if (row.size() != t.columns.size())
      throw UsageError(fmt::format("{}:{}: {} cells, expected {}", path, lineno, row.size(), t.columns.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t need_column(const Table& t, std::string_view name, const std::string& path) {
  auto c = t.column(name);
  if (!c) throw UsageError(fmt::format("'{}' has no '{}' column", path, name));
  return *c;
}

int cmd_eval(Context& ctx, const std::string& pred_path, const std::string& truth_path, const std::string& target) {
  const auto pred = read_table(pred_path);
  const auto truth = read_table(truth_path);
  const auto p_design = need_column(pred, "design", pred_path);
  const auto t_design = need_column(truth, "design", truth_path);
  const auto p_syntax = pred.column("syntax");

  std::map<std::string, const std::vector<std::string>*> by_name;
  for (const auto& row : truth.rows)
    if (!by_name.emplace(row[t_design], &row).second)
      throw DomainFailure(fmt::format("design '{}' appears twice in {}", row[t_design], truth_path));

  std::vector<std::string> targets;
  if (target == "both" || target == "power") targets.push_back("power_uW");
  if (target == "both" || target == "tns") targets.push_back("tns_ns");
  if (targets.empty()) throw UsageError(fmt::format("unknown target '{}' (power, tns, both)", target));

  json doc = {{"n_designs", pred.rows.size()}};
  json csv_rows = json::array();
  int code = kOk;
  for (const auto& col : targets) {
    const auto pc = need_column(pred, col, pred_path);
    const auto tc = need_column(truth, col, truth_path);
    const std::string label = col == "power_uW" ? "power" : "tns";
    metrics::EvalSet set{{}, label};
    std::vector<metrics::ConditionalRow> cond;
    std::set<std::string> seen;
    for (const auto& row : pred.rows) {
      const auto& name = row[p_design];
      if (!seen.insert(name).second) throw DomainFailure(fmt::format("design '{}' appears twice in {}", name, pred_path));
      auto it = by_name.find(name);
      if (it == by_name.end()) throw DomainFailure(fmt::format("design '{}' has no ground truth", name));
      bool ok = true;
      if (p_syntax) {
        const auto& s = row[*p_syntax];
        if (s != "0" && s != "1") throw DomainFailure(fmt::format("design '{}': syntax must be 0 or 1", name));
        ok = s == "1";
      }
      const double truth_value = std::fabs(csv::parse_number((*it->second)[tc]));
      double forecast_value = 0.0;
      if (ok) {
        if (row[pc].empty()) throw DomainFailure(fmt::format("design '{}' has no {} forecast", name, col));
        forecast_value = std::fabs(csv::parse_number(row[pc]));
        set.pairs.push_back({forecast_value, truth_value});
      }
      cond.push_back({ok, forecast_value, truth_value});
    }

    json entry;
    try {
      if (set.pairs.empty()) throw metrics::UndefinedMetric("no syntax-correct designs");
      const auto report = metrics::evaluate(set);
      entry = metrics::to_json(report);
      csv_rows.push_back({label, report.n, report.apme_percent, report.nrmse_percent,
                          report.r2 ? json(*report.r2) : json()});
    } catch (const metrics::UndefinedMetric& e) {
      ctx.err << fmt::format("{}: {}\n", label, e.what());
      entry = {{"label", label}, {"error", e.what()}};
      code = kDomainFailure;
    }
    doc[label] = entry;
    if (p_syntax) doc["conditional"][label] = metrics::to_json(metrics::conditional(cond));
  }

  switch (ctx.cfg.output_format) {
    case Format::Json: ctx.emit(doc); break;
    case Format::Csv:
      ctx.out << "target,n,apme_percent,nrmse_percent,r2\n";
      for (const auto& r : csv_rows)
        ctx.out << fmt::format("{},{},{},{},{}\n", r[0].get<std::string>(), r[1].get<std::size_t>(),
                               r[2].get<double>(), r[3].get<double>(), r[4].is_null() ? "" : r[4].dump());
      break;
    case Format::Text:
      for (const auto& r : csv_rows)
        ctx.out << fmt::format("{:<6} n={} APME={:.2f}% NRMSE={:.2f}% R2={}\n", r[0].get<std::string>(),
                               r[1].get<std::size_t>(), r[2].get<double>(), r[3].get<double>(),
                               r[4].is_null() ? "n/a" : fmt::format("{:.4f}", r[4].get<double>()));
      if (doc.contains("conditional"))
        for (const auto& [label, c] : doc["conditional"].items())
          ctx.out << fmt::format("{:<6} syntax rate={:.4f} E_cond={:.2f}%\n", label, c["syntax_rate"].get<double>(),
                                 c["conditional_error_percent"].get<double>());
      break;
  }
  return code;
}

int map_predictor_error(const predictor::PredictorError& e) {
  using C = predictor::PredictorError::Code;
  switch (e.code()) {
    case C::EmptyDataset:
    case C::SchemaMismatch:
    case C::NonFiniteTarget:
      return kDomainFailure;
    default:
      return kUsageError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Env& env) {
  CLI::App app{"Forecast power and timing of a design from its specification or RTL", "lorecast"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lorecast 0.1.0");
  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file (default: $LORECAST_CONFIG)");

  std::string file_a, file_b, spec_path, output, pred_path, truth_path, target = "both";
  std::vector<std::string> inputs;
  bool batch = false, no_normalize = false;
  std::size_t jobs = 1;
  int min_nodes = 2;
  TrainArgs train;
  SynthArgs synth;

  auto* check = app.add_subcommand("check", "Check Verilog syntax; exit 0 iff clean");
  check->add_option("file", file_a, "Verilog file")->required();
  add_format(check, opt);

  auto* feats = app.add_subcommand("features", "Extract the feature vector of a Verilog file");
  feats->add_option("file", file_a, "Verilog file")->required();
  add_eda(feats, opt);
  add_format(feats, opt);

  auto* smr = app.add_subcommand("match-rate", "Subtree match rate between two Verilog files");
  smr->add_option("a", file_a, "First Verilog file")->required();
  smr->add_option("b", file_b, "Second Verilog file")->required();
  smr->add_option("--min-nodes", min_nodes, "Smallest subtree counted")->check(CLI::PositiveNumber);
  smr->add_flag("--no-normalize", no_normalize, "Compare identifiers literally");
  add_format(smr, opt);

  auto* gen = app.add_subcommand("generate", "Generate Verilog from a design spec with iterative repair");
  gen->add_option("spec", spec_path, "Design spec JSON")->required();
  gen->add_option("-o,--output", output, "Write the final code here");
  add_backend(gen, opt);
  add_format(gen, opt);

  auto* fc = app.add_subcommand("forecast", "Forecast power and TNS for a spec (.json) or Verilog file");
  fc->add_option("inputs", inputs, "Spec JSON or Verilog files")->required();
  fc->add_option("-m,--model", opt.o.model_path, "Trained model (.lcmodel.json)");
  fc->add_flag("--batch", batch, "Forecast several inputs");
  fc->add_option("-j,--jobs", jobs, "Designs run at once in batch mode")->check(CLI::PositiveNumber);
  add_eda(fc, opt);
  add_backend(fc, opt);
  add_format(fc, opt);

  auto* tr = app.add_subcommand("train", "Train a predictor from a dataset CSV");
  tr->add_option("data", train.data, "Dataset CSV")->required();
  tr->add_option("-o,--output", train.output, "Model file to write")->required();
  tr->add_option("--trees", train.cfg.n_trees, "Trees per target");
  tr->add_option("--depth", train.cfg.max_depth, "Maximum tree depth");
  tr->add_option("--lr", train.cfg.learning_rate, "Learning rate");
  tr->add_option("--min-leaf", train.cfg.min_leaf_rows, "Minimum rows per leaf");
  tr->add_option("--seed", train.cfg.seed, "Seed for subsampling");
  tr->add_option("--row-subsample", train.cfg.row_subsample, "Fraction of rows per tree");
  tr->add_option("--feature-subsample", train.cfg.feature_subsample, "Fraction of features per tree");
  tr->add_option("--power-transform", train.power_transform, "identity or log1p");
  tr->add_option("--tns-transform", train.tns_transform, "identity or log1p");
  tr->add_flag("--no-timestamp", train.no_timestamp, "Leave the timestamp out for reproducible bytes");

  auto* ev = app.add_subcommand("eval", "Score forecasts against ground truth");
  ev->add_option("predictions", pred_path, "CSV: design[,syntax],power_uW,tns_ns")->required();
  ev->add_option("truth", truth_path, "CSV: design,power_uW,tns_ns")->required();
  ev->add_option("--target", target, "power, tns or both");
  add_format(ev, opt);

  auto* sy = app.add_subcommand("synth", "Write a synthetic training dataset");
  sy->add_option("-n,--count", synth.count, "Number of designs");
  sy->add_option("--seed", synth.seed, "Generator seed");
  sy->add_option("--noise", synth.noise, "Relative target noise");
  sy->add_option("-o,--output", synth.output, "Dataset CSV to write")->required();
  sy->add_option("--designs-dir", synth.designs_dir, "Also write the generated Verilog here");

  auto* show = app.add_subcommand("config", "Print the resolved configuration");
  add_eda(show, opt);
  add_backend(show, opt);
  show->add_option("-m,--model", opt.o.model_path, "Trained model");
  add_format(show, opt);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    std::optional<json> file;
    std::string config_path = opt.config_path;
    if (config_path.empty()) {
      if (auto it = env.find("LORECAST_CONFIG"); it != env.end()) config_path = it->second;
    }
    if (!config_path.empty()) {
      auto parsed = json::parse(read_text(config_path), nullptr, false);
      if (parsed.is_discarded()) throw UsageError(fmt::format("config '{}' is not valid JSON", config_path));
      file = std::move(parsed);
    }
    Context ctx{out, err, env, {}};
    try {
      ctx.cfg = resolve_config(file ? &*file : nullptr, env, opt.o);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (ctx.cfg.output_format == Format::Csv && !feats->parsed() && !ev->parsed())
      throw UsageError("csv output is only available for features and eval");

    if (check->parsed()) return cmd_check(ctx, file_a);
    if (feats->parsed()) return cmd_features(ctx, file_a);
    if (smr->parsed()) return cmd_match_rate(ctx, file_a, file_b, min_nodes, no_normalize);
    if (gen->parsed()) return cmd_generate(ctx, spec_path, output);
    if (fc->parsed()) return cmd_forecast(ctx, inputs, batch, jobs);
    if (tr->parsed()) return cmd_train(ctx, train);
    if (ev->parsed()) return cmd_eval(ctx, pred_path, truth_path, target);
    if (sy->parsed()) return cmd_synth(ctx, synth);
    if (show->parsed()) {
      ctx.emit(to_json(ctx.cfg));
      return kOk;
    }
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainFailure& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  } catch (const predictor::PredictorError& e) {
    err << "error: " << predictor::error_code_name(e.code()) << ": " << e.what() << '\n';
    return map_predictor_error(e);
  } catch (const promptgen::PromptError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const llm::LlmError& e) {
    err << "error: " << llm::category_name(e.category()) << ": " << e.what() << '\n';
    return e.category() == llm::LlmError::Category::Config ? kUsageError : kBackendFailure;
  } catch (const metrics::UndefinedMetric& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
}

}  // namespace lorecast::cli
