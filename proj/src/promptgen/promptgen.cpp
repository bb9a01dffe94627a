#include "lorecast/promptgen/promptgen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lorecast/digest.hpp"

namespace lorecast::promptgen {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kBuiltinTemplates[];
extern const std::size_t kBuiltinTemplateCount;
}  // namespace detail

using Code = PromptError::Code;
using nlohmann::json;

std::string_view port_dir_name(PortDir d) {
  switch (d) {
    case PortDir::In: return "in";
    case PortDir::Out: return "out";
    case PortDir::InOut: return "inout";
  }
  return "?";
}

namespace {

const std::set<std::string, std::less<>>& reserved_words() {
  static const std::set<std::string, std::less<>> words = {
      "always", "and", "assign", "begin", "buf", "case", "casex", "casez", "default",
      "defparam", "else", "end", "endcase", "endfunction", "endgenerate", "endmodule",
      "endtask", "for", "function", "generate", "genvar", "if", "initial", "inout", "input",
      "integer", "localparam", "module", "nand", "negedge", "nor", "not", "or", "output",
      "parameter", "posedge", "real", "reg", "signed", "task", "wire", "while", "xnor", "xor"};
  return words;
}

PortDir parse_dir(std::string_view s) {
  if (s == "in" || s == "input") return PortDir::In;
  if (s == "out" || s == "output") return PortDir::Out;
  if (s == "inout") return PortDir::InOut;
  throw PromptError(Code::InvalidSpec, fmt::format("unknown port direction '{}'", s));
}

std::string trim_trailing(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
  return s;
}

// Collapses runs of blank lines left behind by empty optional fields.
std::string squeeze_blank_lines(const std::string& s) {
  std::string out;
  int newlines = 0;
  for (char c : s) {
    if (c == '\n') {
      if (++newlines > 2) continue;
    } else {
      newlines = 0;
    }
    out += c;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == text.npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace

bool is_verilog_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  for (char c : s)
    if (!alpha(c) && !digit(c) && c != '$') return false;
  return !reserved_words().contains(s);
}

void DesignSpec::validate() const {
  if (!is_verilog_identifier(module_name))
    throw PromptError(Code::InvalidIdentifier,
                      fmt::format("module name '{}' is not a legal Verilog identifier", module_name));
  if (ports.empty()) throw PromptError(Code::InvalidSpec, "design has no ports");
  std::set<std::string, std::less<>> seen;
  for (const auto& p : ports) {
    if (!is_verilog_identifier(p.name))
      throw PromptError(Code::InvalidIdentifier,
                        fmt::format("port name '{}' is not a legal Verilog identifier", p.name));
    if (!seen.insert(p.name).second)
      throw PromptError(Code::DuplicatePort, fmt::format("duplicate port '{}'", p.name));
    if (p.width_bits < 1)
      throw PromptError(Code::InvalidSpec, fmt::format("port '{}' has width {}", p.name, p.width_bits));
  }
  if (clock) {
    if (!seen.contains(clock->name))
      throw PromptError(Code::InvalidSpec, fmt::format("clock '{}' is not a port", clock->name));
    if (clock->edge != "pos" && clock->edge != "neg")
      throw PromptError(Code::InvalidSpec, fmt::format("clock edge must be pos or neg, got '{}'", clock->edge));
  }
  if (reset) {
    if (!seen.contains(reset->name))
      throw PromptError(Code::InvalidSpec, fmt::format("reset '{}' is not a port", reset->name));
    if (reset->active != "high" && reset->active != "low")
      throw PromptError(Code::InvalidSpec,
                        fmt::format("reset polarity must be high or low, got '{}'", reset->active));
  }
  if (behavior.empty()) throw PromptError(Code::InvalidSpec, "behavior description is empty");
}

DesignSpec spec_from_json(const json& j) {
  DesignSpec s;
  try {
    s.module_name = j.at("module_name").get<std::string>();
    for (const auto& jp : j.at("ports")) {
      Port p;
      p.name = jp.at("name").get<std::string>();
      p.dir = parse_dir(jp.at("direction").get<std::string>());
      p.width_bits = jp.value("width_bits", 1);
      s.ports.push_back(std::move(p));
    }
    if (auto it = j.find("clock"); it != j.end() && !it->is_null())
      s.clock = ClockSpec{it->at("name").get<std::string>(), it->value("edge", "pos")};
    if (auto it = j.find("reset"); it != j.end() && !it->is_null())
      s.reset = ResetSpec{it->at("name").get<std::string>(), it->value("active", "high"),
                          it->value("sync", true)};
    s.behavior = j.at("behavior").get<std::string>();
    s.constraints = j.value("constraints", "");
    s.pseudocode_hints = j.value("pseudocode_hints", "");
  } catch (const json::exception& e) {
    throw PromptError(Code::InvalidSpec, fmt::format("malformed design spec: {}", e.what()));
  }
  s.validate();
  return s;
}

json to_json(const DesignSpec& s) {
  json ports = json::array();
  for (const auto& p : s.ports)
    ports.push_back({{"name", p.name}, {"direction", port_dir_name(p.dir)}, {"width_bits", p.width_bits}});
  json j = {{"module_name", s.module_name}, {"ports", ports}, {"behavior", s.behavior}};
  if (s.clock) j["clock"] = {{"name", s.clock->name}, {"edge", s.clock->edge}};
  if (s.reset)
    j["reset"] = {{"name", s.reset->name}, {"active", s.reset->active}, {"sync", s.reset->sync}};
  if (!s.constraints.empty()) j["constraints"] = s.constraints;
  if (!s.pseudocode_hints.empty()) j["pseudocode_hints"] = s.pseudocode_hints;
  return j;
}

DesignSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PromptError(Code::InvalidSpec, fmt::format("cannot read {}", path.string()));
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw PromptError(Code::InvalidSpec, fmt::format("{} is not valid JSON", path.string()));
  return spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Templates

const std::vector<std::string>& TemplateSet::names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < detail::kBuiltinTemplateCount; ++i)
      n.emplace_back(detail::kBuiltinTemplates[i].first);
    return n;
  }();
  return names;
}

TemplateSet TemplateSet::builtin() {
  TemplateSet t;
  for (std::size_t i = 0; i < detail::kBuiltinTemplateCount; ++i)
    t.texts_.emplace(detail::kBuiltinTemplates[i].first, detail::kBuiltinTemplates[i].second);
  return t;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw PromptError(Code::Template, fmt::format("template directory {} does not exist", dir.string()));
  auto t = builtin();
  for (const auto& name : names()) {
    const auto file = dir / (name + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    t.texts_[name] = buf.str();
  }
  return t;
}

const std::string& TemplateSet::get(std::string_view name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) throw PromptError(Code::Template, fmt::format("no template '{}'", name));
  return it->second;
}

std::string TemplateSet::version() const {
  std::string all;
  for (const auto& [name, text] : texts_) all += name + '\0' + text + '\0';
  return content_digest(all);
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& fields) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("{{", pos);
    if (open == text.npos) break;
    auto close = text.find("}}", open + 2);
    if (close == text.npos) break;
    out.append(text.substr(pos, open - pos));
    const auto key = std::string(text.substr(open + 2, close - open - 2));
    auto it = fields.find(key);
    if (it == fields.end())
      throw PromptError(Code::Template, fmt::format("template field '{}' has no value", key));
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  return out;
}

// ---------------------------------------------------------------------------
// RePIC

RepicPrompt build_repic(const DesignSpec& spec, const TemplateSet& templates) {
  spec.validate();

  std::string rows;
  for (const auto& p : spec.ports)
    rows += fmt::format("| {} | {} | {} |\n", p.name, port_dir_name(p.dir), p.width_bits);

  std::string timing;
  if (spec.clock)
    timing += fmt::format("\nClock: `{}`, edge: {}.\n", spec.clock->name, spec.clock->edge);
  if (spec.reset)
    timing += fmt::format("{}Reset: `{}`, active: {}, {}.\n", spec.clock ? "" : "\n",
                          spec.reset->name, spec.reset->active,
                          spec.reset->sync ? "synchronous" : "asynchronous");

  const std::map<std::string, std::string> fields = {
      {"module_name", spec.module_name},
      {"port_rows", trim_trailing(rows)},
      {"timing_lines", timing},
      {"behavior", trim_trailing(spec.behavior)},
      {"constraints_block",
       spec.constraints.empty() ? "" : "\nConstraints:\n" + trim_trailing(spec.constraints) + "\n"},
      {"pseudocode_hints_block",
       spec.pseudocode_hints.empty()
           ? ""
           : "\nHints for the pseudocode:\n" + trim_trailing(spec.pseudocode_hints) + "\n"},
  };

  RepicPrompt prompt;
  for (const char* name : {"role_preamble", "interface_contract", "functional_description",
                           "pseudocode_first_instruction", "output_format_rules"}) {
    auto text = trim_trailing(squeeze_blank_lines(render_template(templates.get(name), fields)));
    if (!prompt.rendered_text.empty()) prompt.rendered_text += "\n\n";
    prompt.rendered_text += text;
    prompt.sections.push_back({name, std::move(text)});
  }
  prompt.rendered_text += '\n';
  return prompt;
}

// ---------------------------------------------------------------------------
// Feedback

FeedbackPrompt build_feedback(std::string_view prior_code, const verilog::SyntaxReport& report,
                              int attempt_index, const TemplateSet& templates) {
  if (report.ok())
    throw PromptError(Code::ReportIsClean, "feedback requested for code without syntax errors");
  if (attempt_index < 1)
    throw PromptError(Code::InvalidSpec, fmt::format("attempt index {} < 1", attempt_index));

  const auto lines = split_lines(prior_code);
  int last_text_line = 0;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].find_first_not_of(" \t") != std::string_view::npos) last_text_line = static_cast<int>(i) + 1;

  auto sorted = report.diagnostics;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::pair(a.span.line, a.span.column) < std::pair(b.span.line, b.span.column);
  });
  if (sorted.size() > kMaxFeedbackDiagnostics) sorted.resize(kMaxFeedbackDiagnostics);

  FeedbackPrompt fb;
  fb.prior_code = std::string(prior_code);
  fb.attempt_index = attempt_index;
  std::string digest;
  for (const auto& d : sorted) {
    DigestEntry e;
    e.diagnostic = d;
    e.line = d.span.line;
    if (e.line < 1) e.line = 1;
    if (e.line > static_cast<int>(lines.size())) e.line = std::max(1, last_text_line);
    e.line_text = lines.empty() ? std::string() : std::string(lines[static_cast<std::size_t>(e.line - 1)]);
    e.rendered = fmt::format("- line {}, column {}: {}: {}\n  offending line: `{}`", e.line,
                             d.span.column, verilog::diag_kind_name(d.kind), d.message, e.line_text);
    if (!digest.empty()) digest += '\n';
    digest += e.rendered;
    fb.error_digest.push_back(std::move(e));
  }

  fb.correction_instruction = trim_trailing(templates.get("correction_instruction"));
  fb.rendered_text = render_template(templates.get("feedback"),
                                     {{"attempt_index", std::to_string(attempt_index)},
                                      {"error_digest", digest},
                                      {"prior_code", trim_trailing(fb.prior_code)},
                                      {"correction_instruction", fb.correction_instruction}});
  return fb;
}

// ---------------------------------------------------------------------------
// Code extraction

namespace {

bool verilog_tag(std::string_view info) {
  auto end = info.find_first_of(" \t{");
  std::string tag(info.substr(0, end));
  for (auto& c : tag) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return tag == "verilog" || tag == "v" || tag == "systemverilog" || tag == "sv" || tag == "vlog";
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::size_t find_word(std::string_view text, std::string_view word, std::size_t from = 0) {
  for (auto pos = text.find(word, from); pos != text.npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(text[pos - 1]);
    const bool right = pos + word.size() >= text.size() || !is_word_char(text[pos + word.size()]);
    if (left && right) return pos;
  }
  return text.npos;
}

std::size_t rfind_word(std::string_view text, std::string_view word) {
  std::size_t found = text.npos;
  for (auto pos = find_word(text, word); pos != text.npos; pos = find_word(text, word, pos + 1))
    found = pos;
  return found;
}

std::optional<std::string> normalized(std::string_view code) {
  std::string s(code);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  auto first = s.find_first_not_of("\r\n");
  if (first == std::string::npos) return std::nullopt;
  // Keep indentation of the first line; drop only leading blank lines.
  auto line_start = s.rfind('\n', first);
  s.erase(0, line_start == std::string::npos ? 0 : line_start + 1);
  if (s.find_first_not_of(" \t\r\n") == std::string::npos) return std::nullopt;
  return s + '\n';
}

}  // namespace

std::optional<std::string> extract_code(std::string_view response) {
  struct Block {
    std::string info;
    std::string body;
  };
  std::vector<Block> blocks;
  std::optional<Block> open;
  for (auto line : split_lines(response)) {
    auto stripped = line.substr(std::min(line.find_first_not_of(" \t"), line.size()));
    if (stripped.starts_with("```")) {
      if (open) {
        blocks.push_back(std::move(*open));
        open.reset();
      } else {
        auto info = stripped.substr(3);
        open = Block{std::string(info.substr(std::min(info.find_first_not_of(" \t"), info.size()))), {}};
      }
      continue;
    }
    if (open) {
      open->body.append(line);
      open->body += '\n';
    }
  }
  // A response cut off inside a block still yields its text.
  if (open) blocks.push_back(std::move(*open));

  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (verilog_tag(it->info) || find_word(it->body, "module") != std::string::npos)
      if (auto code = normalized(it->body)) return code;
  }
  if (!blocks.empty()) return std::nullopt;

  const auto first = find_word(response, "module");
  const auto last = rfind_word(response, "endmodule");
  if (first == std::string_view::npos || last == std::string_view::npos || last < first)
    return std::nullopt;
  return normalized(response.substr(first, last + std::string_view("endmodule").size() - first));
}

}  // namespace lorecast::promptgen
