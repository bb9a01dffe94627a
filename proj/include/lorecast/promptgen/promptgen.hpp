#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lorecast/verilog/diagnostic.hpp"

namespace lorecast::promptgen {

class PromptError : public std::invalid_argument {
 public:
  enum class Code { InvalidIdentifier, DuplicatePort, InvalidSpec, ReportIsClean, Template };
  PromptError(Code code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  [[nodiscard]] Code code() const { return code_; }

 private:
  Code code_;
};

enum class PortDir { In, Out, InOut };
std::string_view port_dir_name(PortDir d);  // "in", "out", "inout"

struct Port {
  std::string name;
  PortDir dir = PortDir::In;
  int width_bits = 1;
};

struct ClockSpec {
  std::string name;
  std::string edge = "pos";  // pos | neg
};

struct ResetSpec {
  std::string name;
  std::string active = "high";  // high | low
  bool sync = true;
};

struct DesignSpec {
  std::string module_name;
  std::vector<Port> ports;
  std::optional<ClockSpec> clock;
  std::optional<ResetSpec> reset;
  std::string behavior;
  std::string constraints;       // optional, empty when absent
  std::string pseudocode_hints;  // optional, empty when absent

  /// Throws PromptError for an illegal identifier, duplicate port, or a
  /// clock/reset that is not among the ports.
  void validate() const;
};

bool is_verilog_identifier(std::string_view s);

DesignSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DesignSpec& spec);
DesignSpec load_spec(const std::filesystem::path& path);

/// Template texts by name. Missing names fall back to the built-in copies.
class TemplateSet {
 public:
  static const std::vector<std::string>& names();
  static TemplateSet builtin();
  /// Built-in templates overridden by any `<name>.txt` found in `dir`.
  static TemplateSet from_directory(const std::filesystem::path& dir);

  [[nodiscard]] const std::string& get(std::string_view name) const;
  /// Digest of all template texts; logged with every session.
  [[nodiscard]] std::string version() const;

 private:
  std::map<std::string, std::string, std::less<>> texts_;
};

/// Replaces every `{{field}}`. Throws PromptError(Template) for a placeholder
/// without a value.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& fields);

struct Section {
  std::string name;
  std::string text;
};

struct RepicPrompt {
  std::vector<Section> sections;  // role_preamble, interface_contract,
                                  // functional_description,
                                  // pseudocode_first_instruction,
                                  // output_format_rules
  std::string rendered_text;
};

RepicPrompt build_repic(const DesignSpec& spec, const TemplateSet& templates = TemplateSet::builtin());

inline constexpr std::size_t kMaxFeedbackDiagnostics = 5;

struct DigestEntry {
  verilog::SyntaxDiagnostic diagnostic;
  int line = 0;           // line of prior_code the entry points at
  std::string line_text;  // that line, verbatim
  std::string rendered;
};

struct FeedbackPrompt {
  std::string prior_code;
  std::vector<DigestEntry> error_digest;
  std::string correction_instruction;
  int attempt_index = 1;
  std::string rendered_text;
};

/// Keeps the first kMaxFeedbackDiagnostics diagnostics in source order. A
/// diagnostic past the last line (end of input) points at the last
/// non-blank line instead.
FeedbackPrompt build_feedback(std::string_view prior_code, const verilog::SyntaxReport& report,
                              int attempt_index,
                              const TemplateSet& templates = TemplateSet::builtin());

/// Verilog from a model response: the last fenced block tagged as Verilog or
/// containing `module`; failing that, the text from the first `module` to
/// the last `endmodule`. The result ends with exactly one newline.
std::optional<std::string> extract_code(std::string_view response);

}  // namespace lorecast::promptgen
