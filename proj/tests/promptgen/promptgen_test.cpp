#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "lorecast/promptgen/promptgen.hpp"
#include "lorecast/verilog/parser.hpp"
#include "mutation_oracle.hpp"
#include "test_support.hpp"

using namespace lorecast::promptgen;
using lorecast::testing::fixture;
using lorecast::testing::read_file;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

template <typename F>
PromptError::Code code_of(F&& f) {
  try {
    f();
  } catch (const PromptError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no PromptError thrown";
  return PromptError::Code::Template;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const char* kSections[] = {"role_preamble", "interface_contract", "functional_description",
                           "pseudocode_first_instruction", "output_format_rules"};

}  // namespace

TEST(Repic, PassthroughHasAllSectionsInOrder) {
  const auto p = build_repic(load_spec(fixture("promptgen/passthrough.json")));
  ASSERT_EQ(p.sections.size(), 5u);
  std::size_t last = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(p.sections[i].name, kSections[i]);
    const auto at = p.rendered_text.find(p.sections[i].text);
    ASSERT_NE(at, std::string::npos) << kSections[i];
    EXPECT_GE(at, last);
    last = at;
  }
  EXPECT_NE(p.rendered_text.find("| a | in | 8 |"), std::string::npos);
  EXPECT_NE(p.rendered_text.find("| y | out | 8 |"), std::string::npos);
  EXPECT_EQ(p.rendered_text.find("Clock:"), std::string::npos);
}

TEST(Repic, ClockedSpecMatchesGolden) {
  const auto spec = load_spec(fixture("promptgen/counter.json"));
  const auto p = build_repic(spec);
  EXPECT_EQ(p.rendered_text, read_file(fixture("promptgen/counter_repic.golden.txt")));
  const auto& contract = p.sections[1].text;
  EXPECT_NE(contract.find("edge: pos"), std::string::npos);
  EXPECT_NE(contract.find("active: low"), std::string::npos);
  EXPECT_NE(contract.find("synchronous"), std::string::npos);
}

TEST(Repic, ExactlyOneOutputFence) {
  for (const char* f : {"promptgen/passthrough.json", "promptgen/counter.json"}) {
    const auto text = build_repic(load_spec(fixture(f))).rendered_text;
    EXPECT_EQ(count_of(text, "```verilog"), 1u);
    EXPECT_EQ(count_of(text, "```"), 2u);
  }
}

TEST(Repic, PseudocodeComesFirst) {
  const auto p = build_repic(load_spec(fixture("promptgen/counter.json")));
  const auto& text = p.sections[3].text;
  const auto pseudo = text.find("pseudocode");
  const auto verilog = text.find("Verilog");
  ASSERT_NE(pseudo, std::string::npos);
  ASSERT_NE(verilog, std::string::npos);
  EXPECT_LT(pseudo, verilog);
}

TEST(Repic, EveryFieldAppears) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    DesignSpec s;
    s.module_name = "m" + std::to_string(rng() % 1000);
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i)
      s.ports.push_back({"p" + std::to_string(i), static_cast<PortDir>(rng() % 3),
                         1 + static_cast<int>(rng() % 64)});
    if (rng() % 2) s.clock = ClockSpec{"p0", rng() % 2 ? "pos" : "neg"};
    if (rng() % 2 && n > 1) s.reset = ResetSpec{"p1", rng() % 2 ? "high" : "low", rng() % 2 == 0};
    s.behavior = "behavior text " + std::to_string(rng());
    if (rng() % 2) s.constraints = "constraint text " + std::to_string(rng());
    if (rng() % 2) s.pseudocode_hints = "hint text " + std::to_string(rng());

    const auto text = build_repic(s).rendered_text;
    EXPECT_EQ(text, build_repic(s).rendered_text);
    EXPECT_NE(text.find(s.module_name), std::string::npos);
    for (const auto& p : s.ports)
      EXPECT_NE(text.find("| " + p.name + " | " + std::string(port_dir_name(p.dir)) + " | " +
                          std::to_string(p.width_bits) + " |"),
                std::string::npos);
    if (s.clock) EXPECT_NE(text.find("edge: " + s.clock->edge), std::string::npos);
    if (s.reset) EXPECT_NE(text.find("active: " + s.reset->active), std::string::npos);
    EXPECT_NE(text.find(s.behavior), std::string::npos);
    if (!s.constraints.empty()) EXPECT_NE(text.find(s.constraints), std::string::npos);
    if (!s.pseudocode_hints.empty()) EXPECT_NE(text.find(s.pseudocode_hints), std::string::npos);
    EXPECT_EQ(text.find("{{"), std::string::npos);
  }
}

TEST(Repic, InvalidSpecs) {
  auto s = load_spec(fixture("promptgen/passthrough.json"));
  auto dup = s;
  dup.ports.push_back({"a", PortDir::In, 1});
  EXPECT_EQ(code_of([&] { build_repic(dup); }), PromptError::Code::DuplicatePort);
  auto bad = s;
  bad.module_name = "3way";
  EXPECT_EQ(code_of([&] { build_repic(bad); }), PromptError::Code::InvalidIdentifier);
  bad.module_name = "module";
  EXPECT_EQ(code_of([&] { build_repic(bad); }), PromptError::Code::InvalidIdentifier);
  auto clk = s;
  clk.clock = ClockSpec{"clk", "pos"};
  EXPECT_EQ(code_of([&] { build_repic(clk); }), PromptError::Code::InvalidSpec);
  EXPECT_EQ(code_of([] { spec_from_json(nlohmann::json{{"module_name", "x"}}); }),
            PromptError::Code::InvalidSpec);
}

TEST(Repic, SpecJsonRoundTrip) {
  const auto s = load_spec(fixture("promptgen/counter.json"));
  const auto back = spec_from_json(to_json(s));
  EXPECT_EQ(build_repic(back).rendered_text, build_repic(s).rendered_text);
}

TEST(Templates, DirectoryOverridesSingleFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "lorecast_tmpl_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "role_preamble.txt") << "CUSTOM ROLE for {{module_name}}\n";
  }
  const auto t = TemplateSet::from_directory(dir);
  std::filesystem::remove_all(dir);
  const auto p = build_repic(load_spec(fixture("promptgen/passthrough.json")), t);
  EXPECT_EQ(p.sections[0].text, "CUSTOM ROLE for passthrough");
  EXPECT_EQ(p.sections[4].text, build_repic(load_spec(fixture("promptgen/passthrough.json"))).sections[4].text);
  EXPECT_NE(t.version(), TemplateSet::builtin().version());
  EXPECT_EQ(code_of([] { render_template("{{nope}}", {}); }), PromptError::Code::Template);
}

constexpr const char* kBroken = R"(module m(input a, output y);
  wire w
  assign w = a;
  assign y = w
endmodule
)";

TEST(Feedback, SingleErrorQuotesItsLine) {
  const auto report = lorecast::verilog::check_syntax(kBroken);
  ASSERT_FALSE(report.ok());
  const auto fb = build_feedback(kBroken, report, 1);
  ASSERT_GE(fb.error_digest.size(), 1u);
  const auto lines = split_lines(kBroken);
  for (const auto& e : fb.error_digest) {
    ASSERT_GE(e.line, 1);
    ASSERT_LE(e.line, static_cast<int>(lines.size()));
    EXPECT_EQ(e.line_text, lines[static_cast<std::size_t>(e.line - 1)]);
    EXPECT_NE(fb.rendered_text.find(e.rendered), std::string::npos);
  }
  EXPECT_NE(fb.rendered_text.find(std::string(kBroken).substr(0, 30)), std::string::npos);
  EXPECT_NE(fb.rendered_text.find("complete corrected module"), std::string::npos);
  EXPECT_NE(fb.rendered_text.find("Attempt 1"), std::string::npos);
  EXPECT_EQ(fb.rendered_text.find("{{"), std::string::npos);
}

TEST(Feedback, OneDiagnosticGivesOneEntry) {
  lorecast::verilog::SyntaxReport r;
  r.diagnostics.push_back({{2, 9, 0, 0}, lorecast::verilog::DiagKind::UnexpectedToken, "expected ';'", ""});
  const auto fb = build_feedback(kBroken, r, 2);
  ASSERT_EQ(fb.error_digest.size(), 1u);
  EXPECT_EQ(fb.error_digest[0].line_text, "  wire w");
}

TEST(Feedback, NineErrorsKeepFirstFiveInSourceOrder) {
  std::string code;
  for (int i = 1; i <= 12; ++i) code += "line " + std::to_string(i) + "\n";
  lorecast::verilog::SyntaxReport r;
  for (int line : {9, 2, 7, 4, 11, 3, 8, 5, 6})
    r.diagnostics.push_back({{line, 1, 0, 0}, lorecast::verilog::DiagKind::UnexpectedToken, "x", ""});
  const auto fb = build_feedback(code, r, 3);
  ASSERT_EQ(fb.error_digest.size(), kMaxFeedbackDiagnostics);
  const int expected[] = {2, 3, 4, 5, 6};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(fb.error_digest[i].line, expected[i]);
    EXPECT_EQ(fb.error_digest[i].line_text, "line " + std::to_string(expected[i]));
  }
}

TEST(Feedback, CleanReportIsRejected) {
  EXPECT_EQ(code_of([] { build_feedback("module m; endmodule\n", {}, 1); }),
            PromptError::Code::ReportIsClean);
}

TEST(Feedback, DigestLinesExistForEveryCorpusMutant) {
  // Fidelity over many real diagnostics, including ones at end of input.
  for (const auto& f : lorecast::testing::corpus_files()) {
    const auto src = read_file(f);
    const auto toks = lorecast::testing::raw_tokens(src);
    const auto lines = split_lines(src);
    for (std::size_t k = 0; k < toks.size(); k += 7) {
      std::string mutant = src;
      mutant.erase(toks[k].offset, toks[k].length);
      const auto report = lorecast::verilog::check_syntax(mutant);
      if (report.ok()) continue;
      const auto fb = build_feedback(mutant, report, 1);
      const auto mlines = split_lines(mutant);
      ASSERT_FALSE(fb.error_digest.empty());
      ASSERT_LE(fb.error_digest.size(), kMaxFeedbackDiagnostics);
      for (std::size_t i = 0; i < fb.error_digest.size(); ++i) {
        const auto& e = fb.error_digest[i];
        ASSERT_GE(e.line, 1);
        ASSERT_LE(e.line, static_cast<int>(mlines.size())) << f;
        EXPECT_EQ(e.line_text, mlines[static_cast<std::size_t>(e.line - 1)]);
        if (i) {
          const auto& p = fb.error_digest[i - 1].diagnostic.span;
          EXPECT_LE(std::pair(p.line, p.column),
                    std::pair(e.diagnostic.span.line, e.diagnostic.span.column));
        }
      }
    }
  }
}

TEST(Extract, SingleVerilogBlock) {
  const auto code = extract_code("Text\n```verilog\nmodule a;\nendmodule\n```\nmore\n");
  ASSERT_TRUE(code);
  EXPECT_EQ(*code, "module a;\nendmodule\n");
}

TEST(Extract, PseudocodeThenVerilogTakesTheLastBlock) {
  const auto code = extract_code(read_file(fixture("promptgen/response_pseudo_then_code.txt")));
  ASSERT_TRUE(code);
  EXPECT_TRUE(code->starts_with("module up_counter ("));
  EXPECT_TRUE(code->ends_with("endmodule\n"));
  EXPECT_EQ(code->find("state:"), std::string::npos);
  EXPECT_TRUE(lorecast::verilog::check_syntax(*code).ok());
}

TEST(Extract, ProseGivesNothing) {
  EXPECT_FALSE(extract_code(read_file(fixture("promptgen/response_prose.txt"))));
  EXPECT_FALSE(extract_code(""));
  EXPECT_FALSE(extract_code("```text\nnothing here\n```\n"));
}

TEST(Extract, UnfencedFallsBackToModuleSpan) {
  const auto code = extract_code(read_file(fixture("promptgen/response_unfenced.txt")));
  ASSERT_TRUE(code);
  EXPECT_EQ(*code, "module inv(input a, output y);\n  assign y = ~a;\nendmodule\n");
}

TEST(Extract, UntaggedBlockWithModuleAndTruncatedFence) {
  EXPECT_EQ(*extract_code("```\nmodule b; endmodule\n```"), "module b; endmodule\n");
  EXPECT_EQ(*extract_code("```verilog\nmodule c;\n"), "module c;\n");
  // `submodule` alone is not the keyword.
  EXPECT_FALSE(extract_code("a submodule here and endmodule"));
}

TEST(Extract, Idempotent) {
  std::vector<std::string> responses = {
      read_file(fixture("promptgen/response_pseudo_then_code.txt")),
      read_file(fixture("promptgen/response_unfenced.txt")),
      "```sv\n\n\n  module x; endmodule  \n\n```\n",
  };
  for (const auto& f : lorecast::testing::corpus_files()) responses.push_back(read_file(f));
  for (const auto& r : responses) {
    const auto once = extract_code(r);
    ASSERT_TRUE(once) << r;
    const auto twice = extract_code("```verilog\n" + *once + "```\n");
    ASSERT_TRUE(twice);
    EXPECT_EQ(*twice, *once);
  }
}
