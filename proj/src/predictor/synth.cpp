#include "lorecast/predictor/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "lorecast/features/extract.hpp"
#include "lorecast/verilog/parser.hpp"

namespace lorecast::predictor {

namespace {

// Draws are taken from the raw engine output so the same seed gives the same
// corpus with any standard library.
std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
int between(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(pick(rng, static_cast<std::size_t>(hi - lo + 1)));
}
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit(rng);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct Signal {
  std::string name;
  int width;
};

class ModuleWriter {
 public:
  ModuleWriter(std::mt19937_64& rng, std::string name) : rng_(rng), name_(std::move(name)) {
    mul_weight_ = unit(rng_) < 0.3 ? 0.0 : unit(rng_) * 0.4;
  }

  std::string write() {
    const int n_in = between(rng_, 1, 5);
    const int n_reg = between(rng_, 1, 12);
    const int n_wire = between(rng_, 0, 6);
    const int width_param = between(rng_, 2, 32);

    for (int i = 0; i < n_in; ++i) inputs_.push_back({fmt::format("in{}", i), random_width()});
    for (int i = 0; i < n_reg; ++i) regs_.push_back({fmt::format("r{}", i), random_width()});
    for (int i = 0; i < n_wire; ++i) wires_.push_back({fmt::format("w{}", i), random_width()});

    out_ += fmt::format("module {} #(parameter W = {}) (\n", name_, width_param);
    out_ += "  input clk,\n  input rst,\n";
    for (const auto& s : inputs_) out_ += fmt::format("  input {}{},\n", range(s.width), s.name);
    out_ += fmt::format("  input [W-1:0] pin,\n");
    out_ += fmt::format("  output {}{}\n);\n", range(regs_[0].width), "y");
    for (const auto& s : regs_) out_ += fmt::format("  reg {}{};\n", range(s.width), s.name);
    for (const auto& s : wires_) out_ += fmt::format("  wire {}{};\n", range(s.width), s.name);
    const bool has_loop = unit(rng_) < 0.3;
    if (has_loop) out_ += "  integer i;\n";
    out_ += "\n";

    for (const auto& s : wires_)
      out_ += fmt::format("  assign {} = {};\n", s.name, expr(between(rng_, 1, 4)));
    out_ += fmt::format("  assign y = {};\n\n", regs_[0].name);

    // Every register is driven by exactly one sequential block.
    std::size_t next = 0;
    while (next < regs_.size()) {
      const std::size_t take = std::min(regs_.size() - next, static_cast<std::size_t>(between(rng_, 1, 4)));
      write_seq_block(next, take);
      next += take;
    }
    const int n_comb = between(rng_, 0, 2);
    for (int i = 0; i < n_comb; ++i) write_comb_block(i);
    if (has_loop) write_loop();
    out_ += "endmodule\n";
    return out_;
  }

 private:
  int random_width() {
    static constexpr int kWidths[] = {1, 2, 4, 8, 8, 16, 16, 32, 3, 5, 12, 24};
    return kWidths[pick(rng_, std::size(kWidths))];
  }

  static std::string range(int width) {
    return width == 1 ? std::string() : fmt::format("[{}:0] ", width - 1);
  }

  std::string operand() {
    const auto roll = pick(rng_, 10);
    if (roll < 2) return fmt::format("{}'d{}", 8, pick(rng_, 256));
    if (roll < 5) return inputs_[pick(rng_, inputs_.size())].name;
    if (roll < 6) return "pin";
    if (roll < 8 || wires_.empty()) return regs_[pick(rng_, regs_.size())].name;
    return wires_[pick(rng_, wires_.size())].name;
  }

  std::string expr(int depth) {
    if (depth <= 0) return operand();
    if (unit(rng_) < mul_weight_)
      return fmt::format("({} * {})", expr(depth - 1), expr(depth - 1));
    switch (pick(rng_, 10)) {
      case 0: return fmt::format("({} + {})", expr(depth - 1), expr(depth - 1));
      case 1: return fmt::format("({} - {})", expr(depth - 1), expr(depth - 1));
      case 2: return fmt::format("({} & {})", expr(depth - 1), expr(depth - 1));
      case 3: return fmt::format("({} ^ {})", expr(depth - 1), expr(depth - 1));
      case 4: return fmt::format("({} << {})", expr(depth - 1), between(rng_, 1, 3));
      case 5:
        return fmt::format("(({} < {}) ? {} : {})", expr(depth - 1), expr(depth - 1),
                           expr(depth - 1), expr(depth - 1));
      case 6: return fmt::format("{{{}, {}}}", expr(depth - 1), expr(depth - 1));
      case 7: return fmt::format("(^{})", expr(depth - 1));
      case 8: return fmt::format("(({} == {}) && {})", expr(depth - 1), expr(depth - 1), operand());
      default: return fmt::format("({} | {})", expr(depth - 1), expr(depth - 1));
    }
  }

  void write_seq_block(std::size_t first, std::size_t count) {
    out_ += "  always @(posedge clk) begin\n    if (rst) begin\n";
    for (std::size_t i = first; i < first + count; ++i)
      out_ += fmt::format("      {} <= 0;\n", regs_[i].name);
    out_ += "    end else begin\n";
    for (std::size_t i = first; i < first + count; ++i) {
      if (unit(rng_) < 0.25) {
        out_ += fmt::format("      case ({})\n", inputs_[0].name);
        const int items = between(rng_, 2, 5);
        for (int k = 0; k < items; ++k)
          out_ += fmt::format("        {}: {} <= {};\n", k, regs_[i].name, expr(between(rng_, 1, 3)));
        out_ += fmt::format("        default: {} <= {};\n", regs_[i].name, operand());
        out_ += "      endcase\n";
      } else {
        out_ += fmt::format("      {} <= {};\n", regs_[i].name, expr(between(rng_, 1, 4)));
      }
    }
    out_ += "    end\n  end\n\n";
  }

  void write_comb_block(int index) {
    const auto tmp = fmt::format("c{}", index);
    out_.insert(out_.find("\n\n") + 1, fmt::format("  reg [15:0] {};\n", tmp));
    out_ += fmt::format("  always @(*) begin\n    {} = 16'd0;\n", tmp);
    out_ += fmt::format("    if ({}) {} = {};\n", operand(), tmp, expr(between(rng_, 1, 3)));
    out_ += fmt::format("    else {} = {};\n  end\n\n", tmp, expr(1));
  }

  void write_loop() {
    out_.insert(out_.find("\n\n") + 1, "  reg [7:0] acc;\n");
    out_ += "  always @(*) begin\n    acc = 8'd0;\n";
    out_ += fmt::format("    for (i = 0; i < {}; i = i + 1)\n", between(rng_, 2, 8));
    out_ += fmt::format("      acc = acc + {};\n  end\n\n", operand());
  }

  std::mt19937_64& rng_;
  std::string name_;
  double mul_weight_ = 0.0;
  std::vector<Signal> inputs_;
  std::vector<Signal> regs_;
  std::vector<Signal> wires_;
  std::string out_;
};

}  // namespace

std::string random_module(std::mt19937_64& rng, const std::string& name) {
  return ModuleWriter(rng, name).write();
}

std::vector<SyntheticDesign> synthetic_designs(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SyntheticDesign> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticDesign d;
    d.name = fmt::format("synth_{:04}", i);
    d.source = random_module(rng, d.name);
    d.eda.clock_period_ns = 1.0 + static_cast<double>(pick(rng, 19));
    d.eda.target_utilization = 0.5 + 0.05 * static_cast<double>(pick(rng, 9));
    d.eda.effort = static_cast<features::Effort>(pick(rng, 3));
    out.push_back(std::move(d));
  }
  return out;
}

double synthetic_power(const features::FeatureVector& fv) {
  return 5.0 + 3.0 * fv.get("reg_bit_total") + 40.0 * fv.get("op_mul_count") +
         4.0 * fv.get("op_add_sub_count");
}

double synthetic_tns(const features::FeatureVector& fv) {
  return 0.1 * fv.get("max_expr_depth") + 0.3 * fv.get("op_mul_count") +
         0.002 * fv.get("total_node_count");
}

Dataset synthetic_dataset(const SynthTargetOptions& opts) {
  Dataset data;
  std::mt19937_64 noise_rng(opts.seed ^ 0x5bd1e995ULL);
  for (auto& d : synthetic_designs(opts.count, opts.seed)) {
    auto parsed = verilog::parse(d.source);
    if (!parsed.ok())
      throw std::logic_error(fmt::format("generated design {} does not parse: {}", d.name,
                                         verilog::render_report(parsed.report, d.name)));
    DataRow row;
    row.design = d.name;
    row.features = features::extract_features(parsed.forest, d.eda);
    row.power_uW = std::max(0.0, synthetic_power(row.features) * (1.0 + opts.noise * gaussian(noise_rng)));
    row.tns_ns = std::max(0.0, synthetic_tns(row.features) * (1.0 + opts.noise * gaussian(noise_rng)));
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace lorecast::predictor
