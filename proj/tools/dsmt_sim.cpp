#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "dsmt/assembler.hpp"
#include "dsmt/config.hpp"
#include "dsmt/harness.hpp"
#include "dsmt/oracle.hpp"
#include "dsmt/report.hpp"

using namespace dsmt;

namespace {

Program load_program(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".img") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw HarnessError("cannot open image '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
    return read_image(bytes);
  }
  return assemble_file(path);
}

std::string stem(const std::string& path) {
  auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  return base.substr(0, base.find('.'));
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw HarnessError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level DSMT simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "simulate one kernel and check it against the oracle");
  std::string kernel, config_file, report_fmt = "text", out_path, oracle_trace, cycle_trace;
  std::vector<std::string> overrides;
  std::optional<int> contexts;
  std::optional<std::string> policy;
  std::optional<uint64_t> max_cycles, fast_skip;
  bool strict = false;
  run_cmd->add_option("--kernel", kernel, "assembly file, image (.img) or bundled kernel name")->required();
  run_cmd->add_option("--config", config_file, "key=value configuration file");
  run_cmd->add_option("--contexts", contexts, "hardware contexts: 1, 2, 4 or 8");
  run_cmd->add_option("--fetch-policy", policy, "icount2.8m or ideal");
  run_cmd->add_option("--max-cycles", max_cycles, "cycle limit");
  run_cmd->add_option("--fast-skip", fast_skip, "instructions executed in the oracle before detailed simulation");
  run_cmd->add_flag("--strict-lbit-squash", strict, "squash on any early read, ignoring values");
  run_cmd->add_option("--set", overrides, "extra key=value setting (repeatable)");
  run_cmd->add_option("--report", report_fmt, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  run_cmd->add_option("--out", out_path, "report destination (default stdout)");
  run_cmd->add_option("--oracle-trace", oracle_trace, "write the reference instruction trace here");
  run_cmd->add_option("--cycle-trace", cycle_trace, "write a per-cycle pipeline trace here");

  auto* asm_cmd = app.add_subcommand("asm", "assemble a kernel into a binary image");
  std::string asm_in, asm_out;
  asm_cmd->add_option("file", asm_in, "assembly source")->required();
  asm_cmd->add_option("-o", asm_out, "output image")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "run one configuration per line, emitting CSV");
  std::string sweep_file, sweep_out;
  sweep_cmd->add_option("file", sweep_file, "lines of key=value pairs, including kernel=")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV destination (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*asm_cmd) {
      auto bytes = write_image(assemble_file(asm_in));
      std::ofstream out(asm_out, std::ios::binary);
      if (!out) throw HarnessError("cannot write '" + asm_out + "'");
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      return 0;
    }

    if (*run_cmd) {
      SimConfig cfg = config_file.empty() ? SimConfig{} : load_config_file(config_file);
      for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (contexts) cfg.context_count = *contexts;
      if (policy) cfg.fetch_policy = parse_fetch_policy(*policy);
      if (max_cycles) cfg.max_cycles = *max_cycles;
      if (fast_skip) cfg.fast_skip = *fast_skip;
      if (strict) cfg.strict_lbit_squash = true;
      std::string path = resolve_kernel(kernel);
      Program prog = load_program(path);
      if (!oracle_trace.empty()) {
        std::ofstream t(oracle_trace);
        run(prog, oracle_fuel, &t);
      }
      std::ofstream ct;
      if (!cycle_trace.empty()) ct.open(cycle_trace);
      SimReport r = run_experiment(cfg, prog, stem(path), cycle_trace.empty() ? nullptr : &ct);
      auto fmt = parse_report_format(report_fmt);
      write_out(out_path, (fmt == ReportFormat::csv ? csv_header() + "\n" : "") + emit_report(r, fmt));
      return r.verdict == Verdict::pass ? 0 : 1;
    }

    std::ifstream in(sweep_file);
    if (!in) throw HarnessError("cannot open sweep file '" + sweep_file + "'");
    std::string out = csv_header() + "\n", line;
    bool all_pass = true;
    while (std::getline(in, line)) {
      if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
      std::istringstream tokens(line);
      std::string tok, name;
      SimConfig cfg;
      while (tokens >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("sweep token '" + tok + "' is not key=value");
        std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
        if (key == "kernel") name = value;
        else cfg.set(key, value);
      }
      if (name.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("sweep line without kernel=: " + line);
      if (name.empty()) continue;
      std::string path = resolve_kernel(name);
      SimReport r = run_experiment(cfg, load_program(path), stem(path));
      all_pass = all_pass && r.verdict == Verdict::pass;
      out += emit_report(r, ReportFormat::csv);
    }
    write_out(sweep_out, out);
    return all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "dsmt-sim: " << e.what() << '\n';
    return 2;
  }
}
