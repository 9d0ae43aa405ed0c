#include "dsmt/harness.hpp"

#include <filesystem>

#include "dsmt/core.hpp"
#include "dsmt/oracle.hpp"

namespace dsmt {

SimReport run_experiment(const SimConfig& cfg, const Program& prog, const std::string& name,
                         std::ostream* cycle_trace) {
  cfg.validate();
  RunResult reference;
  try {
    reference = run(prog, oracle_fuel);
  } catch (const OracleError& e) {
    throw HarnessError(name + ": reference run failed: " + e.what());
  }

  ArchState start = initial_state(prog);
  StoreTrace trace;
  Oracle(prog).advance(start, cfg.fast_skip, &trace);

  Core core(cfg, prog, start);
  core.set_trace(cycle_trace);
  EndReason end = core.run();

  SimReport r;
  r.kernel = name;
  r.contexts = cfg.context_count;
  r.fetch_policy = cfg.fetch_policy;
  r.strict_lbit_squash = cfg.strict_lbit_squash;
  r.fast_skip = cfg.fast_skip;
  r.end = end;
  r.stats = core.stats();
  r.oracle_committed = reference.state.committed_count;
  for (const auto& [pc, entry] : core.loops().table()) r.loops.push_back(entry);

  const auto& produced = core.store_trace();
  trace.insert(trace.end(), produced.begin(), produced.end());
  r.store_trace_match = trace == reference.stores;
  r.mismatches = diff(reference.state, core.arch_state());
  if (end != EndReason::halted) r.verdict = Verdict::incomplete;
  else if (r.mismatches.empty() && r.store_trace_match && r.stats.committed == r.oracle_committed)
    r.verdict = Verdict::pass;
  else r.verdict = Verdict::failed;
  return r;
}

std::string resolve_kernel(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  for (const auto& cand : {fs::path(DSMT_KERNEL_DIR) / name, fs::path(DSMT_KERNEL_DIR) / (name + ".asm")})
    if (fs::exists(cand)) return cand.string();
  throw HarnessError("kernel not found: " + name);
}

}  // namespace dsmt
