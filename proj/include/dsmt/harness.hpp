#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "dsmt/assembler.hpp"
#include "dsmt/config.hpp"
#include "dsmt/report.hpp"

namespace dsmt {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fuel for the reference run; kernels are far below it.
inline constexpr uint64_t oracle_fuel = 50'000'000;

/// Fast-skips `cfg.fast_skip` instructions in the oracle, simulates the rest
/// in detail and checks the result against a full oracle run. Throws
/// HarnessError when the program itself fails under the oracle.
SimReport run_experiment(const SimConfig& cfg, const Program& prog, const std::string& name,
                         std::ostream* cycle_trace = nullptr);

/// Locates a kernel by path or by name under the bundled kernel directory.
std::string resolve_kernel(const std::string& name_or_path);

}  // namespace dsmt
