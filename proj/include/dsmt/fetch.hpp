#pragma once

#include <vector>

#include "dsmt/config.hpp"

namespace dsmt {

struct FetchCandidate {
  int context = 0;
  bool speculative = false;
  int icount = 0;  // instructions in the decode and issue queues at cycle start
};

/// Assigns fetch ports for one cycle; each context gets at most one port.
/// icount2.8-modified: the non-speculative context first, remaining ports to
/// speculative contexts by lowest ICount (ties to the lowest context id).
/// ideal: every candidate gets its own port.
std::vector<int> fetch_select(const std::vector<FetchCandidate>& candidates, int ports,
                              FetchPolicy policy);

}  // namespace dsmt
