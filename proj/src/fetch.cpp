#include "dsmt/fetch.hpp"

#include <algorithm>

namespace dsmt {

std::vector<int> fetch_select(const std::vector<FetchCandidate>& candidates, int ports,
                              FetchPolicy policy) {
  std::vector<int> out;
  if (policy == FetchPolicy::ideal) {
    for (const auto& c : candidates) out.push_back(c.context);
    return out;
  }
  std::vector<FetchCandidate> spec;
  for (const auto& c : candidates) {
    if (!c.speculative) {
      if (static_cast<int>(out.size()) < ports) out.push_back(c.context);
    } else {
      spec.push_back(c);
    }
  }
  std::sort(spec.begin(), spec.end(), [](const FetchCandidate& a, const FetchCandidate& b) {
    return a.icount != b.icount ? a.icount < b.icount : a.context < b.context;
  });
  for (const auto& c : spec) {
    if (static_cast<int>(out.size()) >= ports) break;
    out.push_back(c.context);
  }
  return out;
}

}  // namespace dsmt
