#pragma once

#include <string>
#include <vector>

namespace charsum {

// One inequality of a hypothesis list; `defined` is false when a side could
// not be evaluated (for instance log log x with x <= e).
struct Condition {
  std::string label;
  bool defined = true;
  bool satisfied = false;
  long double lhs = 0;
  long double rhs = 0;
};

inline bool all_satisfied(const std::vector<Condition>& cs) {
  for (auto& c : cs)
    if (!c.defined || !c.satisfied) return false;
  return true;
}

}  // namespace charsum
