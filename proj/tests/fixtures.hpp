#pragma once

#include "stableperm/core.hpp"

namespace stableperm::fixtures {

// 1:[2,3], 2:[3,1], 3:[1,2]
inline PreferenceSystem cyclic3() { return PreferenceSystem::from_one_based({{2, 3}, {3, 1}, {1, 2}}); }

// 1:[2,3], 2:[1,3], 3:[1,2]; agent 3 ends up rejected by both.
inline PreferenceSystem pariah3() { return PreferenceSystem::from_one_based({{2, 3}, {1, 3}, {1, 2}}); }

// Mutual first choices (1 2) and (3 4).
inline PreferenceSystem mutual4() {
  return PreferenceSystem::from_one_based({{2, 3, 4}, {1, 3, 4}, {4, 1, 2}, {3, 1, 2}});
}

inline PreferenceSystem mutual2() { return PreferenceSystem::from_one_based({{2}, {1}}); }

inline Permutation cycle(std::initializer_list<int> succ_one_based) {
  return Permutation::from_one_based(succ_one_based);
}

}  // namespace stableperm::fixtures
