#pragma once

#include <vector>

#include "fpc/rng.hpp"
#include "fpc/stgraph.hpp"

namespace oracle {

// Random graph whose weights are small dyadic rationals, so every path sum
// is exact and route delays can be compared bit for bit.
inline fpc::SpaceTimeGraph dyadic_graph(fpc::Rng& rng, int p, int n, double link_prob) {
  const fpc::SlotGrid grid(n, 4.0);
  std::vector<fpc::SlotMatrix> slots;
  std::vector<fpc::CacheBlock> caches;
  for (int k = 0; k < n; ++k) {
    fpc::SlotMatrix m(p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i != j && rng.uniform() < link_prob) m.set(i, j, static_cast<double>(1 + rng.index(64)) / 1024.0);
      }
    }
    slots.push_back(m);
    fpc::CacheBlock c;
    for (int i = 0; i < p; ++i) c.push_back(static_cast<double>(rng.index(17)) / 4.0);
    caches.push_back(c);
  }
  return fpc::assemble(grid, slots, caches);
}

}  // namespace oracle
