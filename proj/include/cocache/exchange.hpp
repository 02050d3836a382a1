#pragma once

#include <vector>

#include "cocache/catalog.hpp"

namespace cocache {

/// Delivers payloads[j] to every neighbor of j. inbox[b] lists the payloads
/// of b's neighbors in ascending sBS order.
template <class Payload>
std::vector<std::vector<Payload>> exchange(const std::vector<Payload>& payloads, const Topology& topology) {
  std::vector<std::vector<Payload>> inbox(topology.n_sbs());
  for (std::size_t b = 0; b < topology.n_sbs(); ++b)
    for (std::size_t j : topology.neighbors(b)) inbox[b].push_back(payloads.at(j));
  return inbox;
}

}  // namespace cocache
