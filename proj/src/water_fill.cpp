// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/water_fill.hpp"

#include <stdexcept>

namespace ponvdba {

std::vector<std::uint64_t> weighted_water_fill(std::span<const WaterFillClaim> claims,
                                               std::uint64_t budget, std::uint64_t rotation) {
  using u128 = unsigned __int128;
  const std::size_t n = claims.size();
  std::vector<std::uint64_t> grant(n, 0);

  u128 total_demand = 0;
  for (const auto& c : claims) {
    if (c.weight == 0) throw std::invalid_argument("water-fill weight must be positive");
    total_demand += c.demand;
  }
  if (total_demand <= budget) {
    for (std::size_t i = 0; i < n; ++i) grant[i] = claims[i].demand;
    return grant;
  }

  // A claim is capped when its demand sits at or below level * weight, with
  // level = residual / open_weight. Capping only raises the level, so
  // iterate until no new claim caps.
  std::vector<bool> capped(n, false);
  u128 residual = budget;
  u128 open_weight = 0;
  for (const auto& c : claims) open_weight += c.weight;
  for (bool changed = true; changed;) {
    changed = false;
    u128 next_residual = residual;
    u128 next_weight = open_weight;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      if (static_cast<u128>(claims[i].demand) * open_weight <= residual * claims[i].weight) {
        capped[i] = true;
        changed = true;
        next_residual -= claims[i].demand;
        next_weight -= claims[i].weight;
      }
    }
    residual = next_residual;
    open_weight = next_weight;
  }

  u128 spent = 0;
  for (std::size_t i = 0; i < n; ++i) {
    grant[i] = capped[i] ? claims[i].demand
                         : static_cast<std::uint64_t>(residual * claims[i].weight / open_weight);
    spent += grant[i];
  }

  auto leftover = static_cast<std::uint64_t>(budget - spent);
  const std::size_t start = static_cast<std::size_t>(rotation % n);
  for (std::size_t k = 0; k < n && leftover > 0; ++k) {
    const std::size_t i = (start + k) % n;
    if (grant[i] < claims[i].demand) {
      ++grant[i];
      --leftover;
    }
  }
  return grant;
}

}  // namespace ponvdba
