// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ponvdba {

struct WaterFillClaim {
  std::uint64_t demand = 0;
  std::uint64_t weight = 1;  // must be positive
};

// Weighted max-min fair division of `budget` indivisible words.
//
// When the claims fit the budget every claim is met in full. Otherwise the
// fluid allocation min(demand_i, level * weight_i) is found exactly for the
// level that spends the whole budget, each claim receives its floor, and the
// leftover words go one each to claims still below demand, walking the claim
// list cyclically from index `rotation % size`.
std::vector<std::uint64_t> weighted_water_fill(std::span<const WaterFillClaim> claims,
                                               std::uint64_t budget, std::uint64_t rotation);

}  // namespace ponvdba
