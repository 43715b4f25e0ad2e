// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace ponvdba {

// Distinct integral identifier types so an AllocID can never be passed where
// an ONU or slice id is expected.
template <typename Tag, typename Rep = std::uint32_t>
class StrongId {
 public:
  using rep_type = Rep;

  constexpr StrongId() = default;
  constexpr explicit StrongId(Rep v) : value_(v) {}

  constexpr Rep value() const { return value_; }

  friend constexpr auto operator<=>(StrongId, StrongId) = default;

  friend std::ostream& operator<<(std::ostream& os, StrongId id) {
    return os << id.value_;
  }

 private:
  Rep value_{};
};

using AllocId = StrongId<struct AllocIdTag>;
using OnuId = StrongId<struct OnuIdTag>;
using SliceId = StrongId<struct SliceIdTag>;

using FrameIndex = std::uint64_t;
// One allocation word is 4 bytes of upstream payload.
using Words = std::uint32_t;

inline constexpr std::uint32_t kBytesPerWord = 4;

constexpr Words bytes_to_words(std::uint64_t bytes) {
  return static_cast<Words>((bytes + kBytesPerWord - 1) / kBytesPerWord);
}

}  // namespace ponvdba

template <typename Tag, typename Rep>
struct std::hash<ponvdba::StrongId<Tag, Rep>> {
  std::size_t operator()(ponvdba::StrongId<Tag, Rep> id) const noexcept {
    return std::hash<Rep>{}(id.value());
  }
};
