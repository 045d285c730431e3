#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "setsketch/decode.hpp"
#include "setsketch/sketch.hpp"

namespace setsketch {

// Wire frame, all integers little-endian:
//   magic "SSS1" | version u8 = 1 | w u8 | k u8 | r u8 | n u32 | seed u64 |
//   n bucket words of ceil(w/8) bytes | guard word of ceil(r/8) bytes
//   (absent iff r = 0) | CRC32 u32 of all preceding bytes.
// The layout is normative and versioned; the frame is self-describing, so
// the receiving party adopts the sender's parameters including the seed.
inline constexpr std::uint8_t kWireVersion = 1;

std::vector<std::uint8_t> serialize(const Sketch& s);
Sketch deserialize(std::span<const std::uint8_t> frame);  // throws WireError

std::size_t wire_frame_size(const HashParams& params) noexcept;

/// CRC32 (IEEE 802.3, reflected polynomial 0xEDB88320) over `data`.
std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) noexcept;

/// Bucket count for an expected symmetric-difference size:
/// max(8, ceil(1.23 * expected_diff)).
std::uint32_t suggest_buckets(std::uint64_t expected_diff);

struct ReconcileReport {
  bool success = false;
  std::optional<DecodeFailure> failure;
  std::vector<Key> difference;  ///< S_local Δ S_remote on success; sorted
  std::size_t bytes_on_wire = 0;
  std::uint32_t rounds_used = 0;
};

/// One side of the reconciliation workflow: build a sketch of `local` under
/// the remote frame's parameters (shared seed included), merge, and decode
/// the symmetric difference. Frame errors throw; decode failures are
/// reported, with policy left to the caller.
ReconcileReport reconcile_local(std::span<const Key> local,
                                std::span<const std::uint8_t> remote_frame,
                                const DecodeLimits& limits = {});

}  // namespace setsketch
