#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "setsketch/hashing.hpp"

namespace setsketch {

/// XOR bucket array with k-slot placement and an optional r-bit guard word.
///
/// The state is linear in the represented set: toggle(x) flips x's
/// contribution in each of its k slots (a slot hit twice cancels), and
/// merging two sketches yields the sketch of the symmetric difference of
/// their sets. The empty set is the all-zero state.
///
/// A sketch is a value: copy freely, mutate from one thread at a time.
class Sketch {
 public:
  struct UpdateStats {
    std::uint64_t bucket_xors = 0;
    std::uint64_t guard_xors = 0;
  };

  explicit Sketch(const HashParams& params);
  Sketch(const HashParams& params, std::shared_ptr<const HashSource> source);

  static Sketch from_set(const HashParams& params, std::span<const Key> keys);
  static Sketch from_set(const HashParams& params, std::span<const Key> keys,
                         std::shared_ptr<const HashSource> source);

  /// Rebuild a sketch from raw state (wire deserialization). Values must fit
  /// the widths given by `params`. A null source selects the seeded family.
  static Sketch from_state(const HashParams& params,
                           std::vector<std::uint64_t> buckets,
                           std::uint64_t guard,
                           std::shared_ptr<const HashSource> source = nullptr);

  /// Membership flip: changes the represented set from S to S Δ {x}.
  void toggle(Key x);

  /// Bucket-wise XOR with `other`: S becomes S Δ S'. Parameters must match
  /// field for field, including the seed.
  void merge(const Sketch& other);

  /// True iff bucket i is nonzero, holds a valid key value, and that value
  /// hashes back to i with odd multiplicity. A bucket holding a single key
  /// always looks pure; a bucket holding several keys only coincidentally.
  bool looks_pure(std::uint32_t bucket) const;

  /// All buckets zero and the guard zero.
  bool is_empty() const noexcept {
    return nonzero_buckets_ == 0 && guard_ == 0;
  }

  const HashParams& params() const noexcept { return params_; }
  const HashSource& source() const noexcept { return *source_; }
  std::shared_ptr<const HashSource> shared_source() const noexcept {
    return source_;
  }

  std::span<const std::uint64_t> buckets() const noexcept { return buckets_; }
  std::uint64_t bucket_value(std::uint32_t i) const noexcept {
    return buckets_[i];
  }
  std::uint64_t guard() const noexcept { return guard_; }
  std::uint32_t nonzero_buckets() const noexcept { return nonzero_buckets_; }

  /// Words of state: n bucket words plus one guard word when r > 0.
  std::size_t storage_words() const noexcept {
    return buckets_.size() + (params_.r > 0 ? 1 : 0);
  }

  const UpdateStats& stats() const noexcept { return stats_; }
  void reset_stats() noexcept { stats_ = {}; }

  /// Bit-state equality: parameters, buckets and guard.
  bool operator==(const Sketch& other) const noexcept;

 private:
  HashParams params_;
  std::shared_ptr<const HashSource> source_;
  std::vector<std::uint64_t> buckets_;
  std::uint64_t guard_ = 0;
  std::uint32_t nonzero_buckets_ = 0;
  UpdateStats stats_;
};

}  // namespace setsketch
