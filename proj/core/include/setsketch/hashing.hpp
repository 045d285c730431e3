#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "setsketch/errors.hpp"

namespace setsketch {

/// A key is a nonzero w-bit value stored in a 64-bit word.
using Key = std::uint64_t;

/// Parameters shared by both parties of a sketch exchange. Two parties with
/// equal fields produce bit-identical sketches for equal sets.
struct HashParams {
  std::uint8_t w = 64;    ///< key width in bits, 1..64
  std::uint32_t k = 3;    ///< slots per key, >= 3
  std::uint32_t n = 1;    ///< bucket count, >= 1
  std::uint64_t seed = 0;
  std::uint8_t r = 0;     ///< guard width in bits, 0..64; 0 disables the guard

  void validate() const;  // throws InvalidParamsError

  /// Mask selecting the low w bits; the key universe is [1, key_mask()].
  std::uint64_t key_mask() const noexcept {
    return w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
  }

  std::uint64_t guard_mask() const noexcept {
    if (r == 0) return 0;
    return r >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << r) - 1);
  }

  bool operator==(const HashParams&) const = default;
};

bool is_valid_key(const HashParams& params, Key x) noexcept;
void require_valid_key(const HashParams& params, Key x);  // throws InvalidKeyError

/// The k slot values of one key, in slot order. Duplicates are permitted;
/// the unordered view is a multiset of size exactly k.
using BucketMultiset = std::vector<std::uint32_t>;

// Normative seeded hash family. The exact arithmetic is part of the wire
// contract: slot j mixes seed ^ ((j+1) * 2^64/phi) ^ x through a 64-bit
// finalizer, then maps into [0, n) by taking the high half of a 128-bit
// product. The guard digest is the low r bits of the finalizer output at
// slot index k.
std::uint32_t bucket_of(const HashParams& params, Key x, std::uint32_t slot);
BucketMultiset hash_multiset(const HashParams& params, Key x);
std::uint64_t guard_digest(const HashParams& params, Key x);

/// True iff `bucket` occurs an odd number of times in `slots`.
bool odd_multiplicity(std::span<const std::uint32_t> slots,
                      std::uint32_t bucket) noexcept;

/// Bucket placement provider behind the sketch. The seeded family below is
/// the production implementation; tests may substitute explicit tables.
class HashSource {
 public:
  virtual ~HashSource() = default;

  virtual const HashParams& params() const noexcept = 0;

  /// Bucket index for (x, slot), slot < params().k. Callers pass valid keys.
  virtual std::uint32_t bucket(Key x, std::uint32_t slot) const = 0;

  /// r-bit guard digest of x; 0 when the guard is disabled.
  virtual std::uint64_t guard(Key x) const = 0;
};

class SeededHashSource final : public HashSource {
 public:
  explicit SeededHashSource(const HashParams& params);

  const HashParams& params() const noexcept override { return params_; }
  std::uint32_t bucket(Key x, std::uint32_t slot) const override;
  std::uint64_t guard(Key x) const override;

 private:
  HashParams params_;
};

}  // namespace setsketch
