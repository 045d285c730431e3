#include "setsketch/hashing.hpp"

#include <cassert>

#include "detail_mix64.hpp"

namespace setsketch {

namespace {

// Slot index enters as (slot + 1) * golden so slot 0 is not a pass-through
// of the raw seed.
constexpr std::uint64_t slot_state(std::uint64_t seed, std::uint32_t slot,
                                   Key x) noexcept {
  return detail::mix64(seed ^ (detail::kGolden64 * (std::uint64_t{slot} + 1)) ^
                       x);
}

// High 64 bits of the 128-bit product z * n.
constexpr std::uint32_t reduce(std::uint64_t z, std::uint32_t n) noexcept {
  using u128 = unsigned __int128;
  return static_cast<std::uint32_t>((u128{z} * n) >> 64);
}

}  // namespace

void HashParams::validate() const {
  if (w < 1 || w > 64) throw InvalidParamsError("key width w must be in [1, 64]");
  if (k < 3) throw InvalidParamsError("slot count k must be >= 3");
  if (k > 255) throw InvalidParamsError("slot count k must fit a byte");
  if (n < 1) throw InvalidParamsError("bucket count n must be >= 1");
  if (r > 64) throw InvalidParamsError("guard width r must be in [0, 64]");
}

bool is_valid_key(const HashParams& params, Key x) noexcept {
  return x != 0 && x <= params.key_mask();
}

void require_valid_key(const HashParams& params, Key x) {
  if (x == 0) throw InvalidKeyError("key 0 is reserved for empty buckets");
  if (x > params.key_mask())
    throw InvalidKeyError("key does not fit " + std::to_string(params.w) +
                          " bits");
}

std::uint32_t bucket_of(const HashParams& params, Key x, std::uint32_t slot) {
  require_valid_key(params, x);
  assert(slot < params.k);
  return reduce(slot_state(params.seed, slot, x), params.n);
}

BucketMultiset hash_multiset(const HashParams& params, Key x) {
  require_valid_key(params, x);
  BucketMultiset slots(params.k);
  for (std::uint32_t j = 0; j < params.k; ++j)
    slots[j] = reduce(slot_state(params.seed, j, x), params.n);
  return slots;
}

std::uint64_t guard_digest(const HashParams& params, Key x) {
  require_valid_key(params, x);
  if (params.r == 0) return 0;
  return slot_state(params.seed, params.k, x) & params.guard_mask();
}

bool odd_multiplicity(std::span<const std::uint32_t> slots,
                      std::uint32_t bucket) noexcept {
  bool odd = false;
  for (std::uint32_t s : slots) odd ^= (s == bucket);
  return odd;
}

SeededHashSource::SeededHashSource(const HashParams& params)
    : params_(params) {
  params_.validate();
}

std::uint32_t SeededHashSource::bucket(Key x, std::uint32_t slot) const {
  assert(slot < params_.k);
  return reduce(slot_state(params_.seed, slot, x), params_.n);
}

std::uint64_t SeededHashSource::guard(Key x) const {
  if (params_.r == 0) return 0;
  return slot_state(params_.seed, params_.k, x) & params_.guard_mask();
}

}  // namespace setsketch
