#include "setsketch/sketch.hpp"

#include <cassert>
#include <unordered_set>
#include <utility>

namespace setsketch {

Sketch::Sketch(const HashParams& params)
    : Sketch(params, std::make_shared<SeededHashSource>(params)) {}

Sketch::Sketch(const HashParams& params,
               std::shared_ptr<const HashSource> source)
    : params_(params), source_(std::move(source)) {
  params_.validate();
  if (!source_) throw InvalidParamsError("sketch requires a hash source");
  if (source_->params() != params_)
    throw ParamsMismatchError("hash source parameters differ from sketch parameters");
  buckets_.assign(params_.n, 0);
}

Sketch Sketch::from_set(const HashParams& params, std::span<const Key> keys) {
  return from_set(params, keys, std::make_shared<SeededHashSource>(params));
}

Sketch Sketch::from_set(const HashParams& params, std::span<const Key> keys,
                        std::shared_ptr<const HashSource> source) {
  Sketch s(params, std::move(source));
  std::unordered_set<Key> seen;
  seen.reserve(keys.size());
  for (Key x : keys) {
    if (!seen.insert(x).second)
      throw InvalidKeyError("from_set requires distinct keys");
    s.toggle(x);
  }
  return s;
}

Sketch Sketch::from_state(const HashParams& params,
                          std::vector<std::uint64_t> buckets,
                          std::uint64_t guard,
                          std::shared_ptr<const HashSource> source) {
  if (!source) source = std::make_shared<SeededHashSource>(params);
  Sketch s(params, std::move(source));
  if (buckets.size() != params.n)
    throw InvalidParamsError("bucket array size does not match n");
  for (std::uint64_t v : buckets)
    if (v > params.key_mask())
      throw InvalidParamsError("bucket value exceeds the key width");
  if (guard > params.guard_mask())
    throw InvalidParamsError("guard value exceeds the guard width");
  s.buckets_ = std::move(buckets);
  s.guard_ = guard;
  s.nonzero_buckets_ = 0;
  for (std::uint64_t v : s.buckets_)
    if (v != 0) ++s.nonzero_buckets_;
  return s;
}

void Sketch::toggle(Key x) {
  require_valid_key(params_, x);
  // The full length-k slot sequence is applied, so a bucket hit twice
  // receives x twice and nets out untouched.
  for (std::uint32_t j = 0; j < params_.k; ++j) {
    std::uint64_t& cell = buckets_[source_->bucket(x, j)];
    const bool was_zero = cell == 0;
    cell ^= x;
    ++stats_.bucket_xors;
    if (was_zero) {
      if (cell != 0) ++nonzero_buckets_;
    } else if (cell == 0) {
      --nonzero_buckets_;
    }
  }
  if (params_.r > 0) {
    guard_ ^= source_->guard(x);
    ++stats_.guard_xors;
  }
}

void Sketch::merge(const Sketch& other) {
  if (params_ != other.params_)
    throw ParamsMismatchError("merge requires identical parameters");
  for (std::uint32_t i = 0; i < params_.n; ++i) {
    const bool was_zero = buckets_[i] == 0;
    buckets_[i] ^= other.buckets_[i];
    if (was_zero) {
      if (buckets_[i] != 0) ++nonzero_buckets_;
    } else if (buckets_[i] == 0) {
      --nonzero_buckets_;
    }
  }
  guard_ ^= other.guard_;
}

bool Sketch::looks_pure(std::uint32_t bucket) const {
  assert(bucket < params_.n);
  const std::uint64_t v = buckets_[bucket];
  if (v == 0 || v > params_.key_mask()) return false;
  bool odd = false;
  for (std::uint32_t j = 0; j < params_.k; ++j)
    odd ^= (source_->bucket(v, j) == bucket);
  return odd;
}

bool Sketch::operator==(const Sketch& other) const noexcept {
  return params_ == other.params_ && buckets_ == other.buckets_ &&
         guard_ == other.guard_;
}

}  // namespace setsketch
