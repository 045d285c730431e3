#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "setsketch/decode.hpp"
#include "setsketch/hashing.hpp"
#include "setsketch/sketch.hpp"

namespace setsketch::oracle {

/// Hash source with explicit per-key slot tables; unmapped keys fall back to
/// the seeded family of `fallback`. Lets worked-example constructions run
/// literally.
class InjectedHashSource final : public HashSource {
 public:
  using Table = std::unordered_map<Key, std::vector<std::uint32_t>>;

  InjectedHashSource(const HashParams& fallback, Table table);

  const HashParams& params() const noexcept override { return fallback_; }
  std::uint32_t bucket(Key x, std::uint32_t slot) const override;
  std::uint64_t guard(Key x) const override;

  const Table& table() const noexcept { return table_; }

 private:
  HashParams fallback_;
  Table table_;
};

/// Parses lines of the form `key: b1,b2,...,bk`. Keys are decimal or 0x-hex;
/// blank lines and lines starting with '#' are skipped. Entries are validated
/// against `params` (length k, buckets < n).
InjectedHashSource::Table parse_injected_table(std::istream& in,
                                               const HashParams& params);

/// Slot values of x under an arbitrary source, in slot order.
BucketMultiset source_multiset(const HashSource& source, Key x);

/// A set of >= 3 distinct keys with XOR zero whose members all hit `centre`
/// with odd multiplicity. The presence of all but one member makes the
/// centre look pure while storing the missing one.
struct Anomaly {
  std::vector<Key> keys;  ///< sorted ascending
  std::uint32_t centre;

  bool operator==(const Anomaly&) const = default;
};

struct EnumBudget {
  std::uint64_t limit = std::uint64_t{1} << 20;  ///< max enumerated states
};

/// Exhaustive subset search over `candidates` for anomalies of size 3 to
/// max_size. Complete and duplicate-free; an anomaly with several valid
/// centres is reported once per centre. Throws BudgetExceededError when the
/// search space exceeds the budget.
std::vector<Anomaly> enumerate_anomalies(const HashSource& source,
                                         std::span<const Key> candidates,
                                         std::size_t max_size,
                                         EnumBudget budget = {});

/// Anomalies with at most one key outside s0. Only these can be triggered
/// before decoding errors compound.
std::vector<Anomaly> native_anomalies(std::span<const Anomaly> anomalies,
                                      std::span<const Key> s0);

/// Complete native-anomaly search for a stored set: every native anomaly has
/// all but at most one member in s0 and all members sharing its centre, so
/// enumerating subsets of each bucket's odd-incidence keys (plus the implied
/// missing key) finds them all, at any size.
std::vector<Anomaly> find_native_anomalies(const HashSource& source,
                                           std::span<const Key> s0,
                                           EnumBudget budget = {});

/// B = h(S_A): every bucket touched by a key of a native anomaly. Sorted,
/// deduplicated.
std::vector<std::uint32_t> anomalous_buckets(
    const HashSource& source, std::span<const Anomaly> anomalies);

/// Reference peeler: identical to decode except that looks_pure is forced
/// false on `banned`. With banned = anomalous_buckets(native anomalies), no
/// anomalous step can occur and keys are only ever removed.
DecodeOutcome reference_peel(Sketch& s, std::span<const std::uint32_t> banned,
                             const DecodeLimits& limits = {},
                             DecodeTrace* trace = nullptr);

/// All key sets of size <= max_keys whose sketch is bit-identical to `s`
/// (guard included), found by meet-in-the-middle over the w-bit universe.
/// Requires w <= 16; throws BudgetExceededError beyond the budget. Results
/// are sorted; the empty set is included when `s` is empty.
std::vector<std::vector<Key>> exhaustive_preimage(const Sketch& s,
                                                  std::size_t max_keys,
                                                  EnumBudget budget = {});

/// Monte Carlo native-anomaly counts: per trial, draws m distinct 64-bit
/// keys under a derived seed and counts native anomalies via
/// find_native_anomalies. Intended for small n (<= 64).
std::vector<std::uint32_t> count_native_anomalies_mc(std::uint32_t n,
                                                     std::uint32_t m,
                                                     std::uint32_t k,
                                                     std::uint32_t trials,
                                                     std::uint64_t base_seed,
                                                     EnumBudget budget = {});

/// Represented set at the start of round r+1, for r = 0..rounds, replayed
/// from a trace and the known pre-decode set.
std::vector<std::unordered_set<Key>> replay_round_sets(
    const DecodeTrace& trace, std::span<const Key> pre_decode_set);

}  // namespace setsketch::oracle
