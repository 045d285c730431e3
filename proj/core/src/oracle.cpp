#include "setsketch/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "setsketch/experiments.hpp"

namespace setsketch::oracle {

InjectedHashSource::InjectedHashSource(const HashParams& fallback, Table table)
    : fallback_(fallback), table_(std::move(table)) {
  fallback_.validate();
  for (const auto& [key, slots] : table_) {
    require_valid_key(fallback_, key);
    if (slots.size() != fallback_.k)
      throw InvalidParamsError("injected slot sequence must have length k");
    for (std::uint32_t b : slots)
      if (b >= fallback_.n)
        throw InvalidParamsError("injected bucket index out of range");
  }
}

std::uint32_t InjectedHashSource::bucket(Key x, std::uint32_t slot) const {
  if (auto it = table_.find(x); it != table_.end()) return it->second[slot];
  return bucket_of(fallback_, x, slot);
}

std::uint64_t InjectedHashSource::guard(Key x) const {
  return guard_digest(fallback_, x);
}

InjectedHashSource::Table parse_injected_table(std::istream& in,
                                               const HashParams& params) {
  InjectedHashSource::Table table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fail = [&](const std::string& why) {
      throw InvalidParamsError("inject table line " + std::to_string(lineno) +
                               ": " + why);
    };
    const std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::size_t colon = line.find(':', start);
    if (colon == std::string::npos) fail("expected `key: b1,b2,...`");
    Key key = 0;
    try {
      key = std::stoull(line.substr(start, colon - start), nullptr, 0);
    } catch (const std::exception&) {
      fail("bad key");
    }
    std::vector<std::uint32_t> slots;
    std::stringstream rest(line.substr(colon + 1));
    std::string field;
    while (std::getline(rest, field, ',')) {
      try {
        slots.push_back(
            static_cast<std::uint32_t>(std::stoul(field, nullptr, 0)));
      } catch (const std::exception&) {
        fail("bad bucket index");
      }
    }
    if (slots.size() != params.k) fail("expected exactly k bucket indices");
    for (std::uint32_t b : slots)
      if (b >= params.n) fail("bucket index out of range");
    if (!table.emplace(key, std::move(slots)).second) fail("duplicate key");
  }
  return table;
}

BucketMultiset source_multiset(const HashSource& source, Key x) {
  const std::uint32_t k = source.params().k;
  BucketMultiset slots(k);
  for (std::uint32_t j = 0; j < k; ++j) slots[j] = source.bucket(x, j);
  return slots;
}

namespace {

// Buckets hit an odd number of times, sorted ascending. Only these receive a
// net contribution from the key, and only these count for centre membership.
std::vector<std::uint32_t> odd_incidence(const HashSource& source, Key x) {
  BucketMultiset slots = source_multiset(source, x);
  std::sort(slots.begin(), slots.end());
  std::vector<std::uint32_t> odd;
  for (std::size_t i = 0; i < slots.size();) {
    std::size_t j = i;
    while (j < slots.size() && slots[j] == slots[i]) ++j;
    if ((j - i) % 2 == 1) odd.push_back(slots[i]);
    i = j;
  }
  return odd;
}

std::vector<std::uint32_t> intersect_sorted(
    const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

double log_binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return -1;
  double v = 0;
  for (std::uint64_t i = 0; i < r; ++i)
    v += std::log2(double(n - i)) - std::log2(double(i + 1));
  return v;
}

void require_budget_combinations(std::uint64_t n, std::uint64_t max_r,
                                 const EnumBudget& budget,
                                 const char* what) {
  double total = 0;
  for (std::uint64_t r = 0; r <= max_r && r <= n; ++r) {
    const double lg = log_binomial(n, r);
    total += lg >= 63 ? std::ldexp(1.0, 63) : std::exp2(lg);
    if (total > double(budget.limit))
      throw BudgetExceededError(std::string(what) +
                                ": search space exceeds the budget");
  }
}

}  // namespace

std::vector<Anomaly> enumerate_anomalies(const HashSource& source,
                                         std::span<const Key> candidates,
                                         std::size_t max_size,
                                         EnumBudget budget) {
  std::vector<Anomaly> out;
  if (max_size < 3 || candidates.size() < 3) return out;
  require_budget_combinations(candidates.size(), max_size, budget,
                              "enumerate_anomalies");

  std::vector<Key> keys(candidates.begin(), candidates.end());
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw InvalidKeyError("candidate keys must be distinct");
  for (Key x : keys) require_valid_key(source.params(), x);

  std::vector<std::vector<std::uint32_t>> odd(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    odd[i] = odd_incidence(source, keys[i]);

  std::vector<Key> chosen;
  // Depth-first over ascending index combinations; `centres` holds the
  // buckets every chosen key hits with odd multiplicity, so an empty
  // intersection prunes the whole subtree.
  auto search = [&](auto&& self, std::size_t start, Key running_xor,
                    const std::vector<std::uint32_t>& centres) -> void {
    if (chosen.size() >= 3 && running_xor == 0)
      for (std::uint32_t centre : centres) out.push_back({chosen, centre});
    if (chosen.size() == max_size) return;
    for (std::size_t i = start; i < keys.size(); ++i) {
      const std::vector<std::uint32_t> next =
          chosen.empty() ? odd[i] : intersect_sorted(centres, odd[i]);
      if (next.empty()) continue;
      chosen.push_back(keys[i]);
      self(self, i + 1, running_xor ^ keys[i], next);
      chosen.pop_back();
    }
  };
  search(search, 0, 0, {});
  return out;
}

std::vector<Anomaly> native_anomalies(std::span<const Anomaly> anomalies,
                                      std::span<const Key> s0) {
  std::unordered_set<Key> stored(s0.begin(), s0.end());
  std::vector<Anomaly> out;
  for (const Anomaly& a : anomalies) {
    std::size_t foreign = 0;
    for (Key x : a.keys)
      if (!stored.contains(x)) ++foreign;
    if (foreign <= 1) out.push_back(a);
  }
  return out;
}

std::vector<Anomaly> find_native_anomalies(const HashSource& source,
                                           std::span<const Key> s0,
                                           EnumBudget budget) {
  const HashParams& p = source.params();
  std::vector<std::vector<Key>> incident(p.n);
  for (Key x : s0) {
    require_valid_key(p, x);
    for (std::uint32_t b : odd_incidence(source, x)) incident[b].push_back(x);
  }

  std::uint64_t work = 0;
  for (const auto& keys : incident) {
    if (keys.size() >= 63)
      throw BudgetExceededError("find_native_anomalies: bucket degree too high");
    work += std::uint64_t{1} << keys.size();
    if (work > budget.limit)
      throw BudgetExceededError("find_native_anomalies: search space exceeds the budget");
  }

  std::set<std::pair<std::vector<Key>, std::uint32_t>> found;
  for (std::uint32_t centre = 0; centre < p.n; ++centre) {
    std::vector<Key>& keys = incident[centre];
    std::sort(keys.begin(), keys.end());
    const std::size_t sz = keys.size();
    if (sz < 2) continue;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << sz); ++mask) {
      if (std::popcount(mask) < 2) continue;
      std::vector<Key> subset;
      Key running_xor = 0;
      for (std::size_t i = 0; i < sz; ++i)
        if (mask & (std::uint64_t{1} << i)) {
          subset.push_back(keys[i]);
          running_xor ^= keys[i];
        }
      if (running_xor == 0) {
        if (subset.size() >= 3) found.emplace(std::move(subset), centre);
        continue;
      }
      // The missing member is determined by the XOR-zero condition; it may
      // be a stored key or the anomaly's single foreign key.
      const Key missing = running_xor;
      if (std::binary_search(subset.begin(), subset.end(), missing)) continue;
      if (!is_valid_key(p, missing)) continue;
      if (!odd_multiplicity(source_multiset(source, missing), centre))
        continue;
      subset.insert(
          std::upper_bound(subset.begin(), subset.end(), missing), missing);
      found.emplace(std::move(subset), centre);
    }
  }

  std::vector<Anomaly> out;
  out.reserve(found.size());
  for (const auto& [keys, centre] : found) out.push_back({keys, centre});
  return out;
}

std::vector<std::uint32_t> anomalous_buckets(
    const HashSource& source, std::span<const Anomaly> anomalies) {
  std::set<std::uint32_t> buckets;
  std::unordered_set<Key> seen;
  for (const Anomaly& a : anomalies)
    for (Key x : a.keys) {
      if (!seen.insert(x).second) continue;
      for (std::uint32_t b : source_multiset(source, x)) buckets.insert(b);
    }
  return {buckets.begin(), buckets.end()};
}

DecodeOutcome reference_peel(Sketch& s, std::span<const std::uint32_t> banned,
                             const DecodeLimits& limits, DecodeTrace* trace) {
  std::vector<bool> mask(s.params().n, false);
  for (std::uint32_t b : banned) {
    if (b >= s.params().n)
      throw InvalidParamsError("banned bucket index out of range");
    mask[b] = true;
  }
  return detail::decode_impl(s, limits, trace, &mask);
}

namespace {

// Packed bucket/guard bytes; XOR-linear, so the state of a disjoint union is
// the byte-wise XOR of the halves' states.
std::string pack_state(const Sketch& s) {
  const HashParams& p = s.params();
  const std::size_t bucket_bytes = (p.w + 7) / 8;
  const std::size_t guard_bytes = p.r > 0 ? (p.r + 7) / 8 : 0;
  std::string out(p.n * bucket_bytes + guard_bytes, '\0');
  std::size_t pos = 0;
  for (std::uint64_t v : s.buckets())
    for (std::size_t b = 0; b < bucket_bytes; ++b)
      out[pos++] = char((v >> (8 * b)) & 0xFF);
  for (std::size_t b = 0; b < guard_bytes; ++b)
    out[pos++] = char((s.guard() >> (8 * b)) & 0xFF);
  return out;
}

std::string xor_states(const std::string& a, const std::string& b) {
  assert(a.size() == b.size());
  std::string out(a.size(), '\0');
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

// Ascending combinations of `want` keys from [first, universe], maintaining
// the scratch sketch incrementally.
template <typename Callback>
void for_each_combination(Sketch& scratch, std::vector<Key>& current,
                          Key first, Key universe, std::size_t want,
                          const Callback& cb) {
  if (want == 0) {
    cb(current, scratch);
    return;
  }
  for (Key x = first; x + (want - 1) <= universe; ++x) {
    scratch.toggle(x);
    current.push_back(x);
    for_each_combination(scratch, current, x + 1, universe, want - 1, cb);
    current.pop_back();
    scratch.toggle(x);
  }
}

}  // namespace

std::vector<std::vector<Key>> exhaustive_preimage(const Sketch& s,
                                                  std::size_t max_keys,
                                                  EnumBudget budget) {
  const HashParams& p = s.params();
  if (p.w > 16)
    throw BudgetExceededError("exhaustive_preimage requires w <= 16");
  const Key universe = p.key_mask();
  if (max_keys > universe) max_keys = universe;
  require_budget_combinations(universe, (max_keys + 1) / 2, budget,
                              "exhaustive_preimage");

  const std::string target = pack_state(s);
  std::vector<std::vector<Key>> results;

  Sketch scratch(p, s.shared_source());
  std::vector<Key> current;
  for (std::size_t total = 0; total <= max_keys; ++total) {
    const std::size_t left_size = total / 2;
    const std::size_t right_size = total - left_size;

    std::map<std::string, std::vector<std::vector<Key>>> left_by_state;
    for_each_combination(
        scratch, current, 1, universe, left_size,
        [&](const std::vector<Key>& combo, const Sketch& st) {
          left_by_state[pack_state(st)].push_back(combo);
        });

    for_each_combination(
        scratch, current, 1, universe, right_size,
        [&](const std::vector<Key>& combo, const Sketch& st) {
          const auto it = left_by_state.find(xor_states(target, pack_state(st)));
          if (it == left_by_state.end()) return;
          for (const std::vector<Key>& left : it->second) {
            // Each preimage splits uniquely at its sorted midpoint.
            if (!left.empty() && !combo.empty() &&
                left.back() >= combo.front())
              continue;
            std::vector<Key> whole = left;
            whole.insert(whole.end(), combo.begin(), combo.end());
            results.push_back(std::move(whole));
          }
        });
  }
  std::sort(results.begin(), results.end());
  return results;
}

std::vector<std::uint32_t> count_native_anomalies_mc(std::uint32_t n,
                                                     std::uint32_t m,
                                                     std::uint32_t k,
                                                     std::uint32_t trials,
                                                     std::uint64_t base_seed,
                                                     EnumBudget budget) {
  std::vector<std::uint32_t> counts;
  counts.reserve(trials);
  for (std::uint32_t t = 0; t < trials; ++t) {
    const auto instance = experiments::make_trial_instance(
        n, k, /*w=*/64, /*r=*/0, m, experiments::mix_seed(base_seed, t));
    SeededHashSource source(instance.params);
    counts.push_back(static_cast<std::uint32_t>(
        find_native_anomalies(source, instance.keys, budget).size()));
  }
  return counts;
}

std::vector<std::unordered_set<Key>> replay_round_sets(
    const DecodeTrace& trace, std::span<const Key> pre_decode_set) {
  std::vector<std::unordered_set<Key>> out;
  std::unordered_set<Key> current(pre_decode_set.begin(),
                                  pre_decode_set.end());
  out.push_back(current);
  for (const DecodeRound& round : trace.rounds) {
    for (const DecodeStep& step : round.steps) {
      if (auto it = current.find(step.key); it != current.end())
        current.erase(it);
      else
        current.insert(step.key);
    }
    out.push_back(current);
  }
  return out;
}

}  // namespace setsketch::oracle
