#include "setsketch/decode.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace setsketch {

std::uint32_t DecodeLimits::default_max_rounds(std::uint32_t n) noexcept {
  const std::uint64_t v = std::uint64_t{n} + 2;
  const std::uint32_t ceil_log2 = std::bit_width(v - 1);
  return 8 * ceil_log2 + 32;
}

std::uint32_t DecodeLimits::resolve(std::uint32_t n) const {
  if (!max_rounds) return default_max_rounds(n);
  if (*max_rounds < 1) throw InvalidParamsError("max_rounds must be >= 1");
  return *max_rounds;
}

namespace detail {

namespace {

// S_dec is the symmetric difference of all toggled keys: exactly those that
// appear an odd number of times in the step sequence. Materializing it once
// at the end keeps the hot loop free of hash-set traffic.
std::vector<Key> odd_parity_keys(std::vector<Key> toggled) {
  std::sort(toggled.begin(), toggled.end());
  std::vector<Key> out;
  for (std::size_t i = 0; i < toggled.size();) {
    std::size_t j = i;
    while (j < toggled.size() && toggled[j] == toggled[i]) ++j;
    if ((j - i) % 2 == 1) out.push_back(toggled[i]);
    i = j;
  }
  return out;
}

}  // namespace

DecodeOutcome decode_impl(Sketch& s, const DecodeLimits& limits,
                          DecodeTrace* trace,
                          const std::vector<bool>* banned) {
  const HashParams& p = s.params();
  const std::uint32_t max_rounds = limits.resolve(p.n);
  const HashSource& source = s.source();

  const auto eligible = [&](std::uint32_t i) {
    if (banned && (*banned)[i]) return false;
    return s.looks_pure(i);
  };

  std::vector<std::uint32_t> queue, queue_next;
  for (std::uint32_t i = 0; i < p.n; ++i)
    if (eligible(i)) queue.push_back(i);

  if (trace) {
    trace->clear();
    trace->initial_queue = queue.size();
  }
  std::uint64_t insertions = queue.size();
  std::vector<Key> toggled;

  std::uint32_t rounds = 0;
  bool round_limit = false;
  while (!queue.empty()) {
    if (rounds == max_rounds) {
      round_limit = true;
      break;
    }
    ++rounds;
    DecodeRound* record = nullptr;
    if (trace) {
      record = &trace->rounds.emplace_back();
      record->popped = queue;
    }
    for (std::uint32_t i : queue) {
      // Purity must be re-checked: earlier steps in this round may have
      // changed the bucket since it was enqueued.
      if (!eligible(i)) continue;
      const Key x = s.bucket_value(i);
      s.toggle(x);
      toggled.push_back(x);
      if (record) record->steps.push_back({i, x});
      for (std::uint32_t j = 0; j < p.k; ++j) {
        const std::uint32_t b = source.bucket(x, j);
        if (eligible(b)) {
          queue_next.push_back(b);
          ++insertions;
        }
      }
    }
    queue.swap(queue_next);
    queue_next.clear();
  }

  if (trace) {
    trace->queue_insertions = insertions;
    trace->steps = toggled.size();
  }

  DecodeOutcome out;
  out.rounds_used = rounds;
  out.keys = odd_parity_keys(std::move(toggled));
  if (round_limit)
    out.failure = DecodeFailure::RoundLimit;
  else if (s.nonzero_buckets() != 0)
    out.failure = DecodeFailure::ResidueNonzero;
  else if (s.guard() != 0)
    out.failure = DecodeFailure::GuardMismatch;
  else
    out.success = true;
  return out;
}

}  // namespace detail

DecodeOutcome decode(Sketch& s, const DecodeLimits& limits,
                     DecodeTrace* trace) {
  return detail::decode_impl(s, limits, trace, nullptr);
}

DecodeOutcome decode_copy(const Sketch& s, const DecodeLimits& limits,
                          DecodeTrace* trace) {
  Sketch copy = s;
  return detail::decode_impl(copy, limits, trace, nullptr);
}

TraceAnnotation annotate_trace(const DecodeTrace& trace,
                               std::span<const Key> pre_decode_set) {
  std::unordered_set<Key> s0(pre_decode_set.begin(), pre_decode_set.end());
  std::unordered_set<Key> decoded;
  TraceAnnotation out;
  out.anomalous.reserve(trace.steps);
  for (const DecodeRound& round : trace.rounds) {
    for (const DecodeStep& step : round.steps) {
      // Current represented set is s0 Δ decoded, so the detected key is
      // present iff its memberships in s0 and decoded differ.
      const bool present =
          s0.contains(step.key) != decoded.contains(step.key);
      out.anomalous.push_back(!present);
      if (present)
        ++out.regular_steps;
      else
        ++out.anomalous_steps;
      if (auto it = decoded.find(step.key); it != decoded.end())
        decoded.erase(it);
      else
        decoded.insert(step.key);
    }
  }
  return out;
}

}  // namespace setsketch
