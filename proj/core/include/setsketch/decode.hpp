#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "setsketch/sketch.hpp"

namespace setsketch {

struct DecodeLimits {
  /// Round budget; must be >= 1 when set. Unset selects the default cap,
  /// which is generous enough that hitting it signals a toggle cycle rather
  /// than a slow success.
  std::optional<std::uint32_t> max_rounds;

  static std::uint32_t default_max_rounds(std::uint32_t n) noexcept;
  std::uint32_t resolve(std::uint32_t n) const;  // throws InvalidParamsError
};

enum class DecodeFailure {
  ResidueNonzero,  ///< queues drained but some bucket is nonzero
  RoundLimit,      ///< round budget exhausted with work pending
  GuardMismatch,   ///< buckets all zero but the guard word is nonzero
};

struct DecodeOutcome {
  bool success = false;
  std::optional<DecodeFailure> failure;
  /// Recovered set on success; the partial decode set at stop time otherwise.
  std::vector<Key> keys;
  std::uint32_t rounds_used = 0;
};

struct DecodeStep {
  std::uint32_t bucket;
  Key key;

  bool operator==(const DecodeStep&) const = default;
};

struct DecodeRound {
  std::vector<std::uint32_t> popped;  ///< queue drained this round, FIFO order
  std::vector<DecodeStep> steps;      ///< pops that passed the purity recheck

  bool operator==(const DecodeRound&) const = default;
};

/// Execution record for tests and experiments. Steps are listed in execution
/// order; together with the pre-decode set they determine the represented
/// set after every step.
struct DecodeTrace {
  std::vector<DecodeRound> rounds;
  std::uint64_t initial_queue = 0;     ///< buckets enqueued by the initial scan
  std::uint64_t queue_insertions = 0;  ///< total enqueues, initial scan included
  std::uint64_t steps = 0;

  void clear() { *this = {}; }

  bool operator==(const DecodeTrace&) const = default;
};

/// Breadth-first peeling decoder.
///
/// The initial queue collects every pure-looking bucket in ascending order.
/// Each round drains the queue FIFO; a popped bucket is re-checked, and on
/// success its key is toggled out, recorded in the decoded set, and the
/// key's slots that now look pure are appended to the next round's queue in
/// slot order. Queues are multisets: no deduplication is performed.
///
/// Mutates `s` toward empty; on success `s` ends empty. Failures are data,
/// not exceptions: the outcome carries the partial decode set, and the
/// residual state is left in `s`.
DecodeOutcome decode(Sketch& s, const DecodeLimits& limits = {},
                     DecodeTrace* trace = nullptr);

/// As decode, but runs on an internal copy; `s` is unchanged.
DecodeOutcome decode_copy(const Sketch& s, const DecodeLimits& limits = {},
                          DecodeTrace* trace = nullptr);

/// Step labelling against a known pre-decode set. A step is regular if the
/// detected key was in the represented set at that moment (a removal) and
/// anomalous otherwise (an addition).
struct TraceAnnotation {
  std::uint64_t regular_steps = 0;
  std::uint64_t anomalous_steps = 0;
  std::vector<bool> anomalous;  ///< one flag per step, execution order
};

TraceAnnotation annotate_trace(const DecodeTrace& trace,
                               std::span<const Key> pre_decode_set);

namespace detail {
// Shared engine; `banned` (when non-null, size n) forces looks_pure false on
// the marked buckets. Production decode passes nullptr.
DecodeOutcome decode_impl(Sketch& s, const DecodeLimits& limits,
                          DecodeTrace* trace,
                          const std::vector<bool>* banned);
}  // namespace detail

}  // namespace setsketch
