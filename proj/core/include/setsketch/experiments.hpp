#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "setsketch/decode.hpp"
#include "setsketch/hashing.hpp"

namespace setsketch::experiments {

/// Deterministic 64-bit stream (golden-ratio increment + the family's
/// finalizer). Used for trial seeds and key draws so results reproduce
/// byte-for-byte across runs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;

 private:
  std::uint64_t state_;
};

/// Distinct deterministic per-trial seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// `count` distinct keys drawn uniformly from [1, 2^w - 1] by rejection.
std::vector<Key> draw_distinct_keys(std::uint64_t seed, std::size_t count,
                                    std::uint8_t w);

/// One randomized experiment instance: a fresh hash seed plus m distinct
/// keys, both derived deterministically from the trial seed.
struct TrialInstance {
  HashParams params;
  std::vector<Key> keys;
};

TrialInstance make_trial_instance(std::uint32_t n, std::uint32_t k,
                                  std::uint8_t w, std::uint8_t r,
                                  std::uint32_t m, std::uint64_t trial_seed);

struct SweepSpec {
  std::uint32_t k = 3;
  std::uint32_t n = std::uint32_t{1} << 16;
  std::uint8_t w = 64;
  std::uint8_t r = 32;
  std::vector<double> loads;  ///< c = m/n grid, each in (0, 1]
  std::uint32_t trials = 100;
  std::uint64_t base_seed = 1;
  DecodeLimits limits{};

  void validate() const;  // throws InvalidParamsError
};

struct SweepRow {
  double load = 0;
  std::uint32_t trials = 0;
  std::uint32_t successes = 0;
  /// Successes whose recovered set equals the stored set exactly. With the
  /// guard enabled these match `successes` up to probability 2^-r per trial.
  std::uint32_t exact_successes = 0;
  double success_rate = 0;
  double mean_rounds = 0;
  double mean_steps = 0;
  double mean_anomalous_steps = 0;
};

/// Per grid point, `trials` independent build-and-decode experiments with
/// m = round(c * n) distinct random keys each. Deterministic given the spec.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

class NonMonotoneBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThresholdEstimate {
  std::uint32_t k = 0;
  std::uint32_t n = 0;
  double estimate = 0;
  double half_width = 0;
  std::uint64_t trials_used = 0;
};

/// Bisection on the load in [0.5, 1.0], classifying each probe by majority
/// success over trials_per_probe. The endpoints are probed first; an
/// inverted classification raises NonMonotoneBracketError.
ThresholdEstimate estimate_threshold(std::uint32_t k, std::uint32_t n,
                                     std::uint32_t trials_per_probe,
                                     double tolerance,
                                     std::uint64_t base_seed = 1);

struct TimingRow {
  std::uint32_t n = 0;
  double seconds = 0;       ///< median-of-5 decode wall time
  double ns_per_bucket = 0;
};

/// Decode-only wall times at load c for each n (sketch construction is
/// excluded; each repetition decodes a fresh copy).
std::vector<TimingRow> time_decode(std::uint32_t k, double load,
                                   std::span<const std::uint32_t> n_list,
                                   std::uint64_t base_seed = 1);

/// time(n_{i+1}) / time(n_i) for consecutive rows.
std::vector<double> timing_ratios(std::span<const TimingRow> rows);

struct AnomalyStatsSummary {
  std::uint32_t trials = 0;
  bool counts_available = false;  ///< native-anomaly enumeration ran (n <= 64)
  double mean_native_count = 0;
  double stddev_native_count = 0;
  std::uint32_t max_native_count = 0;
  double mean_anomalous_steps = 0;
  std::uint64_t max_anomalous_steps = 0;
};

/// Native-anomaly counts (small n only) and per-decode anomalous step counts
/// from traces, at load c with k slots.
AnomalyStatsSummary anomaly_stats(std::uint32_t n, double load,
                                  std::uint32_t k, std::uint32_t trials,
                                  std::uint64_t base_seed = 1);

// Writers. CSV columns are documented in docs/formats.md; identical inputs
// produce byte-identical output.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_json(std::ostream& out, const SweepSpec& spec,
                      std::span<const SweepRow> rows);
void write_timing_csv(std::ostream& out, std::span<const TimingRow> rows);
void write_timing_json(std::ostream& out, std::span<const TimingRow> rows);
void write_threshold_json(std::ostream& out, const ThresholdEstimate& est);
void write_anomaly_json(std::ostream& out, const AnomalyStatsSummary& summary);

}  // namespace setsketch::experiments
