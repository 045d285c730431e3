#include "setsketch/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "detail_mix64.hpp"
#include "setsketch/oracle.hpp"

namespace setsketch::experiments {

std::uint64_t SplitMix64::next() noexcept {
  state_ += detail::kGolden64;
  return detail::mix64(state_);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return detail::mix64(base ^ (detail::kGolden64 * (index + 1)));
}

std::vector<Key> draw_distinct_keys(std::uint64_t seed, std::size_t count,
                                    std::uint8_t w) {
  if (w < 1 || w > 64) throw InvalidParamsError("key width w must be in [1, 64]");
  const std::uint64_t mask =
      w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
  if (count > mask)
    throw InvalidParamsError("cannot draw that many distinct keys");
  SplitMix64 stream(seed);
  std::unordered_set<Key> seen;
  seen.reserve(count * 2);
  std::vector<Key> keys;
  keys.reserve(count);
  while (keys.size() < count) {
    const Key x = stream.next() & mask;
    if (x == 0 || !seen.insert(x).second) continue;
    keys.push_back(x);
  }
  return keys;
}

TrialInstance make_trial_instance(std::uint32_t n, std::uint32_t k,
                                  std::uint8_t w, std::uint8_t r,
                                  std::uint32_t m, std::uint64_t trial_seed) {
  TrialInstance instance;
  instance.params = HashParams{w, k, n, mix_seed(trial_seed, 1), r};
  instance.params.validate();
  instance.keys = draw_distinct_keys(mix_seed(trial_seed, 2), m, w);
  return instance;
}

void SweepSpec::validate() const {
  HashParams{w, k, n, base_seed, r}.validate();
  if (loads.empty()) throw InvalidParamsError("sweep needs at least one load");
  for (double c : loads)
    if (!(c > 0.0) || c > 1.0)
      throw InvalidParamsError("loads must lie in (0, 1]");
  if (trials < 1) throw InvalidParamsError("trials must be >= 1");
}

namespace {

struct TrialStats {
  bool success = false;
  bool exact = false;
  std::uint32_t rounds = 0;
  std::uint64_t steps = 0;
  std::uint64_t anomalous_steps = 0;
};

TrialStats run_trial(std::uint32_t n, std::uint32_t k, std::uint8_t w,
                     std::uint8_t r, std::uint32_t m, std::uint64_t trial_seed,
                     const DecodeLimits& limits) {
  const TrialInstance instance = make_trial_instance(n, k, w, r, m, trial_seed);
  Sketch sketch = Sketch::from_set(instance.params, instance.keys);
  DecodeTrace trace;
  const DecodeOutcome outcome = decode(sketch, limits, &trace);

  TrialStats stats;
  stats.success = outcome.success;
  stats.rounds = outcome.rounds_used;
  stats.steps = trace.steps;
  stats.anomalous_steps =
      annotate_trace(trace, instance.keys).anomalous_steps;
  if (outcome.success) {
    std::vector<Key> expected = instance.keys;
    std::sort(expected.begin(), expected.end());
    stats.exact = expected == outcome.keys;
  }
  return stats;
}

bool majority_success(std::uint32_t n, std::uint32_t k, std::uint32_t m,
                      std::uint32_t trials, std::uint64_t probe_seed) {
  std::uint32_t successes = 0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    const TrialInstance instance =
        make_trial_instance(n, k, 64, 32, m, mix_seed(probe_seed, t));
    Sketch sketch = Sketch::from_set(instance.params, instance.keys);
    if (decode(sketch).success) ++successes;
  }
  return 2 * successes > trials;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  rows.reserve(spec.loads.size());
  for (std::size_t point = 0; point < spec.loads.size(); ++point) {
    const double c = spec.loads[point];
    const auto m = std::uint32_t(std::llround(c * spec.n));
    const std::uint64_t point_seed = mix_seed(spec.base_seed, point);

    SweepRow row;
    row.load = c;
    row.trials = spec.trials;
    std::uint64_t rounds_sum = 0, steps_sum = 0, anomalous_sum = 0;
    for (std::uint32_t t = 0; t < spec.trials; ++t) {
      const TrialStats stats = run_trial(spec.n, spec.k, spec.w, spec.r, m,
                                         mix_seed(point_seed, t), spec.limits);
      row.successes += stats.success;
      row.exact_successes += stats.exact;
      rounds_sum += stats.rounds;
      steps_sum += stats.steps;
      anomalous_sum += stats.anomalous_steps;
    }
    row.success_rate = double(row.successes) / spec.trials;
    row.mean_rounds = double(rounds_sum) / spec.trials;
    row.mean_steps = double(steps_sum) / spec.trials;
    row.mean_anomalous_steps = double(anomalous_sum) / spec.trials;
    rows.push_back(row);
  }
  return rows;
}

ThresholdEstimate estimate_threshold(std::uint32_t k, std::uint32_t n,
                                     std::uint32_t trials_per_probe,
                                     double tolerance,
                                     std::uint64_t base_seed) {
  HashParams{64, k, n, base_seed, 32}.validate();
  if (trials_per_probe < 1)
    throw InvalidParamsError("trials_per_probe must be >= 1");
  if (!(tolerance >= 1.0 / n))
    throw InvalidParamsError("tolerance must be >= 1/n");

  double lo = 0.5, hi = 1.0;
  std::uint64_t probes = 0;
  ThresholdEstimate est;
  est.k = k;
  est.n = n;

  const auto probe = [&](double c) {
    const auto m = std::uint32_t(std::llround(c * n));
    const bool success =
        majority_success(n, k, m, trials_per_probe, mix_seed(base_seed, probes));
    ++probes;
    est.trials_used += trials_per_probe;
    return success;
  };

  if (!probe(lo))
    throw NonMonotoneBracketError("load 0.5 did not classify as success");
  if (probe(hi))
    throw NonMonotoneBracketError("load 1.0 did not classify as failure");
  while ((hi - lo) / 2 > tolerance) {
    const double mid = (lo + hi) / 2;
    if (probe(mid))
      lo = mid;
    else
      hi = mid;
  }
  est.estimate = (lo + hi) / 2;
  est.half_width = (hi - lo) / 2;
  return est;
}

std::vector<TimingRow> time_decode(std::uint32_t k, double load,
                                   std::span<const std::uint32_t> n_list,
                                   std::uint64_t base_seed) {
  if (!(load > 0.0) || load > 1.0)
    throw InvalidParamsError("load must lie in (0, 1]");

  // Construction is excluded from the timed region. Repetitions are
  // interleaved across sizes so background noise lands on every size
  // alike instead of biasing one row's median.
  std::vector<Sketch> bases;
  bases.reserve(n_list.size());
  for (std::uint32_t n : n_list) {
    const auto m = std::uint32_t(std::llround(load * n));
    const TrialInstance instance =
        make_trial_instance(n, k, 64, 32, m, mix_seed(base_seed, n));
    bases.push_back(Sketch::from_set(instance.params, instance.keys));
    Sketch warmup = bases.back();  // one untimed run settles caches
    decode(warmup);
  }

  std::vector<std::array<double, 5>> samples(n_list.size());
  for (int rep = 0; rep < 5; ++rep) {
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      Sketch copy = bases[i];
      const auto start = std::chrono::steady_clock::now();
      decode(copy);
      const auto stop = std::chrono::steady_clock::now();
      samples[i][rep] = std::chrono::duration<double>(stop - start).count();
    }
  }

  std::vector<TimingRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    std::sort(samples[i].begin(), samples[i].end());
    TimingRow row;
    row.n = n_list[i];
    row.seconds = samples[i][2];
    row.ns_per_bucket = samples[i][2] * 1e9 / n_list[i];
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> timing_ratios(std::span<const TimingRow> rows) {
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    ratios.push_back(rows[i + 1].seconds / rows[i].seconds);
  return ratios;
}

AnomalyStatsSummary anomaly_stats(std::uint32_t n, double load,
                                  std::uint32_t k, std::uint32_t trials,
                                  std::uint64_t base_seed) {
  if (!(load > 0.0) || load > 1.0)
    throw InvalidParamsError("load must lie in (0, 1]");
  if (trials < 1) throw InvalidParamsError("trials must be >= 1");
  const auto m = std::uint32_t(std::llround(load * n));

  AnomalyStatsSummary summary;
  summary.trials = trials;
  summary.counts_available = n <= 64;

  std::uint64_t anomalous_sum = 0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    const TrialInstance instance =
        make_trial_instance(n, k, 64, 32, m, mix_seed(base_seed, t));
    Sketch sketch = Sketch::from_set(instance.params, instance.keys);
    DecodeTrace trace;
    decode(sketch, {}, &trace);
    const std::uint64_t anomalous =
        annotate_trace(trace, instance.keys).anomalous_steps;
    anomalous_sum += anomalous;
    summary.max_anomalous_steps =
        std::max(summary.max_anomalous_steps, anomalous);
  }
  summary.mean_anomalous_steps = double(anomalous_sum) / trials;

  if (summary.counts_available) {
    // Same per-trial seeds as above, so counts refer to the same instances.
    double sum = 0;
    std::vector<std::uint32_t> counts;
    counts.reserve(trials);
    for (std::uint32_t t = 0; t < trials; ++t) {
      const TrialInstance instance =
          make_trial_instance(n, k, 64, 32, m, mix_seed(base_seed, t));
      SeededHashSource source(instance.params);
      const auto anomalies =
          oracle::find_native_anomalies(source, instance.keys);
      counts.push_back(std::uint32_t(anomalies.size()));
      sum += double(anomalies.size());
      summary.max_native_count =
          std::max<std::uint32_t>(summary.max_native_count,
                                  std::uint32_t(anomalies.size()));
    }
    summary.mean_native_count = sum / trials;
    double variance = 0;
    for (std::uint32_t c : counts) {
      const double d = double(c) - summary.mean_native_count;
      variance += d * d;
    }
    summary.stddev_native_count =
        trials > 1 ? std::sqrt(variance / (trials - 1)) : 0.0;
  }
  return summary;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "c,success_rate,mean_rounds,mean_steps,mean_anomalous_steps\n";
  for (const SweepRow& row : rows)
    out << fmt(row.load) << ',' << fmt(row.success_rate) << ','
        << fmt(row.mean_rounds) << ',' << fmt(row.mean_steps) << ','
        << fmt(row.mean_anomalous_steps) << '\n';
}

void write_sweep_json(std::ostream& out, const SweepSpec& spec,
                      std::span<const SweepRow> rows) {
  nlohmann::ordered_json doc;
  doc["k"] = spec.k;
  doc["n"] = spec.n;
  doc["w"] = spec.w;
  doc["r"] = spec.r;
  doc["trials"] = spec.trials;
  doc["base_seed"] = spec.base_seed;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const SweepRow& row : rows)
    doc["rows"].push_back({{"c", row.load},
                           {"success_rate", row.success_rate},
                           {"successes", row.successes},
                           {"exact_successes", row.exact_successes},
                           {"mean_rounds", row.mean_rounds},
                           {"mean_steps", row.mean_steps},
                           {"mean_anomalous_steps", row.mean_anomalous_steps}});
  out << doc.dump(2) << '\n';
}

void write_timing_csv(std::ostream& out, std::span<const TimingRow> rows) {
  out << "n,seconds,ns_per_bucket\n";
  for (const TimingRow& row : rows)
    out << row.n << ',' << fmt(row.seconds) << ',' << fmt(row.ns_per_bucket)
        << '\n';
}

void write_timing_json(std::ostream& out, std::span<const TimingRow> rows) {
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const TimingRow& row : rows)
    doc["rows"].push_back({{"n", row.n},
                           {"seconds", row.seconds},
                           {"ns_per_bucket", row.ns_per_bucket}});
  doc["ratios"] = timing_ratios(rows);
  out << doc.dump(2) << '\n';
}

void write_threshold_json(std::ostream& out, const ThresholdEstimate& est) {
  nlohmann::ordered_json doc;
  doc["k"] = est.k;
  doc["n"] = est.n;
  doc["estimate"] = est.estimate;
  doc["half_width"] = est.half_width;
  doc["trials_used"] = est.trials_used;
  out << doc.dump(2) << '\n';
}

void write_anomaly_json(std::ostream& out, const AnomalyStatsSummary& summary) {
  nlohmann::ordered_json doc;
  doc["trials"] = summary.trials;
  doc["counts_available"] = summary.counts_available;
  if (summary.counts_available) {
    doc["mean_native_count"] = summary.mean_native_count;
    doc["stddev_native_count"] = summary.stddev_native_count;
    doc["max_native_count"] = summary.max_native_count;
  }
  doc["mean_anomalous_steps"] = summary.mean_anomalous_steps;
  doc["max_anomalous_steps"] = summary.max_anomalous_steps;
  out << doc.dump(2) << '\n';
}

}  // namespace setsketch::experiments
