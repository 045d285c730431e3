// sss: create, update, merge, decode and reconcile set sketches, plus the
// bench harness (success sweeps, threshold estimation, decode timing and
// anomaly statistics). Exit codes: 0 success, 1 decode failure, 2 usage or
// file errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "setsketch/decode.hpp"
#include "setsketch/experiments.hpp"
#include "setsketch/oracle.hpp"
#include "setsketch/reconcile.hpp"
#include "setsketch/sketch.hpp"

namespace {

using namespace setsketch;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<Key> parse_keys(const std::vector<std::string>& words) {
  std::vector<Key> keys;
  keys.reserve(words.size());
  for (const std::string& word : words) {
    try {
      keys.push_back(std::stoull(word, nullptr, 0));
    } catch (const std::exception&) {
      throw std::runtime_error("bad key value: " + word);
    }
  }
  return keys;
}

std::vector<Key> read_keys_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);
  return parse_keys(words);
}

Sketch load_sketch(const std::string& path,
                   const std::string& inject_table_path) {
  const auto frame = read_file(path);
  Sketch s = deserialize(frame);
  if (inject_table_path.empty()) return s;
  std::ifstream table_in(inject_table_path);
  if (!table_in)
    throw std::runtime_error("cannot open " + inject_table_path);
  auto table = oracle::parse_injected_table(table_in, s.params());
  auto source = std::make_shared<oracle::InjectedHashSource>(
      s.params(), std::move(table));
  return Sketch::from_state(
      s.params(), {s.buckets().begin(), s.buckets().end()}, s.guard(),
      std::move(source));
}

void save_sketch(const std::string& path, const Sketch& s) {
  const auto frame = serialize(s);
  write_file(path, frame);
}

const char* failure_name(DecodeFailure failure) {
  switch (failure) {
    case DecodeFailure::ResidueNonzero: return "residue_nonzero";
    case DecodeFailure::RoundLimit: return "round_limit";
    case DecodeFailure::GuardMismatch: return "guard_mismatch";
  }
  return "unknown";
}

void print_trace_text(std::ostream& out, const DecodeTrace& trace) {
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
    const DecodeRound& round = trace.rounds[r];
    out << "round " << (r + 1) << ": processed=[";
    for (std::size_t i = 0; i < round.steps.size(); ++i)
      out << (i ? "," : "") << round.steps[i].bucket;
    out << "] keys=[";
    for (std::size_t i = 0; i < round.steps.size(); ++i)
      out << (i ? "," : "") << round.steps[i].key;
    out << "]\n";
  }
}

int print_decode_outcome(const DecodeOutcome& outcome,
                         const DecodeTrace* trace, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json doc;
    doc["status"] = outcome.success ? "success" : "failure";
    if (outcome.failure) doc["reason"] = failure_name(*outcome.failure);
    doc["rounds"] = outcome.rounds_used;
    doc["keys"] = outcome.keys;
    if (trace) {
      doc["trace"] = nlohmann::ordered_json::array();
      for (std::size_t r = 0; r < trace->rounds.size(); ++r) {
        nlohmann::ordered_json round;
        round["round"] = r + 1;
        round["processed"] = nlohmann::ordered_json::array();
        round["keys"] = nlohmann::ordered_json::array();
        for (const DecodeStep& step : trace->rounds[r].steps) {
          round["processed"].push_back(step.bucket);
          round["keys"].push_back(step.key);
        }
        doc["trace"].push_back(round);
      }
    }
    std::cout << doc.dump(2) << '\n';
  } else {
    if (trace) print_trace_text(std::cout, *trace);
    std::cout << "status: " << (outcome.success ? "success" : "failure")
              << '\n';
    if (outcome.failure)
      std::cout << "reason: " << failure_name(*outcome.failure) << '\n';
    std::cout << "rounds: " << outcome.rounds_used << '\n';
    std::cout << "keys:";
    for (Key x : outcome.keys) std::cout << ' ' << x;
    std::cout << '\n';
  }
  return outcome.success ? 0 : 1;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  return file;
}

int run(int argc, char** argv) {
  CLI::App app{"simple set sketch tool"};
  app.require_subcommand(1);

  // create
  auto* create = app.add_subcommand("create", "write an empty sketch file");
  HashParams create_params;
  std::uint32_t create_w = 64, create_r = 32;
  std::string create_out;
  create->add_option("--w", create_w, "key width in bits (1-64)");
  create->add_option("--k", create_params.k, "hash slots per key (>= 3)");
  create->add_option("--n", create_params.n, "bucket count")->required();
  create->add_option("--r", create_r, "guard width in bits (0 disables)");
  create->add_option("--seed", create_params.seed, "hash seed");
  create->add_option("--out", create_out, "output sketch file")->required();

  // toggle
  auto* toggle = app.add_subcommand("toggle", "flip key membership in a sketch");
  std::string toggle_sketch, toggle_out, toggle_keys_file, toggle_table;
  std::vector<std::string> toggle_keys;
  toggle->add_option("--sketch", toggle_sketch, "sketch file")->required();
  toggle->add_option("--out", toggle_out, "output file (default: in place)");
  toggle->add_option("--key", toggle_keys, "key to toggle (repeatable)");
  toggle->add_option("--keys-file", toggle_keys_file,
                     "file of whitespace-separated keys");
  toggle->add_option("--inject-table", toggle_table,
                     "test-only explicit hash table (key: b1,b2,...,bk)");

  // merge
  auto* merge_cmd = app.add_subcommand("merge", "xor two sketches");
  std::string merge_a, merge_b, merge_out;
  merge_cmd->add_option("--a", merge_a, "first sketch")->required();
  merge_cmd->add_option("--b", merge_b, "second sketch")->required();
  merge_cmd->add_option("--out", merge_out, "output file")->required();

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "recover the stored set");
  std::string decode_sketch, decode_table, decode_format = "text";
  bool decode_trace = false;
  std::optional<std::uint32_t> decode_max_rounds;
  decode_cmd->add_option("--sketch", decode_sketch, "sketch file")->required();
  decode_cmd->add_flag("--trace", decode_trace, "print per-round steps");
  decode_cmd->add_option("--max-rounds", decode_max_rounds, "round budget");
  decode_cmd->add_option("--inject-table", decode_table,
                         "test-only explicit hash table");
  decode_cmd->add_option("--format", decode_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  // reconcile
  auto* reconcile_cmd =
      app.add_subcommand("reconcile", "decode the symmetric difference "
                                      "between local keys and a remote sketch");
  std::string rec_keys_file, rec_sketch, rec_format = "text";
  std::optional<std::uint32_t> rec_max_rounds;
  reconcile_cmd->add_option("--local-keys", rec_keys_file, "local key file")
      ->required();
  reconcile_cmd
      ->add_option("--remote-sketch", rec_sketch, "received sketch frame")
      ->required();
  reconcile_cmd->add_option("--max-rounds", rec_max_rounds, "round budget");
  reconcile_cmd->add_option("--format", rec_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  // bench
  auto* bench = app.add_subcommand("bench", "experiment harness");
  bench->require_subcommand(1);

  auto* sweep = bench->add_subcommand("sweep", "success-rate sweep over loads");
  experiments::SweepSpec sweep_spec;
  std::uint32_t sweep_w = 64, sweep_r = 32;
  std::string sweep_out, sweep_format = "csv";
  sweep->add_option("--k", sweep_spec.k, "hash slots per key");
  sweep->add_option("--n", sweep_spec.n, "bucket count");
  sweep->add_option("--w", sweep_w, "key width in bits");
  sweep->add_option("--r", sweep_r, "guard width in bits");
  sweep->add_option("--loads", sweep_spec.loads, "load grid, e.g. 0.5,0.6")
      ->required()
      ->delimiter(',');
  sweep->add_option("--trials", sweep_spec.trials, "trials per grid point");
  sweep->add_option("--seed", sweep_spec.base_seed, "base seed");
  sweep->add_option("--out", sweep_out, "output path (default stdout)");
  sweep->add_option("--format", sweep_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* threshold =
      bench->add_subcommand("threshold", "bisect the peeling threshold");
  std::uint32_t th_k = 3, th_n = 1 << 17, th_trials = 30;
  double th_tol = 0.01;
  std::uint64_t th_seed = 1;
  std::string th_out, th_format = "json";
  threshold->add_option("--k", th_k, "hash slots per key");
  threshold->add_option("--n", th_n, "bucket count");
  threshold->add_option("--trials-per-probe", th_trials, "trials per probe");
  threshold->add_option("--tol", th_tol, "bracket tolerance");
  threshold->add_option("--seed", th_seed, "base seed");
  threshold->add_option("--out", th_out, "output path (default stdout)");
  threshold->add_option("--format", th_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* timing = bench->add_subcommand("timing", "decode wall time per n");
  std::uint32_t tm_k = 3;
  double tm_c = 0.75;
  std::vector<std::uint32_t> tm_n_list;
  std::uint64_t tm_seed = 1;
  std::string tm_out, tm_format = "csv";
  timing->add_option("--k", tm_k, "hash slots per key");
  timing->add_option("--c", tm_c, "load m/n");
  timing->add_option("--n-list", tm_n_list, "bucket counts, e.g. 65536,131072")
      ->required()
      ->delimiter(',');
  timing->add_option("--seed", tm_seed, "base seed");
  timing->add_option("--out", tm_out, "output path (default stdout)");
  timing->add_option("--format", tm_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* anomalies =
      bench->add_subcommand("anomalies", "native-anomaly and decode-step stats");
  std::uint32_t an_n = 32, an_k = 3, an_trials = 500;
  double an_c = 0.5;
  std::uint64_t an_seed = 1;
  std::string an_out, an_format = "json";
  anomalies->add_option("--n", an_n, "bucket count");
  anomalies->add_option("--c", an_c, "load m/n");
  anomalies->add_option("--k", an_k, "hash slots per key");
  anomalies->add_option("--trials", an_trials, "trial count");
  anomalies->add_option("--seed", an_seed, "base seed");
  anomalies->add_option("--out", an_out, "output path (default stdout)");
  anomalies->add_option("--format", an_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (create->parsed()) {
      if (create_w < 1 || create_w > 64 || create_r > 64)
        throw InvalidParamsError("w must be in [1,64] and r in [0,64]");
      create_params.w = std::uint8_t(create_w);
      create_params.r = std::uint8_t(create_r);
      save_sketch(create_out, Sketch(create_params));
      return 0;
    }

    if (toggle->parsed()) {
      Sketch s = load_sketch(toggle_sketch, toggle_table);
      std::vector<Key> keys = parse_keys(toggle_keys);
      if (!toggle_keys_file.empty()) {
        const auto more = read_keys_file(toggle_keys_file);
        keys.insert(keys.end(), more.begin(), more.end());
      }
      for (Key x : keys) s.toggle(x);
      save_sketch(toggle_out.empty() ? toggle_sketch : toggle_out, s);
      return 0;
    }

    if (merge_cmd->parsed()) {
      Sketch a = deserialize(read_file(merge_a));
      const Sketch b = deserialize(read_file(merge_b));
      a.merge(b);
      save_sketch(merge_out, a);
      return 0;
    }

    if (decode_cmd->parsed()) {
      Sketch s = load_sketch(decode_sketch, decode_table);
      DecodeLimits limits;
      limits.max_rounds = decode_max_rounds;
      DecodeTrace trace;
      const DecodeOutcome outcome =
          decode(s, limits, decode_trace ? &trace : nullptr);
      return print_decode_outcome(outcome, decode_trace ? &trace : nullptr,
                                  decode_format);
    }

    if (reconcile_cmd->parsed()) {
      const auto local = read_keys_file(rec_keys_file);
      const auto frame = read_file(rec_sketch);
      DecodeLimits limits;
      limits.max_rounds = rec_max_rounds;
      const ReconcileReport report = reconcile_local(local, frame, limits);
      if (rec_format == "json") {
        nlohmann::ordered_json doc;
        doc["status"] = report.success ? "success" : "failure";
        if (report.failure) doc["reason"] = failure_name(*report.failure);
        doc["difference"] = report.difference;
        doc["bytes_on_wire"] = report.bytes_on_wire;
        doc["rounds"] = report.rounds_used;
        std::cout << doc.dump(2) << '\n';
      } else {
        std::cout << "status: " << (report.success ? "success" : "failure")
                  << '\n';
        if (report.failure)
          std::cout << "reason: " << failure_name(*report.failure) << '\n';
        std::cout << "bytes_on_wire: " << report.bytes_on_wire << '\n';
        std::cout << "difference:";
        for (Key x : report.difference) std::cout << ' ' << x;
        std::cout << '\n';
      }
      return report.success ? 0 : 1;
    }

    std::ofstream file;
    if (sweep->parsed()) {
      if (sweep_w < 1 || sweep_w > 64 || sweep_r > 64)
        throw InvalidParamsError("w must be in [1,64] and r in [0,64]");
      sweep_spec.w = std::uint8_t(sweep_w);
      sweep_spec.r = std::uint8_t(sweep_r);
      const auto rows = experiments::run_sweep(sweep_spec);
      std::ostream& out = open_output(file, sweep_out);
      if (sweep_format == "json")
        experiments::write_sweep_json(out, sweep_spec, rows);
      else
        experiments::write_sweep_csv(out, rows);
      return 0;
    }

    if (threshold->parsed()) {
      const auto est =
          experiments::estimate_threshold(th_k, th_n, th_trials, th_tol, th_seed);
      std::ostream& out = open_output(file, th_out);
      if (th_format == "csv") {
        out << "k,n,estimate,half_width,trials_used\n"
            << est.k << ',' << est.n << ',' << est.estimate << ','
            << est.half_width << ',' << est.trials_used << '\n';
      } else {
        experiments::write_threshold_json(out, est);
      }
      return 0;
    }

    if (timing->parsed()) {
      const auto rows = experiments::time_decode(tm_k, tm_c, tm_n_list, tm_seed);
      std::ostream& out = open_output(file, tm_out);
      if (tm_format == "json")
        experiments::write_timing_json(out, rows);
      else
        experiments::write_timing_csv(out, rows);
      return 0;
    }

    if (anomalies->parsed()) {
      const auto summary =
          experiments::anomaly_stats(an_n, an_c, an_k, an_trials, an_seed);
      std::ostream& out = open_output(file, an_out);
      if (an_format == "csv") {
        out << "trials,mean_native_count,stddev_native_count,max_native_count,"
               "mean_anomalous_steps,max_anomalous_steps\n"
            << summary.trials << ',' << summary.mean_native_count << ','
            << summary.stddev_native_count << ',' << summary.max_native_count
            << ',' << summary.mean_anomalous_steps << ','
            << summary.max_anomalous_steps << '\n';
      } else {
        experiments::write_anomaly_json(out, summary);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
