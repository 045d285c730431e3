#include "setsketch/decode.hpp"

#include <algorithm>
#include <memory>
#include <vector>

#include "doctest.h"
#include "setsketch/experiments.hpp"
#include "setsketch/oracle.hpp"

using namespace setsketch;

namespace {

std::shared_ptr<const HashSource> inject(
    const HashParams& p, oracle::InjectedHashSource::Table table) {
  return std::make_shared<oracle::InjectedHashSource>(p, std::move(table));
}

// Worked decoding example: S = {x, y, z} with x=1, y=2, z=4 and the slot
// tables below. Bucket 6 stores the foreign key x^z = 5 and deceptively
// looks pure. The paper-style bucket labels 1..8 are kept as literal
// indices, so the array has 9 buckets and bucket 0 stays unused. The two
// composite keys x^y = 3 and y^z = 6 get pinned tables as well so that no
// bucket outside the worked example ever looks pure.
struct WorkedExample {
  HashParams params{8, 3, 9, 1, 0};
  std::shared_ptr<const HashSource> source = inject(params, {{1, {1, 3, 6}},
                                                             {2, {3, 4, 7}},
                                                             {4, {1, 6, 7}},
                                                             {5, {3, 6, 8}},
                                                             {3, {2, 4, 5}},
                                                             {6, {1, 2, 4}}});
  std::vector<Key> keys{1, 2, 4};

  Sketch sketch() const { return Sketch::from_set(params, keys, source); }
};

std::vector<std::vector<std::uint32_t>> step_buckets(const DecodeTrace& t) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const DecodeRound& round : t.rounds) {
    out.emplace_back();
    for (const DecodeStep& step : round.steps) out.back().push_back(step.bucket);
  }
  return out;
}

std::vector<std::vector<Key>> step_keys(const DecodeTrace& t) {
  std::vector<std::vector<Key>> out;
  for (const DecodeRound& round : t.rounds) {
    out.emplace_back();
    for (const DecodeStep& step : round.steps) out.back().push_back(step.key);
  }
  return out;
}

}  // namespace

TEST_CASE("round cap default follows 8*ceil(log2(n+2)) + 32") {
  CHECK(DecodeLimits::default_max_rounds(1) == 48);    // ceil(log2(3)) = 2
  CHECK(DecodeLimits::default_max_rounds(8) == 64);    // ceil(log2(10)) = 4
  CHECK(DecodeLimits::default_max_rounds(65536) == 168);
  DecodeLimits limits;
  CHECK(limits.resolve(8) == 64);
  limits.max_rounds = 0;
  CHECK_THROWS_AS(limits.resolve(8), InvalidParamsError);
  limits.max_rounds = 5;
  CHECK(limits.resolve(8) == 5);
}

TEST_CASE("decoding an empty sketch succeeds with no rounds") {
  Sketch s(HashParams{64, 3, 16, 0, 32});
  const DecodeOutcome outcome = decode(s);
  CHECK(outcome.success);
  CHECK(outcome.keys.empty());
  CHECK(outcome.rounds_used == 0);
}

TEST_CASE("worked example decodes in exactly three rounds") {
  const WorkedExample fig;
  Sketch s = fig.sketch();
  DecodeTrace trace;
  const DecodeOutcome outcome = decode(s, {}, &trace);

  const std::vector<Key> recovered{1, 2, 4};
  CHECK(outcome.success);
  CHECK(outcome.keys == recovered);
  CHECK(outcome.rounds_used == 3);
  CHECK(s.is_empty());

  // Round 1 processes buckets {4, 6}, toggling y and the foreign key x^z;
  // round 2 processes {7, 8}; round 3 recovers x from bucket 1.
  const std::vector<std::vector<std::uint32_t>> want_buckets{{4, 6}, {7, 8}, {1}};
  const std::vector<std::vector<Key>> want_keys{{2, 5}, {4, 5}, {1}};
  CHECK(step_buckets(trace) == want_buckets);
  CHECK(step_keys(trace) == want_keys);

  // Full queue contents, re-check misses included.
  REQUIRE(trace.rounds.size() == 3);
  const std::vector<std::uint32_t> q1{4, 6}, q2{3, 7, 8}, q3{1, 6, 3, 6};
  CHECK(trace.rounds[0].popped == q1);
  CHECK(trace.rounds[1].popped == q2);
  CHECK(trace.rounds[2].popped == q3);

  // The foreign key was toggled twice (an anomalous step, then a removal).
  const TraceAnnotation notes = annotate_trace(trace, fig.keys);
  CHECK(notes.anomalous_steps == 1);
  CHECK(notes.regular_steps == 4);
}

TEST_CASE("failure mode: full hash collision leaves residue") {
  HashParams p{8, 3, 8, 1, 0};
  auto source = inject(p, {{1, {0, 1, 2}}, {2, {0, 1, 2}}, {3, {4, 5, 6}}});
  Sketch s = Sketch::from_set(p, std::vector<Key>{1, 2}, source);
  const DecodeOutcome outcome = decode(s);
  CHECK_FALSE(outcome.success);
  CHECK(outcome.failure == DecodeFailure::ResidueNonzero);
  CHECK(outcome.keys.empty());
  CHECK(outcome.rounds_used == 0);
  CHECK_FALSE(s.is_empty());
}

TEST_CASE("failure mode: toggle cycle hits the round limit") {
  HashParams p{8, 3, 8, 1, 0};
  auto source = inject(p, {{1, {0, 1, 2}}, {2, {0, 1, 2}}, {3, {2, 3, 4}}});
  Sketch s = Sketch::from_set(p, std::vector<Key>{1, 2}, source);
  DecodeTrace trace;
  const DecodeOutcome outcome = decode(s, {}, &trace);
  CHECK_FALSE(outcome.success);
  CHECK(outcome.failure == DecodeFailure::RoundLimit);
  CHECK(outcome.rounds_used == DecodeLimits::default_max_rounds(8));
  for (const DecodeRound& round : trace.rounds)
    for (const DecodeStep& step : round.steps) CHECK(step.key == 3);

  // Tighter budget, same classification.
  Sketch again = Sketch::from_set(p, std::vector<Key>{1, 2}, source);
  DecodeLimits limits;
  limits.max_rounds = 7;
  const DecodeOutcome bounded = decode(again, limits);
  CHECK(bounded.failure == DecodeFailure::RoundLimit);
  CHECK(bounded.rounds_used == 7);
  CHECK(bounded.keys == std::vector<Key>{3});  // odd number of cycle rounds
}

TEST_CASE("failure mode: silent cancellation, with and without the guard") {
  oracle::InjectedHashSource::Table table{
      {1, {0, 1, 2}}, {2, {0, 1, 2}}, {3, {0, 1, 2}}};
  const std::vector<Key> keys{1, 2, 3};

  HashParams unguarded{8, 3, 8, 1, 0};
  Sketch s0 = Sketch::from_set(unguarded, keys, inject(unguarded, table));
  CHECK(s0.nonzero_buckets() == 0);  // 1 ^ 2 ^ 3 cancels everywhere
  const DecodeOutcome miss = decode(s0);
  CHECK(miss.success);       // documented silent miss at r = 0
  CHECK(miss.keys.empty());  // S_dec = {} though three keys were stored

  HashParams guarded{8, 3, 8, 1, 32};
  Sketch s1 = Sketch::from_set(guarded, keys, inject(guarded, table));
  REQUIRE(s1.guard() != 0);
  const DecodeOutcome caught = decode(s1);
  CHECK_FALSE(caught.success);
  CHECK(caught.failure == DecodeFailure::GuardMismatch);
  CHECK(caught.rounds_used == 0);
}

TEST_CASE("decode_copy leaves the input unchanged") {
  HashParams p{64, 3, 64, 8, 32};
  const Sketch s =
      Sketch::from_set(p, std::vector<Key>{10, 20, 30, 40, 50});
  const Sketch before = s;
  const DecodeOutcome outcome = decode_copy(s);
  CHECK(s == before);
  Sketch mutated = s;
  CHECK(decode(mutated).success == outcome.success);
  CHECK(decode_copy(Sketch(p)).success);
}

TEST_CASE("identical inputs give identical outcomes and traces") {
  const auto instance = experiments::make_trial_instance(128, 3, 64, 32, 90, 7);
  const Sketch base = Sketch::from_set(instance.params, instance.keys);

  Sketch a = base, b = base;
  DecodeTrace ta, tb;
  const DecodeOutcome oa = decode(a, {}, &ta);
  const DecodeOutcome ob = decode(b, {}, &tb);
  CHECK(oa.success == ob.success);
  CHECK(oa.keys == ob.keys);
  CHECK(oa.rounds_used == ob.rounds_used);
  CHECK(ta == tb);
}

TEST_CASE("trace replay: S_dec and the sketch change in sync") {
  // Replaying the trace toggles over a shadow sketch must land exactly on
  // the decoder's final state; the decoded set is the symmetric difference
  // of the replayed toggles.
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto instance =
        experiments::make_trial_instance(64, 3, 64, 32, 32, seed);
    Sketch s = Sketch::from_set(instance.params, instance.keys);
    DecodeTrace trace;
    const DecodeOutcome outcome = decode(s, {}, &trace);

    Sketch shadow = Sketch::from_set(instance.params, instance.keys);
    std::vector<Key> decoded;
    for (const DecodeRound& round : trace.rounds)
      for (const DecodeStep& step : round.steps) {
        shadow.toggle(step.key);
        auto it = std::find(decoded.begin(), decoded.end(), step.key);
        if (it == decoded.end())
          decoded.push_back(step.key);
        else
          decoded.erase(it);
      }
    REQUIRE(shadow == s);
    std::sort(decoded.begin(), decoded.end());
    REQUIRE(decoded == outcome.keys);
    if (outcome.success) {
      REQUIRE(shadow.is_empty());
      std::vector<Key> expected = instance.keys;
      std::sort(expected.begin(), expected.end());
      REQUIRE(outcome.keys == expected);
    }
  }
}

TEST_CASE("step and queue-work accounting stays within the linear bound") {
  int successes = 0;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const std::uint32_t n = 128, m = 89;
    const auto instance = experiments::make_trial_instance(n, 3, 64, 32, m, seed);
    Sketch s = Sketch::from_set(instance.params, instance.keys);
    DecodeTrace trace;
    const DecodeOutcome outcome = decode(s, {}, &trace);

    // Insertions never exceed n + (k-1) * steps: the toggled bucket always
    // zeroes out, so each step can enqueue at most k - 1 buckets.
    CHECK(trace.queue_insertions <= n + 2 * trace.steps);
    CHECK(trace.initial_queue <= n);

    if (outcome.success) {
      ++successes;
      const TraceAnnotation notes = annotate_trace(trace, instance.keys);
      // Every anomalous step adds a key that a later regular step removes.
      CHECK(trace.steps == m + 2 * notes.anomalous_steps);
      CHECK(notes.regular_steps == m + notes.anomalous_steps);
    }
  }
  CHECK(successes >= 50);  // c = 0.70 at n = 128: failures are rare
}
