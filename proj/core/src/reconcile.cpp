#include "setsketch/reconcile.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace setsketch {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'S', 'S', '1'};

constexpr auto kCrcTable = [] {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int bit = 0; bit < 8; ++bit)
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
    table[i] = c;
  }
  return table;
}();

std::size_t bucket_bytes(const HashParams& p) noexcept { return (p.w + 7) / 8; }
std::size_t guard_bytes(const HashParams& p) noexcept {
  return p.r > 0 ? (p.r + 7) / 8 : 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(std::uint8_t(v >> (8 * b)));
}

void put_word(std::vector<std::uint8_t>& out, std::uint64_t v,
              std::size_t bytes) {
  for (std::size_t b = 0; b < bytes; ++b)
    out.push_back(std::uint8_t(v >> (8 * b)));
}

std::uint64_t get_word(std::span<const std::uint8_t> in, std::size_t offset,
                       std::size_t bytes) noexcept {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < bytes; ++b)
    v |= std::uint64_t{in[offset + b]} << (8 * b);
  return v;
}

constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 1 + 1 + 4 + 8;

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) noexcept {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::uint8_t byte : data) c = kCrcTable[(c ^ byte) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::size_t wire_frame_size(const HashParams& params) noexcept {
  return kHeaderBytes + std::size_t{params.n} * bucket_bytes(params) +
         guard_bytes(params) + 4;
}

std::vector<std::uint8_t> serialize(const Sketch& s) {
  const HashParams& p = s.params();
  std::vector<std::uint8_t> out;
  out.reserve(wire_frame_size(p));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kWireVersion);
  out.push_back(p.w);
  out.push_back(std::uint8_t(p.k));
  out.push_back(p.r);
  put_u32(out, p.n);
  put_word(out, p.seed, 8);
  const std::size_t bb = bucket_bytes(p);
  for (std::uint64_t v : s.buckets()) put_word(out, v, bb);
  if (p.r > 0) put_word(out, s.guard(), guard_bytes(p));
  put_u32(out, crc32_ieee(out));
  return out;
}

Sketch deserialize(std::span<const std::uint8_t> frame) {
  if (frame.size() < kMagic.size())
    throw WireError(WireErrorKind::TruncatedFrame, "frame shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), frame.begin()))
    throw WireError(WireErrorKind::BadMagic, "bad magic");
  if (frame.size() < kHeaderBytes)
    throw WireError(WireErrorKind::TruncatedFrame, "frame shorter than header");
  if (frame[4] != kWireVersion)
    throw WireError(WireErrorKind::BadVersion, "unsupported version");

  HashParams p;
  p.w = frame[5];
  p.k = frame[6];
  p.r = frame[7];
  p.n = std::uint32_t(get_word(frame, 8, 4));
  p.seed = get_word(frame, 12, 8);

  // Length is derived from the header before anything is allocated.
  const std::size_t expected =
      kHeaderBytes + std::size_t{p.n} * bucket_bytes(p) + guard_bytes(p) + 4;
  if (frame.size() != expected)
    throw WireError(WireErrorKind::TruncatedFrame,
                    "frame length does not match header");

  const std::uint32_t stored_crc =
      std::uint32_t(get_word(frame, frame.size() - 4, 4));
  if (crc32_ieee(frame.first(frame.size() - 4)) != stored_crc)
    throw WireError(WireErrorKind::BadCrc, "frame checksum mismatch");

  try {
    p.validate();
  } catch (const InvalidParamsError& e) {
    throw WireError(WireErrorKind::FieldRange, e.what());
  }

  const std::size_t bb = bucket_bytes(p);
  std::vector<std::uint64_t> buckets(p.n);
  std::size_t pos = kHeaderBytes;
  for (std::uint32_t i = 0; i < p.n; ++i, pos += bb)
    buckets[i] = get_word(frame, pos, bb);
  std::uint64_t guard = 0;
  if (p.r > 0) guard = get_word(frame, pos, guard_bytes(p));

  for (std::uint64_t v : buckets)
    if (v > p.key_mask())
      throw WireError(WireErrorKind::FieldRange,
                      "bucket value exceeds the key width");
  if (guard > p.guard_mask())
    throw WireError(WireErrorKind::FieldRange,
                    "guard value exceeds the guard width");

  return Sketch::from_state(p, std::move(buckets), guard);
}

std::uint32_t suggest_buckets(std::uint64_t expected_diff) {
  if (expected_diff > (std::uint64_t{1} << 32))
    throw InvalidParamsError("expected difference too large");
  const std::uint64_t n = (123 * expected_diff + 99) / 100;
  return std::uint32_t(std::max<std::uint64_t>(n, 8));
}

ReconcileReport reconcile_local(std::span<const Key> local,
                                std::span<const std::uint8_t> remote_frame,
                                const DecodeLimits& limits) {
  const Sketch remote = deserialize(remote_frame);
  Sketch merged =
      Sketch::from_set(remote.params(), local, remote.shared_source());
  merged.merge(remote);
  const DecodeOutcome outcome = decode(merged, limits);

  ReconcileReport report;
  report.success = outcome.success;
  report.failure = outcome.failure;
  report.difference = outcome.keys;
  report.bytes_on_wire = remote_frame.size();
  report.rounds_used = outcome.rounds_used;
  return report;
}

}  // namespace setsketch
