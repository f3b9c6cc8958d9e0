#include <cstring>
#include <stdexcept>

#include <zlib.h>

#include "mck/mapreduce.hpp"

namespace mck::mr {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void optional_index(const std::optional<std::size_t>& v) {
    u8(v.has_value());
    u64(v.value_or(0));
  }
  void pairs(const std::vector<KeyValue>& kvs) {
    u64(kvs.size());
    for (const auto& kv : kvs) {
      bytes(kv.key);
      bytes(kv.value);
    }
  }
  Bytes& str() { return out_; }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  // element counts are bounded by the remaining payload so a damaged length cannot
  // trigger a huge allocation
  std::uint64_t count() {
    const std::uint64_t n = u64();
    if (n > in_.size() - pos_) corrupt();
    return n;
  }
  Bytes bytes() {
    const std::uint64_t n = count();
    Bytes s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool boolean() {
    const auto v = u8();
    if (v > 1) corrupt();
    return v == 1;
  }
  std::optional<std::size_t> optional_index() {
    const bool present = boolean();
    const auto v = u64();
    if (!present) return std::nullopt;
    return static_cast<std::size_t>(v);
  }
  std::vector<KeyValue> pairs() {
    std::vector<KeyValue> kvs(count());
    for (auto& kv : kvs) {
      kv.key = bytes();
      kv.value = bytes();
    }
    return kvs;
  }
  bool at_end() const { return pos_ == in_.size(); }
  [[noreturn]] static void corrupt() { throw std::runtime_error("checkpoint corrupt"); }

 private:
  void need(std::size_t n) {
    if (in_.size() - pos_ < n) corrupt();
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view s) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
  return static_cast<std::uint32_t>(crc);
}

template <typename E>
E enum_from(std::uint8_t v, E last) {
  if (v > static_cast<std::uint8_t>(last)) Reader::corrupt();
  return static_cast<E>(v);
}

}  // namespace

Bytes checkpoint_master(const MasterState& s) {
  Writer w;
  w.str().append(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u64(s.input_count);
  w.u64(s.num_map_tasks);
  w.u64(s.num_reduce_tasks);
  w.u64(s.round);
  w.u64(s.total_reassignments);
  w.u64(s.checkpoints_written);
  w.u64(s.master_recoveries);
  w.u64(s.worker_failures);

  w.u64(s.tasks.size());
  for (const auto& t : s.tasks) {
    w.u64(t.id);
    w.u8(static_cast<std::uint8_t>(t.kind));
    w.u8(static_cast<std::uint8_t>(t.state));
    w.u32(t.attempts);
    w.optional_index(t.affinity);
    w.u64(t.history.size());
    for (const auto& a : t.history) {
      w.u64(a.worker);
      w.u8(static_cast<std::uint8_t>(a.outcome));
      w.u8(a.contributes);
    }
  }

  w.u64(s.workers.size());
  for (const auto& wk : s.workers) {
    w.u8(wk.crashed);
    w.u8(wk.declared_failed);
    w.u32(wk.missed_pings);
    w.u64(wk.completed_tasks);
  }

  w.u64(s.map_output.size());
  for (std::size_t m = 0; m < s.map_output.size(); ++m) {
    w.optional_index(s.map_holder.at(m));
    w.u64(s.map_output[m].size());
    for (const auto& bucket : s.map_output[m]) w.pairs(bucket);
  }

  w.u64(s.reduce_output.size());
  for (const auto& out : s.reduce_output) w.pairs(out);

  w.u64(s.events.size());
  for (const auto& e : s.events) {
    w.u64(e.round);
    w.u64(e.worker);
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.u32(e.consecutive_misses);
  }

  const Bytes& payload = w.str();
  Writer framed;
  framed.u64(payload.size());
  framed.str().append(payload);
  framed.u32(crc32_of(payload));
  return std::move(framed.str());
}

MasterState decode_checkpoint(const Bytes& blob) {
  if (blob.size() < 12) Reader::corrupt();
  Reader frame(blob);
  const std::uint64_t length = frame.u64();
  if (length != blob.size() - 12) Reader::corrupt();
  const std::string_view payload = std::string_view(blob).substr(8, length);
  Reader tail(std::string_view(blob).substr(8 + length));
  if (tail.u32() != crc32_of(payload)) Reader::corrupt();

  Reader r(payload);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0 || r.u32() != kVersion) Reader::corrupt();

  MasterState s;
  s.input_count = r.u64();
  s.num_map_tasks = r.u64();
  s.num_reduce_tasks = r.u64();
  s.round = r.u64();
  s.total_reassignments = r.u64();
  s.checkpoints_written = r.u64();
  s.master_recoveries = r.u64();
  s.worker_failures = r.u64();

  s.tasks.resize(r.count());
  for (auto& t : s.tasks) {
    t.id = r.u64();
    t.kind = enum_from(r.u8(), TaskKind::Reduce);
    t.state = enum_from(r.u8(), TaskState::Completed);
    t.attempts = r.u32();
    t.affinity = r.optional_index();
    t.history.resize(r.count());
    for (auto& a : t.history) {
      a.worker = r.u64();
      a.outcome = enum_from(r.u8(), AttemptOutcome::Lost);
      a.contributes = r.boolean();
    }
  }

  s.workers.resize(r.count());
  for (auto& wk : s.workers) {
    wk.crashed = r.boolean();
    wk.declared_failed = r.boolean();
    wk.missed_pings = r.u32();
    wk.completed_tasks = r.u64();
  }

  const std::uint64_t maps = r.count();
  s.map_holder.resize(maps);
  s.map_output.resize(maps);
  for (std::size_t m = 0; m < maps; ++m) {
    s.map_holder[m] = r.optional_index();
    s.map_output[m].resize(r.count());
    for (auto& bucket : s.map_output[m]) bucket = r.pairs();
  }

  s.reduce_output.resize(r.count());
  for (auto& out : s.reduce_output) out = r.pairs();

  s.events.resize(r.count());
  for (auto& e : s.events) {
    e.round = r.u64();
    e.worker = r.u64();
    e.kind = enum_from(r.u8(), WorkerEventKind::Failed);
    e.consecutive_misses = r.u32();
  }
  if (!r.at_end()) Reader::corrupt();

  if (s.tasks.size() != s.num_map_tasks + s.num_reduce_tasks ||
      s.map_output.size() != s.num_map_tasks || s.reduce_output.size() != s.num_reduce_tasks)
    Reader::corrupt();
  return s;
}

}  // namespace mck::mr
