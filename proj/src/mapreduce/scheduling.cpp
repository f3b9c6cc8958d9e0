#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "mck/mapreduce.hpp"

namespace mck::mr {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t hash_partition(std::string_view key, std::size_t reducers) {
  if (reducers == 0) throw std::invalid_argument("reducers must be at least 1");
  return static_cast<std::size_t>(fnv1a64(key) % reducers);
}

namespace {

std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw std::invalid_argument("bad fault plan entry: \"" + std::string(s) + "\"");
  return v;
}

}  // namespace

std::vector<WorkerFault> parse_fault_plan(std::string_view text) {
  std::vector<WorkerFault> plan;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto entry = text.substr(0, comma);
    const auto colon = entry.find(':');
    if (colon == std::string_view::npos)
      throw std::invalid_argument("bad fault plan entry: \"" + std::string(entry) + "\"");
    plan.push_back({static_cast<std::size_t>(parse_uint(entry.substr(0, colon))),
                    parse_uint(entry.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw std::invalid_argument("bad fault plan: trailing comma");
  }
  return plan;
}

std::optional<Assignment> schedule_next(std::span<const TaskRecord* const> idle_tasks,
                                        std::span<const std::size_t> free_workers) {
  if (idle_tasks.empty() || free_workers.empty()) return std::nullopt;
  auto is_free = [&](std::size_t w) {
    return std::find(free_workers.begin(), free_workers.end(), w) != free_workers.end();
  };

  const TaskRecord* local = nullptr;
  for (const TaskRecord* t : idle_tasks) {
    if (t->affinity && is_free(*t->affinity) && (!local || t->id < local->id)) local = t;
  }
  if (local) return Assignment{local->id, *local->affinity};

  const auto task = std::min_element(idle_tasks.begin(), idle_tasks.end(),
                                     [](const TaskRecord* a, const TaskRecord* b) { return a->id < b->id; });
  const auto worker = std::min_element(free_workers.begin(), free_workers.end());
  return Assignment{(*task)->id, *worker};
}

HeartbeatMonitor::HeartbeatMonitor(std::size_t workers, std::uint32_t max_missed_pings)
    : threshold_(max_missed_pings), misses_(workers, 0), failed_(workers, false) {
  if (max_missed_pings < 1) throw std::invalid_argument("max_missed_pings must be at least 1");
}

std::vector<WorkerEvent> HeartbeatMonitor::observe(std::uint64_t round, const std::vector<bool>& responded) {
  if (responded.size() != misses_.size()) throw std::invalid_argument("one response flag per worker");
  std::vector<WorkerEvent> events;
  for (std::size_t w = 0; w < misses_.size(); ++w) {
    if (failed_[w]) continue;
    if (responded[w]) {
      if (misses_[w] > 0) events.push_back({round, w, WorkerEventKind::Resumed, misses_[w]});
      misses_[w] = 0;
      continue;
    }
    ++misses_[w];
    if (misses_[w] >= threshold_) {
      failed_[w] = true;
      events.push_back({round, w, WorkerEventKind::Failed, misses_[w]});
    } else {
      events.push_back({round, w, WorkerEventKind::MissedPing, misses_[w]});
    }
  }
  return events;
}

std::size_t HeartbeatMonitor::live_count() const {
  return static_cast<std::size_t>(std::count(failed_.begin(), failed_.end(), false));
}

void HeartbeatMonitor::restore(std::size_t worker, std::uint32_t misses, bool failed) {
  misses_.at(worker) = misses;
  failed_.at(worker) = failed;
}

}  // namespace mck::mr
