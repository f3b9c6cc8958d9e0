#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mck::mr {

using Bytes = std::string;

struct KeyValue {
  Bytes key;
  Bytes value;

  friend auto operator<=>(const KeyValue&, const KeyValue&) = default;
};

using MapFn = std::function<std::vector<KeyValue>(std::string_view split)>;
using ReduceFn = std::function<std::vector<KeyValue>(std::string_view key, std::span<const Bytes> values)>;
/// Maps a key to a reduce task in [0, reducers).
using Partitioner = std::function<std::size_t(std::string_view key, std::size_t reducers)>;

/// 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
std::uint64_t fnv1a64(std::string_view bytes);

/// Default partition function: fnv1a64(key) mod reducers.
std::size_t hash_partition(std::string_view key, std::size_t reducers);

/// Worker `worker` crashes when it is handed a task after completing `after_tasks` tasks.
struct WorkerFault {
  std::size_t worker = 0;
  std::uint64_t after_tasks = 0;
};

/// Worker `worker` stops answering pings for `rounds` heartbeat rounds starting at `at_round`.
struct WorkerPause {
  std::size_t worker = 0;
  std::uint64_t at_round = 1;
  std::uint64_t rounds = 0;
};

/// Parses "worker:after_k_tasks[,worker:after_k_tasks...]". An empty string is an empty plan.
std::vector<WorkerFault> parse_fault_plan(std::string_view text);

struct JobConfig {
  std::size_t num_workers = 1;
  std::size_t num_map_tasks = 1;
  std::size_t num_reduce_tasks = 1;
  std::chrono::milliseconds heartbeat_interval{10};  // simulated time per round
  std::uint32_t max_missed_pings = 3;
  std::uint64_t checkpoint_every_tasks = 0;  // 0 disables checkpoints
  std::vector<WorkerFault> fault_plan;
  std::vector<WorkerPause> pause_plan;
  std::optional<std::uint64_t> kill_master_at_checkpoint;  // 1-based checkpoint number
  std::uint64_t seed = 0;
};

enum class TaskKind : std::uint8_t { Map, Reduce };
enum class TaskState : std::uint8_t { Idle, InProgress, Completed };
enum class AttemptOutcome : std::uint8_t { Running, Completed, Lost };

struct Attempt {
  std::size_t worker = 0;
  AttemptOutcome outcome = AttemptOutcome::Running;
  bool contributes = false;  // this attempt's output is the one in the final result
};

struct TaskRecord {
  std::size_t id = 0;
  TaskKind kind = TaskKind::Map;
  TaskState state = TaskState::Idle;
  std::uint32_t attempts = 0;
  std::vector<Attempt> history;
  std::optional<std::size_t> affinity;
};

enum class WorkerEventKind : std::uint8_t { MissedPing, Resumed, Failed };

struct WorkerEvent {
  std::uint64_t round = 0;
  std::size_t worker = 0;
  WorkerEventKind kind = WorkerEventKind::MissedPing;
  std::uint32_t consecutive_misses = 0;

  friend bool operator==(const WorkerEvent&, const WorkerEvent&) = default;
};

struct JobReport {
  std::vector<TaskRecord> tasks;
  std::vector<WorkerEvent> events;
  std::uint64_t total_reassignments = 0;
  std::uint64_t checkpoints_written = 0;
  std::uint64_t master_recoveries = 0;
  std::uint64_t worker_failures = 0;
  std::uint64_t rounds = 0;
  std::uint64_t map_executions = 0;     // attempts dispatched by this master process
  std::uint64_t reduce_executions = 0;  // attempts dispatched by this master process
  std::chrono::milliseconds simulated_time{0};
  double wall_seconds = 0;
};

std::string report_text(const JobReport& report);
/// Header: task_id,kind,state,attempts,workers,contributing_worker
std::string report_csv(const JobReport& report);

struct JobResult {
  std::vector<KeyValue> output;
  JobReport report;
};

/// A map or reduce function raised; carries the failing task id.
class JobError : public std::runtime_error {
 public:
  JobError(std::size_t task, const std::string& what)
      : std::runtime_error("task " + std::to_string(task) + ": " + what), task_(task) {}
  std::size_t task() const { return task_; }

 private:
  std::size_t task_;
};

/// Thrown when the injected master kill fires; carries the checkpoint written just before.
class MasterFailure : public std::runtime_error {
 public:
  explicit MasterFailure(Bytes checkpoint)
      : std::runtime_error("master killed at checkpoint"), checkpoint_(std::move(checkpoint)) {}
  const Bytes& checkpoint() const { return checkpoint_; }

 private:
  Bytes checkpoint_;
};

struct Job {
  MapFn map;
  ReduceFn reduce;
  Partitioner partition = hash_partition;
};

/// Runs a job on cfg.num_workers worker threads coordinated by the calling thread.
/// Map tasks are contiguous runs of input splits. Reduce tasks start only after every map
/// task is completed. Output is reduce task 0's output, then task 1's, and so on; within a
/// task keys are reduced in sorted order and values arrive sorted by their bytes.
JobResult run_job(const Job& job, std::span<const Bytes> inputs, const JobConfig& cfg);

inline JobResult run_job(const MapFn& map, const ReduceFn& reduce, std::span<const Bytes> inputs,
                         const JobConfig& cfg) {
  return run_job(Job{map, reduce, hash_partition}, inputs, cfg);
}

/// Resumes a job from a checkpoint blob. Tasks completed before the checkpoint keep their
/// outputs; everything else is executed again.
JobResult recover_master(const Bytes& checkpoint, const Job& job, std::span<const Bytes> inputs,
                         const JobConfig& cfg);

/// Canonical byte encoding of an output list, for byte-level comparison.
Bytes encode_pairs(std::span<const KeyValue> pairs);

// ---- building blocks, exposed for testing ----

struct Assignment {
  std::size_t task = 0;
  std::size_t worker = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Picks the next (task, worker) pair. A task whose affinity names a free worker wins
/// (lowest such task id); otherwise the lowest task id goes to the lowest free worker id.
std::optional<Assignment> schedule_next(std::span<const TaskRecord* const> idle_tasks,
                                        std::span<const std::size_t> free_workers);

/// Tracks consecutive missed pings per worker and reports status transitions.
class HeartbeatMonitor {
 public:
  HeartbeatMonitor(std::size_t workers, std::uint32_t max_missed_pings);

  /// Records one ping round. `responded[w]` is whether worker w answered. Workers already
  /// declared failed are ignored.
  std::vector<WorkerEvent> observe(std::uint64_t round, const std::vector<bool>& responded);

  bool failed(std::size_t worker) const { return failed_[worker]; }
  std::uint32_t misses(std::size_t worker) const { return misses_[worker]; }
  std::size_t live_count() const;

  // checkpoint support
  void restore(std::size_t worker, std::uint32_t misses, bool failed);

 private:
  std::uint32_t threshold_;
  std::vector<std::uint32_t> misses_;
  std::vector<bool> failed_;
};

struct WorkerSnapshot {
  bool crashed = false;  // process state of the simulated worker
  bool declared_failed = false;
  std::uint32_t missed_pings = 0;
  std::uint64_t completed_tasks = 0;
};

/// Everything the master needs to resume a job.
struct MasterState {
  std::uint64_t input_count = 0;
  std::uint64_t num_map_tasks = 0;
  std::uint64_t num_reduce_tasks = 0;
  std::uint64_t round = 0;
  std::vector<TaskRecord> tasks;
  std::vector<WorkerSnapshot> workers;
  // per map task: holder worker and routed output, one bucket per reduce task
  std::vector<std::optional<std::size_t>> map_holder;
  std::vector<std::vector<std::vector<KeyValue>>> map_output;
  std::vector<std::vector<KeyValue>> reduce_output;
  std::vector<WorkerEvent> events;
  std::uint64_t total_reassignments = 0;
  std::uint64_t checkpoints_written = 0;
  std::uint64_t master_recoveries = 0;
  std::uint64_t worker_failures = 0;
};

/// Serializes as [u64 payload length][payload][u32 CRC-32 of payload], little-endian.
Bytes checkpoint_master(const MasterState& state);
/// Throws std::runtime_error("checkpoint corrupt") on a bad length, checksum, or payload.
MasterState decode_checkpoint(const Bytes& blob);

}  // namespace mck::mr
