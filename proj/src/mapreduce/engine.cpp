#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <thread>
#include <utility>
#include <variant>

#include "mck/mapreduce.hpp"

namespace mck::mr {

namespace {

template <typename T>
class Mailbox {
 public:
  void push(T msg) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }
  T pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

using Group = std::pair<Bytes, std::vector<Bytes>>;

struct AssignMsg {
  std::size_t task = 0;
  TaskKind kind = TaskKind::Map;
  std::size_t split_begin = 0;  // map input
  std::size_t split_end = 0;
  std::vector<Group> groups;  // reduce input, sorted by key
};
struct PingMsg {
  std::uint64_t round = 0;
};
struct ShutdownMsg {};
using WorkerMsg = std::variant<AssignMsg, PingMsg, ShutdownMsg>;

struct Completion {
  std::size_t task = 0;
  std::vector<std::vector<KeyValue>> buckets;  // map output, one per reduce task
  std::vector<KeyValue> output;                // reduce output
  std::optional<std::string> error;
};

struct RoundReply {
  std::size_t worker = 0;
  bool responded = false;
  std::vector<Completion> completions;
};

// One simulated worker machine. Replies to every ping; a crashed or paused worker's reply is
// marked unanswered, which is how the simulated network reports a ping timeout.
class Worker {
 public:
  Worker(std::size_t id, const Job& job, std::span<const Bytes> inputs, std::size_t reducers,
         const JobConfig& cfg, const WorkerSnapshot& snapshot, Mailbox<RoundReply>& master)
      : id_(id), job_(job), inputs_(inputs), reducers_(reducers), master_(master),
        crashed_(snapshot.crashed), completed_(snapshot.completed_tasks) {
    for (const auto& f : cfg.fault_plan) {
      if (f.worker == id && (!crash_after_ || f.after_tasks < *crash_after_)) crash_after_ = f.after_tasks;
    }
    for (const auto& p : cfg.pause_plan) {
      if (p.worker == id) pauses_.push_back(p);
    }
  }

  Mailbox<WorkerMsg>& inbox() { return inbox_; }

  void run() {
    for (;;) {
      WorkerMsg msg = inbox_.pop();
      if (std::holds_alternative<ShutdownMsg>(msg)) return;
      if (auto* ping = std::get_if<PingMsg>(&msg)) {
        RoundReply reply{id_, !crashed_ && !paused(ping->round), {}};
        if (reply.responded) reply.completions = std::exchange(pending_, {});
        master_.push(std::move(reply));
        continue;
      }
      auto& assign = std::get<AssignMsg>(msg);
      if (crashed_) continue;
      if (crash_after_ && completed_ >= *crash_after_) {
        crashed_ = true;
        pending_.clear();
        continue;
      }
      pending_.push_back(execute(assign));
      ++completed_;
    }
  }

 private:
  bool paused(std::uint64_t round) const {
    return std::any_of(pauses_.begin(), pauses_.end(), [&](const WorkerPause& p) {
      return round >= p.at_round && round < p.at_round + p.rounds;
    });
  }

  Completion execute(const AssignMsg& a) {
    Completion c;
    c.task = a.task;
    try {
      if (a.kind == TaskKind::Map) {
        c.buckets.resize(reducers_);
        for (std::size_t s = a.split_begin; s < a.split_end; ++s) {
          for (auto& kv : job_.map(inputs_[s])) {
            const std::size_t r = job_.partition(kv.key, reducers_);
            if (r >= reducers_) throw std::out_of_range("partition function returned an invalid reduce task");
            c.buckets[r].push_back(std::move(kv));
          }
        }
      } else {
        for (const auto& [key, values] : a.groups) {
          auto out = job_.reduce(key, values);
          c.output.insert(c.output.end(), std::make_move_iterator(out.begin()),
                          std::make_move_iterator(out.end()));
        }
      }
    } catch (const std::exception& e) {
      c.error = e.what();
    } catch (...) {
      c.error = "unknown exception";
    }
    return c;
  }

  std::size_t id_;
  const Job& job_;
  std::span<const Bytes> inputs_;
  std::size_t reducers_;
  Mailbox<RoundReply>& master_;
  Mailbox<WorkerMsg> inbox_;
  std::optional<std::uint64_t> crash_after_;
  std::vector<WorkerPause> pauses_;
  bool crashed_;
  std::uint64_t completed_;
  std::vector<Completion> pending_;
};

class WorkerPool {
 public:
  WorkerPool(const Job& job, std::span<const Bytes> inputs, std::size_t reducers, const JobConfig& cfg,
             const std::vector<WorkerSnapshot>& snapshots) {
    workers_.reserve(snapshots.size());
    for (std::size_t w = 0; w < snapshots.size(); ++w) {
      workers_.push_back(std::make_unique<Worker>(w, job, inputs, reducers, cfg, snapshots[w], replies_));
    }
    for (auto& w : workers_) threads_.emplace_back([&worker = *w] { worker.run(); });
  }
  ~WorkerPool() {
    for (auto& w : workers_) w->inbox().push(ShutdownMsg{});
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void send(std::size_t worker, WorkerMsg msg) { workers_[worker]->inbox().push(std::move(msg)); }
  RoundReply receive() { return replies_.pop(); }

 private:
  Mailbox<RoundReply> replies_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::jthread> threads_;  // declared last: joined before the workers are destroyed
};

class Master {
 public:
  Master(const Job& job, std::span<const Bytes> inputs, const JobConfig& cfg, MasterState state)
      : job_(job), inputs_(inputs), cfg_(cfg), s_(std::move(state)),
        monitor_(s_.workers.size(), cfg.max_missed_pings) {
    for (std::size_t w = 0; w < s_.workers.size(); ++w) {
      monitor_.restore(w, s_.workers[w].missed_pings, s_.workers[w].declared_failed);
    }
    if (cfg_.checkpoint_every_tasks) checkpoint_mark_ = completed_count() / cfg_.checkpoint_every_tasks;
  }

  JobResult run() {
    const auto started = std::chrono::steady_clock::now();
    if (!s_.tasks.empty()) {
      WorkerPool pool(job_, inputs_, s_.num_reduce_tasks, cfg_, s_.workers);
      while (completed_count() < s_.tasks.size()) {
        if (monitor_.live_count() == 0) throw std::runtime_error("no workers available");
        step(pool);
      }
    }
    JobResult result;
    for (const auto& out : s_.reduce_output) result.output.insert(result.output.end(), out.begin(), out.end());
    auto& rep = result.report;
    rep.tasks = s_.tasks;
    rep.events = s_.events;
    rep.total_reassignments = s_.total_reassignments;
    rep.checkpoints_written = s_.checkpoints_written;
    rep.master_recoveries = s_.master_recoveries;
    rep.worker_failures = s_.worker_failures;
    rep.rounds = s_.round;
    rep.map_executions = map_executions_;
    rep.reduce_executions = reduce_executions_;
    rep.simulated_time = cfg_.heartbeat_interval * static_cast<std::int64_t>(s_.round);
    if (!s_.tasks.empty())
      rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  }

 private:
  std::size_t completed_count() const {
    return static_cast<std::size_t>(std::count_if(s_.tasks.begin(), s_.tasks.end(), [](const TaskRecord& t) {
      return t.state == TaskState::Completed;
    }));
  }

  bool maps_done() const {
    for (std::size_t m = 0; m < s_.num_map_tasks; ++m) {
      if (s_.tasks[m].state != TaskState::Completed) return false;
    }
    return true;
  }

  bool reduces_pending() const {
    for (std::size_t t = s_.num_map_tasks; t < s_.tasks.size(); ++t) {
      if (s_.tasks[t].state != TaskState::Completed) return true;
    }
    return false;
  }

  std::optional<std::size_t> running_on(std::size_t worker) const {
    for (const auto& t : s_.tasks) {
      if (t.state == TaskState::InProgress && t.history.back().worker == worker) return t.id;
    }
    return std::nullopt;
  }

  void step(WorkerPool& pool) {
    ++s_.round;
    dispatch(pool);

    std::size_t expected = 0;
    for (std::size_t w = 0; w < s_.workers.size(); ++w) {
      if (monitor_.failed(w)) continue;
      pool.send(w, PingMsg{s_.round});
      ++expected;
    }
    std::vector<RoundReply> replies;
    replies.reserve(expected);
    for (std::size_t i = 0; i < expected; ++i) replies.push_back(pool.receive());
    std::sort(replies.begin(), replies.end(), [](const auto& a, const auto& b) { return a.worker < b.worker; });
    std::mt19937_64 delivery(cfg_.seed ^ (s_.round * 0x9E3779B97F4A7C15ULL));
    std::shuffle(replies.begin(), replies.end(), delivery);

    std::vector<bool> responded(s_.workers.size(), true);
    for (auto& reply : replies) {
      responded[reply.worker] = reply.responded;
      for (auto& c : reply.completions) complete(reply.worker, std::move(c));
    }

    for (const auto& e : monitor_.observe(s_.round, responded)) {
      s_.events.push_back(e);
      if (e.kind == WorkerEventKind::Failed) fail(e.worker);
    }
    for (std::size_t w = 0; w < s_.workers.size(); ++w) {
      s_.workers[w].missed_pings = monitor_.misses(w);
      s_.workers[w].declared_failed = monitor_.failed(w);
      s_.workers[w].crashed = monitor_.failed(w);
    }
    maybe_checkpoint();
  }

  void dispatch(WorkerPool& pool) {
    std::vector<const TaskRecord*> idle;
    const bool reduce_phase = maps_done();
    for (const auto& t : s_.tasks) {
      if (t.state != TaskState::Idle) continue;
      if (t.kind == TaskKind::Reduce && !reduce_phase) continue;
      idle.push_back(&t);
    }
    std::vector<std::size_t> free;
    for (std::size_t w = 0; w < s_.workers.size(); ++w) {
      if (!monitor_.failed(w) && !running_on(w)) free.push_back(w);
    }
    while (auto a = schedule_next(idle, free)) {
      idle.erase(std::find_if(idle.begin(), idle.end(), [&](const TaskRecord* t) { return t->id == a->task; }));
      free.erase(std::find(free.begin(), free.end(), a->worker));
      assign(pool, *a);
    }
  }

  void assign(WorkerPool& pool, const Assignment& a) {
    auto& t = s_.tasks[a.task];
    t.state = TaskState::InProgress;
    if (++t.attempts > 1) ++s_.total_reassignments;
    t.history.push_back({a.worker, AttemptOutcome::Running, false});

    AssignMsg msg;
    msg.task = t.id;
    msg.kind = t.kind;
    if (t.kind == TaskKind::Map) {
      ++map_executions_;
      msg.split_begin = inputs_.size() * t.id / s_.num_map_tasks;
      msg.split_end = inputs_.size() * (t.id + 1) / s_.num_map_tasks;
    } else {
      ++reduce_executions_;
      msg.groups = gather(t.id - s_.num_map_tasks);
    }
    pool.send(a.worker, std::move(msg));
  }

  // Collects partition r from every map output: keys sorted, each key's values sorted by bytes.
  std::vector<Group> gather(std::size_t r) const {
    std::vector<KeyValue> all;
    for (const auto& buckets : s_.map_output) all.insert(all.end(), buckets[r].begin(), buckets[r].end());
    std::sort(all.begin(), all.end());
    std::vector<Group> groups;
    for (auto& kv : all) {
      if (groups.empty() || groups.back().first != kv.key) groups.push_back({kv.key, {}});
      groups.back().second.push_back(std::move(kv.value));
    }
    return groups;
  }

  void complete(std::size_t worker, Completion c) {
    auto& t = s_.tasks.at(c.task);
    if (t.state != TaskState::InProgress || t.history.back().worker != worker) return;  // stale
    if (c.error) throw JobError(t.id, *c.error);
    t.state = TaskState::Completed;
    t.history.back().outcome = AttemptOutcome::Completed;
    t.history.back().contributes = true;
    ++s_.workers[worker].completed_tasks;
    if (t.kind == TaskKind::Map) {
      s_.map_output[t.id] = std::move(c.buckets);
      s_.map_holder[t.id] = worker;
    } else {
      s_.reduce_output[t.id - s_.num_map_tasks] = std::move(c.output);
    }
  }

  // The failed worker's running task and, while reduces still need them, the map outputs it
  // held go back to idle with affinity to that worker.
  void fail(std::size_t worker) {
    ++s_.worker_failures;
    const bool outputs_needed = reduces_pending();
    for (auto& t : s_.tasks) {
      const bool running_here = t.state == TaskState::InProgress && t.history.back().worker == worker;
      const bool output_lost = t.kind == TaskKind::Map && t.state == TaskState::Completed &&
                               s_.map_holder[t.id] == worker && outputs_needed;
      if (!running_here && !output_lost) continue;
      for (auto& a : t.history) {
        if (a.contributes || a.outcome == AttemptOutcome::Running) {
          a.contributes = false;
          a.outcome = AttemptOutcome::Lost;
        }
      }
      t.state = TaskState::Idle;
      t.affinity = worker;
      if (t.kind == TaskKind::Map) {
        s_.map_output[t.id].assign(s_.num_reduce_tasks, {});
        s_.map_holder[t.id].reset();
      }
    }
  }

  void maybe_checkpoint() {
    if (!cfg_.checkpoint_every_tasks) return;
    const std::uint64_t mark = completed_count() / cfg_.checkpoint_every_tasks;
    if (mark <= checkpoint_mark_) return;
    checkpoint_mark_ = mark;
    ++s_.checkpoints_written;
    Bytes blob = checkpoint_master(s_);
    if (cfg_.kill_master_at_checkpoint && *cfg_.kill_master_at_checkpoint == s_.checkpoints_written)
      throw MasterFailure(std::move(blob));
  }

  const Job& job_;
  std::span<const Bytes> inputs_;
  const JobConfig& cfg_;
  MasterState s_;
  HeartbeatMonitor monitor_;
  std::uint64_t checkpoint_mark_ = 0;
  std::uint64_t map_executions_ = 0;
  std::uint64_t reduce_executions_ = 0;
};

void validate(const Job& job, const JobConfig& cfg) {
  if (!job.map || !job.reduce || !job.partition) throw std::invalid_argument("job needs map, reduce and partition functions");
  if (cfg.num_workers < 1) throw std::invalid_argument("num_workers must be at least 1");
  if (cfg.num_map_tasks < 1) throw std::invalid_argument("num_map_tasks must be at least 1");
  if (cfg.num_reduce_tasks < 1) throw std::invalid_argument("num_reduce_tasks must be at least 1");
  if (cfg.max_missed_pings < 1) throw std::invalid_argument("max_missed_pings must be at least 1");
  for (const auto& f : cfg.fault_plan) {
    if (f.worker >= cfg.num_workers) throw std::invalid_argument("fault plan names an unknown worker");
  }
  for (const auto& p : cfg.pause_plan) {
    if (p.worker >= cfg.num_workers) throw std::invalid_argument("pause plan names an unknown worker");
  }
}

MasterState initial_state(std::size_t input_count, const JobConfig& cfg) {
  MasterState s;
  s.input_count = input_count;
  s.num_map_tasks = std::min<std::size_t>(cfg.num_map_tasks, input_count);
  s.num_reduce_tasks = s.num_map_tasks ? cfg.num_reduce_tasks : 0;
  s.workers.resize(cfg.num_workers);
  const std::size_t total = s.num_map_tasks + s.num_reduce_tasks;
  for (std::size_t id = 0; id < total; ++id) {
    TaskRecord t;
    t.id = id;
    t.kind = id < s.num_map_tasks ? TaskKind::Map : TaskKind::Reduce;
    s.tasks.push_back(std::move(t));
  }
  s.map_holder.resize(s.num_map_tasks);
  s.map_output.assign(s.num_map_tasks, std::vector<std::vector<KeyValue>>(s.num_reduce_tasks));
  s.reduce_output.resize(s.num_reduce_tasks);
  return s;
}

}  // namespace

JobResult run_job(const Job& job, std::span<const Bytes> inputs, const JobConfig& cfg) {
  validate(job, cfg);
  return Master(job, inputs, cfg, initial_state(inputs.size(), cfg)).run();
}

JobResult recover_master(const Bytes& checkpoint, const Job& job, std::span<const Bytes> inputs,
                         const JobConfig& cfg) {
  validate(job, cfg);
  MasterState s = decode_checkpoint(checkpoint);
  const MasterState fresh = initial_state(inputs.size(), cfg);
  if (s.input_count != fresh.input_count || s.num_map_tasks != fresh.num_map_tasks ||
      s.num_reduce_tasks != fresh.num_reduce_tasks || s.workers.size() != fresh.workers.size())
    throw std::invalid_argument("checkpoint does not match job configuration");

  // Work in flight when the master died is lost with it.
  for (auto& t : s.tasks) {
    if (t.state != TaskState::InProgress) continue;
    t.state = TaskState::Idle;
    t.history.back().outcome = AttemptOutcome::Lost;
    t.affinity = t.history.back().worker;
  }
  ++s.master_recoveries;
  return Master(job, inputs, cfg, std::move(s)).run();
}

Bytes encode_pairs(std::span<const KeyValue> pairs) {
  Bytes out;
  auto put = [&](std::string_view s) {
    const auto n = static_cast<std::uint64_t>(s.size());
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(n >> (8 * i)));
    out.append(s);
  };
  for (const auto& kv : pairs) {
    put(kv.key);
    put(kv.value);
  }
  return out;
}

}  // namespace mck::mr
