#include <sstream>

#include "mck/mapreduce.hpp"

namespace mck::mr {

namespace {

const char* name(TaskKind k) { return k == TaskKind::Map ? "map" : "reduce"; }

const char* name(TaskState s) {
  switch (s) {
    case TaskState::Idle: return "idle";
    case TaskState::InProgress: return "in-progress";
    case TaskState::Completed: return "completed";
  }
  return "?";
}

const char* name(WorkerEventKind k) {
  switch (k) {
    case WorkerEventKind::MissedPing: return "missed-ping";
    case WorkerEventKind::Resumed: return "resumed";
    case WorkerEventKind::Failed: return "failed";
  }
  return "?";
}

}  // namespace

std::string report_text(const JobReport& r) {
  std::ostringstream out;
  std::size_t maps = 0, reduces = 0;
  for (const auto& t : r.tasks) (t.kind == TaskKind::Map ? maps : reduces)++;
  out << "tasks: " << r.tasks.size() << " (" << maps << " map, " << reduces << " reduce)\n"
      << "rounds: " << r.rounds << " (" << r.simulated_time.count() << " ms simulated)\n"
      << "map executions: " << r.map_executions << "\n"
      << "reduce executions: " << r.reduce_executions << "\n"
      << "reassignments: " << r.total_reassignments << "\n"
      << "worker failures: " << r.worker_failures << "\n"
      << "checkpoints written: " << r.checkpoints_written << "\n"
      << "master recoveries: " << r.master_recoveries << "\n"
      << "wall time: " << r.wall_seconds << " s\n";
  for (const auto& e : r.events) {
    out << "round " << e.round << ": worker " << e.worker << ' ' << name(e.kind) << " (misses "
        << e.consecutive_misses << ")\n";
  }
  return out.str();
}

std::string report_csv(const JobReport& r) {
  std::ostringstream out;
  out << "task_id,kind,state,attempts,workers,contributing_worker\n";
  for (const auto& t : r.tasks) {
    out << t.id << ',' << name(t.kind) << ',' << name(t.state) << ',' << t.attempts << ',';
    for (std::size_t i = 0; i < t.history.size(); ++i) out << (i ? ";" : "") << t.history[i].worker;
    out << ',';
    for (const auto& a : t.history) {
      if (a.contributes) out << a.worker;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mck::mr
