// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mck/apsp.hpp"
#include "mck/bench.hpp"
#include "mck/graph.hpp"
#include "mck/mapreduce.hpp"
#include "mck/matmul.hpp"
#include "mck/mr_matmul.hpp"

using namespace mck;

namespace {

// Pinned tolerances and limits.
constexpr double kAc1Seconds = 60;
constexpr double kAc3Seconds = 120;
constexpr double kAc4Seconds = 60;
constexpr double kLatencyRelTol = 1e-3;

struct Check {
  std::string failure;
  int count = 0;

  void expect(bool ok, const std::string& what) {
    ++count;
    if (!ok && failure.empty()) failure = what;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome finish(const Check& c, double secs, double limit) {
  std::ostringstream d;
  d << c.count << " comparisons, " << secs << " s of " << limit << " s";
  if (!c.failure.empty()) return {false, "first mismatch: " + c.failure + "; " + d.str()};
  if (secs >= limit) return {false, "over time budget; " + d.str()};
  return {true, d.str()};
}

// ---- 1 ----

Outcome matmul_oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Index> sizes;
  for (Index n = 1; n <= 16; ++n) sizes.push_back(n);
  for (Index n : {31, 32, 33, 64}) sizes.push_back(n);

  Check c;
  for (int m = 0; m < 100; ++m) {
    const Index n = sizes[static_cast<std::size_t>(m) % sizes.size()];
    const auto seed = static_cast<std::uint64_t>(2 * m + 1);
    const MatrixXd a = bench::gen_matrix(n, seed), b = bench::gen_matrix(n, seed + 1);
    const MatrixXd ref = matmul_naive(a, b).first;
    const std::string tag = "matrix " + std::to_string(m) + " n=" + std::to_string(n);
    for (int t : {1, 2, 4, 8}) c.expect(matmul_parallel(a, b, t) == ref, tag + " parallel t=" + std::to_string(t));
    for (Index cutoff : {Index{1}, Index{8}, kDefaultBlockedCutoff})
      c.expect(matmul_blocked(a, b, 4, cutoff) == ref, tag + " blocked cutoff=" + std::to_string(cutoff));
    for (Index cutoff : {1, 2, 8})
      c.expect(matmul_strassen(a, b, cutoff).first == ref, tag + " strassen cutoff=" + std::to_string(cutoff));
    for (std::size_t r : {1, 4, 16}) {
      mr::JobConfig cfg;
      cfg.num_workers = 4;
      cfg.num_map_tasks = 2 * r;
      cfg.seed = seed;
      c.expect(mr_matmul(a, b, r, cfg) == ref, tag + " mr_matmul R=" + std::to_string(r));
    }
  }
  return finish(c, elapsed_since(t0), kAc1Seconds);
}

// ---- 2 ----

Outcome strassen_count_law() {
  std::ostringstream d;
  bool ok = true;
  std::uint64_t want = 1;
  for (int k = 1; k <= 5; ++k) {
    want *= 7;
    const Index n = Index{1} << k;
    const auto stats = matmul_strassen(bench::gen_matrix(n, 7), bench::gen_matrix(n, 8), 1).second;
    const auto naive = matmul_naive(MatrixXd::Ones(n, n), MatrixXd::Ones(n, n)).second;
    ok = ok && stats.scalar_multiplications == want &&
         naive.scalar_multiplications == static_cast<std::uint64_t>(n * n * n);
    d << (k > 1 ? ", " : "") << "n=" << n << ": " << stats.scalar_multiplications << " vs "
      << naive.scalar_multiplications;
  }
  return {ok, d.str()};
}

// ---- 3 ----

Outcome fw_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const double densities[] = {0.1, 0.5, 1.0};
  Check c;
  for (int g = 0; g < 200; ++g) {
    const auto n = static_cast<Index>(1 + (g * 37) % 64);
    const double density = densities[g % 3];
    const auto edges = bench::gen_weighted_edges(static_cast<std::size_t>(n), density, 1000 + static_cast<std::uint64_t>(g));
    const auto w = distance_matrix_from_edges<double>(static_cast<std::size_t>(n), edges);
    const auto iter = fw_iterative(w);
    const std::string tag = "graph " + std::to_string(g) + " n=" + std::to_string(n);
    for (Index base = 1; base <= 64; base *= 2)
      c.expect(fw_recursive(w, {base}) == iter, tag + " base=" + std::to_string(base));

    bool triangle = true;
    for (Index k = 0; k < n; ++k) {
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) triangle = triangle && iter(i, j) <= path_add(iter(i, k), iter(k, j));
      }
    }
    c.expect(triangle, tag + " triangle inequality");
    c.expect(fw_iterative(iter) == iter, tag + " idempotence (iterative)");
    c.expect(fw_recursive(iter, {4}) == iter, tag + " idempotence (recursive)");
  }

  // planted negative 2-cycle
  for (Index n : {2, 5, 17}) {
    auto edges = bench::gen_weighted_edges(static_cast<std::size_t>(n), 0.3, 5);
    edges.push_back({0, 1, 1});
    edges.push_back({1, 0, -3});
    const auto w = distance_matrix_from_edges<double>(static_cast<std::size_t>(n), edges);
    auto raises = [](const std::function<void()>& f) {
      try {
        f();
      } catch (const std::runtime_error& e) {
        return std::string(e.what()) == "negative cycle";
      }
      return false;
    };
    c.expect(raises([&] { fw_iterative(w); }), "negative cycle, iterative n=" + std::to_string(n));
    for (Index base = 1; base <= 64; base *= 2)
      c.expect(raises([&] { fw_recursive(w, {base}); }), "negative cycle, recursive n=" + std::to_string(n));
  }
  return finish(c, elapsed_since(t0), kAc3Seconds);
}

// ---- 4 ----

Outcome bfs_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  bench::Xorshift64Star rng(2024);
  Check c;
  for (int g = 0; g < 100; ++g) {
    const std::size_t n = 10 + rng.below(10000 - 10 + 1);
    const double density = 0.0002 + rng.uniform() * (0.01 - 0.0002);
    const Graph graph = bench::gen_graph(n, density, 500 + static_cast<std::uint64_t>(g));
    const auto source = static_cast<Vertex>(rng.below(n));
    const auto ref = bfs_seq(graph, source).level;
    const std::string tag = "graph " + std::to_string(g) + " n=" + std::to_string(n);
    for (int t : {1, 2, 4, 8}) {
      BfsTrace trace;
      const auto got = bfs_parallel(graph, source, t, {}, &trace);
      c.expect(got.level == ref, tag + " levels t=" + std::to_string(t));
      bool once = true;
      for (std::size_t v = 0; v < n; ++v) once = once && trace.claims[v] == (ref[v] != kUnreached ? 1u : 0u);
      c.expect(once, tag + " claim counts t=" + std::to_string(t));
      c.expect(trace.early_expansions == 0, tag + " level barrier t=" + std::to_string(t));
    }
  }
  return finish(c, elapsed_since(t0), kAc4Seconds);
}

// ---- 5 ----

std::vector<mr::KeyValue> split_words(std::string_view text) {
  std::vector<mr::KeyValue> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.push_back({std::string(text.substr(i, j - i)), "1"});
    i = j;
  }
  return out;
}

std::vector<mr::KeyValue> sum_counts(std::string_view key, std::span<const mr::Bytes> values) {
  std::uint64_t total = 0;
  for (const auto& v : values) total += std::stoull(v);
  return {{std::string(key), std::to_string(total)}};
}

struct NamedJob {
  std::string name;
  mr::Job job;
  std::vector<mr::Bytes> inputs;
  std::size_t maps = 1;
  std::size_t reducers = 1;
};

std::vector<NamedJob> mr_jobs() {
  std::vector<NamedJob> jobs;
  {
    bench::Xorshift64Star rng(99);
    std::vector<mr::Bytes> in;
    for (int s = 0; s < 16; ++s) {
      std::string line;
      for (int w = 0; w < 40; ++w) line += "w" + std::to_string(rng.below(50)) + " ";
      in.push_back(line);
    }
    jobs.push_back({"word-count", mr::Job{split_words, sum_counts}, in, 8, 4});
  }
  {
    const MrMatmulPlan<double> plan(bench::gen_matrix(12, 3), bench::gen_matrix(12, 4), 4);
    jobs.push_back({"mr_matmul", plan.job, plan.splits, 4, 4});
  }
  return jobs;
}

mr::JobConfig job_config(const NamedJob& j, std::size_t workers) {
  mr::JobConfig cfg;
  cfg.num_workers = workers;
  cfg.num_map_tasks = j.maps;
  cfg.num_reduce_tasks = j.reducers;
  return cfg;
}

// Attempt history agrees with the counters: every extra attempt follows a lost one, only
// planned workers lose work, and each task has exactly one contributing attempt.
bool accounting_consistent(const mr::JobReport& r, const std::vector<mr::WorkerFault>& plan) {
  std::uint64_t extra = 0;
  for (const auto& t : r.tasks) {
    if (t.attempts != t.history.size() || t.state != mr::TaskState::Completed) return false;
    extra += t.attempts - 1;
    int contributing = 0;
    for (std::size_t i = 0; i < t.history.size(); ++i) {
      const auto& a = t.history[i];
      contributing += a.contributes;
      if (i + 1 < t.history.size() && a.outcome != mr::AttemptOutcome::Lost) return false;
      if (a.outcome == mr::AttemptOutcome::Lost &&
          std::none_of(plan.begin(), plan.end(), [&](const auto& f) { return f.worker == a.worker; }))
        return false;
    }
    if (contributing != 1) return false;
  }
  return extra == r.total_reassignments;
}

Outcome mapreduce_determinism() {
  Check c;
  for (const auto& j : mr_jobs()) {
    const mr::Bytes ref = mr::encode_pairs(mr::run_job(j.job, j.inputs, job_config(j, 1)).output);

    for (std::size_t w : {1, 2, 4, 8}) {
      for (std::uint64_t seed : {0, 7}) {
        auto cfg = job_config(j, w);
        cfg.seed = seed;
        const auto r = mr::run_job(j.job, j.inputs, cfg);
        c.expect(mr::encode_pairs(r.output) == ref, j.name + " workers=" + std::to_string(w));
        c.expect(r.report.total_reassignments == 0 && r.report.worker_failures == 0,
                 j.name + " no-fault reassignments, workers=" + std::to_string(w));
      }
    }

    // every fault plan over 2..4 workers that spares at least one worker
    for (std::size_t w = 2; w <= 4; ++w) {
      for (std::uint32_t mask = 1; mask + 1 < (1u << w); ++mask) {
        for (std::uint64_t k = 0; k < 3; ++k) {
          auto cfg = job_config(j, w);
          for (std::size_t v = 0; v < w; ++v) {
            if (mask >> v & 1) cfg.fault_plan.push_back({v, k});
          }
          const auto r = mr::run_job(j.job, j.inputs, cfg);
          const std::string tag = j.name + " workers=" + std::to_string(w) + " mask=" + std::to_string(mask) +
                                  " k=" + std::to_string(k);
          c.expect(mr::encode_pairs(r.output) == ref, tag + " output");
          c.expect(accounting_consistent(r.report, cfg.fault_plan), tag + " accounting");
          c.expect(r.report.worker_failures <= cfg.fault_plan.size(), tag + " failures");
          // with k = 0 every planned worker dies on its first task, so each one costs a reassignment
          if (k == 0) {
            c.expect(r.report.worker_failures >= 1 && r.report.total_reassignments >= r.report.worker_failures,
                     tag + " reassignments");
          }
        }
      }
    }

    // kill the master at every checkpoint boundary and recover
    for (std::size_t w : {1, 3}) {
      auto cfg = job_config(j, w);
      cfg.checkpoint_every_tasks = 1;
      const auto plain = mr::run_job(j.job, j.inputs, cfg);
      // tasks finishing in the same round share one checkpoint
      c.expect(plain.report.checkpoints_written >= 1 && plain.report.checkpoints_written <= plain.report.tasks.size() &&
                   (w > 1 || plain.report.checkpoints_written == plain.report.tasks.size()),
               j.name + " checkpoint count");
      for (std::uint64_t at = 1; at <= plain.report.checkpoints_written; ++at) {
        auto killed = cfg;
        killed.kill_master_at_checkpoint = at;
        bool recovered = false;
        try {
          mr::run_job(j.job, j.inputs, killed);
        } catch (const mr::MasterFailure& f) {
          const auto r = mr::recover_master(f.checkpoint(), j.job, j.inputs, cfg);
          recovered = mr::encode_pairs(r.output) == ref && r.report.master_recoveries == 1;

          bool rejected = true;
          for (std::size_t i = 0; i < f.checkpoint().size(); ++i) {
            mr::Bytes bad = f.checkpoint();
            bad[i] = static_cast<char>(bad[i] ^ 0x01);
            try {
              mr::decode_checkpoint(bad);
              rejected = false;
            } catch (const std::runtime_error& e) {
              rejected = rejected && std::string(e.what()) == "checkpoint corrupt";
            }
          }
          c.expect(rejected, j.name + " corrupt checkpoint " + std::to_string(at));
        }
        c.expect(recovered, j.name + " recover at checkpoint " + std::to_string(at) + " workers=" + std::to_string(w));
      }
    }
  }

  // reassignment count of a fully determined plan: worker 0 dies on its second assignment
  {
    const std::vector<mr::Bytes> in{"a b a", "b"};
    mr::JobConfig cfg;
    cfg.num_workers = 2;
    cfg.num_map_tasks = 2;
    cfg.fault_plan = {{0, 1}};
    const auto r = mr::run_job(mr::Job{split_words, sum_counts}, in, cfg);
    c.expect(r.report.total_reassignments == 2 && r.report.worker_failures == 1,
             "single-fault plan reassignment count");
  }
  if (!c.failure.empty()) return {false, c.failure};
  return {true, std::to_string(c.count) + " comparisons"};
}

// ---- 6 ----

Outcome closed_forms() {
  Check c;
  c.expect(bench::amdahl_bound(0.5) == 2.0, "amdahl(0.5)");
  c.expect(std::abs(bench::amdahl_bound(0.9) - 10.0) <= 1e-12, "amdahl(0.9)");
  const auto model = bench::LatencyModel::reference();
  struct Row {
    const char* level;
    double lo, hi;
  };
  const Row table[] = {{"L2", 1.975, 1.975}, {"L3", 3.95, 7.9}, {"RAM", 39.5, 395}, {"disk", 0.395e6, 0.395e6}};
  std::ostringstream d;
  d.precision(6);
  for (const auto& row : table) {
    const auto [lo, hi] = bench::latency_ns(model, row.level);
    c.expect(std::abs(lo - row.lo) <= kLatencyRelTol * row.lo, std::string(row.level) + " min");
    c.expect(std::abs(hi - row.hi) <= kLatencyRelTol * row.hi, std::string(row.level) + " max");
    d << row.level << "=" << lo << "-" << hi << " ";
  }
  d << "ns, rel tol " << kLatencyRelTol;
  if (!c.failure.empty()) return {false, c.failure + "; " + d.str()};
  return {true, d.str()};
}

// ---- 7 ----

Outcome measured_speedups() {
  bench::SuiteSpec mm;
  mm.kernels = {"matmul_naive", "matmul_parallel"};
  mm.sizes = {1024};
  mm.threads = {1, 2, 4};
  mm.repeats = 3;
  bench::SuiteSpec fw;
  fw.kernels = {"fw_iterative", "fw_recursive"};
  fw.sizes = {1024};
  fw.param = 64;
  fw.repeats = 3;
  fw.density = 0.01;
  auto records = bench::run_suite(mm);
  const auto fw_records = bench::run_suite(fw);
  records.insert(records.end(), fw_records.begin(), fw_records.end());
  {
    std::ofstream out("acceptance_speedups.csv");
    bench::write_csv(out, records);
  }
  std::ostringstream d;
  d.precision(3);
  for (const auto& r : records) {
    if (r.kernel == "matmul_parallel" || r.kernel == "fw_recursive")
      d << r.kernel << " t=" << r.threads << " x" << r.speedup << ", ";
  }
  d << "cores=" << std::thread::hardware_concurrency() << "; proxy:";

  bool proxy_ok = true;
  for (Index n : {256, 512, 1024}) {
    const auto w = distance_matrix_from_edges<double>(static_cast<std::size_t>(n),
                                                      bench::gen_weighted_edges(static_cast<std::size_t>(n), 0.01, 3));
    const std::uint64_t rec = count_block_touches(w, {64});
    const std::uint64_t iter = count_block_touches_iterative(n, 64);
    proxy_ok = proxy_ok && rec < iter;
    d << " n=" << n << " " << rec << "<" << iter;
  }
  d << "; speedups informational, CSV in acceptance_speedups.csv";
  return {proxy_ok, d.str()};
}

}  // namespace

int main() {
  report("AC1", "matmul oracle suite", matmul_oracle_suite);
  report("AC2", "Strassen multiplication count 7^k", strassen_count_law);
  report("AC3", "Floyd-Warshall recursive/iterative equivalence", fw_equivalence);
  report("AC4", "parallel BFS equivalence", bfs_equivalence);
  report("AC5", "MapReduce determinism and fault transparency", mapreduce_determinism);
  report("AC6", "closed-form Amdahl and latency values", closed_forms);
  report("AC7", "measured speedups and block-touch proxy", measured_speedups);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
