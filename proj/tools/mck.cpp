// mck: run, verify, and benchmark the multicore kernels.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mck/apsp.hpp"
#include "mck/bench.hpp"
#include "mck/graph.hpp"
#include "mck/matmul.hpp"
#include "mck/mr_matmul.hpp"

namespace {

using namespace mck;

struct Common {
  Index n = 256;
  std::uint64_t seed = 1;
  int threads = 4;
  std::string algo;
  std::string out;
  double density = 0.01;
};

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  return out;
}

bool matrices_match(const MatrixXd& got, const MatrixXd& want, double rel_tol) {
  for (Index i = 0; i < got.size(); ++i) {
    const double x = got.data()[i], y = want.data()[i];
    if (x != y && !(std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y)))) return false;
  }
  return true;
}

int cmd_matmul(const Common& c, Index cutoff, const std::string& a_path, const std::string& b_path) {
  const MatrixXd a = a_path.empty() ? bench::gen_matrix(c.n, c.seed) : load_matrix(a_path);
  const MatrixXd b = b_path.empty() ? bench::gen_matrix(a.rows(), c.seed + 1) : load_matrix(b_path);
  const std::string algo = c.algo.empty() ? "parallel" : c.algo;

  MatrixXd result;
  std::optional<MulStats> stats;
  double tolerance = 0;
  const double elapsed = seconds([&] {
    if (algo == "naive") {
      std::tie(result, stats) = matmul_naive(a, b);
    } else if (algo == "parallel") {
      result = matmul_parallel(a, b, c.threads);
    } else if (algo == "blocked") {
      result = matmul_blocked(a, b, c.threads, cutoff);
      tolerance = 1e-9;
    } else if (algo == "strassen") {
      std::tie(result, stats) = matmul_strassen(a, b, cutoff);
      tolerance = 1e-6;
    } else {
      throw CLI::ValidationError("--algo", "expected naive, parallel, blocked or strassen");
    }
  });
  const MatrixXd oracle = matmul_naive(a, b).first;
  const bool ok = matrices_match(result, oracle, tolerance);

  std::cout << "matmul " << algo << " n=" << a.rows() << " threads=" << c.threads << " time=" << elapsed << "s\n";
  if (stats)
    std::cout << "multiplications=" << stats->scalar_multiplications << " additions=" << stats->scalar_additions << '\n';
  std::cout << "verified against naive: " << (ok ? "ok" : "MISMATCH") << '\n';
  if (!c.out.empty()) save_matrix(c.out, result);
  return ok ? 0 : 1;
}

int cmd_bfs(const Common& c, Vertex source, const std::string& graph_path) {
  Graph g;
  if (graph_path.empty()) {
    g = bench::gen_graph(static_cast<std::size_t>(c.n), c.density, c.seed);
  } else {
    std::ifstream in(graph_path);
    if (!in) throw std::runtime_error("cannot open " + graph_path);
    g = read_graph(in);
  }
  const std::string algo = c.algo.empty() ? "parallel" : c.algo;
  BfsResult r;
  const double elapsed = seconds([&] {
    if (algo == "seq") r = bfs_seq(g, source);
    else if (algo == "parallel") r = bfs_parallel(g, source, c.threads);
    else throw CLI::ValidationError("--algo", "expected seq or parallel");
  });
  const bool ok = r.level == bfs_seq(g, source).level;

  std::size_t reached = 0;
  std::uint32_t depth = 0;
  for (auto l : r.level) {
    if (l == kUnreached) continue;
    ++reached;
    depth = std::max(depth, l);
  }
  std::cout << "bfs " << algo << " n=" << g.vertex_count() << " m=" << g.edge_count() << " threads=" << c.threads
            << " time=" << elapsed << "s\n"
            << "reached=" << reached << " depth=" << depth << '\n'
            << "verified against sequential: " << (ok ? "ok" : "MISMATCH") << '\n';
  if (!c.out.empty()) {
    auto out = open_out(c.out);
    for (std::size_t v = 0; v < r.level.size(); ++v) {
      out << v << ' ';
      if (r.level[v] == kUnreached) out << "unreached\n";
      else out << r.level[v] << '\n';
    }
  }
  return ok ? 0 : 1;
}

void write_distances(std::ostream& out, const DistanceMatrix<double>& d) {
  out << std::setprecision(17) << d.rows() << '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (j) out << ' ';
      if (std::isinf(d(i, j))) out << "inf";
      else out << d(i, j);
    }
    out << '\n';
  }
}

int cmd_apsp(const Common& c, Index block, const std::string& graph_path) {
  std::size_t n = static_cast<std::size_t>(c.n);
  std::vector<WeightedEdge> edges;
  if (graph_path.empty()) {
    edges = bench::gen_weighted_edges(n, c.density, c.seed);
  } else {
    std::ifstream in(graph_path);
    if (!in) throw std::runtime_error("cannot open " + graph_path);
    std::tie(n, edges) = read_weighted_edges(in);
  }
  const auto w = distance_matrix_from_edges<double>(n, edges);
  const std::string algo = c.algo.empty() ? "recursive" : c.algo;
  DistanceMatrix<double> d;
  const double elapsed = seconds([&] {
    if (algo == "iterative") d = fw_iterative(w);
    else if (algo == "recursive") d = fw_recursive(w, FwConfig{block});
    else throw CLI::ValidationError("--algo", "expected iterative or recursive");
  });
  const bool ok = d == fw_iterative(w);
  std::cout << "apsp " << algo << " n=" << n << " m=" << edges.size() << " block=" << block << " time=" << elapsed
            << "s\n"
            << "block touches: recursive=" << count_block_touches(w, FwConfig{block})
            << " iterative=" << count_block_touches_iterative(static_cast<Index>(n), block) << '\n'
            << "verified against iterative: " << (ok ? "ok" : "MISMATCH") << '\n';
  if (!c.out.empty()) {
    auto out = open_out(c.out);
    write_distances(out, d);
  }
  return ok ? 0 : 1;
}

int cmd_mr_matmul(const Common& c, std::size_t reducers, std::size_t workers, const std::string& fault_plan,
                  std::uint64_t checkpoint_every, std::optional<std::uint64_t> kill_at) {
  const MatrixXd a = bench::gen_matrix(c.n, c.seed), b = bench::gen_matrix(c.n, c.seed + 1);
  mr::JobConfig cfg;
  cfg.num_workers = workers;
  cfg.num_map_tasks = 2 * reducers;
  cfg.fault_plan = mr::parse_fault_plan(fault_plan);
  cfg.checkpoint_every_tasks = checkpoint_every;
  cfg.kill_master_at_checkpoint = kill_at;
  cfg.seed = c.seed;

  const MrMatmulPlan<double> plan(a, b, reducers);
  cfg = plan.configure(cfg);
  mr::JobResult job_result;
  try {
    job_result = mr::run_job(plan.job, plan.splits, cfg);
  } catch (const mr::MasterFailure& failure) {
    std::cout << "master killed at checkpoint " << *kill_at << "; recovering from "
              << failure.checkpoint().size() << "-byte checkpoint\n";
    job_result = mr::recover_master(failure.checkpoint(), plan.job, plan.splits, cfg);
  }
  const mr::JobReport& report = job_result.report;
  const MatrixXd result = plan.assemble(job_result.output);
  const bool ok = matrices_match(result, matmul_naive(a, b).first, 1e-9);
  std::cout << "mr-matmul n=" << c.n << " reducers=" << reducers << " workers=" << workers << '\n'
            << mr::report_text(report) << "verified against naive: " << (ok ? "ok" : "MISMATCH") << '\n';
  if (!c.out.empty()) open_out(c.out) << mr::report_csv(report);
  return ok ? 0 : 1;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int cmd_bench(const Common& c, const std::string& kernels, const std::string& sizes, const std::string& threads,
              int repeats, std::optional<Index> param) {
  bench::SuiteSpec spec;
  spec.kernels = split_list(kernels);
  for (const auto& s : split_list(sizes)) spec.sizes.push_back(std::stoll(s));
  spec.threads.clear();
  for (const auto& t : split_list(threads)) spec.threads.push_back(std::stoi(t));
  if (spec.threads.empty()) spec.threads.push_back(c.threads);
  spec.repeats = repeats;
  spec.param = param;
  spec.seed = c.seed;
  spec.density = c.density;

  const auto records = bench::run_suite(spec);
  if (c.out.empty()) {
    bench::write_csv(std::cout, records);
  } else {
    auto out = open_out(c.out);
    bench::write_csv(out, records);
    std::cout << records.size() << " records written to " << c.out << '\n';
  }
  return 0;
}

int cmd_gen(const Common& c, const std::string& kind) {
  std::ofstream file;
  if (!c.out.empty()) file = open_out(c.out);
  std::ostream& out = c.out.empty() ? std::cout : file;
  const auto n = static_cast<std::size_t>(c.n);
  if (kind == "matrix") write_matrix(out, bench::gen_matrix(c.n, c.seed));
  else if (kind == "graph") write_graph(out, bench::gen_graph(n, c.density, c.seed));
  else if (kind == "weighted") write_weighted_edges(out, n, bench::gen_weighted_edges(n, c.density, c.seed));
  else throw CLI::ValidationError("--kind", "expected matrix, graph or weighted");
  return 0;
}

int cmd_model(double alpha, double clock_ghz) {
  auto model = bench::LatencyModel::reference();
  model.clock_ghz = clock_ghz;
  std::cout << std::setprecision(3) << "cycle time: " << model.ns_per_cycle() << " ns at " << clock_ghz << " GHz\n";
  for (const char* level : {"registers", "L1", "L2", "L3", "RAM", "disk"}) {
    const auto [lo, hi] = bench::latency_ns(model, level);
    std::cout << std::setw(10) << level << ": " << lo;
    if (hi != lo) std::cout << " - " << hi;
    std::cout << " ns\n";
  }
  std::cout << "amdahl bound for alpha=" << alpha << ": " << bench::amdahl_bound(alpha) << '\n';
  return 0;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--n", c.n, "problem size")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "generator seed");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--density", c.density, "arc probability for generated graphs")->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multicore kernels: matrix multiplication, BFS, Floyd-Warshall, MapReduce"};
  app.require_subcommand(1);
  Common c;
  int status = 0;

  Index cutoff = kDefaultStrassenCutoff;
  std::string a_path, b_path;
  auto* matmul = app.add_subcommand("matmul", "multiply two matrices and verify against the naive kernel");
  add_common(matmul, c);
  matmul->add_option("--algo", c.algo, "naive|parallel|blocked|strassen");
  matmul->add_option("--cutoff,--block", cutoff, "recursion cutoff order")->check(CLI::PositiveNumber);
  matmul->add_option("--a", a_path, "matrix file for A");
  matmul->add_option("--b", b_path, "matrix file for B");
  matmul->callback([&] { status = cmd_matmul(c, cutoff, a_path, b_path); });

  Vertex source = 0;
  std::string graph_path;
  auto* bfs = app.add_subcommand("bfs", "breadth-first search from a source vertex");
  add_common(bfs, c);
  bfs->add_option("--algo", c.algo, "seq|parallel");
  bfs->add_option("--source", source, "source vertex");
  bfs->add_option("--graph", graph_path, "edge list file (\"n m\" then \"u v\" lines)");
  bfs->callback([&] { status = cmd_bfs(c, source, graph_path); });

  Index block = kDefaultBaseBlockOrder;
  auto* apsp = app.add_subcommand("apsp", "all-pairs shortest paths with Floyd-Warshall");
  add_common(apsp, c);
  apsp->add_option("--algo", c.algo, "iterative|recursive");
  apsp->add_option("--block,--cutoff", block, "base block order of the recursion")->check(CLI::PositiveNumber);
  apsp->add_option("--graph", graph_path, "weighted edge list file (\"n m\" then \"u v w\" lines)");
  apsp->callback([&] { status = cmd_apsp(c, block, graph_path); });

  std::size_t reducers = 4, workers = 4;
  std::string fault_plan;
  std::uint64_t checkpoint_every = 0;
  std::optional<std::uint64_t> kill_at;
  auto* mrm = app.add_subcommand("mr-matmul", "matrix product on the in-process MapReduce engine");
  add_common(mrm, c);
  mrm->add_option("--reducers", reducers, "reduce tasks (a power of four)");
  mrm->add_option("--workers,--num-workers", workers, "worker threads")->check(CLI::PositiveNumber);
  mrm->add_option("--fault-plan", fault_plan, "worker:after_k_tasks[,...]");
  mrm->add_option("--checkpoint-every", checkpoint_every, "checkpoint after every k completed tasks");
  mrm->add_option("--kill-master-at", kill_at, "kill the master at this checkpoint and recover");
  mrm->callback([&] { status = cmd_mr_matmul(c, reducers, workers, fault_plan, checkpoint_every, kill_at); });

  std::string kernels = "matmul_naive,matmul_parallel", sizes = "256", thread_list;
  int repeats = 5;
  std::optional<Index> param;
  auto* bench_cmd = app.add_subcommand("bench", "time kernels and write a CSV report");
  add_common(bench_cmd, c);
  bench_cmd->add_option("--kernels,--algo", kernels, "comma-separated kernel names");
  bench_cmd->add_option("--sizes", sizes, "comma-separated problem sizes");
  bench_cmd->add_option("--thread-list", thread_list, "comma-separated thread counts (default: --threads)");
  bench_cmd->add_option("--repeats", repeats, "timed runs per configuration")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--block,--cutoff,--reducers", param, "block order, cutoff or reducer count");
  bench_cmd->callback([&] {
    if (bench_cmd->count("--n") && !bench_cmd->count("--sizes")) sizes = std::to_string(c.n);
    status = cmd_bench(c, kernels, sizes, thread_list, repeats, param);
  });

  std::string kind = "matrix";
  auto* gen = app.add_subcommand("gen", "write a generated matrix or graph");
  add_common(gen, c);
  gen->add_option("--kind", kind, "matrix|graph|weighted");
  gen->callback([&] { status = cmd_gen(c, kind); });

  double alpha = 0.5, clock = 2.53;
  auto* model = app.add_subcommand("model", "memory latency table and Amdahl bound");
  model->add_option("--alpha", alpha, "parallel fraction");
  model->add_option("--clock-ghz", clock, "clock frequency")->check(CLI::PositiveNumber);
  model->callback([&] { status = cmd_model(alpha, clock); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
