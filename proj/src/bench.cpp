#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>

#include "mck/apsp.hpp"
#include "mck/bench.hpp"
#include "mck/matmul.hpp"
#include "mck/mr_matmul.hpp"

namespace mck::bench {

double amdahl_bound(double alpha) {
  if (std::isnan(alpha) || alpha < 0) throw std::domain_error("parallel fraction must be non-negative");
  if (alpha >= 1) throw std::domain_error("fully parallel fraction has unbounded ideal speedup");
  return 1.0 / (1.0 - alpha);
}

LatencyModel LatencyModel::reference() {
  LatencyModel m;
  m.clock_ghz = 2.53;
  m.level_cycles = {
      {"registers", {0.0, 1.0}}, {"L1", {1.0, 2.0}},     {"L2", {5.0, 5.0}},
      {"L3", {10.0, 20.0}},      {"RAM", {100.0, 1000.0}}, {"disk", {1e6, 1e6}},
  };
  return m;
}

std::pair<double, double> latency_ns(const LatencyModel& model, const std::string& level) {
  if (!(model.clock_ghz > 0)) throw std::invalid_argument("clock must be positive");
  const auto it = model.level_cycles.find(level);
  if (it == model.level_cycles.end()) throw std::out_of_range("unknown memory level: " + level);
  const double ns = model.ns_per_cycle();
  return {it->second.first * ns, it->second.second * ns};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Xorshift64Star::Xorshift64Star(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Xorshift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Xorshift64Star::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Xorshift64Star::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  // rejection keeps the draw unbiased
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = 0;
  do x = next();
  while (x >= limit);
  return x % bound;
}

MatrixXd gen_matrix(Index n, std::uint64_t seed, ValueMode mode) {
  if (n < 1) throw std::invalid_argument("matrix order must be at least 1");
  Xorshift64Star rng(seed);
  MatrixXd m(n, n);
  for (Index i = 0; i < m.size(); ++i) {
    m.data()[i] = mode == ValueMode::Integer ? static_cast<double>(rng.below(1u << 20)) : 2.0 * rng.uniform() - 1.0;
  }
  return m;
}

namespace {

// Visits the selected slots of the n(n-1) off-diagonal pairs in row-major order, skipping
// geometrically distributed gaps.
template <typename Visit>
void sample_pairs(std::size_t n, double density, Xorshift64Star& rng, Visit&& visit) {
  if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
  if (!(density >= 0 && density <= 1)) throw std::invalid_argument("density must lie in [0, 1]");
  const std::uint64_t slots = static_cast<std::uint64_t>(n) * (n - 1);
  if (density == 0 || slots == 0) return;
  auto emit = [&](std::uint64_t idx) {
    const auto u = static_cast<Vertex>(idx / (n - 1));
    auto v = static_cast<Vertex>(idx % (n - 1));
    if (v >= u) ++v;
    visit(u, v);
  };
  if (density == 1) {
    for (std::uint64_t idx = 0; idx < slots; ++idx) emit(idx);
    return;
  }
  const double log_q = std::log1p(-density);
  std::uint64_t idx = 0;
  for (;;) {
    const double gap = std::floor(std::log1p(-rng.uniform()) / log_q);
    if (gap >= static_cast<double>(slots - idx)) return;
    idx += static_cast<std::uint64_t>(gap);
    emit(idx);
    if (++idx >= slots) return;
  }
}

}  // namespace

std::vector<std::pair<Vertex, Vertex>> gen_edges(std::size_t n, double density, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<std::pair<Vertex, Vertex>> edges;
  sample_pairs(n, density, rng, [&](Vertex u, Vertex v) { edges.emplace_back(u, v); });
  return edges;
}

Graph gen_graph(std::size_t n, double density, std::uint64_t seed) {
  return graph_from_edges(n, gen_edges(n, density, seed));
}

std::vector<WeightedEdge> gen_weighted_edges(std::size_t n, double density, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<WeightedEdge> edges;
  sample_pairs(n, density, rng, [&](Vertex u, Vertex v) { edges.push_back({u, v, 0.0}); });
  for (auto& e : edges) e.w = static_cast<double>(1 + rng.below(10));
  return edges;
}

const std::vector<std::string>& known_kernels() {
  static const std::vector<std::string> kernels = {
      "matmul_naive", "matmul_parallel", "matmul_blocked", "matmul_strassen", "mr_matmul",
      "bfs_seq",      "bfs_parallel",    "fw_iterative",   "fw_recursive",
  };
  return kernels;
}

namespace {

enum class Family { Matmul, Bfs, Apsp };

Family family_of(const std::string& kernel) {
  if (kernel.starts_with("bfs_")) return Family::Bfs;
  if (kernel.starts_with("fw_")) return Family::Apsp;
  return Family::Matmul;
}

const char* baseline_of(Family f) {
  switch (f) {
    case Family::Matmul: return "matmul_naive";
    case Family::Bfs: return "bfs_seq";
    case Family::Apsp: return "fw_iterative";
  }
  return "";
}

bool threaded(const std::string& kernel) {
  return kernel == "matmul_parallel" || kernel == "matmul_blocked" || kernel == "bfs_parallel" ||
         kernel == "mr_matmul";
}

std::optional<Index> default_param(const std::string& kernel) {
  if (kernel == "matmul_blocked") return kDefaultBlockedCutoff;
  if (kernel == "matmul_strassen") return kDefaultStrassenCutoff;
  if (kernel == "fw_recursive") return kDefaultBaseBlockOrder;
  if (kernel == "mr_matmul") return 4;
  return std::nullopt;
}

bool close(const MatrixXd& got, const MatrixXd& want, double rel_tol) {
  if (got.rows() != want.rows() || got.cols() != want.cols()) return false;
  for (Index i = 0; i < got.size(); ++i) {
    const double x = got.data()[i], y = want.data()[i];
    if (x == y) continue;
    if (!(std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y)))) return false;
  }
  return true;
}

// Inputs and oracle answers of one problem instance.
struct Problem {
  MatrixXd a, b, product;
  Graph graph;
  std::vector<std::uint32_t> levels;
  DistanceMatrix<double> weights, distances;
};

Problem make_problem(Family f, Index n, const SuiteSpec& spec) {
  Problem p;
  switch (f) {
    case Family::Matmul:
      p.a = gen_matrix(n, spec.seed);
      p.b = gen_matrix(n, spec.seed + 1);
      p.product = matmul_naive(p.a, p.b).first;
      break;
    case Family::Bfs:
      p.graph = gen_graph(static_cast<std::size_t>(n), spec.density, spec.seed);
      p.levels = bfs_seq(p.graph, 0).level;
      break;
    case Family::Apsp: {
      const auto edges = gen_weighted_edges(static_cast<std::size_t>(n), spec.density, spec.seed);
      p.weights = distance_matrix_from_edges<double>(static_cast<std::size_t>(n), edges);
      p.distances = fw_iterative(p.weights);
      break;
    }
  }
  return p;
}

// Returns a runner that executes the kernel once and reports whether the answer is correct.
std::function<bool()> make_runner(const std::string& kernel, const Problem& p, int threads,
                                  std::optional<Index> param) {
  if (kernel == "matmul_naive") return [&p] { return close(matmul_naive(p.a, p.b).first, p.product, 0); };
  if (kernel == "matmul_parallel")
    return [&p, threads] { return close(matmul_parallel(p.a, p.b, threads), p.product, 0); };
  if (kernel == "matmul_blocked")
    return [&p, threads, param] { return close(matmul_blocked(p.a, p.b, threads, *param), p.product, 1e-9); };
  if (kernel == "matmul_strassen")
    return [&p, param] { return close(matmul_strassen(p.a, p.b, *param).first, p.product, 1e-6); };
  if (kernel == "mr_matmul")
    return [&p, threads, param] {
      mr::JobConfig cfg;
      cfg.num_workers = static_cast<std::size_t>(threads);
      cfg.num_map_tasks = 2 * static_cast<std::size_t>(*param);
      return close(mr_matmul(p.a, p.b, static_cast<std::size_t>(*param), cfg), p.product, 1e-9);
    };
  if (kernel == "bfs_seq") return [&p] { return bfs_seq(p.graph, 0).level == p.levels; };
  if (kernel == "bfs_parallel") return [&p, threads] { return bfs_parallel(p.graph, 0, threads).level == p.levels; };
  if (kernel == "fw_iterative") return [&p] { return fw_iterative(p.weights) == p.distances; };
  if (kernel == "fw_recursive")
    return [&p, param] { return fw_recursive(p.weights, FwConfig{*param}) == p.distances; };
  throw std::invalid_argument("unknown kernel: " + kernel);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double time_runs(const std::string& kernel, const std::function<bool()>& run, const SuiteSpec& spec) {
  for (int i = 0; i < std::max(spec.warmup, 1); ++i) {
    if (!run()) throw CorrectnessError(kernel);
  }
  std::vector<double> samples;
  for (int i = 0; i < spec.repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool ok = run();
    const auto t1 = std::chrono::steady_clock::now();
    if (!ok) throw CorrectnessError(kernel);
    samples.push_back(std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9));
  }
  return median(std::move(samples));
}

}  // namespace

std::vector<BenchRecord> run_suite(const SuiteSpec& spec) {
  if (spec.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  for (const auto& k : spec.kernels) {
    if (std::find(known_kernels().begin(), known_kernels().end(), k) == known_kernels().end())
      throw std::invalid_argument("unknown kernel: " + k);
  }
  if (spec.threads.empty()) throw std::invalid_argument("at least one thread count is required");

  std::vector<BenchRecord> records;
  for (const Index n : spec.sizes) {
    std::map<Family, Problem> problems;
    std::map<Family, double> baselines;
    auto problem = [&](Family f) -> const Problem& {
      auto it = problems.find(f);
      if (it == problems.end()) it = problems.emplace(f, make_problem(f, n, spec)).first;
      return it->second;
    };
    auto baseline = [&](Family f) {
      auto it = baselines.find(f);
      if (it == baselines.end()) {
        const std::string base = baseline_of(f);
        it = baselines.emplace(f, time_runs(base, make_runner(base, problem(f), 1, std::nullopt), spec)).first;
      }
      return it->second;
    };

    for (const auto& kernel : spec.kernels) {
      const Family f = family_of(kernel);
      const std::optional<Index> param = default_param(kernel) ? std::optional(spec.param.value_or(*default_param(kernel)))
                                                               : std::nullopt;
      std::vector<int> thread_counts = threaded(kernel) ? spec.threads : std::vector<int>{1};
      for (const int t : thread_counts) {
        BenchRecord rec;
        rec.kernel = kernel;
        rec.n = n;
        rec.threads = t;
        rec.param = param;
        rec.repeats = spec.repeats;
        const double base = baseline(f);
        rec.median_seconds = kernel == baseline_of(f) ? base : time_runs(kernel, make_runner(kernel, problem(f), t, param), spec);
        rec.speedup = base / rec.median_seconds;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvHeader << '\n';
  const auto old = out.precision(9);
  for (const auto& r : records) {
    out << r.kernel << ',' << r.n << ',' << r.threads << ',';
    if (r.param) out << *r.param;
    out << ',' << r.repeats << ',' << r.median_seconds << ',' << r.speedup << '\n';
  }
  out.precision(old);
}

}  // namespace mck::bench
