#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mck/graph.hpp"
#include "mck/matrix.hpp"

namespace mck::bench {

/// Ideal speedup when a fraction alpha of the work runs in parallel: 1 / (1 - alpha).
double amdahl_bound(double alpha);

struct LatencyModel {
  double clock_ghz = 2.53;
  std::map<std::string, std::pair<double, double>> level_cycles;  // level -> (min, max) cycles

  double ns_per_cycle() const { return 1.0 / clock_ghz; }

  /// Registers < 1 cycle, L1 1-2, L2 5, L3 10-20, RAM 100-1000, disk 1e6 cycles at 2.53 GHz.
  static LatencyModel reference();
};

/// Access time range in nanoseconds for `level`. Throws std::out_of_range for unknown levels.
std::pair<double, double> latency_ns(const LatencyModel& model, const std::string& level);

/// xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D), seeded through splitmix64.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

enum class ValueMode { Integer, Float };

/// Integer mode draws from [0, 2^20); float mode from [-1, 1).
MatrixXd gen_matrix(Index n, std::uint64_t seed, ValueMode mode = ValueMode::Integer);

/// Each ordered pair (u, v), u != v, is an arc with probability `density`.
std::vector<std::pair<Vertex, Vertex>> gen_edges(std::size_t n, double density, std::uint64_t seed);
Graph gen_graph(std::size_t n, double density, std::uint64_t seed);
/// As gen_edges, with integer weights drawn from [1, 10].
std::vector<WeightedEdge> gen_weighted_edges(std::size_t n, double density, std::uint64_t seed);

struct BenchRecord {
  std::string kernel;
  Index n = 0;
  int threads = 1;
  std::optional<Index> param;  // block order, cutoff, or reducer count
  int repeats = 0;
  double median_seconds = 0;
  double speedup = 0;
};

struct SuiteSpec {
  std::vector<std::string> kernels;
  std::vector<Index> sizes;
  std::vector<int> threads{1};
  std::optional<Index> param;
  int repeats = 5;
  int warmup = 1;
  std::uint64_t seed = 1;
  double density = 0.01;
};

/// Kernels run_suite knows, grouped by problem family.
const std::vector<std::string>& known_kernels();

/// A kernel produced a wrong answer during a benchmark run.
class CorrectnessError : public std::runtime_error {
 public:
  explicit CorrectnessError(const std::string& kernel)
      : std::runtime_error("correctness check failed: " + kernel), kernel_(kernel) {}
  const std::string& kernel() const { return kernel_; }

 private:
  std::string kernel_;
};

inline constexpr const char* kCsvHeader = "kernel,n,threads,param,repeats,median_seconds,speedup";

/// Times every (kernel, size, thread count) configuration. The first warm-up run of each is
/// checked against the oracle kernel of its family; a mismatch throws CorrectnessError.
std::vector<BenchRecord> run_suite(const SuiteSpec& spec);

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace mck::bench
