#include <cmath>
#include <sstream>

#include <doctest.h>

#include "mck/bench.hpp"

using namespace mck;
using namespace mck::bench;

namespace {

// Reference stream written from the published constants.
std::uint64_t reference_draw(std::uint64_t seed, int index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  std::uint64_t x = z ^ (z >> 31);
  std::uint64_t out = 0;
  for (int i = 0; i <= index; ++i) {
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    out = x * 0x2545F4914F6CDD1DULL;
  }
  return out;
}

bool close(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

}  // namespace

TEST_CASE("amdahl_bound") {
  CHECK(amdahl_bound(0.0) == 1.0);
  CHECK(amdahl_bound(0.5) == 2.0);
  CHECK(amdahl_bound(0.9) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_WITH(amdahl_bound(1.0), "fully parallel fraction has unbounded ideal speedup");
  CHECK_THROWS(amdahl_bound(1.5));
  CHECK_THROWS(amdahl_bound(-0.1));
  double prev = 0;
  for (int i = 0; i < 1000; ++i) {
    const double v = amdahl_bound(i / 1000.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("latency model") {
  const LatencyModel m = LatencyModel::reference();
  CHECK(m.clock_ghz == 2.53);
  CHECK(m.ns_per_cycle() == 1.0 / 2.53);
  // The published table rounds the cycle to 0.395 ns first; 1e-3 relative covers that.
  CHECK(close(latency_ns(m, "L2").first, 1.975, 1e-3));
  CHECK(close(latency_ns(m, "L2").second, 1.975, 1e-3));
  CHECK(close(latency_ns(m, "L1").first, 0.395, 1e-3));
  CHECK(close(latency_ns(m, "L1").second, 0.79, 1e-3));
  CHECK(close(latency_ns(m, "L3").first, 3.95, 1e-3));
  CHECK(close(latency_ns(m, "L3").second, 7.9, 1e-3));
  CHECK(close(latency_ns(m, "RAM").first, 39.5, 1e-3));
  CHECK(close(latency_ns(m, "RAM").second, 395, 1e-3));
  CHECK(close(latency_ns(m, "disk").first, 0.395e6, 1e-3));
  CHECK(close(latency_ns(m, "registers").second, 0.395, 1e-3));
  CHECK_THROWS_AS(latency_ns(m, "L4"), std::out_of_range);

  LatencyModel fast = m;
  fast.clock_ghz = 1.0;
  CHECK(latency_ns(fast, "RAM") == std::pair<double, double>{100, 1000});
}

TEST_CASE("Xorshift64Star") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
    Xorshift64Star rng(seed);
    for (int i = 0; i < 5; ++i) CHECK(rng.next() == reference_draw(seed, i));
  }
  Xorshift64Star rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  CHECK_THROWS(rng.below(0));
}

TEST_CASE("gen_matrix") {
  CHECK(gen_matrix(4, 1) == gen_matrix(4, 1));
  CHECK(gen_matrix(4, 1) != gen_matrix(4, 2));
  const MatrixXd ints = gen_matrix(32, 5);
  CHECK(ints.minCoeff() >= 0);
  CHECK(ints.maxCoeff() < 1 << 20);
  CHECK((ints.array() == ints.array().floor()).all());
  const MatrixXd reals = gen_matrix(32, 5, ValueMode::Float);
  CHECK(reals.minCoeff() >= -1);
  CHECK(reals.maxCoeff() < 1);
}

TEST_CASE("gen_weighted_edges") {
  const auto e = gen_weighted_edges(40, 0.3, 2);
  CHECK(!e.empty());
  for (const auto& x : e) {
    CHECK(x.u != x.v);
    CHECK(x.w >= 1);
    CHECK(x.w <= 10);
    CHECK(x.w == std::floor(x.w));
  }
  const auto edges = gen_edges(40, 0.3, 2);
  REQUIRE(edges.size() == e.size());
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(edges[i] == std::pair<Vertex, Vertex>{e[i].u, e[i].v});
  CHECK(gen_weighted_edges(12, 1.0, 1).size() == 12 * 11);
}

TEST_CASE("run_suite") {
  SUBCASE("empty suite writes the header only") {
    std::ostringstream out;
    write_csv(out, run_suite({}));
    CHECK(out.str() == "kernel,n,threads,param,repeats,median_seconds,speedup\n");
  }
  SUBCASE("matmul pair at one thread") {
    SuiteSpec spec;
    spec.kernels = {"matmul_naive", "matmul_parallel"};
    spec.sizes = {48};
    spec.repeats = 3;
    const auto records = run_suite(spec);
    REQUIRE(records.size() == 2);
    CHECK(records[0].kernel == "matmul_naive");
    CHECK(records[0].speedup == doctest::Approx(1.0));
    for (const auto& r : records) {
      CHECK(r.median_seconds > 0);
      CHECK(r.repeats == 3);
      CHECK(r.n == 48);
      CHECK(r.speedup > 0);
    }
  }
  SUBCASE("every kernel passes its correctness check") {
    SuiteSpec spec;
    spec.kernels = known_kernels();
    spec.sizes = {20};
    spec.threads = {1, 2};
    spec.repeats = 1;
    spec.density = 0.2;
    const auto records = run_suite(spec);
    // the threaded kernels get one record per thread count
    CHECK(records.size() == known_kernels().size() + 4);
    std::ostringstream out;
    write_csv(out, records);
    const std::string csv = out.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(records.size() + 1));
    // non-timing columns are deterministic
    const auto again = run_suite(spec);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].kernel == again[i].kernel);
      CHECK(records[i].n == again[i].n);
      CHECK(records[i].threads == again[i].threads);
      CHECK(records[i].param == again[i].param);
    }
  }
  SUBCASE("fw pair") {
    SuiteSpec spec;
    spec.kernels = {"fw_iterative", "fw_recursive"};
    spec.sizes = {64};
    spec.param = 16;
    spec.repeats = 1;
    const auto records = run_suite(spec);
    REQUIRE(records.size() == 2);
    CHECK(records[1].param == 16);
  }
  SUBCASE("errors") {
    SuiteSpec spec;
    spec.kernels = {"no_such_kernel"};
    spec.sizes = {8};
    CHECK_THROWS(run_suite(spec));
    spec.kernels = {"matmul_naive"};
    spec.threads = {};
    CHECK_THROWS(run_suite(spec));
  }
}
