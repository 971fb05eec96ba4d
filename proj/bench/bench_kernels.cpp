// Compares the serial and parallel level kernels on large levels of the
// homogeneous tree and checks that both routes produce identical bits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "treediff/kernels.hpp"

using namespace treediff;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t max_level = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 21;
  TreeShape shape = TreeShape::homogeneous(2);

  kernels::LevelTerm term = [](const Vertex& v, std::uint64_t rank) {
    return std::sin(static_cast<double>(rank) * 1e-3) + 1e-6 * v.length();
  };

  std::printf("%-6s %-12s %-12s %-12s %-10s %s\n", "level", "vertices", "serial_s",
              "parallel_s", "speedup", "identical");
  for (std::size_t n = max_level >= 4 ? max_level - 4 : 0; n <= max_level; ++n) {
    std::uint64_t size = shape.level_size(n);

    auto t0 = Clock::now();
    double serial_sum = kernels::level_sum(shape, n, term, kernels::Exec::Serial);
    kernels::MaxResult serial_max =
        kernels::level_max(shape, n, term, kernels::Exec::Serial);
    double serial_s = seconds_since(t0);

    auto t1 = Clock::now();
    double parallel_sum = kernels::level_sum(shape, n, term, kernels::Exec::Parallel);
    kernels::MaxResult parallel_max =
        kernels::level_max(shape, n, term, kernels::Exec::Parallel);
    double parallel_s = seconds_since(t1);

    bool identical = serial_sum == parallel_sum &&
                     serial_max.value == parallel_max.value &&
                     serial_max.rank == parallel_max.rank;
    std::printf("%-6zu %-12llu %-12.4f %-12.4f %-10.2f %s\n", n,
                static_cast<unsigned long long>(size), serial_s, parallel_s,
                parallel_s > 0 ? serial_s / parallel_s : 0.0,
                identical ? "yes" : "NO");
    if (!identical) return 1;
  }
  return 0;
}
