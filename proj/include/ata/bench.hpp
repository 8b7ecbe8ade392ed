#pragma once

// Benchmark harness shared by the CLI and the acceptance driver.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ata/comm_stats.hpp"
#include "ata/distributed.hpp"
#include "ata/matrix_io.hpp"

namespace ata {

enum class BenchMode { Seq, Shared, Dist, Oracle };
enum class DType { F32, F64 };

/// Effective GFLOPs r·m·n²/(seconds·1e9). For square inputs this is r·n³/t.
double effective_gflops(Index m, Index n, double seconds, int r);

/// Median of the samples; the input order does not matter.
double median(std::vector<double> samples);

/// Deterministic uniform[-1, 1] matrix.
template <class T>
Matrix<T> gen_matrix(Index m, Index n, std::uint64_t seed) {
  detail::require(m >= 1 && n >= 1, Errc::invalid_argument, "matrix dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix<T> a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = static_cast<T>(dist(rng));
  return a;
}

/// Allowed max-entry error against the naive oracle.
double check_tolerance(DType dtype, Index m, double max_abs_a);

/// Base-case threshold from ATA_THRESHOLD, or the built-in default.
Index default_threshold();

struct BenchConfig {
  BenchMode mode = BenchMode::Seq;
  Index m = 256;
  Index n = 256;
  int procs = 1;
  Index threshold = kDefaultThreshold;
  DType dtype = DType::F64;
  std::uint64_t seed = 1;
  int reps = 5;
  bool check = false;
  bool count_mults = false;
  LeafKernel leaf_kernel = LeafKernel::Fast;
  std::string in_path;   // read A from an ATAM file instead of generating it
  std::string out_path;  // write the last C to an ATAM file
};

struct BenchRecord {
  std::string mode;
  Index m = 0;
  Index n = 0;
  int procs = 1;
  Index threshold = 0;
  int reps = 0;
  double median_seconds = 0;
  double effective_gflops = 0;
  std::optional<double> max_abs_error;
  std::optional<std::uint64_t> mult_count;
  // Distributed runs only: medians of the slowest leaf computation and of the
  // remaining (communication) time.
  std::optional<double> compute_seconds;
  std::optional<double> comm_seconds;
  bool check_passed = true;
};

struct BenchOutcome {
  BenchRecord record;
  std::optional<CommStats> comm;
};

std::string to_string(BenchMode mode);
BenchMode parse_mode(const std::string& s);

/// Validates the configuration, then runs one warm-up and `reps` timed runs.
BenchOutcome run_bench(const BenchConfig& config);

extern const char* const kCsvHeader;
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRecord& r);

}  // namespace ata
