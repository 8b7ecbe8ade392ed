#include "ata/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ostream>

#include "ata/shared.hpp"

namespace ata {

const char* const kCsvHeader = "mode,m,n,procs,threshold,reps,median_s,eff_gflops,max_abs_err,mult_count";

double effective_gflops(Index m, Index n, double seconds, int r) {
  if (!(seconds > 0)) throw Error(Errc::invalid_measurement, "elapsed time must be positive");
  detail::require(r == 1 || r == 2, Errc::invalid_argument, "r must be 1 or 2");
  const double dm = static_cast<double>(m), dn = static_cast<double>(n);
  return r * dm * dn * dn / (seconds * 1e9);
}

double median(std::vector<double> samples) {
  detail::require(!samples.empty(), Errc::invalid_measurement, "no samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t h = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[h] : (samples[h - 1] + samples[h]) / 2;
}

double check_tolerance(DType dtype, Index m, double max_abs_a) {
  const double eps = dtype == DType::F64 ? 1e-9 : 1e-4;
  return eps * static_cast<double>(m) * max_abs_a * max_abs_a;
}

Index default_threshold() {
  if (const char* env = std::getenv("ATA_THRESHOLD"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 1)
      throw Error(Errc::invalid_argument, std::string("ATA_THRESHOLD must be a positive integer, got ") + env);
    return static_cast<Index>(v);
  }
  return kDefaultThreshold;
}

std::string to_string(BenchMode mode) {
  switch (mode) {
    case BenchMode::Seq: return "seq";
    case BenchMode::Shared: return "shared";
    case BenchMode::Dist: return "dist";
    case BenchMode::Oracle: return "oracle";
  }
  return "unknown";
}

BenchMode parse_mode(const std::string& s) {
  for (BenchMode m : {BenchMode::Seq, BenchMode::Shared, BenchMode::Dist, BenchMode::Oracle})
    if (to_string(m) == s) return m;
  throw Error(Errc::invalid_argument, "unknown mode " + s);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
class Runner {
 public:
  Runner(const BenchConfig& config, const Matrix<T>& a) : config_(config), a_(a) {
    const Index n = a.cols();
    c_ = Matrix<T>::Zero(n, n);
    if (config.mode == BenchMode::Seq) ws_.emplace(ata_workspace<T>(a.rows(), n, config.threshold));
    if (config.mode == BenchMode::Shared)
      plan_ = std::make_unique<SharedPlan<T>>(a.rows(), n, config.procs, config.threshold);
  }

  // One run; returns its elapsed time. Distributed runs also record the split.
  double run(MultCounter* counter = nullptr) {
    const auto start = Clock::now();
    switch (config_.mode) {
      case BenchMode::Seq:
        c_.setZero();
        ata(cview(a_), view(c_), T(1), config_.threshold, *ws_, counter);
        mirror_lower_to_upper(view(c_));
        break;
      case BenchMode::Shared: {
        c_.setZero();
        std::vector<MultCounter> counters;
        plan_->run(cview(a_), view(c_), counter != nullptr ? &counters : nullptr);
        mirror_lower_to_upper(view(c_));
        for (const auto& w : counters) counter->add(w.scalar_mults);
        break;
      }
      case BenchMode::Dist: {
        DistOptions options;
        options.threshold = config_.threshold;
        options.leaf_kernel = config_.leaf_kernel;
        auto result = ata_d(cview(a_), config_.procs, options);
        const double total = seconds_since(start);
        c_ = std::move(result.c);
        if (counter != nullptr) counter->add(result.mult_count);
        compute_.push_back(result.compute_seconds);
        comm_.push_back(total - result.compute_seconds);
        comm_stats_ = std::move(result.stats);
        return total;
      }
      case BenchMode::Oracle:
        c_.setZero();
        naive_syrk_lower(cview(a_), view(c_), T(1), counter);
        mirror_lower_to_upper(view(c_));
        break;
    }
    return seconds_since(start);
  }

  const Matrix<T>& result() const { return c_; }
  std::vector<double>& compute_samples() { return compute_; }
  std::vector<double>& comm_samples() { return comm_; }
  std::optional<CommStats>& comm_stats() { return comm_stats_; }

 private:
  const BenchConfig& config_;
  const Matrix<T>& a_;
  Matrix<T> c_;
  std::optional<StrassenWorkspace<T>> ws_;
  std::unique_ptr<SharedPlan<T>> plan_;
  std::vector<double> compute_, comm_;
  std::optional<CommStats> comm_stats_;
};

template <class T>
BenchOutcome run_typed(const BenchConfig& config, const Matrix<T>& a) {
  BenchRecord rec;
  rec.mode = to_string(config.mode);
  rec.m = a.rows();
  rec.n = a.cols();
  rec.procs = config.procs;
  rec.threshold = config.threshold;
  rec.reps = config.reps;

  // The oracle works on its own double-precision copy of A.
  Matrix<double> reference;
  double tolerance = 0;
  if (config.check) {
    const Matrix<double> ad = a.template cast<double>();
    reference = Matrix<double>::Zero(a.cols(), a.cols());
    naive_syrk_lower(cview(ad), view(reference), 1.0);
    mirror_lower_to_upper(view(reference));
    tolerance = check_tolerance(config.dtype, a.rows(), ad.cwiseAbs().maxCoeff());
    rec.max_abs_error = 0.0;
  }

  Runner<T> runner(config, a);
  runner.run();
  runner.compute_samples().clear();
  runner.comm_samples().clear();

  std::vector<double> times;
  for (int r = 0; r < config.reps; ++r) {
    times.push_back(runner.run());
    if (config.check) {
      const double err = (runner.result().template cast<double>() - reference).cwiseAbs().maxCoeff();
      rec.max_abs_error = std::max(*rec.max_abs_error, err);
    }
  }
  rec.median_seconds = median(times);
  rec.effective_gflops = effective_gflops(rec.m, rec.n, rec.median_seconds, 1);
  if (config.mode == BenchMode::Dist) {
    rec.compute_seconds = median(runner.compute_samples());
    rec.comm_seconds = median(runner.comm_samples());
  }
  if (config.check) rec.check_passed = *rec.max_abs_error <= tolerance;
  if (!config.out_path.empty()) save_matrix(config.out_path, AnyMatrix(runner.result()));

  if (config.count_mults) {
    MultCounter counter;
    runner.run(&counter);
    rec.mult_count = counter.scalar_mults;
  }
  return {rec, runner.comm_stats()};
}

}  // namespace

BenchOutcome run_bench(const BenchConfig& config) {
  detail::require(config.reps >= 1, Errc::invalid_argument, "reps must be at least 1");
  detail::require(config.procs >= 1, Errc::invalid_argument, "procs must be at least 1");
  detail::require(config.threshold >= 1, Errc::invalid_argument, "threshold must be at least 1");
  detail::require(config.procs == 1 || config.mode == BenchMode::Shared || config.mode == BenchMode::Dist,
                  Errc::invalid_argument, "--procs applies to the shared and dist modes only");

  if (!config.in_path.empty()) {
    AnyMatrix a = load_matrix(config.in_path);
    BenchConfig typed = config;
    typed.dtype = std::holds_alternative<Matrix<float>>(a) ? DType::F32 : DType::F64;
    return std::visit([&](const auto& m) { return run_typed(typed, m); }, a);
  }
  if (config.dtype == DType::F32) return run_typed(config, gen_matrix<float>(config.m, config.n, config.seed));
  return run_typed(config, gen_matrix<double>(config.m, config.n, config.seed));
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_row(std::ostream& out, const BenchRecord& r) {
  const auto old = out.precision(9);
  out << r.mode << ',' << r.m << ',' << r.n << ',' << r.procs << ',' << r.threshold << ',' << r.reps << ','
      << r.median_seconds << ',' << r.effective_gflops << ',';
  if (r.max_abs_error) out << *r.max_abs_error;
  out << ',';
  if (r.mult_count) out << *r.mult_count;
  out << '\n';
  out.precision(old);
}

}  // namespace ata
