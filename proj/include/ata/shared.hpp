#pragma once

// Shared-memory AᵀA: one thread per leaf of the shared task tree. Leaves write
// pairwise-disjoint windows of C, so the only synchronization is the final join.

#include <exception>
#include <thread>
#include <vector>

#include "ata/ata.hpp"
#include "ata/task_tree.hpp"

namespace ata {

inline constexpr int kMaxWorkers = 1024;

namespace detail {

template <class T>
struct LeafJob {
  const Task* task = nullptr;
  StrassenWorkspace<T> workspace;
};

template <class T>
LeafJob<T> prepare_leaf(const Task& t, Index threshold) {
  const Region& a = t.a_region;
  if (t.computation == ComputationType::AtA) return {&t, ata_workspace<T>(a.rows, a.cols, threshold)};
  return {&t, workspace_for<T>(a.rows, a.cols, t.b_region.cols, threshold)};
}

template <class T>
ConstView<T> region_of(ConstView<T> m, const Region& r) {
  return sub(m, r.row_offset, r.col_offset, r.rows, r.cols);
}

template <class T>
View<T> region_of(View<T> m, const Region& r) {
  return sub(m, r.row_offset, r.col_offset, r.rows, r.cols);
}

/// Runs one leaf task into C using the fast kernels. A leaf with an empty
/// output does nothing.
template <class T>
void run_leaf(const Task& t, ConstView<T> a, View<T> c, Index threshold, StrassenWorkspace<T>& ws,
              MultCounter* counter) {
  if (t.c_region.empty()) return;
  if (t.computation == ComputationType::AtA) {
    ata(region_of(a, t.a_region), region_of(c, t.c_region), T(1), threshold, ws, counter);
  } else {
    fast_strassen(region_of(a, t.a_region), region_of(a, t.b_region), region_of(c, t.c_region), T(1),
                  ws, threshold, counter);
  }
}

}  // namespace detail

/// A shared-mode run prepared ahead of time: the task tree and one workspace
/// per worker, so that repeated runs allocate nothing but their threads.
template <class T>
class SharedPlan {
 public:
  SharedPlan(Index m, Index n, int processes, Index threshold)
      : threshold_(threshold), tree_(make_tree(m, n, processes, threshold)) {
    jobs_.reserve(static_cast<std::size_t>(processes));
    for (int p = 0; p < processes; ++p)
      jobs_.push_back(detail::prepare_leaf<T>(leaf_task(tree_, p), threshold));
  }

  SharedPlan(const SharedPlan&) = delete;
  SharedPlan& operator=(const SharedPlan&) = delete;

  const TaskTree& tree() const { return tree_; }
  int processes() const { return tree_.processes(); }

  /// Accumulates the lower triangle of AᵀA into C, writing only inside the
  /// leaf windows. counters, if given, receives one entry per worker.
  void run(ConstView<T> a, View<T> c, std::vector<MultCounter>* counters = nullptr) {
    detail::require(a.rows() == tree_.rows() && a.cols() == tree_.cols(), "ata_s: A does not match the plan");
    detail::require(c.rows() == a.cols() && c.cols() == a.cols(), "ata_s: C must be n x n");
    const auto workers = static_cast<std::size_t>(processes());
    if (counters != nullptr) counters->assign(workers, MultCounter{});

    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](std::size_t p) {
      try {
        MultCounter* counter = counters != nullptr ? &(*counters)[p] : nullptr;
        detail::run_leaf(*jobs_[p].task, a, c, threshold_, jobs_[p].workspace, counter);
      } catch (...) {
        failures[p] = std::current_exception();
      }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t p = 1; p < workers; ++p) threads.emplace_back(work, p);
    work(0);
    for (auto& t : threads) t.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

 private:
  static TaskTree make_tree(Index m, Index n, int processes, Index threshold) {
    detail::require(processes >= 1, Errc::invalid_argument, "worker count must be positive");
    detail::require(processes <= kMaxWorkers, Errc::too_many_workers,
                    std::to_string(processes) + " workers exceed the limit of " +
                        std::to_string(kMaxWorkers));
    detail::require(threshold >= 1, Errc::invalid_argument, "threshold must be >= 1");
    return build_tree_shared(processes, m, n);
  }

  Index threshold_;
  TaskTree tree_;
  std::vector<detail::LeafJob<T>> jobs_;
};

/// Lower triangle of C += AᵀA computed by P threads.
template <class T>
void ata_s_lower(ConstView<T> a, View<T> c, int processes, Index threshold,
                 std::vector<MultCounter>* counters = nullptr) {
  SharedPlan<T>(a.rows(), a.cols(), processes, threshold).run(a, c, counters);
}

/// Full symmetric AᵀA computed by P threads.
template <class T>
Matrix<T> ata_s(ConstView<T> a, int processes, Index threshold = kDefaultThreshold,
                std::vector<MultCounter>* counters = nullptr) {
  Matrix<T> c = Matrix<T>::Zero(a.cols(), a.cols());
  ata_s_lower(a, view(c), processes, threshold, counters);
  mirror_lower_to_upper(view(c));
  return c;
}

template <class T>
Matrix<T> ata_s(const Matrix<T>& a, int processes, Index threshold = kDefaultThreshold,
                std::vector<MultCounter>* counters = nullptr) {
  return ata_s(cview(a), processes, threshold, counters);
}

}  // namespace ata
