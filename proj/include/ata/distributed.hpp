#pragma once

// Distributed AᵀA over a simulated message-passing network. Process 0 starts
// with A, operands flow down the distributed task tree, leaves compute, and
// partial results flow back up to process 0. Every process runs a fixed list
// of steps; a step that receives blocks until its message is in the mailbox.

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "ata/ata.hpp"
#include "ata/comm_stats.hpp"
#include "ata/task_tree.hpp"

namespace ata {

enum class LeafKernel { Fast, Naive };
enum class Schedule { RoundRobin, Random };

template <class T>
struct Message {
  MessageRecord header;
  std::vector<T> payload;
};

/// Per-pair FIFO mailboxes with a delivered-message log.
template <class T>
class SimNetwork {
 public:
  explicit SimNetwork(int processes) : processes_(processes), stats_(processes) {}

  void send(Message<T> m) {
    detail::require(m.header.src >= 0 && m.header.src < processes_ && m.header.dst >= 0 &&
                        m.header.dst < processes_,
                    Errc::unknown_process, "send between unknown processes");
    const std::uint64_t expected = m.header.kind == PayloadKind::PackedLower
                                       ? static_cast<std::uint64_t>(PackedLowerTriangular<T>::length(m.header.rows))
                                       : static_cast<std::uint64_t>(m.header.rows * m.header.cols);
    detail::require(m.payload.size() == expected, Errc::protocol_error, "payload length mismatch");
    m.header.words = m.payload.size();
    boxes_[{m.header.src, m.header.dst}].push_back(std::move(m));
  }

  bool ready(int src, int dst) const {
    auto it = boxes_.find({src, dst});
    return it != boxes_.end() && !it->second.empty();
  }

  Message<T> receive(int src, int dst) {
    detail::require(ready(src, dst), Errc::protocol_error, "receive from an empty mailbox");
    auto& box = boxes_[{src, dst}];
    Message<T> m = std::move(box.front());
    box.pop_front();
    log_.push_back(m.header);
    stats_.record(m.header);
    return m;
  }

  bool drained() const {
    for (const auto& [key, box] : boxes_)
      if (!box.empty()) return false;
    return true;
  }

  const std::vector<MessageRecord>& log() const { return log_; }
  const CommStats& stats() const { return stats_; }

 private:
  int processes_;
  std::map<std::pair<int, int>, std::deque<Message<T>>> boxes_;
  std::vector<MessageRecord> log_;
  CommStats stats_;
};

struct DistOptions {
  Index threshold = kDefaultThreshold;
  LeafKernel leaf_kernel = LeafKernel::Fast;
  Schedule schedule = Schedule::RoundRobin;
  std::uint64_t seed = 0;
};

template <class T>
struct DistResult {
  Matrix<T> c;
  CommStats stats;
  std::vector<MessageRecord> log;
  std::uint64_t mult_count = 0;  // summed over all leaves
  double compute_seconds = 0;    // slowest leaf computation
  double total_seconds = 0;
};

namespace detail {

template <class T>
class DistSimulation {
 public:
  DistSimulation(ConstView<T> a, int processes, const DistOptions& options)
      : a_(a),
        processes_(processes),
        options_(options),
        tree_(build_tree_distributed(processes, a.rows(), a.cols())),
        net_(processes),
        states_(static_cast<std::size_t>(processes)) {
    for (int p = 0; p < processes; ++p) plan(p);
  }

  DistResult<T> run() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(options_.seed);
    std::vector<std::size_t> next(static_cast<std::size_t>(processes_), 0);
    std::size_t finished = 0, cursor = 0;
    for (auto& s : states_)
      if (s.steps.empty()) ++finished;

    std::vector<int> runnable;
    while (finished < states_.size()) {
      runnable.clear();
      for (int p = 0; p < processes_; ++p) {
        const auto& s = states_[static_cast<std::size_t>(p)];
        const std::size_t i = next[static_cast<std::size_t>(p)];
        if (i < s.steps.size() && (s.steps[i].from < 0 || net_.ready(s.steps[i].from, p)))
          runnable.push_back(p);
      }
      require(!runnable.empty(), Errc::protocol_error, "simulation deadlock");
      int p;
      if (options_.schedule == Schedule::Random) {
        p = runnable[std::uniform_int_distribution<std::size_t>(0, runnable.size() - 1)(rng)];
      } else {
        // First runnable process at or after the cursor.
        p = runnable.front();
        for (int q : runnable)
          if (static_cast<std::size_t>(q) >= cursor) {
            p = q;
            break;
          }
        cursor = static_cast<std::size_t>(p + 1) % states_.size();
      }
      auto& s = states_[static_cast<std::size_t>(p)];
      auto& step = s.steps[next[static_cast<std::size_t>(p)]++];
      if (step.from >= 0) {
        step.action(net_.receive(step.from, p));
      } else {
        step.action(Message<T>{});
      }
      if (next[static_cast<std::size_t>(p)] == s.steps.size()) ++finished;
    }
    require(net_.drained(), Errc::protocol_error, "undelivered messages at shutdown");

    DistResult<T> result;
    result.c = std::move(*states_[0].results.at(tree_.root()));
    mirror_lower_to_upper(view(result.c));
    result.stats = net_.stats();
    result.log = net_.log();
    for (const auto& s : states_) {
      result.compute_seconds = std::max(result.compute_seconds, s.compute_seconds);
      result.mult_count += s.counter.scalar_mults;
    }
    result.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

 private:
  // Eigen maps cannot be rebound, so operands are kept as raw windows.
  struct Window {
    const T* data = nullptr;
    Index rows = 0, cols = 0, stride = 0;

    Window() = default;
    Window(ConstView<T> v) : data(v.data()), rows(v.rows()), cols(v.cols()), stride(v.outerStride()) {}
    ConstView<T> view() const { return ConstView<T>(data, rows, cols, Eigen::OuterStride<>(stride)); }
  };

  struct Operands {
    Window a, b;
  };

  struct Step {
    int from = -1;  // source process of the message this step consumes
    std::function<void(Message<T>)> action;
  };

  struct State {
    std::vector<Step> steps;
    std::map<std::size_t, Operands> operands;
    std::map<std::size_t, std::unique_ptr<Matrix<T>>> results;
    std::deque<Matrix<T>> buffers;
    MultCounter counter;
    double compute_seconds = 0;
  };

  const Task& task(std::size_t id) const { return tree_.node(id).task; }

  // View of a global region of A inside a node's operand views.
  static Window locate(const Region& want, const Region& have, const Window& w) {
    return sub(w.view(), want.row_offset - have.row_offset, want.col_offset - have.col_offset, want.rows,
               want.cols);
  }

  Operands slice(std::size_t parent, std::size_t child, const Operands& ops) const {
    const Task& pt = task(parent);
    const Task& ct = task(child);
    auto pick = [&](const Region& r, bool prefer_b) {
      const bool in_a = pt.a_region.contains(r);
      const bool in_b = pt.computation == ComputationType::AtB && pt.b_region.contains(r);
      require(in_a || in_b, Errc::protocol_error, "child operand outside its parent's operands");
      if (in_b && (prefer_b || !in_a)) return locate(r, pt.b_region, ops.b);
      return locate(r, pt.a_region, ops.a);
    };
    Operands out;
    out.a = pick(ct.a_region, false);
    if (ct.computation == ComputationType::AtB) out.b = pick(ct.b_region, true);
    return out;
  }

  MessageRecord header(int src, int dst, Phase phase, PayloadKind kind, Index rows, Index cols,
                       std::size_t node) const {
    MessageRecord h;
    h.src = src;
    h.dst = dst;
    h.phase = phase;
    h.kind = kind;
    h.rows = rows;
    h.cols = cols;
    h.node = node;
    return h;
  }

  // Operands of an AᵀB task travel together as [A' | B'].
  Message<T> pack_operands(int src, int dst, std::size_t node, const Operands& ops) const {
    const bool atb = task(node).computation == ComputationType::AtB;
    const ConstView<T> a = ops.a.view(), b = ops.b.view();
    const Index rows = a.rows(), cols = a.cols() + (atb ? b.cols() : 0);
    Message<T> m{header(src, dst, Phase::Distribute, PayloadKind::SubMatrix, rows, cols, node), {}};
    m.payload.reserve(static_cast<std::size_t>(rows * cols));
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < a.cols(); ++j) m.payload.push_back(a(i, j));
      if (atb)
        for (Index j = 0; j < b.cols(); ++j) m.payload.push_back(b(i, j));
    }
    return m;
  }

  Operands unpack_operands(State& s, std::size_t node, const Message<T>& m) {
    const Task& t = task(node);
    const Index n = t.a_region.cols;
    const Index k = t.computation == ComputationType::AtB ? t.b_region.cols : 0;
    require(m.header.node == node && m.header.rows == t.a_region.rows && m.header.cols == n + k,
            Errc::protocol_error, "operand message does not match its task");
    Matrix<T>& buf = s.buffers.emplace_back(m.header.rows, m.header.cols);
    std::copy(m.payload.begin(), m.payload.end(), buf.data());
    Operands ops;
    ops.a = sub(cview(buf), 0, 0, buf.rows(), n);
    if (t.computation == ComputationType::AtB) ops.b = sub(cview(buf), 0, n, buf.rows(), k);
    return ops;
  }

  Message<T> pack_result(int src, int dst, std::size_t node, const Matrix<T>& r) const {
    if (task(node).computation == ComputationType::AtA) {
      auto packed = pack_lower(cview(r));
      return {header(src, dst, Phase::Retrieve, PayloadKind::PackedLower, r.rows(), r.cols(), node),
              std::move(packed.data)};
    }
    Message<T> m{header(src, dst, Phase::Retrieve, PayloadKind::SubMatrix, r.rows(), r.cols(), node), {}};
    m.payload.assign(r.data(), r.data() + r.size());
    return m;
  }

  Matrix<T> unpack_result(std::size_t node, const Message<T>& m) const {
    const Region& c = task(node).c_region;
    require(m.header.node == node && m.header.rows == c.rows && m.header.cols == c.cols,
            Errc::protocol_error, "result message does not match its task");
    Matrix<T> r = Matrix<T>::Zero(c.rows, c.cols);
    if (m.header.kind == PayloadKind::PackedLower) {
      unpack_lower(PackedLowerTriangular<T>{c.rows, m.payload}, view(r));
    } else {
      std::copy(m.payload.begin(), m.payload.end(), r.data());
    }
    return r;
  }

  void compute_leaf(State& s, std::size_t node) {
    const Task& t = task(node);
    const ConstView<T> a = s.operands.at(node).a.view(), b = s.operands.at(node).b.view();
    auto r = std::make_unique<Matrix<T>>(Matrix<T>::Zero(t.c_region.rows, t.c_region.cols));
    const auto start = std::chrono::steady_clock::now();
    const Index th = options_.threshold;
    if (t.computation == ComputationType::AtA) {
      if (options_.leaf_kernel == LeafKernel::Fast) {
        auto ws = ata_workspace<T>(a.rows(), a.cols(), th);
        ata(a, view(*r), T(1), th, ws, &s.counter);
      } else {
        naive_syrk_lower(a, view(*r), T(1), &s.counter);
      }
    } else if (options_.leaf_kernel == LeafKernel::Fast) {
      auto ws = workspace_for<T>(a.rows(), a.cols(), b.cols(), th);
      fast_strassen(a, b, view(*r), T(1), ws, th, &s.counter);
    } else {
      naive_gemm_atb(a, b, view(*r), T(1), &s.counter);
    }
    s.compute_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    s.results[node] = std::move(r);
  }

  static void accumulate(Matrix<T>& into, const Region& into_region, const Matrix<T>& part,
                         const Region& part_region) {
    if (part_region.empty()) return;
    into.block(part_region.row_offset - into_region.row_offset,
               part_region.col_offset - into_region.col_offset, part_region.rows, part_region.cols) +=
        part;
  }

  void plan(int p) {
    State& s = states_[static_cast<std::size_t>(p)];
    const auto path = path_to_root(tree_, p);  // leaf first
    const std::size_t top = path.back();
    const int up = task(top).parent;

    if (top == tree_.root()) {
      s.steps.push_back({-1, [this, p, top](Message<T>) {
                           states_[static_cast<std::size_t>(p)].operands[top] = Operands{a_, a_};
                         }});
    } else {
      s.steps.push_back({up, [this, p, top](Message<T> m) {
                           State& st = states_[static_cast<std::size_t>(p)];
                           st.operands[top] = unpack_operands(st, top, m);
                         }});
    }

    // Distribution: walk down, forwarding each foreign child's operands.
    for (std::size_t i = path.size(); i-- > 1;) {
      const std::size_t v = path[i];
      const std::size_t own = path[i - 1];
      s.steps.push_back({-1, [this, p, v, own](Message<T>) {
                           State& st = states_[static_cast<std::size_t>(p)];
                           const Operands ops = st.operands.at(v);
                           for (std::size_t u : tree_.node(v).children) {
                             const Operands child_ops = slice(v, u, ops);
                             if (u == own) {
                               st.operands[u] = child_ops;
                             } else {
                               net_.send(pack_operands(p, task(u).owner, u, child_ops));
                             }
                           }
                         }});
    }

    s.steps.push_back({-1, [this, p, leaf = path.front()](Message<T>) {
                         compute_leaf(states_[static_cast<std::size_t>(p)], leaf);
                       }});

    // Retrieval: walk up, summing child results in child order.
    for (std::size_t i = 1; i < path.size(); ++i) {
      const std::size_t v = path[i];
      const Region& cv = task(v).c_region;
      s.steps.push_back({-1, [this, p, v, cv](Message<T>) {
                           states_[static_cast<std::size_t>(p)].results[v] =
                               std::make_unique<Matrix<T>>(Matrix<T>::Zero(cv.rows, cv.cols));
                         }});
      for (std::size_t u : tree_.node(v).children) {
        const int owner = task(u).owner;
        const Region cu = task(u).c_region;
        if (owner == p) {
          s.steps.push_back({-1, [this, p, v, u, cv, cu](Message<T>) {
                               State& st = states_[static_cast<std::size_t>(p)];
                               accumulate(*st.results.at(v), cv, *st.results.at(u), cu);
                               st.results.erase(u);
                             }});
        } else {
          s.steps.push_back({owner, [this, p, v, u, cv, cu](Message<T> m) {
                               State& st = states_[static_cast<std::size_t>(p)];
                               accumulate(*st.results.at(v), cv, unpack_result(u, m), cu);
                             }});
        }
      }
    }

    if (top != tree_.root()) {
      s.steps.push_back({-1, [this, p, top, up](Message<T>) {
                           State& st = states_[static_cast<std::size_t>(p)];
                           net_.send(pack_result(p, up, top, *st.results.at(top)));
                           st.results.clear();
                           st.operands.clear();
                           st.buffers.clear();
                         }});
    }
  }

  ConstView<T> a_;
  int processes_;
  DistOptions options_;
  TaskTree tree_;
  SimNetwork<T> net_;
  std::vector<State> states_;
};

}  // namespace detail

/// Full symmetric AᵀA computed by P simulated processes; process 0 holds A at
/// the start and C at the end.
template <class T>
DistResult<T> ata_d(ConstView<T> a, int processes, const DistOptions& options = {}) {
  detail::require(processes >= 1, Errc::invalid_argument, "process count must be positive");
  detail::require(options.threshold >= 1, Errc::invalid_argument, "threshold must be >= 1");
  return detail::DistSimulation<T>(a, processes, options).run();
}

template <class T>
DistResult<T> ata_d(const Matrix<T>& a, int processes, const DistOptions& options = {}) {
  return ata_d(cview(a), processes, options);
}

}  // namespace ata
