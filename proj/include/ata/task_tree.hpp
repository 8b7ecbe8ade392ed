#pragma once

// Task trees: a breadth-first truncation of the AᵀA recursion tree whose P
// leaves are the per-process (or per-thread) work assignments.
//
// Distributed trees expand AᵀA nodes into the six products of the 2×2 block
// decomposition and AᵀB nodes into the eight sub-products of recursive GEMM.
// Shared trees tile operands by full-height column halves instead, so that
// leaves write pairwise-disjoint regions of C. Nodes that cannot fill a
// complete sibling bunch, or that sit on the last level, are tiled among
// their processes.

#include <cstddef>
#include <string>
#include <vector>

#include "ata/matrix.hpp"

namespace ata {

enum class ComputationType { AtA, AtB };
enum class TreeMode { Shared, Distributed };

/// Fraction of an AᵀA node's processes handed to its AᵀB children.
inline constexpr double kLoadBalanceAlpha = 0.5;

struct Region {
  Index row_offset = 0;
  Index col_offset = 0;
  Index rows = 0;
  Index cols = 0;

  bool empty() const { return rows == 0 || cols == 0; }
  Index size() const { return rows * cols; }
  bool contains(const Region& r) const {
    return r.empty() || (r.row_offset >= row_offset && r.col_offset >= col_offset &&
                         r.row_offset + r.rows <= row_offset + rows &&
                         r.col_offset + r.cols <= col_offset + cols);
  }
  bool intersects(const Region& r) const {
    if (empty() || r.empty()) return false;
    return row_offset < r.row_offset + r.rows && r.row_offset < row_offset + rows &&
           col_offset < r.col_offset + r.cols && r.col_offset < col_offset + cols;
  }
  bool operator==(const Region&) const = default;
};

struct Task {
  ComputationType computation = ComputationType::AtA;
  Region a_region;
  Region b_region;  // unused for AtA
  Region c_region;
  int parent = 0;  // process owning the parent node (self for the root)
  int owner = 0;   // leaf label, or lowest leaf label of the subtree

  bool operator==(const Task&) const = default;
};

struct TaskNode {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Task task;
  std::vector<std::size_t> children;
  std::size_t parent_node = npos;
  std::size_t depth = 0;
  int processes = 1;

  bool is_leaf() const { return children.empty(); }
  bool operator==(const TaskNode&) const = default;
};

class TaskTree {
 public:
  TreeMode mode() const { return mode_; }
  int processes() const { return static_cast<int>(leaves_.size()); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  std::size_t root() const { return 0; }
  const std::vector<TaskNode>& nodes() const { return nodes_; }
  const TaskNode& node(std::size_t id) const { return nodes_.at(id); }

  /// Node id of the leaf labeled p.
  std::size_t leaf_node(int p) const;

  /// Number of node levels (root alone counts as one).
  std::size_t depth() const;

  bool operator==(const TaskTree&) const = default;

 private:
  friend class TaskTreeBuilder;

  TreeMode mode_ = TreeMode::Distributed;
  Index rows_ = 0, cols_ = 0;
  std::vector<TaskNode> nodes_;
  std::vector<std::size_t> leaves_;
};

/// Parallel levels of a distributed tree on P processes.
int levels_distributed(int processes);

/// Parallel levels of a shared tree on P threads.
int levels_shared(int processes);

TaskTree build_tree_distributed(int processes, Index m, Index n);
TaskTree build_tree_shared(int processes, Index m, Index n);

const Task& leaf_task(const TaskTree& tree, int p);

/// Nodes owned by p, from its leaf upward. The parent of the last node (if
/// any) is owned by a lower-labeled process.
std::vector<std::size_t> path_to_root(const TaskTree& tree, int p);

/// Indented text rendering, one node per line.
std::string render_tree(const TaskTree& tree);

std::string to_string(ComputationType type);
std::string to_string(const Region& r);

}  // namespace ata
