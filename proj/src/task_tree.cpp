#include "ata/task_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "ata/error.hpp"

namespace ata {

namespace {

int level_formula(int processes, int divisor, long long branching) {
  const long long q = processes / divisor;
  int k = 0;
  long long power = 1;
  while (q / (power * branching) >= 1) {
    power *= branching;
    ++k;
  }
  const long long modulus = k == 0 ? branching : power;
  return 1 + k + (q % modulus != 0 ? 1 : 0);
}

struct Range {
  Index offset;
  Index length;
};

// Floor-first halves, matching split4.
std::pair<Range, Range> halves(Index offset, Index length) {
  const Index first = length / 2;
  return {{offset, first}, {offset + first, length - first}};
}

// Near-equal parts, larger ones first.
std::vector<Range> parts(Index offset, Index length, int count) {
  std::vector<Range> out;
  const Index base = length / count, extra = length % count;
  for (int t = 0; t < count; ++t) {
    const Index len = base + (t < extra ? 1 : 0);
    out.push_back({offset, len});
    offset += len;
  }
  return out;
}

std::vector<int> split_even(int total, int count) {
  std::vector<int> out(static_cast<std::size_t>(count), total / count);
  for (int t = 0; t < total % count; ++t) ++out[static_cast<std::size_t>(t)];
  return out;
}

Task make_ata(Region a, Region c) {
  Task t;
  t.computation = ComputationType::AtA;
  t.a_region = a;
  t.c_region = c;
  return t;
}

Task make_atb(Region a, Region b, Region c) {
  Task t;
  t.computation = ComputationType::AtB;
  t.a_region = a;
  t.b_region = b;
  t.c_region = c;
  return t;
}

Region block(Range rows, Range cols) { return {rows.offset, cols.offset, rows.length, cols.length}; }

struct Child {
  Task task;
  int processes;
};

std::vector<Child> expand_ata_distributed(const Task& t, int q) {
  const Region& a = t.a_region;
  const Region& c = t.c_region;
  const auto [r1, r2] = halves(a.row_offset, a.rows);
  const auto [k1, k2] = halves(a.col_offset, a.cols);
  const auto [c1, c2] = halves(c.row_offset, c.rows);
  const auto [d1, d2] = halves(c.col_offset, c.cols);
  const Region a11 = block(r1, k1), a12 = block(r1, k2), a21 = block(r2, k1), a22 = block(r2, k2);
  const Region c11 = block(c1, d1), c21 = block(c2, d1), c22 = block(c2, d2);

  const int ata_side = std::max(4, static_cast<int>(q * (1.0 - kLoadBalanceAlpha)));
  const auto ata_budget = split_even(ata_side, 4);
  const auto atb_budget = split_even(q - ata_side, 2);
  return {{make_ata(a11, c11), ata_budget[0]},
          {make_ata(a21, c11), ata_budget[1]},
          {make_ata(a12, c22), ata_budget[2]},
          {make_ata(a22, c22), ata_budget[3]},
          {make_atb(a12, a11, c21), atb_budget[0]},
          {make_atb(a22, a21, c21), atb_budget[1]}};
}

std::vector<Child> expand_atb_distributed(const Task& t, int q) {
  const auto [m1, m2] = halves(t.a_region.row_offset, t.a_region.rows);
  const auto [bm1, bm2] = halves(t.b_region.row_offset, t.b_region.rows);
  const auto [i1, i2] = halves(t.a_region.col_offset, t.a_region.cols);
  const auto [j1, j2] = halves(t.b_region.col_offset, t.b_region.cols);
  const auto [ci1, ci2] = halves(t.c_region.row_offset, t.c_region.rows);
  const auto [cj1, cj2] = halves(t.c_region.col_offset, t.c_region.cols);
  const Range am[2] = {m1, m2}, bm[2] = {bm1, bm2}, ai[2] = {i1, i2}, bj[2] = {j1, j2};
  const Range ci[2] = {ci1, ci2}, cj[2] = {cj1, cj2};

  const auto budget = split_even(q, 8);
  std::vector<Child> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        out.push_back({make_atb(block(am[k], ai[i]), block(bm[k], bj[j]), block(ci[i], cj[j])),
                       budget[out.size()]});
  return out;
}

std::vector<Child> expand_ata_shared(const Task& t, int q) {
  const Region& a = t.a_region;
  const Region& c = t.c_region;
  const Range rows{a.row_offset, a.rows};
  const auto [k1, k2] = halves(a.col_offset, a.cols);
  const auto [c1, c2] = halves(c.row_offset, c.rows);
  const auto [d1, d2] = halves(c.col_offset, c.cols);
  const Region left = block(rows, k1), right = block(rows, k2);

  const int ata_side = std::max(2, static_cast<int>(q * (1.0 - kLoadBalanceAlpha)));
  const auto ata_budget = split_even(ata_side, 2);
  return {{make_ata(left, block(c1, d1)), ata_budget[0]},
          {make_ata(right, block(c2, d2)), ata_budget[1]},
          {make_atb(right, left, block(c2, d1)), q - ata_side}};
}

std::vector<Child> expand_atb_shared(const Task& t, int q) {
  const Range arows{t.a_region.row_offset, t.a_region.rows};
  const Range brows{t.b_region.row_offset, t.b_region.rows};
  const auto [i1, i2] = halves(t.a_region.col_offset, t.a_region.cols);
  const auto [j1, j2] = halves(t.b_region.col_offset, t.b_region.cols);
  const auto [ci1, ci2] = halves(t.c_region.row_offset, t.c_region.rows);
  const auto [cj1, cj2] = halves(t.c_region.col_offset, t.c_region.cols);
  const Range ai[2] = {i1, i2}, bj[2] = {j1, j2}, ci[2] = {ci1, ci2}, cj[2] = {cj1, cj2};

  const auto budget = split_even(q, 4);
  std::vector<Child> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.push_back({make_atb(block(arows, ai[i]), block(brows, bj[j]), block(ci[i], cj[j])),
                     budget[out.size()]});
  return out;
}

// Row tiles of A; every tile contributes a partial sum to the same block of C.
std::vector<Child> tile_ata_rows(const Task& t, int q) {
  std::vector<Child> out;
  for (const Range& r : parts(t.a_region.row_offset, t.a_region.rows, q))
    out.push_back({make_ata(block(r, {t.a_region.col_offset, t.a_region.cols}), t.c_region), 1});
  return out;
}

// A grid of output tiles, as close to square as the process count allows.
// Outputs are disjoint.
std::vector<Child> tile_atb_grid(const Task& t, int q) {
  int grid_rows = 1;
  for (int r = 1; r * r <= q; ++r)
    if (q % r == 0) grid_rows = r;
  const int grid_cols = q / grid_rows;
  std::vector<Child> out;
  for (const Range& i : parts(t.a_region.col_offset, t.a_region.cols, grid_rows)) {
    for (const Range& j : parts(t.b_region.col_offset, t.b_region.cols, grid_cols)) {
      const Region a{t.a_region.row_offset, i.offset, t.a_region.rows, i.length};
      const Region b{t.b_region.row_offset, j.offset, t.b_region.rows, j.length};
      const Region c{t.c_region.row_offset + (i.offset - t.a_region.col_offset),
                     t.c_region.col_offset + (j.offset - t.b_region.col_offset), i.length, j.length};
      out.push_back({make_atb(a, b, c), 1});
    }
  }
  return out;
}

// Horizontal strips of the lower triangle. The first strip is a triangle of
// its own; later strips are rectangles reaching up to their last row, so they
// also cover a few upper-triangle entries of their diagonal block, which the
// final mirror overwrites. Boundaries are chosen so that every strip computes
// about the same number of entries: b1²/2 for the triangle and
// (b[t+1] − b[t])·b[t+1] for each rectangle.
std::vector<Index> strip_bounds(Index n, int q) {
  auto last_bound = [q](double area, std::vector<double>* out) {
    double b = std::sqrt(2 * area);
    if (out != nullptr) out->push_back(b);
    for (int t = 1; t < q; ++t) {
      b = (b + std::sqrt(b * b + 4 * area)) / 2;
      if (out != nullptr) out->push_back(b);
    }
    return b;
  };
  const double target = static_cast<double>(n);
  double lo = 0, hi = target * target;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = (lo + hi) / 2;
    (last_bound(mid, nullptr) < target ? lo : hi) = mid;
  }
  std::vector<double> real;
  last_bound(hi, &real);
  std::vector<Index> bound(static_cast<std::size_t>(q) + 1, 0);
  for (int t = 1; t < q; ++t) {
    const auto b = static_cast<Index>(std::llround(real[static_cast<std::size_t>(t) - 1]));
    bound[static_cast<std::size_t>(t)] = std::clamp(b, bound[static_cast<std::size_t>(t) - 1], n);
  }
  bound[static_cast<std::size_t>(q)] = n;
  return bound;
}

std::vector<Child> tile_ata_strips(const Task& t, int q) {
  const Region& a = t.a_region;
  const Region& c = t.c_region;
  const std::vector<Index> bound = strip_bounds(a.cols, q);

  std::vector<Child> out;
  out.push_back({make_ata({a.row_offset, a.col_offset, a.rows, bound[1]},
                          {c.row_offset, c.col_offset, bound[1], bound[1]}),
                 1});
  for (std::size_t s = 1; s < static_cast<std::size_t>(q); ++s) {
    const Index width = bound[s + 1] - bound[s];
    const Region strip{a.row_offset, a.col_offset + bound[s], a.rows, width};
    const Region prefix{a.row_offset, a.col_offset, a.rows, bound[s + 1]};
    const Region target{c.row_offset + bound[s], c.col_offset, width, bound[s + 1]};
    out.push_back({make_atb(strip, prefix, target), 1});
  }
  return out;
}

// Leftover tiling of a shared AᵀA node: the same three-way split as a full
// expansion, applied recursively, with every resulting piece attached directly
// to the node. Two processes fall back to a triangle and a strip.
std::vector<Child> tile_ata_shared(const Task& t, int q) {
  if (q == 1) return {{t, 1}};
  if (q == 2) return tile_ata_strips(t, 2);
  std::vector<Child> out;
  for (const Child& c : expand_ata_shared(t, q)) {
    const auto pieces = c.task.computation == ComputationType::AtA ? tile_ata_shared(c.task, c.processes)
                                                                      : tile_atb_grid(c.task, c.processes);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::vector<Child> expand(TreeMode mode, const Task& t, int q, int remaining) {
  const bool ata = t.computation == ComputationType::AtA;
  if (mode == TreeMode::Distributed) {
    if (ata) {
      if (q >= 6 && (remaining >= 2 || q == 6)) return expand_ata_distributed(t, q);
      return tile_ata_rows(t, q);
    }
    if (q >= 8 && (remaining >= 2 || q == 8)) return expand_atb_distributed(t, q);
    return tile_atb_grid(t, q);
  }
  if (ata) {
    if (q >= 3 && (remaining >= 2 || q == 3)) return expand_ata_shared(t, q);
    return tile_ata_shared(t, q);
  }
  if (q >= 4 && (remaining >= 2 || q == 4)) return expand_atb_shared(t, q);
  return tile_atb_grid(t, q);
}

}  // namespace

int levels_distributed(int processes) {
  detail::require(processes >= 1, Errc::invalid_argument, "process count must be positive");
  if (processes == 1) return 0;
  if (processes <= 6) return 1;
  return level_formula(processes, 4, 8);
}

int levels_shared(int processes) {
  detail::require(processes >= 1, Errc::invalid_argument, "process count must be positive");
  if (processes == 1) return 0;
  if (processes <= 3) return 1;
  return level_formula(processes, 2, 4);
}

class TaskTreeBuilder {
 public:
  static TaskTree build(TreeMode mode, int processes, Index m, Index n) {
    detail::require(processes >= 1, Errc::invalid_argument, "process count must be positive");
    detail::require(m >= 0 && n >= 0, Errc::invalid_argument, "negative matrix shape");
    const int levels = mode == TreeMode::Distributed ? levels_distributed(processes)
                                                     : levels_shared(processes);
    TaskTree tree;
    tree.mode_ = mode;
    tree.rows_ = m;
    tree.cols_ = n;

    TaskNode root;
    root.task = make_ata({0, 0, m, n}, {0, 0, n, n});
    root.processes = processes;
    tree.nodes_.push_back(root);

    struct Pending {
      std::size_t node;
      int remaining;
    };
    std::deque<Pending> queue{{0, levels}};
    int next_label = 0;
    while (!queue.empty()) {
      const auto [id, remaining] = queue.front();
      queue.pop_front();
      const int q = tree.nodes_[id].processes;
      if (q == 1 || remaining == 0) {
        detail::require(q == 1, Errc::protocol_error, "leaf left with several processes");
        tree.nodes_[id].task.owner = next_label++;
        tree.leaves_.push_back(id);
        continue;
      }
      for (Child& child : expand(mode, tree.nodes_[id].task, q, remaining)) {
        TaskNode node;
        node.task = child.task;
        node.processes = child.processes;
        node.parent_node = id;
        node.depth = tree.nodes_[id].depth + 1;
        tree.nodes_[id].children.push_back(tree.nodes_.size());
        queue.push_back({tree.nodes_.size(), remaining - 1});
        tree.nodes_.push_back(std::move(node));
      }
    }

    // Children always follow their parent in creation order.
    for (std::size_t id = tree.nodes_.size(); id-- > 0;) {
      TaskNode& node = tree.nodes_[id];
      if (node.is_leaf()) continue;
      int owner = processes;
      for (std::size_t child : node.children) owner = std::min(owner, tree.nodes_[child].task.owner);
      node.task.owner = owner;
    }
    for (TaskNode& node : tree.nodes_)
      node.task.parent = node.parent_node == TaskNode::npos
                             ? node.task.owner
                             : tree.nodes_[node.parent_node].task.owner;
    return tree;
  }
};

std::size_t TaskTree::leaf_node(int p) const {
  detail::require(p >= 0 && p < processes(), Errc::unknown_process,
                  "no leaf labeled " + std::to_string(p));
  return leaves_[static_cast<std::size_t>(p)];
}

std::size_t TaskTree::depth() const {
  std::size_t deepest = 0;
  for (const TaskNode& node : nodes_) deepest = std::max(deepest, node.depth);
  return deepest + 1;
}

TaskTree build_tree_distributed(int processes, Index m, Index n) {
  return TaskTreeBuilder::build(TreeMode::Distributed, processes, m, n);
}

TaskTree build_tree_shared(int processes, Index m, Index n) {
  return TaskTreeBuilder::build(TreeMode::Shared, processes, m, n);
}

const Task& leaf_task(const TaskTree& tree, int p) { return tree.node(tree.leaf_node(p)).task; }

std::vector<std::size_t> path_to_root(const TaskTree& tree, int p) {
  std::vector<std::size_t> path;
  std::size_t id = tree.leaf_node(p);
  while (id != TaskNode::npos && tree.node(id).task.owner == p) {
    path.push_back(id);
    id = tree.node(id).parent_node;
  }
  return path;
}

std::string to_string(ComputationType type) { return type == ComputationType::AtA ? "AtA" : "AtB"; }

std::string to_string(const Region& r) {
  std::ostringstream out;
  out << '[' << r.row_offset << ':' << r.row_offset + r.rows << ", " << r.col_offset << ':'
      << r.col_offset + r.cols << ')';
  return out.str();
}

std::string render_tree(const TaskTree& tree) {
  std::ostringstream out;
  out << (tree.mode() == TreeMode::Distributed ? "distributed" : "shared") << " tree: P=" << tree.processes()
      << " A=" << tree.rows() << 'x' << tree.cols() << " depth=" << tree.depth() << '\n';
  auto visit = [&](auto&& self, std::size_t id) -> void {
    const TaskNode& node = tree.node(id);
    const Task& t = node.task;
    out << std::string(2 * node.depth, ' ') << to_string(t.computation) << " A" << to_string(t.a_region);
    if (t.computation == ComputationType::AtB) out << " B" << to_string(t.b_region);
    out << " C" << to_string(t.c_region) << " owner=" << t.owner << " parent=" << t.parent;
    if (!node.is_leaf()) out << " procs=" << node.processes;
    out << '\n';
    for (std::size_t child : node.children) self(self, child);
  };
  visit(visit, tree.root());
  return out.str();
}

}  // namespace ata
