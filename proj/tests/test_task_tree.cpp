#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ata/task_tree.hpp"

using namespace ata;

namespace {

// Direct transcription of the level rule with floating-point logarithms, as a
// cross-check of the integer implementation.
int levels_by_log(int p, int divisor, int branching) {
  const int q = p / divisor;
  const int k = static_cast<int>(std::floor(std::log(q) / std::log(branching) + 1e-9));
  const long long modulus = static_cast<long long>(std::llround(std::pow(branching, std::max(k, 1))));
  return 1 + k + (q % modulus != 0 ? 1 : 0);
}

std::vector<Task> leaves(const TaskTree& tree) {
  std::vector<Task> out;
  for (int p = 0; p < tree.processes(); ++p) out.push_back(leaf_task(tree, p));
  return out;
}

Index lower_entries(const Region& r) {
  Index count = 0;
  for (Index i = r.row_offset; i < r.row_offset + r.rows; ++i)
    count += std::max<Index>(0, std::min(r.col_offset + r.cols, i + 1) - r.col_offset);
  return count;
}

// For every C entry, how many rows of A its leaf contributions sum over.
std::vector<std::vector<Index>> addend_counts(const TaskTree& tree, Index n) {
  std::vector<std::vector<Index>> count(static_cast<std::size_t>(n), std::vector<Index>(static_cast<std::size_t>(n), 0));
  for (const Task& t : leaves(tree)) {
    const Region& a = t.a_region;
    if (t.computation == ComputationType::AtA) {
      REQUIRE(t.c_region == Region{a.col_offset, a.col_offset, a.cols, a.cols});
      for (Index i = 0; i < a.cols; ++i)
        for (Index j = 0; j <= i; ++j)
          count[static_cast<std::size_t>(a.col_offset + i)][static_cast<std::size_t>(a.col_offset + j)] += a.rows;
    } else {
      const Region& b = t.b_region;
      REQUIRE(a.rows == b.rows);
      REQUIRE(a.row_offset == b.row_offset);
      REQUIRE(t.c_region == Region{a.col_offset, b.col_offset, a.cols, b.cols});
      for (Index i = 0; i < a.cols; ++i)
        for (Index j = 0; j < b.cols; ++j)
          count[static_cast<std::size_t>(a.col_offset + i)][static_cast<std::size_t>(b.col_offset + j)] += a.rows;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("level formula examples") {
  CHECK(levels_distributed(1) == 0);
  for (int p = 2; p <= 6; ++p) CHECK(levels_distributed(p) == 1);
  CHECK(levels_distributed(16) == 2);
  CHECK(levels_distributed(32) == 2);
  CHECK(levels_shared(1) == 0);
  CHECK(levels_shared(2) == 1);
  CHECK(levels_shared(3) == 1);
  CHECK(levels_shared(16) == 2);
  CHECK_THROWS_AS(levels_distributed(0), Error);
}

TEST_CASE("level formulas agree with a logarithmic transcription") {
  for (int p = 7; p <= 4096; ++p) CHECK(levels_distributed(p) == levels_by_log(p, 4, 8));
  for (int p = 4; p <= 4096; ++p) CHECK(levels_shared(p) == levels_by_log(p, 2, 4));
}

TEST_CASE("tree depth is one more than the level count") {
  for (int p = 1; p <= 128; ++p) {
    INFO("P=" << p);
    CHECK(build_tree_distributed(p, 64, 64).depth() == static_cast<std::size_t>(levels_distributed(p)) + 1);
    CHECK(build_tree_shared(p, 64, 64).depth() == static_cast<std::size_t>(levels_shared(p)) + 1);
  }
}

TEST_CASE("leaf labels are a bijection onto 0..P-1") {
  for (int p = 1; p <= 100; ++p) {
    for (const TaskTree& tree : {build_tree_distributed(p, 50, 40), build_tree_shared(p, 50, 40)}) {
      std::set<int> labels;
      std::size_t leaf_nodes = 0;
      for (const TaskNode& node : tree.nodes()) {
        if (!node.is_leaf()) continue;
        ++leaf_nodes;
        labels.insert(node.task.owner);
      }
      CHECK(leaf_nodes == static_cast<std::size_t>(p));
      CHECK(labels.size() == static_cast<std::size_t>(p));
      CHECK(*labels.begin() == 0);
      CHECK(*labels.rbegin() == p - 1);
      for (int q = 0; q < p; ++q) CHECK(leaf_task(tree, q).owner == q);
    }
  }
}

TEST_CASE("leaves are labeled in breadth-first discovery order") {
  const TaskTree tree = build_tree_distributed(40, 64, 64);
  std::size_t previous_depth = 0;
  std::size_t previous_node = 0;
  for (int p = 0; p < tree.processes(); ++p) {
    const std::size_t id = tree.leaf_node(p);
    CHECK(tree.node(id).depth >= previous_depth);
    if (p > 0) CHECK(id > previous_node);
    previous_depth = tree.node(id).depth;
    previous_node = id;
  }
}

TEST_CASE("single process tree") {
  for (const TaskTree& tree : {build_tree_distributed(1, 7, 5), build_tree_shared(1, 7, 5)}) {
    CHECK(tree.nodes().size() == 1);
    const Task& t = leaf_task(tree, 0);
    CHECK(t.computation == ComputationType::AtA);
    CHECK(t.a_region == Region{0, 0, 7, 5});
    CHECK(t.c_region == Region{0, 0, 5, 5});
    CHECK(path_to_root(tree, 0).size() == 1);
  }
}

TEST_CASE("distributed tree on six processes is one complete bunch") {
  const TaskTree tree = build_tree_distributed(6, 64, 64);
  const auto l = leaves(tree);
  REQUIRE(l.size() == 6);
  const Region a11{0, 0, 32, 32}, a12{0, 32, 32, 32}, a21{32, 0, 32, 32}, a22{32, 32, 32, 32};
  const Region c11{0, 0, 32, 32}, c21{32, 0, 32, 32}, c22{32, 32, 32, 32};
  for (int p = 0; p < 4; ++p) CHECK(l[static_cast<std::size_t>(p)].computation == ComputationType::AtA);
  CHECK(l[0].a_region == a11);
  CHECK(l[0].c_region == c11);
  CHECK(l[1].a_region == a21);
  CHECK(l[1].c_region == c11);
  CHECK(l[2].a_region == a12);
  CHECK(l[2].c_region == c22);
  CHECK(l[3].a_region == a22);
  CHECK(l[3].c_region == c22);
  CHECK(l[4].computation == ComputationType::AtB);
  CHECK(l[4].a_region == a12);
  CHECK(l[4].b_region == a11);
  CHECK(l[4].c_region == c21);
  CHECK(l[5].a_region == a22);
  CHECK(l[5].b_region == a21);
  CHECK(l[5].c_region == c21);
  for (const Task& t : l) CHECK(t.parent == 0);
}

TEST_CASE("distributed tree on sixteen processes") {
  const Index n = 64;
  const TaskTree tree = build_tree_distributed(16, n, n);
  int ata_leaves = 0, atb_leaves = 0;
  const Region c11{0, 0, 32, 32}, c21{32, 0, 32, 32}, c22{32, 32, 32, 32};
  for (const Task& t : leaves(tree)) {
    if (t.computation == ComputationType::AtA) {
      ++ata_leaves;
      CHECK((c11.contains(t.c_region) || c22.contains(t.c_region)));
    } else {
      ++atb_leaves;
      CHECK(c21.contains(t.c_region));
    }
  }
  CHECK(ata_leaves == 8);
  CHECK(atb_leaves == 8);

  SUBCASE("half of the processes go to the off-diagonal products") {
    const auto& root = tree.node(tree.root());
    REQUIRE(root.children.size() == 6);
    std::vector<int> budgets;
    for (std::size_t c : root.children) budgets.push_back(tree.node(c).processes);
    CHECK(budgets == std::vector<int>{2, 2, 2, 2, 4, 4});
  }
  SUBCASE("path to the root") {
    CHECK(path_to_root(tree, 0).size() == static_cast<std::size_t>(levels_distributed(16)) + 1);
    CHECK(path_to_root(tree, 0).back() == tree.root());
    CHECK(path_to_root(tree, 1).size() == 1);
  }
}

TEST_CASE("inner nodes are owned by the lowest leaf label below them") {
  for (int p : {2, 6, 7, 16, 33, 64}) {
    for (const TaskTree& tree : {build_tree_distributed(p, 40, 40), build_tree_shared(p, 40, 40)}) {
      for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        const TaskNode& node = tree.node(id);
        if (node.parent_node != TaskNode::npos) CHECK(node.task.parent == tree.node(node.parent_node).task.owner);
        if (node.is_leaf()) continue;
        int lowest = p;
        std::vector<std::size_t> stack = node.children;
        while (!stack.empty()) {
          const TaskNode& d = tree.node(stack.back());
          stack.pop_back();
          if (d.is_leaf()) lowest = std::min(lowest, d.task.owner);
          stack.insert(stack.end(), d.children.begin(), d.children.end());
        }
        CHECK(node.task.owner == lowest);
      }
      for (int q = 0; q < p; ++q)
        for (std::size_t id : path_to_root(tree, q)) CHECK(tree.node(id).task.owner == q);
    }
  }
}

TEST_CASE("leaf_task rejects unknown processes") {
  const TaskTree tree = build_tree_distributed(4, 8, 8);
  try {
    leaf_task(tree, 4);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_process);
  }
  CHECK_THROWS_AS(leaf_task(tree, -1), Error);
  CHECK_THROWS_AS(path_to_root(tree, 9), Error);
}

TEST_CASE("shared tree on three processes") {
  const TaskTree tree = build_tree_shared(3, 64, 64);
  const auto l = leaves(tree);
  REQUIRE(l.size() == 3);
  CHECK(l[0].computation == ComputationType::AtA);
  CHECK(l[0].a_region == Region{0, 0, 64, 32});
  CHECK(l[0].c_region == Region{0, 0, 32, 32});
  CHECK(l[1].computation == ComputationType::AtA);
  CHECK(l[1].a_region == Region{0, 32, 64, 32});
  CHECK(l[1].c_region == Region{32, 32, 32, 32});
  CHECK(l[2].computation == ComputationType::AtB);
  CHECK(l[2].a_region == Region{0, 32, 64, 32});
  CHECK(l[2].b_region == Region{0, 0, 64, 32});
  CHECK(l[2].c_region == Region{32, 0, 32, 32});
}

TEST_CASE("shared tree on sixteen processes") {
  const TaskTree tree = build_tree_shared(16, 128, 128);
  CHECK(tree.depth() == 3);
  const auto l = leaves(tree);
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = i + 1; j < l.size(); ++j) CHECK_FALSE(l[i].c_region.intersects(l[j].c_region));
}

TEST_CASE("shared leaves are disjoint and cover the lower triangle") {
  for (Index n = 1; n <= 257; ++n) {
    for (int p = 1; p <= 64; ++p) {
      const auto l = leaves(build_tree_shared(p, 3, n));
      Index covered = 0;
      bool disjoint = true;
      for (std::size_t i = 0; i < l.size(); ++i) {
        covered += lower_entries(l[i].c_region);
        for (std::size_t j = i + 1; j < l.size(); ++j) disjoint = disjoint && !l[i].c_region.intersects(l[j].c_region);
      }
      INFO("n=" << n << " P=" << p);
      REQUIRE(disjoint);
      REQUIRE(covered == n * (n + 1) / 2);
    }
  }
}

TEST_CASE("every lower entry sums over each row of A exactly once") {
  for (Index n : {1, 2, 3, 9, 31, 64}) {
    for (Index m : {1, 5, 40}) {
      for (int p = 1; p <= 40; ++p) {
        for (bool distributed : {true, false}) {
          const TaskTree tree = distributed ? build_tree_distributed(p, m, n) : build_tree_shared(p, m, n);
          const auto count = addend_counts(tree, n);
          bool ok = true;
          for (Index i = 0; i < n; ++i)
            for (Index j = 0; j <= i; ++j) ok = ok && count[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == m;
          INFO("n=" << n << " m=" << m << " P=" << p << " distributed=" << distributed);
          REQUIRE(ok);
        }
      }
    }
  }
}

TEST_CASE("off-diagonal leaves carry twice the operand data in a complete level") {
  const TaskTree tree = build_tree_distributed(6, 64, 64);
  const auto l = leaves(tree);
  for (const Task& t : l) {
    const Index words = t.a_region.size() + (t.computation == ComputationType::AtB ? t.b_region.size() : 0);
    CHECK(words == (t.computation == ComputationType::AtB ? 2 : 1) * 32 * 32);
  }
}

TEST_CASE("trees are deterministic and render one line per node") {
  CHECK(build_tree_distributed(37, 100, 90) == build_tree_distributed(37, 100, 90));
  CHECK(build_tree_shared(37, 100, 90) == build_tree_shared(37, 100, 90));
  const TaskTree tree = build_tree_distributed(6, 32, 32);
  const std::string text = render_tree(tree);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(tree.nodes().size()) + 1);
  CHECK(text.find("  AtB A[0:16, 16:32) B[0:16, 0:16) C[16:32, 0:16) owner=4 parent=0") != std::string::npos);
}
