#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ata/task_tree.hpp"

namespace ata {

enum class PayloadKind { SubMatrix, PackedLower };
enum class Phase { Distribute, Retrieve };

/// Header of a delivered message; the payload itself is not retained.
struct MessageRecord {
  int src = 0;
  int dst = 0;
  Phase phase = Phase::Distribute;
  PayloadKind kind = PayloadKind::SubMatrix;
  Index rows = 0;
  Index cols = 0;
  std::size_t node = 0;  // task-tree node the payload belongs to
  std::uint64_t words = 0;
};

struct ProcessComm {
  std::uint64_t sent_messages = 0;
  std::uint64_t sent_words = 0;
  std::uint64_t recv_messages = 0;
  std::uint64_t recv_words = 0;
};

struct CommStats {
  std::vector<ProcessComm> per_process;
  std::uint64_t total_messages = 0;
  std::uint64_t total_words = 0;
  std::uint64_t distributed_words = 0;
  std::uint64_t retrieved_words = 0;
  // Traffic sent or received by process 0, the root collector.
  std::uint64_t critical_path_messages = 0;
  std::uint64_t critical_path_words = 0;

  explicit CommStats(int processes = 1) : per_process(static_cast<std::size_t>(processes)) {}

  void record(const MessageRecord& m);
};

/// Recomputes the counters from a message log.
CommStats stats_from_log(int processes, const std::vector<MessageRecord>& log);

void write_comm_csv(std::ostream& out, const CommStats& stats);

struct CommBoundReport {
  int levels = 0;
  std::uint64_t message_bound = 0;
  double word_bound = 0;
  std::uint64_t messages = 0;
  std::uint64_t words = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Critical-path message bound 2[7(ℓ−1)+5] for ℓ ≥ 1, zero for P = 1.
std::uint64_t latency_bound(int processes);

/// Total word bound for a square n×n input on P processes.
double bandwidth_bound(Index n, int processes);

CommBoundReport verify_comm_bounds(const CommStats& stats, Index n, int processes);

std::ostream& operator<<(std::ostream& out, const CommBoundReport& report);

}  // namespace ata
