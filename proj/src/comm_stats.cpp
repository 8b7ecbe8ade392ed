#include "ata/comm_stats.hpp"

#include <cmath>

namespace ata {

void CommStats::record(const MessageRecord& m) {
  detail::require(m.src >= 0 && m.dst >= 0 && static_cast<std::size_t>(m.src) < per_process.size() &&
                      static_cast<std::size_t>(m.dst) < per_process.size(),
                  Errc::unknown_process, "message between unknown processes");
  auto& s = per_process[static_cast<std::size_t>(m.src)];
  auto& d = per_process[static_cast<std::size_t>(m.dst)];
  ++s.sent_messages;
  s.sent_words += m.words;
  ++d.recv_messages;
  d.recv_words += m.words;
  ++total_messages;
  total_words += m.words;
  (m.phase == Phase::Distribute ? distributed_words : retrieved_words) += m.words;
  if (m.src == 0 || m.dst == 0) {
    ++critical_path_messages;
    critical_path_words += m.words;
  }
}

CommStats stats_from_log(int processes, const std::vector<MessageRecord>& log) {
  CommStats stats(processes);
  for (const auto& m : log) stats.record(m);
  return stats;
}

void write_comm_csv(std::ostream& out, const CommStats& stats) {
  out << "process,sent_messages,sent_words,recv_messages,recv_words\n";
  for (std::size_t p = 0; p < stats.per_process.size(); ++p) {
    const auto& s = stats.per_process[p];
    out << p << ',' << s.sent_messages << ',' << s.sent_words << ',' << s.recv_messages << ','
        << s.recv_words << '\n';
  }
  out << "total," << stats.total_messages << ',' << stats.total_words << ',' << stats.total_messages
      << ',' << stats.total_words << '\n';
  out << "critical_path," << stats.critical_path_messages << ',' << stats.critical_path_words << ",,\n";
}

std::uint64_t latency_bound(int processes) {
  const int l = levels_distributed(processes);
  if (l == 0) return 0;
  return static_cast<std::uint64_t>(2 * (7 * (l - 1) + 5));
}

double bandwidth_bound(Index n, int processes) {
  const int l = levels_distributed(processes);
  if (l == 0) return 0;
  const double h = static_cast<double>(n) / 2, nn = static_cast<double>(n);
  if (l == 1) return 5 * h * h + h * h + 4 * nn * (nn + 2) / 8;
  return 6 * h * h + nn * (nn + 2) / 2 + 7.0 / 6.0 * nn * nn * (1 - std::pow(4.0, -(l - 2)));
}

CommBoundReport verify_comm_bounds(const CommStats& stats, Index n, int processes) {
  CommBoundReport r;
  r.levels = levels_distributed(processes);
  r.message_bound = latency_bound(processes);
  r.word_bound = bandwidth_bound(n, processes);
  r.messages = stats.critical_path_messages;
  r.words = stats.total_words;
  if (r.messages > r.message_bound)
    r.violations.push_back("critical_path_messages " + std::to_string(r.messages) + " > " +
                           std::to_string(r.message_bound));
  if (static_cast<double>(r.words) > r.word_bound)
    r.violations.push_back("total_words " + std::to_string(r.words) + " > " +
                           std::to_string(r.word_bound));
  return r;
}

std::ostream& operator<<(std::ostream& out, const CommBoundReport& r) {
  out << "levels=" << r.levels << " messages=" << r.messages << "/" << r.message_bound
      << " words=" << r.words << "/" << r.word_bound;
  for (const auto& v : r.violations) out << " violation: " << v;
  return out;
}

}  // namespace ata
