#include <sstream>

#include "studyplan/analytics.h"

namespace studyplan {

std::int64_t Dfg::total_edge_frequency() const {
  std::int64_t total = 0;
  for (const auto& [_, f] : edges) total += f;
  return total;
}

Dfg discover_dfg(const EventLog& log, TiePolicy tie_policy) {
  Dfg dfg;
  for (const auto& trace : log.traces) {
    if (trace.events.empty()) continue;
    for (const auto& e : trace.events) ++dfg.nodes[e.activity];

    if (tie_policy == TiePolicy::expand_ties) {
      // Trace order already is (timestamp, ordinal).
      for (std::size_t i = 1; i < trace.events.size(); ++i) {
        ++dfg.edges[{trace.events[i - 1].activity, trace.events[i].activity}];
      }
      ++dfg.start_freq[trace.events.front().activity];
      ++dfg.end_freq[trace.events.back().activity];
      continue;
    }

    auto groups = same_timestamp_groups(trace);
    for (std::size_t g = 1; g < groups.size(); ++g) {
      for (const auto& a : groups[g - 1]) {
        for (const auto& b : groups[g]) ++dfg.edges[{a.activity, b.activity}];
      }
    }
    for (const auto& e : groups.front()) ++dfg.start_freq[e.activity];
    for (const auto& e : groups.back()) ++dfg.end_freq[e.activity];
  }
  return dfg;
}

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string export_dot(const Dfg& dfg) {
  std::ostringstream out;
  out << "digraph {\n";
  for (const auto& [activity, freq] : dfg.nodes) {
    out << "  " << dot_quote(activity) << " [label=" << dot_quote(activity + " (" + std::to_string(freq) + ")")
        << "];\n";
  }
  for (const auto& [edge, freq] : dfg.edges) {
    out << "  " << dot_quote(edge.first) << " -> " << dot_quote(edge.second) << " [label=\"" << freq << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace studyplan
