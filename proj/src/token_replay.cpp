#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "studyplan/petri.h"

namespace studyplan {

double replay_fitness(std::int64_t missing, std::int64_t consumed, std::int64_t remaining, std::int64_t produced) {
  // 1/2 (1 - m/c) + 1/2 (1 - r/p) == (p (c - m) + c (p - r)) / (2 c p)
  const std::int64_t numerator = produced * (consumed - missing) + consumed * (produced - remaining);
  const std::int64_t denominator = 2 * consumed * produced;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

namespace {

using Dense = std::vector<int>;

class Replayer {
 public:
  explicit Replayer(const PetriNet& net) : net_(net), marking_(net.places().size(), 0) {
    for (TransitionId t = 0; t < net.transitions().size(); ++t) {
      if (net.transitions()[t].silent()) silent_.push_back(t);
    }
  }

  ReplayResult run(std::span<const std::string> labels, std::string case_id) {
    ReplayResult result;
    result.case_id = std::move(case_id);
    for (const auto& [p, n] : net_.initial_marking) {
      marking_[p] += n;
      result.produced += n;
    }

    for (const auto& label : labels) {
      auto candidates = net_.with_label(label);
      if (candidates.empty()) {
        ++result.unknown_activities;
        continue;
      }
      TransitionId t = candidates.front();
      for (TransitionId c : candidates) {
        if (enabled(marking_, c)) {
          t = c;
          break;
        }
      }
      if (!enabled(marking_, t)) {
        if (auto path = silent_search(marking_, [&](const Dense& m) { return enabled(m, t); })) {
          for (TransitionId s : *path) fire(s, result);
        }
      }
      if (!enabled(marking_, t)) {
        Dense need(marking_.size(), 0);
        for (PlaceId p : net_.inputs(t)) ++need[p];
        for (PlaceId p = 0; p < need.size(); ++p) {
          int deficit = need[p] - marking_[p];
          if (deficit > 0) {
            marking_[p] += deficit;
            result.missing += deficit;
            result.missing_detail[label] += deficit;
          }
        }
      }
      fire(t, result);
    }

    auto covers_final = [&](const Dense& m) {
      for (const auto& [p, n] : net_.final_marking) {
        if (m[p] < n) return false;
      }
      return true;
    };
    if (!covers_final(marking_)) {
      if (auto path = silent_search(marking_, covers_final)) {
        for (TransitionId s : *path) fire(s, result);
      }
    }

    for (const auto& [p, n] : net_.final_marking) {
      if (marking_[p] < n) {
        result.missing += n - marking_[p];
        marking_[p] = n;
      }
      marking_[p] -= n;
      result.consumed += n;
    }
    for (PlaceId p = 0; p < marking_.size(); ++p) {
      if (marking_[p] > 0) {
        result.remaining += marking_[p];
        result.remaining_detail[net_.places()[p].name] += marking_[p];
      }
    }
    result.fitness = replay_fitness(result.missing, result.consumed, result.remaining, result.produced);
    return result;
  }

 private:
  bool enabled(const Dense& m, TransitionId t) const {
    Dense need(m.size(), 0);
    for (PlaceId p : net_.inputs(t)) {
      if (++need[p] > m[p]) return false;
    }
    return true;
  }

  void fire(TransitionId t, ReplayResult& result) {
    for (PlaceId p : net_.inputs(t)) {
      --marking_[p];
      ++result.consumed;
    }
    for (PlaceId p : net_.outputs(t)) {
      ++marking_[p];
      ++result.produced;
    }
  }

  // Breadth-first search over silent firings for the shortest sequence that
  // reaches a marking satisfying `goal`. The start marking itself is not a
  // candidate (callers check it first).
  std::optional<std::vector<TransitionId>> silent_search(const Dense& start,
                                                         const std::function<bool(const Dense&)>& goal) const {
    if (silent_.empty()) return std::nullopt;
    struct Node {
      Dense marking;
      std::vector<TransitionId> path;
    };
    std::deque<Node> queue;
    std::set<Dense> visited{start};
    queue.push_back({start, {}});
    while (!queue.empty()) {
      Node node = std::move(queue.front());
      queue.pop_front();
      if (node.path.size() >= static_cast<std::size_t>(kSilentSearchDepth)) continue;
      for (TransitionId s : silent_) {
        if (!enabled(node.marking, s)) continue;
        Dense next = node.marking;
        for (PlaceId p : net_.inputs(s)) --next[p];
        for (PlaceId p : net_.outputs(s)) ++next[p];
        if (!visited.insert(next).second) continue;
        auto path = node.path;
        path.push_back(s);
        if (goal(next)) return path;
        queue.push_back({std::move(next), std::move(path)});
      }
    }
    return std::nullopt;
  }

  const PetriNet& net_;
  Dense marking_;
  std::vector<TransitionId> silent_;
};

bool keep_for_mode(const Event& e, ReplayMode mode) {
  switch (mode) {
    case ReplayMode::first_attempts: return e.attrs.attempt_no == 1;
    case ReplayMode::passed_only: return e.attrs.result == ExamResult::passed;
    case ReplayMode::all: return true;
  }
  return true;
}

}  // namespace

ReplayResult token_replay(const PetriNet& net, std::span<const std::string> labels, std::string case_id) {
  return Replayer(net).run(labels, std::move(case_id));
}

ReplayResult token_replay(const PetriNet& net, const Trace& trace) {
  std::vector<std::string> labels;
  labels.reserve(trace.events.size());
  for (const auto& e : trace.events) labels.push_back(e.attrs.course_id);
  return token_replay(net, labels, case_label(trace.case_id));
}

LogReplay replay_log(const PetriNet& net, const EventLog& log, ReplayMode mode) {
  LogReplay out;
  double fitness_sum = 0.0;
  for (const auto& trace : log.traces) {
    Trace filtered{trace.case_id, {}};
    for (const auto& e : trace.events) {
      if (keep_for_mode(e, mode)) filtered.events.push_back(e);
    }
    if (filtered.events.empty()) continue;
    auto result = token_replay(net, filtered);
    fitness_sum += result.fitness;
    if (result.missing == 0 && result.remaining == 0) ++out.fitting_traces;
    out.results.push_back(std::move(result));
  }
  if (!out.results.empty()) out.mean_fitness = fitness_sum / static_cast<double>(out.results.size());
  out.deviations = deviation_summary(out.results);
  return out;
}

std::vector<Deviation> deviation_summary(std::span<const ReplayResult> results) {
  std::map<std::string, Deviation> by_course;
  for (const auto& r : results) {
    for (const auto& [label, count] : r.missing_detail) {
      if (count <= 0) continue;
      auto& d = by_course[label];
      d.course_id = label;
      d.missing_count += count;
      d.trace_count += 1;
    }
  }
  std::vector<Deviation> out;
  for (auto& [_, d] : by_course) out.push_back(std::move(d));
  std::stable_sort(out.begin(), out.end(), [](const Deviation& a, const Deviation& b) {
    if (a.missing_count != b.missing_count) return a.missing_count > b.missing_count;
    return a.course_id < b.course_id;
  });
  return out;
}

}  // namespace studyplan
