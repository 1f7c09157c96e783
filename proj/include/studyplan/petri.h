#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "studyplan/cms_model.h"
#include "studyplan/event_log.h"

namespace studyplan {

/// Recommended study plan: ordered semester blocks of concurrent courses.
struct RecommendedPlan {
  std::string program_id;
  std::string regulation_version;
  std::vector<std::vector<std::string>> semesters;

  /// 1-based block index of `course_id`, if the plan contains it.
  std::optional<int> recommended_semester(const std::string& course_id) const;
  friend bool operator==(const RecommendedPlan&, const RecommendedPlan&) = default;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

/// Throws PlanError when the plan is empty, has an empty block, repeats a
/// course, or (with a catalog) names a course the catalog does not know.
void validate_plan(const RecommendedPlan& plan, const Catalog* catalog = nullptr);

/// Keeps only the first `max_blocks` semester blocks, for data that does not
/// reach the later semesters yet.
RecommendedPlan truncate_plan(const RecommendedPlan& plan, std::size_t max_blocks);

using PlaceId = std::size_t;
using TransitionId = std::size_t;
using Marking = std::map<PlaceId, int>;

struct Place {
  std::string name;
};

struct Transition {
  std::string name;
  std::optional<std::string> label;  // nullopt for silent transitions

  bool silent() const { return !label.has_value(); }
};

/// Place/transition net with unit arc weights.
class PetriNet {
 public:
  PlaceId add_place(std::string name);
  TransitionId add_transition(std::string name, std::optional<std::string> label);
  void add_arc_in(PlaceId from, TransitionId to);   // place -> transition
  void add_arc_out(TransitionId from, PlaceId to);  // transition -> place

  const std::vector<Place>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<PlaceId>& inputs(TransitionId t) const { return inputs_[t]; }
  const std::vector<PlaceId>& outputs(TransitionId t) const { return outputs_[t]; }

  /// Visible transitions carrying `label`, in insertion order.
  std::vector<TransitionId> with_label(const std::string& label) const;

  Marking initial_marking;
  Marking final_marking;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<PlaceId>> inputs_;
  std::vector<std::vector<PlaceId>> outputs_;
};

/// Structural workflow-net check: arcs reference existing nodes, markings are
/// non-empty, exactly one source and one sink place, and every node lies on a
/// path from the source to the sink. Returns a description of the first
/// problem, or nullopt for a workflow net.
std::optional<std::string> workflow_net_problem(const PetriNet& net);
inline bool is_workflow_net(const PetriNet& net) { return !workflow_net_problem(net); }

/// Source -> silent AND-split into the first block, a silent AND-join/split
/// between consecutive blocks, silent join into the sink after the last block.
/// Every course is a mandatory labeled transition (no skip branches).
PetriNet plan_to_petri(const RecommendedPlan& plan);

std::string export_pnml(const PetriNet& net, const std::string& net_id = "net");
std::string export_net_dot(const PetriNet& net);

// ---------------------------------------------------------------------------
// Token replay

struct ReplayResult {
  std::string case_id;
  std::int64_t produced = 0;
  std::int64_t consumed = 0;
  std::int64_t missing = 0;
  std::int64_t remaining = 0;
  double fitness = 0.0;
  std::map<std::string, std::int64_t> missing_detail;    // transition label -> missing tokens
  std::map<std::string, std::int64_t> remaining_detail;  // place name -> remaining tokens
  std::int64_t unknown_activities = 0;                   // events whose label is not in the net

  friend bool operator==(const ReplayResult&, const ReplayResult&) = default;
};

/// fitness = 1/2 (1 - m/c) + 1/2 (1 - r/p), evaluated as one rational
/// division so that it is reproducible from the counters.
double replay_fitness(std::int64_t missing, std::int64_t consumed, std::int64_t remaining, std::int64_t produced);

/// Maximum length of the silent firing sequences searched when enabling a
/// transition or completing towards the final marking.
inline constexpr int kSilentSearchDepth = 64;

/// Replays a sequence of activity labels. Labels not present in the net are
/// log-only moves: counted in unknown_activities, never in `missing`.
ReplayResult token_replay(const PetriNet& net, std::span<const std::string> labels, std::string case_id = {});

/// Replays a trace, matching each event's course id against transition labels.
ReplayResult token_replay(const PetriNet& net, const Trace& trace);

enum class ReplayMode { first_attempts, passed_only, all };

struct Deviation {
  std::string course_id;
  std::int64_t missing_count = 0;
  std::int64_t trace_count = 0;

  friend bool operator==(const Deviation&, const Deviation&) = default;
};

struct LogReplay {
  std::vector<ReplayResult> results;
  std::optional<double> mean_fitness;  // nullopt when no trace survived filtering
  std::size_t fitting_traces = 0;
  std::vector<Deviation> deviations;
};

/// Applies the mode's event filter (as build_log would), drops traces left
/// empty, replays the rest and aggregates.
LogReplay replay_log(const PetriNet& net, const EventLog& log, ReplayMode mode);

/// Courses ranked by total missing tokens (descending), ties by course id.
std::vector<Deviation> deviation_summary(std::span<const ReplayResult> results);

}  // namespace studyplan
