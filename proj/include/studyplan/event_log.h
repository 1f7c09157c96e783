#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "studyplan/cms_model.h"

namespace studyplan {

enum class ActivityMode { course, course_and_attempt };
enum class TimestampMode { semester, exam_date };
enum class OccurrenceMode { first_only, all };
enum class EventFilter { all, first_attempts, passed_only };

struct LogConfig {
  ActivityMode activity_mode = ActivityMode::course;
  TimestampMode timestamp_mode = TimestampMode::semester;
  OccurrenceMode occurrence_mode = OccurrenceMode::all;
  EventFilter event_filter = EventFilter::all;
  CohortDef scope;
  bool mandatory_only = false;

  friend bool operator==(const LogConfig&, const LogConfig&) = default;
};

/// Either the semester of the exam or its calendar date, depending on the
/// log's timestamp mode. A single log never mixes the two.
using Timestamp = std::variant<Semester, Date>;

struct EventAttrs {
  std::string course_id;
  int attempt_no = 1;
  ExamResult result = ExamResult::failed;
  std::optional<double> grade;
  Semester semester;
  int semester_index = 1;
  std::optional<Date> registration_date;
  std::optional<Date> deregistration_date;

  friend bool operator==(const EventAttrs&, const EventAttrs&) = default;
};

struct Event {
  EnrollmentKey case_id;
  std::string activity;
  Timestamp timestamp;
  int ordinal = 0;
  EventAttrs attrs;

  friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
  EnrollmentKey case_id;
  std::vector<Event> events;  // sorted by (timestamp, ordinal)

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct EventLog {
  std::vector<Trace> traces;  // sorted by case id, no empty traces
  LogConfig config;

  std::size_t event_count() const;
  friend bool operator==(const EventLog&, const EventLog&) = default;
};

class LogBuildError : public Error {
 public:
  explicit LogBuildError(std::vector<std::string> offending);
  const std::vector<std::string>& offending() const { return offending_; }

 private:
  std::vector<std::string> offending_;
};

/// Builds one trace per in-scope enrollment. Records are filtered by
/// `event_filter` before occurrences are collapsed, so a fail-then-pass
/// student under passed_only + first_only keeps the pass.
///
/// Ordinals follow (semester, course_id, attempt_no) within a trace; the true
/// order of exams inside one semester is not recoverable from CMS data.
EventLog build_log(const CmsDatabase& db, const LogConfig& config);

/// Maximal runs of events sharing a timestamp, in trace order.
std::vector<std::span<const Event>> same_timestamp_groups(const Trace& trace);

/// Writes XES 1.0. Semesters become dates: winter -> Oct 1, summer -> Apr 1
/// of the term's starting year.
void export_xes(const EventLog& log, std::ostream& out);
std::string export_xes(const EventLog& log);

/// First calendar day used for a semester timestamp.
Date semester_start_date(Semester s);

std::string case_label(const EnrollmentKey& key);

}  // namespace studyplan
