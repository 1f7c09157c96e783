#include "studyplan/event_log.h"

#include <algorithm>
#include <set>
#include <tuple>

namespace studyplan {

LogBuildError::LogBuildError(std::vector<std::string> offending)
    : Error([&] {
        std::string msg = "timestamp_mode=exam_date but " + std::to_string(offending.size()) +
                          " selected record(s) lack an exam date";
        for (std::size_t i = 0; i < offending.size() && i < 5; ++i) msg += (i ? ", " : ": ") + offending[i];
        if (offending.size() > 5) msg += ", ...";
        return msg;
      }()),
      offending_(std::move(offending)) {}

std::size_t EventLog::event_count() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.events.size();
  return n;
}

std::string case_label(const EnrollmentKey& key) { return key.student_id + "/" + key.program_id; }

Date semester_start_date(Semester s) {
  using namespace std::chrono;
  return Date{year{s.year}, s.term == Term::winter ? October : April, day{1}};
}

namespace {

bool keep(const ExamRecord& r, EventFilter filter) {
  switch (filter) {
    case EventFilter::all: return true;
    case EventFilter::first_attempts: return r.attempt_no == 1;
    case EventFilter::passed_only: return r.result == ExamResult::passed;
  }
  return true;
}

std::string describe(const ExamRecord& r) {
  return r.student_id + "/" + r.program_id + "/" + r.course_id + "#" + std::to_string(r.attempt_no);
}

}  // namespace

EventLog build_log(const CmsDatabase& db, const LogConfig& config) {
  EventLog log;
  log.config = config;
  std::vector<std::string> missing_dates;

  for (const auto& key : cohort_members(db, config.scope)) {
    const ProgramEnrollment* enrollment = db.find_enrollment(key);
    std::vector<const ExamRecord*> selected;
    for (const ExamRecord* r : db.exams_of(key)) {
      if (!keep(*r, config.event_filter)) continue;
      if (config.mandatory_only) {
        const ScheduledCourse* sc = db.find_scheduled({r->course_id, r->semester, r->program_id});
        if (!sc || !sc->mandatory) continue;
      }
      selected.push_back(r);
    }
    std::stable_sort(selected.begin(), selected.end(), [](const ExamRecord* a, const ExamRecord* b) {
      return std::tie(a->semester, a->course_id, a->attempt_no) < std::tie(b->semester, b->course_id, b->attempt_no);
    });

    Trace trace;
    trace.case_id = key;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const ExamRecord& r = *selected[i];
      Event e;
      e.case_id = key;
      e.ordinal = static_cast<int>(i);
      e.activity = config.activity_mode == ActivityMode::course ? r.course_id
                                                                : r.course_id + "#" + std::to_string(r.attempt_no);
      if (config.timestamp_mode == TimestampMode::semester) {
        e.timestamp = r.semester;
      } else if (r.exam_date) {
        e.timestamp = *r.exam_date;
      } else {
        missing_dates.push_back(describe(r));
        continue;
      }
      e.attrs = EventAttrs{r.course_id,
                           r.attempt_no,
                           r.result,
                           r.grade,
                           r.semester,
                           semester_index(r.semester, enrollment->start_semester),
                           r.registration_date,
                           r.deregistration_date};
      trace.events.push_back(std::move(e));
    }

    std::stable_sort(trace.events.begin(), trace.events.end(), [](const Event& a, const Event& b) {
      return std::tie(a.timestamp, a.ordinal) < std::tie(b.timestamp, b.ordinal);
    });

    if (config.occurrence_mode == OccurrenceMode::first_only) {
      std::set<std::string> seen;
      std::erase_if(trace.events, [&](const Event& e) { return !seen.insert(e.attrs.course_id).second; });
    }
    if (!trace.events.empty()) log.traces.push_back(std::move(trace));
  }

  if (!missing_dates.empty()) throw LogBuildError(std::move(missing_dates));
  return log;
}

std::vector<std::span<const Event>> same_timestamp_groups(const Trace& trace) {
  std::vector<std::span<const Event>> groups;
  const auto& events = trace.events;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= events.size(); ++i) {
    if (i == events.size() || events[i].timestamp != events[start].timestamp) {
      groups.emplace_back(events.data() + start, i - start);
      start = i;
    }
  }
  return groups;
}

}  // namespace studyplan
