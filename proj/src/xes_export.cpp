#include <sstream>

#include "studyplan/event_log.h"

namespace studyplan {

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string xes_timestamp(const Timestamp& ts) {
  Date d = std::holds_alternative<Semester>(ts) ? semester_start_date(std::get<Semester>(ts)) : std::get<Date>(ts);
  return format_iso_date(d) + "T00:00:00.000+00:00";
}

void string_attr(std::ostream& out, const char* indent, std::string_view key, std::string_view value) {
  out << indent << "<string key=\"" << xml_escape(key) << "\" value=\"" << xml_escape(value) << "\"/>\n";
}

}  // namespace

void export_xes(const EventLog& log, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- Semester timestamps are mapped to the first day of the term:"
         " winter semester -> October 1, summer semester -> April 1. -->\n";
  out << "<log xes.version=\"1.0\" xes.features=\"nested-attributes\" openxes.version=\"1.0RC7\">\n";
  out << "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n";
  out << "  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n";
  out << "  <global scope=\"trace\">\n    <string key=\"concept:name\" value=\"__INVALID__\"/>\n  </global>\n";
  out << "  <global scope=\"event\">\n    <string key=\"concept:name\" value=\"__INVALID__\"/>\n"
         "    <date key=\"time:timestamp\" value=\"1970-01-01T00:00:00.000+00:00\"/>\n  </global>\n";
  out << "  <classifier name=\"Activity\" keys=\"concept:name\"/>\n";

  for (const auto& trace : log.traces) {
    out << "  <trace>\n";
    string_attr(out, "    ", "concept:name", case_label(trace.case_id));
    string_attr(out, "    ", "student_id", trace.case_id.student_id);
    string_attr(out, "    ", "program_id", trace.case_id.program_id);
    for (const auto& e : trace.events) {
      out << "    <event>\n";
      string_attr(out, "      ", "concept:name", e.activity);
      out << "      <date key=\"time:timestamp\" value=\"" << xes_timestamp(e.timestamp) << "\"/>\n";
      string_attr(out, "      ", "course_id", e.attrs.course_id);
      out << "      <int key=\"attempt_no\" value=\"" << e.attrs.attempt_no << "\"/>\n";
      string_attr(out, "      ", "result", to_string(e.attrs.result));
      if (e.attrs.grade) {
        std::ostringstream g;
        g << *e.attrs.grade;
        out << "      <float key=\"grade\" value=\"" << g.str() << "\"/>\n";
      }
      string_attr(out, "      ", "semester", format_semester(e.attrs.semester));
      out << "      <int key=\"semester_index\" value=\"" << e.attrs.semester_index << "\"/>\n";
      out << "      <int key=\"ordinal\" value=\"" << e.ordinal << "\"/>\n";
      if (e.attrs.registration_date) string_attr(out, "      ", "registration_date", format_iso_date(*e.attrs.registration_date));
      if (e.attrs.deregistration_date)
        string_attr(out, "      ", "deregistration_date", format_iso_date(*e.attrs.deregistration_date));
      out << "    </event>\n";
    }
    out << "  </trace>\n";
  }
  out << "</log>\n";
}

std::string export_xes(const EventLog& log) {
  std::ostringstream out;
  export_xes(log, out);
  return out.str();
}

}  // namespace studyplan
