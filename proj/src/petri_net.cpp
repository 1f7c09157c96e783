#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "studyplan/petri.h"

namespace studyplan {

std::optional<int> RecommendedPlan::recommended_semester(const std::string& course_id) const {
  for (std::size_t i = 0; i < semesters.size(); ++i) {
    if (std::find(semesters[i].begin(), semesters[i].end(), course_id) != semesters[i].end()) {
      return static_cast<int>(i) + 1;
    }
  }
  return std::nullopt;
}

void validate_plan(const RecommendedPlan& plan, const Catalog* catalog) {
  if (plan.semesters.empty()) throw PlanError("recommended plan has no semester blocks");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < plan.semesters.size(); ++i) {
    if (plan.semesters[i].empty()) throw PlanError("semester block " + std::to_string(i + 1) + " is empty");
    for (const auto& course : plan.semesters[i]) {
      if (course.empty()) throw PlanError("empty course id in semester block " + std::to_string(i + 1));
      if (!seen.insert(course).second) throw PlanError("course '" + course + "' appears in more than one position");
      if (catalog && !catalog->count(course)) throw PlanError("course '" + course + "' is not in the catalog");
    }
  }
}

RecommendedPlan truncate_plan(const RecommendedPlan& plan, std::size_t max_blocks) {
  RecommendedPlan out = plan;
  if (out.semesters.size() > max_blocks) out.semesters.resize(max_blocks);
  return out;
}

PlaceId PetriNet::add_place(std::string name) {
  places_.push_back({std::move(name)});
  return places_.size() - 1;
}

TransitionId PetriNet::add_transition(std::string name, std::optional<std::string> label) {
  transitions_.push_back({std::move(name), std::move(label)});
  inputs_.emplace_back();
  outputs_.emplace_back();
  return transitions_.size() - 1;
}

void PetriNet::add_arc_in(PlaceId from, TransitionId to) {
  if (from >= places_.size() || to >= transitions_.size()) throw Error("arc references a missing node");
  inputs_[to].push_back(from);
}

void PetriNet::add_arc_out(TransitionId from, PlaceId to) {
  if (to >= places_.size() || from >= transitions_.size()) throw Error("arc references a missing node");
  outputs_[from].push_back(to);
}

std::vector<TransitionId> PetriNet::with_label(const std::string& label) const {
  std::vector<TransitionId> out;
  for (TransitionId t = 0; t < transitions_.size(); ++t) {
    if (transitions_[t].label == label) out.push_back(t);
  }
  return out;
}

std::optional<std::string> workflow_net_problem(const PetriNet& net) {
  const std::size_t np = net.places().size();
  const std::size_t nt = net.transitions().size();
  if (np == 0) return "net has no places";
  if (net.initial_marking.empty()) return "initial marking is empty";
  if (net.final_marking.empty()) return "final marking is empty";
  for (const auto& m : {net.initial_marking, net.final_marking}) {
    for (const auto& [p, n] : m) {
      if (p >= np) return "marking references a missing place";
      if (n <= 0) return "marking holds a non-positive token count";
    }
  }

  // Nodes: places 0..np-1, transitions np..np+nt-1.
  std::vector<std::vector<std::size_t>> succ(np + nt), pred(np + nt);
  std::vector<int> in_degree(np, 0), out_degree(np, 0);
  for (TransitionId t = 0; t < nt; ++t) {
    for (PlaceId p : net.inputs(t)) {
      succ[p].push_back(np + t);
      pred[np + t].push_back(p);
      ++out_degree[p];
    }
    for (PlaceId p : net.outputs(t)) {
      succ[np + t].push_back(p);
      pred[p].push_back(np + t);
      ++in_degree[p];
    }
  }
  std::vector<PlaceId> sources, sinks;
  for (PlaceId p = 0; p < np; ++p) {
    if (in_degree[p] == 0) sources.push_back(p);
    if (out_degree[p] == 0) sinks.push_back(p);
  }
  if (sources.size() != 1) return "expected exactly one source place, found " + std::to_string(sources.size());
  if (sinks.size() != 1) return "expected exactly one sink place, found " + std::to_string(sinks.size());

  auto reach = [&](std::size_t start, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(np + nt, false);
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      auto n = queue.front();
      queue.pop_front();
      for (auto m : adj[n]) {
        if (!seen[m]) {
          seen[m] = true;
          queue.push_back(m);
        }
      }
    }
    return seen;
  };
  auto forward = reach(sources.front(), succ);
  auto backward = reach(sinks.front(), pred);
  for (std::size_t n = 0; n < np + nt; ++n) {
    if (!forward[n] || !backward[n]) {
      std::string name = n < np ? "place '" + net.places()[n].name + "'"
                                : "transition '" + net.transitions()[n - np].name + "'";
      return name + " is not on a path from source to sink";
    }
  }
  return std::nullopt;
}

PetriNet plan_to_petri(const RecommendedPlan& plan) {
  validate_plan(plan);
  PetriNet net;
  PlaceId source = net.add_place("source");
  net.initial_marking[source] = 1;

  std::vector<PlaceId> previous_outputs{source};
  for (std::size_t block = 0; block < plan.semesters.size(); ++block) {
    std::string split_name = block == 0 ? "tau_start" : "tau_sync_" + std::to_string(block);
    TransitionId split = net.add_transition(split_name, std::nullopt);
    for (PlaceId p : previous_outputs) net.add_arc_in(p, split);

    std::vector<PlaceId> outputs;
    for (const auto& course : plan.semesters[block]) {
      PlaceId in = net.add_place("p_in_" + course);
      PlaceId out = net.add_place("p_out_" + course);
      TransitionId t = net.add_transition(course, course);
      net.add_arc_out(split, in);
      net.add_arc_in(in, t);
      net.add_arc_out(t, out);
      outputs.push_back(out);
    }
    previous_outputs = std::move(outputs);
  }

  TransitionId end = net.add_transition("tau_end", std::nullopt);
  for (PlaceId p : previous_outputs) net.add_arc_in(p, end);
  PlaceId sink = net.add_place("sink");
  net.add_arc_out(end, sink);
  net.final_marking[sink] = 1;
  return net;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string export_pnml(const PetriNet& net, const std::string& net_id) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n";
  out << "  <net id=\"" << xml_escape(net_id) << "\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n";
  out << "    <page id=\"page1\">\n";
  for (PlaceId p = 0; p < net.places().size(); ++p) {
    out << "      <place id=\"p" << p << "\">\n        <name><text>" << xml_escape(net.places()[p].name)
        << "</text></name>\n";
    if (auto it = net.initial_marking.find(p); it != net.initial_marking.end()) {
      out << "        <initialMarking><text>" << it->second << "</text></initialMarking>\n";
    }
    out << "      </place>\n";
  }
  for (TransitionId t = 0; t < net.transitions().size(); ++t) {
    const auto& tr = net.transitions()[t];
    out << "      <transition id=\"t" << t << "\">\n        <name><text>"
        << xml_escape(tr.label.value_or(tr.name)) << "</text></name>\n";
    if (tr.silent()) {
      out << "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\"t" << t
          << "\"/>\n";
    }
    out << "      </transition>\n";
  }
  std::size_t arc = 0;
  for (TransitionId t = 0; t < net.transitions().size(); ++t) {
    for (PlaceId p : net.inputs(t)) {
      out << "      <arc id=\"a" << arc++ << "\" source=\"p" << p << "\" target=\"t" << t << "\"/>\n";
    }
    for (PlaceId p : net.outputs(t)) {
      out << "      <arc id=\"a" << arc++ << "\" source=\"t" << t << "\" target=\"p" << p << "\"/>\n";
    }
  }
  out << "    </page>\n";
  out << "    <finalmarkings>\n      <marking>\n";
  for (const auto& [p, n] : net.final_marking) {
    out << "        <place idref=\"p" << p << "\"><text>" << n << "</text></place>\n";
  }
  out << "      </marking>\n    </finalmarkings>\n";
  out << "  </net>\n</pnml>\n";
  return out.str();
}

std::string export_net_dot(const PetriNet& net) {
  std::ostringstream out;
  out << "digraph {\n  rankdir=LR;\n";
  for (PlaceId p = 0; p < net.places().size(); ++p) {
    int tokens = 0;
    if (auto it = net.initial_marking.find(p); it != net.initial_marking.end()) tokens = it->second;
    out << "  p" << p << " [shape=circle,label=\"" << (tokens ? std::to_string(tokens) : "")
        << "\",xlabel=\"" << net.places()[p].name << "\"];\n";
  }
  for (TransitionId t = 0; t < net.transitions().size(); ++t) {
    const auto& tr = net.transitions()[t];
    if (tr.silent()) {
      out << "  t" << t << " [shape=box,style=filled,fillcolor=black,label=\"\",width=0.15];\n";
    } else {
      out << "  t" << t << " [shape=box,label=\"" << *tr.label << "\"];\n";
    }
  }
  for (TransitionId t = 0; t < net.transitions().size(); ++t) {
    for (PlaceId p : net.inputs(t)) out << "  p" << p << " -> t" << t << ";\n";
    for (PlaceId p : net.outputs(t)) out << "  t" << t << " -> p" << p << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace studyplan
