#include "aero/event_io.hpp"

#include <cstdio>

namespace aero {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string events_to_csv(const std::vector<Event>& events) {
  std::string out =
      "time_us,event,iteration,task,energy_before_uj,energy_after_uj,"
      "deadline_miss,deadline_us,priority,version,edge_from,edge_to,detail\n";
  for (const Event& e : events) {
    out += num(e.time_us);
    out += ',';
    out += event_kind_name(e.kind);
    out += ',';
    out += std::to_string(e.iteration);
    out += ',';
    if (e.task) out += std::to_string(e.task->value);
    out += ',';
    out += num(e.energy_before_uj);
    out += ',';
    out += num(e.energy_after_uj);
    out += ',';
    if (e.deadline_miss) out += *e.deadline_miss ? "miss" : "met";
    out += ',';
    if (e.deadline_us) out += num(*e.deadline_us);
    out += ',';
    if (e.priority) out += std::to_string(*e.priority);
    out += ',';
    if (e.version) out += std::to_string(*e.version);
    out += ',';
    if (e.edge) out += std::to_string(e.edge->first.value);
    out += ',';
    if (e.edge) out += std::to_string(e.edge->second.value);
    out += ',';
    out += e.detail;
    out += '\n';
  }
  return out;
}

std::string events_to_jsonl(const std::vector<Event>& events) {
  std::string out;
  for (const Event& e : events) {
    out += "{\"time_us\":" + num(e.time_us);
    out += ",\"event\":\"" + std::string(event_kind_name(e.kind)) + "\"";
    out += ",\"iteration\":" + std::to_string(e.iteration);
    if (e.task) out += ",\"task\":" + std::to_string(e.task->value);
    out += ",\"energy_before_uj\":" + num(e.energy_before_uj);
    out += ",\"energy_after_uj\":" + num(e.energy_after_uj);
    if (e.deadline_miss) {
      out += std::string(",\"deadline_miss\":") + (*e.deadline_miss ? "true" : "false");
    }
    if (e.deadline_us) out += ",\"deadline_us\":" + num(*e.deadline_us);
    if (e.priority) out += ",\"priority\":" + std::to_string(*e.priority);
    if (e.version) out += ",\"version\":" + std::to_string(*e.version);
    if (e.edge) {
      out += ",\"edge\":[" + std::to_string(e.edge->first.value) + "," +
             std::to_string(e.edge->second.value) + "]";
    }
    if (!e.detail.empty()) out += ",\"detail\":\"" + e.detail + "\"";
    out += "}\n";
  }
  return out;
}

}  // namespace aero
