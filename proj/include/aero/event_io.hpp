#pragma once

#include <string>
#include <vector>

#include "aero/schedule.hpp"

namespace aero {

// Fixed-format writers: identical inputs produce identical bytes.
std::string events_to_csv(const std::vector<Event>& events);
std::string events_to_jsonl(const std::vector<Event>& events);

}  // namespace aero
