#include "aero/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aero {

namespace {
constexpr double kUsPerSecond = 1e6;
}

const char* EnergyError::name() const {
  switch (code_) {
    case EnergyErrc::NonPositiveInput: return "NonPositiveInput";
    case EnergyErrc::TaskExceedsCapacity: return "TaskExceedsCapacity";
    case EnergyErrc::StarvedForever: return "StarvedForever";
    case EnergyErrc::BadTrace: return "BadTrace";
  }
  return "EnergyError";
}

HarvestTrace::HarvestTrace(std::vector<TracePoint> samples)
    : samples_(std::move(samples)) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& p : samples_) {
    if (p.time_s <= prev) {
      throw EnergyError(EnergyErrc::BadTrace, "timestamps must strictly increase");
    }
    if (p.power_uw < 0.0 || !std::isfinite(p.power_uw) || !std::isfinite(p.time_s)) {
      throw EnergyError(EnergyErrc::BadTrace, "power must be finite and >= 0");
    }
    prev = p.time_s;
  }
}

HarvestTrace HarvestTrace::constant(double power_uw) {
  return HarvestTrace({{0.0, power_uw}});
}

HarvestTrace HarvestTrace::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw EnergyError(EnergyErrc::BadTrace, "cannot open trace " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("timestamp_s,power_uw", 0) != 0) {
    throw EnergyError(EnergyErrc::BadTrace,
                      "trace must start with header 'timestamp_s,power_uw'");
  }
  std::vector<TracePoint> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    TracePoint p;
    char comma = 0;
    if (!(ss >> p.time_s >> comma >> p.power_uw) || comma != ',') {
      throw EnergyError(EnergyErrc::BadTrace,
                        "bad trace row at line " + std::to_string(lineno));
    }
    pts.push_back(p);
  }
  return HarvestTrace(std::move(pts));
}

void HarvestTrace::to_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  out << "timestamp_s,power_uw\n";
  char buf[64];
  for (const auto& p : samples_) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", p.time_s, p.power_uw);
    out << buf;
  }
}

double HarvestTrace::power_at_us(double t_us) const {
  const double t = t_us / kUsPerSecond;
  if (samples_.empty() || t < samples_.front().time_s) return 0.0;
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), t,
      [](double v, const TracePoint& p) { return v < p.time_s; });
  return std::prev(it)->power_uw;
}

double HarvestTrace::energy_between_us(double t0_us, double t1_us) const {
  if (t1_us <= t0_us) return 0.0;
  const double t0 = t0_us / kUsPerSecond;
  const double t1 = t1_us / kUsPerSecond;
  double acc = 0.0;
  double cursor = t0;
  for (std::size_t i = 0; i < samples_.size() && cursor < t1; ++i) {
    const double seg_start = samples_[i].time_s;
    const double seg_end =
        (i + 1 < samples_.size()) ? samples_[i + 1].time_s : t1;
    const double lo = std::max(cursor, seg_start);
    const double hi = std::min(t1, seg_end);
    if (hi > lo) {
      acc += samples_[i].power_uw * (hi - lo);
      cursor = hi;
    }
  }
  return acc;  // µW * s = µJ
}

double HarvestTrace::time_to_harvest_us(double from_us, double energy_uj) const {
  if (energy_uj <= 0.0) return 0.0;
  double remaining = energy_uj;
  double t = from_us / kUsPerSecond;

  // Walk segment boundaries; within a segment power is constant.
  std::size_t i = 0;
  while (i < samples_.size() && samples_[i].time_s <= t) ++i;
  // i points at the first boundary strictly after t.
  while (true) {
    const double power = (i == 0) ? 0.0 : samples_[i - 1].power_uw;
    const bool last = (i == samples_.size());
    const double seg_end = last ? std::numeric_limits<double>::infinity()
                                : samples_[i].time_s;
    if (power > 0.0) {
      const double dt = remaining / power;
      if (t + dt <= seg_end) return (t + dt) * kUsPerSecond - from_us;
      remaining -= power * (seg_end - t);
    } else if (last) {
      return -1.0;  // flat zero tail: unreachable
    }
    t = seg_end;
    ++i;
  }
}

HarvestTrace HarvestTrace::scaled(double factor) const {
  std::vector<TracePoint> pts = samples_;
  for (auto& p : pts) p.power_uw *= factor;
  return HarvestTrace(std::move(pts));
}

double capacity_from_capacitor(double c_mf, double v_max) {
  if (c_mf <= 0.0 || v_max <= 0.0) {
    throw EnergyError(EnergyErrc::NonPositiveInput,
                      "capacitance and voltage must be positive");
  }
  // 0.5 * (c_mf * 1e-3 F) * V^2 joules = 500 * c_mf * V^2 microjoules.
  return 500.0 * c_mf * v_max * v_max;
}

double harvest(EnergyState& state, const HarvestTrace& trace, double until_us) {
  if (until_us < state.now_us) {
    throw EnergyError(EnergyErrc::BadTrace, "harvest target before current time");
  }
  const double raw = trace.energy_between_us(state.now_us, until_us);
  const double credited = std::min(raw, state.capacity_uj - state.stored_uj);
  state.stored_uj += credited;
  state.now_us = until_us;
  return credited;
}

AcquireResult acquire_for_task(EnergyState& state, const HarvestTrace& trace,
                               double cost_uj) {
  if (cost_uj > state.capacity_uj) {
    throw EnergyError(EnergyErrc::TaskExceedsCapacity,
                      "task needs " + std::to_string(cost_uj) +
                          " uJ but capacity is " +
                          std::to_string(state.capacity_uj) + " uJ");
  }
  AcquireResult res;
  if (state.stored_uj < cost_uj) {
    const double deficit = cost_uj - state.stored_uj;
    const double dt = trace.time_to_harvest_us(state.now_us, deficit);
    if (dt < 0.0) {
      throw EnergyError(EnergyErrc::StarvedForever,
                        "no harvest power left and stored energy is short");
    }
    res.wait_us = dt;
    // time_to_harvest_us inverted the integral, so the credit is exactly the
    // deficit; re-integrating would only reintroduce rounding.
    res.credited_uj = deficit;
    state.stored_uj = cost_uj;
    state.now_us += dt;
  }
  state.stored_uj -= cost_uj;
  return res;
}

}  // namespace aero
