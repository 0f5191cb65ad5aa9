#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace aero {

enum class EnergyErrc {
  NonPositiveInput,
  TaskExceedsCapacity,
  StarvedForever,
  BadTrace,
};

class EnergyError : public std::runtime_error {
 public:
  EnergyError(EnergyErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  EnergyErrc code() const { return code_; }
  const char* name() const;

 private:
  EnergyErrc code_;
};

struct TracePoint {
  double time_s{0.0};
  double power_uw{0.0};
};

// Harvest power over time, zero-order held between samples. Power before the
// first sample is zero; the last sample's power holds forever after.
class HarvestTrace {
 public:
  HarvestTrace() = default;
  explicit HarvestTrace(std::vector<TracePoint> samples);

  static HarvestTrace constant(double power_uw);
  static HarvestTrace from_csv(const std::filesystem::path& path);
  void to_csv(const std::filesystem::path& path) const;

  const std::vector<TracePoint>& samples() const { return samples_; }

  double power_at_us(double t_us) const;
  // Integral of power over [t0, t1], in microjoules.
  double energy_between_us(double t0_us, double t1_us) const;
  // Smallest dt >= 0 with energy_between_us(t, t+dt) >= energy_uj, or a
  // negative value when the tail power is zero and the target is unreachable.
  double time_to_harvest_us(double from_us, double energy_uj) const;

  HarvestTrace scaled(double factor) const;

 private:
  std::vector<TracePoint> samples_;
};

struct EnergyState {
  double stored_uj{0.0};
  double capacity_uj{0.0};
  double now_us{0.0};
};

// 1/2 C V^2, with capacitance in millifarads, in microjoules.
double capacity_from_capacitor(double c_mf, double v_max);

// Accrue harvest up to `until_us`, clamping at capacity. Returns the credited
// (post-clamp) energy so callers can keep a conservation balance.
double harvest(EnergyState& state, const HarvestTrace& trace, double until_us);

struct AcquireResult {
  double wait_us{0.0};
  double credited_uj{0.0};  // harvest credited while waiting
};

// Block until stored energy covers `cost_uj`, then deduct it atomically.
AcquireResult acquire_for_task(EnergyState& state, const HarvestTrace& trace,
                               double cost_uj);

}  // namespace aero
