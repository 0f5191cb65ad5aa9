#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aero/simulate.hpp"

namespace aero {

using json = nlohmann::ordered_json;

// Deterministic split-mix generator; the standard distributions are
// implementation-defined, so every random draw in the harness goes through
// this.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double unit();  // [0, 1)
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// ---- graph/benchmark/scenario files ----

json dag_to_json(const Dag& dag);
Dag dag_from_json(const json& j);

struct Benchmark {
  std::string name;
  std::string shape;  // linear | parallel | fork_join
  double capacitor_mf{0.0};
  double v_max{3.3};
  Dag dag;

  double capacity_uj() const;
};

json benchmark_to_json(const Benchmark& b);
Benchmark benchmark_from_json(const json& j);
Benchmark load_benchmark(const std::filesystem::path& path);
void validate_benchmark(const Benchmark& b);  // shape + sizing invariants

struct ScenarioMember {
  UpdateOp op{UpdateOp::Modify};
  TaskId target{};
  std::size_t payload_bytes{0};
  std::vector<TaskId> deps;  // dependency field, when non-empty
  std::optional<TaskProfile> insert_profile;
};

struct Scenario {
  int id{0};
  std::string name;
  std::string description;
  Benchmark benchmark;
  std::vector<ScenarioMember> members;
  double arrival_lo_us{0.0};
  double arrival_hi_us{0.0};
  double horizon_us{0.0};

  std::size_t total_payload() const;
};

Scenario load_scenario(const std::filesystem::path& path);
std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir);

// Packets for a scenario, payload bytes filled deterministically from the
// scenario id. Encoding and reassembling them is part of every run, so the
// wire format sits on the simulation path.
std::vector<UpdatePacket> scenario_packets(const Scenario& s);
UpdateNotification make_notification(const Scenario& s, double arrival_us);

// ---- experiments ----

struct ExperimentConfig {
  HarvestTrace trace;
  DeadlinePolicy policy;
  UpdateCosts costs;
  double initial_stored_fraction{1.0};
  std::size_t runs{100};
  std::uint64_t seed{1};
};

struct RunRecord {
  std::size_t run_index{0};
  std::uint64_t seed{0};
  double arrival_us{0.0};
  bool error{false};
  bool aborted{false};
  double completion_us{0.0};
  double dmr{0.0};
  std::uint64_t misses{0};
  std::uint64_t instances{0};
};

struct Metrics {
  std::string scenario;
  std::string approach;
  std::size_t runs{0};
  double error_rate{0.0};
  double mean_completion_us{0.0};
  double mean_dmr{0.0};
  std::vector<RunRecord> records;
};

struct VersionAudit {
  bool mixed{false};
  bool interrupted{false};
};

// Scans an event log for iterations that executed group members under
// different versions, and for arrivals that landed inside a member's
// execution. This is the error-rate ground truth for every approach.
VersionAudit audit_mixed_versions(const std::vector<Event>& events,
                                  const Dag& original, const UpdateGroup& group);

struct SingleRun {
  RunResult sim;
  RunRecord record;
};

SingleRun run_single(const Scenario& s, Approach approach,
                     const ExperimentConfig& cfg, std::size_t run_index);
Metrics run_experiment(const Scenario& s, Approach approach,
                       const ExperimentConfig& cfg);

// Ground truth for finalize: the group applied directly to a copy of the
// original graph, no scheduling involved. Implemented independently of the
// engine's apply path on purpose.
Dag offline_apply_oracle(const Dag& original, const UpdateBundle& bundle,
                         const std::map<TaskId, TaskProfile>& insert_profiles);

// ---- sweeps & reports ----

struct SweepResult {
  std::vector<Metrics> cells;  // scenario-major, approach-minor
};

SweepResult run_sweep(const std::vector<Scenario>& scenarios,
                      const std::vector<Approach>& approaches,
                      const ExperimentConfig& cfg, std::size_t jobs = 0);

std::string sweep_summary_csv(const SweepResult& r);
std::string run_records_csv(const Metrics& m);
json metrics_to_json(const Metrics& m);

}  // namespace aero
