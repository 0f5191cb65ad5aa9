#include "aero/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace aero {

namespace {

std::string fmt_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::below(std::uint64_t n) { return n ? next() % n : 0; }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  SplitMix64 rng(a ^ (b * 0xD1B54A32D192ED03ull) ^ (c * 0x8CB92BA72F3D8DD7ull));
  rng.next();
  return rng.next();
}

// ---- graph/benchmark/scenario files ----

json dag_to_json(const Dag& dag) {
  json j;
  j["slot_capacity"] = dag.slot_capacity();
  j["tasks"] = json::array();
  for (const auto& [id, t] : dag.tasks()) {
    json tj;
    tj["id"] = id.value;
    tj["kind"] = task_kind_name(t.kind);
    tj["exec_time_us"] = t.profile.exec_time_us;
    tj["energy_uj"] = t.profile.energy_uj;
    tj["priority"] = t.profile.priority;
    tj["version"] = t.profile.version;
    if (t.placeholder) tj["placeholder"] = true;
    j["tasks"].push_back(tj);
  }
  j["edges"] = json::array();
  for (const auto& [from, to] : dag.edges()) {
    j["edges"].push_back(json::array({from.value, to.value}));
  }
  return j;
}

Dag dag_from_json(const json& j) {
  Dag dag(j.value("slot_capacity", Dag::kDefaultSlotCapacity));
  for (const auto& tj : j.at("tasks")) {
    Task t;
    t.id = TaskId{tj.at("id").get<std::uint8_t>()};
    const std::string kind = tj.value("kind", "routine");
    auto k = task_kind_from_name(kind);
    if (!k) throw std::runtime_error("unknown task kind '" + kind + "'");
    t.kind = *k;
    t.profile.exec_time_us = tj.value("exec_time_us", 0.0);
    t.profile.energy_uj = tj.value("energy_uj", 0.0);
    t.profile.priority = tj.value("priority", 0u);
    t.profile.version = tj.value("version", 0u);
    t.placeholder = tj.value("placeholder", false);
    dag.add_task(t);
  }
  for (const auto& ej : j.at("edges")) {
    dag.add_edge(TaskId{ej.at(0).get<std::uint8_t>()},
                 TaskId{ej.at(1).get<std::uint8_t>()});
  }
  return dag;
}

double Benchmark::capacity_uj() const {
  return capacity_from_capacitor(capacitor_mf, v_max);
}

json benchmark_to_json(const Benchmark& b) {
  json j;
  j["name"] = b.name;
  j["shape"] = b.shape;
  j["capacitor_mf"] = b.capacitor_mf;
  j["v_max"] = b.v_max;
  j["dag"] = dag_to_json(b.dag);
  return j;
}

Benchmark benchmark_from_json(const json& j) {
  Benchmark b;
  b.name = j.at("name").get<std::string>();
  b.shape = j.at("shape").get<std::string>();
  b.capacitor_mf = j.at("capacitor_mf").get<double>();
  b.v_max = j.value("v_max", 3.3);
  b.dag = dag_from_json(j.at("dag"));
  validate_benchmark(b);
  return b;
}

Benchmark load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open benchmark " + path.string());
  json j = json::parse(in);
  return benchmark_from_json(j);
}

void validate_benchmark(const Benchmark& b) {
  if (b.dag.tasks().empty()) throw std::runtime_error(b.name + ": empty graph");
  for (const auto& [id, t] : b.dag.tasks()) {
    if (t.kind != TaskKind::Routine) {
      throw std::runtime_error(b.name + ": benchmark graphs hold routine tasks only");
    }
  }
  const double cap = b.capacity_uj();
  double max_energy = 0.0;
  for (const auto& [id, t] : b.dag.tasks()) {
    max_energy = std::max(max_energy, t.profile.energy_uj);
  }
  if (max_energy > cap) {
    throw std::runtime_error(b.name + ": a task exceeds the capacitor budget");
  }

  auto out_degree = [&](TaskId id) { return b.dag.successors(id).size(); };
  auto in_degree = [&](TaskId id) { return b.dag.predecessors(id).size(); };
  const auto sources = b.dag.sources();

  if (b.shape == "linear") {
    if (sources.size() != 1 ||
        b.dag.edges().size() + 1 != b.dag.tasks().size()) {
      throw std::runtime_error(b.name + ": not a chain");
    }
    for (const auto& [id, t] : b.dag.tasks()) {
      if (out_degree(id) > 1 || in_degree(id) > 1) {
        throw std::runtime_error(b.name + ": not a chain");
      }
    }
  } else if (b.shape == "parallel") {
    if (sources.size() < 2) {
      throw std::runtime_error(b.name + ": needs at least two disjoint paths");
    }
  } else if (b.shape == "fork_join") {
    bool fork = false, join = false;
    for (const auto& [id, t] : b.dag.tasks()) {
      fork = fork || out_degree(id) >= 2;
      join = join || in_degree(id) >= 2;
    }
    if (!fork || !join) {
      throw std::runtime_error(b.name + ": needs a fork and a join");
    }
  } else {
    throw std::runtime_error(b.name + ": unknown shape '" + b.shape + "'");
  }
}

std::size_t Scenario::total_payload() const {
  std::size_t total = 0;
  for (const auto& m : members) total += m.payload_bytes;
  return total;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  json j = json::parse(in);

  Scenario s;
  s.id = j.at("id").get<int>();
  s.name = j.value("name", "scenario-" + std::to_string(s.id));
  s.description = j.value("description", "");
  const std::filesystem::path bench =
      path.parent_path() / j.at("benchmark").get<std::string>();
  s.benchmark = load_benchmark(bench);
  s.arrival_lo_us = j.at("arrival_window_s").at(0).get<double>() * 1e6;
  s.arrival_hi_us = j.at("arrival_window_s").at(1).get<double>() * 1e6;
  s.horizon_us = j.at("horizon_s").get<double>() * 1e6;
  if (!(s.arrival_lo_us < s.arrival_hi_us && s.arrival_hi_us < s.horizon_us)) {
    throw std::runtime_error(s.name + ": arrival window must sit inside the horizon");
  }
  for (const auto& mj : j.at("members")) {
    ScenarioMember m;
    const std::string op = mj.at("op").get<std::string>();
    if (op == "modify") m.op = UpdateOp::Modify;
    else if (op == "insert") m.op = UpdateOp::Insert;
    else if (op == "remove") m.op = UpdateOp::Remove;
    else throw std::runtime_error(s.name + ": unknown op '" + op + "'");
    m.target = TaskId{mj.at("task").get<std::uint8_t>()};
    m.payload_bytes = mj.at("payload_bytes").get<std::size_t>();
    if (mj.contains("deps")) {
      for (const auto& d : mj.at("deps")) {
        m.deps.push_back(TaskId{d.get<std::uint8_t>()});
      }
    }
    if (mj.contains("profile")) {
      TaskProfile p;
      p.exec_time_us = mj.at("profile").at("exec_time_us").get<double>();
      p.energy_uj = mj.at("profile").at("energy_uj").get<double>();
      p.priority = mj.at("profile").value("priority", 0u);
      m.insert_profile = p;
    }
    if (m.op == UpdateOp::Insert && !m.insert_profile) {
      throw std::runtime_error(s.name + ": insert member needs a profile");
    }
    s.members.push_back(std::move(m));
  }
  if (s.members.empty()) throw std::runtime_error(s.name + ": no members");
  return s;
}

std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  std::sort(out.begin(), out.end(),
            [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

std::vector<UpdatePacket> scenario_packets(const Scenario& s) {
  TaskBitmap group;
  for (const auto& m : s.members) group.set(m.target);

  SplitMix64 rng(mix_seed(0xAE20, static_cast<std::uint64_t>(s.id)));
  std::vector<UpdatePacket> packets;
  std::uint8_t seq = 0;
  for (const auto& m : s.members) {
    UpdatePacket p;
    p.seq = seq;
    if (seq == 0) p.group_field = group;
    p.opcode = to_opcode(m.op);
    p.task_id = m.target;
    if (!m.deps.empty()) {
      TaskBitmap deps;
      for (TaskId d : m.deps) deps.set(d);
      p.dag_flag = true;
      p.dep_field = deps;
    }
    p.code_segment.resize(m.payload_bytes);
    for (auto& byte : p.code_segment) {
      byte = static_cast<std::uint8_t>(rng.next() & 0xFF);
    }
    packets.push_back(std::move(p));
    ++seq;
  }
  return packets;
}

UpdateNotification make_notification(const Scenario& s, double arrival_us) {
  const std::size_t n_max = s.benchmark.dag.slot_capacity();
  std::vector<UpdatePacket> decoded;
  for (const auto& p : scenario_packets(s)) {
    decoded.push_back(decode_packet(encode_packet(p, n_max), n_max));
  }
  UpdateNotification notif;
  notif.arrival_us = arrival_us;
  notif.bundle = assemble_bundle(std::move(decoded), n_max);
  for (const auto& m : s.members) {
    if (m.insert_profile) notif.insert_profiles[m.target] = *m.insert_profile;
  }
  return notif;
}

// ---- experiments ----

VersionAudit audit_mixed_versions(const std::vector<Event>& events,
                                  const Dag& original, const UpdateGroup& group) {
  std::map<TaskId, std::uint32_t> baseline;
  for (const auto& m : group.members) {
    if (m.op == UpdateOp::Insert) continue;
    if (original.has_task(m.target)) {
      baseline[m.target] = original.task(m.target).profile.version;
    }
  }

  VersionAudit audit;
  std::map<std::uint32_t, std::pair<bool, bool>> seen;  // iteration -> (old, new)
  for (const Event& e : events) {
    if (e.kind == EventKind::MemberInterrupted) audit.interrupted = true;
    if (e.kind != EventKind::Complete || !e.task) continue;
    auto it = baseline.find(*e.task);
    if (it == baseline.end()) continue;
    const bool post = e.version && *e.version > it->second;
    auto& flags = seen[e.iteration];
    (post ? flags.second : flags.first) = true;
    if (flags.first && flags.second) audit.mixed = true;
  }
  return audit;
}

SingleRun run_single(const Scenario& s, Approach approach,
                     const ExperimentConfig& cfg, std::size_t run_index) {
  // Arrival depends on (seed, scenario, run) only, never on the approach, so
  // the three mechanisms face identical arrival samples.
  const std::uint64_t run_seed =
      mix_seed(cfg.seed, static_cast<std::uint64_t>(s.id), run_index);
  SplitMix64 rng(run_seed);
  const double arrival_us =
      s.arrival_lo_us + rng.unit() * (s.arrival_hi_us - s.arrival_lo_us);

  UpdateNotification notif = make_notification(s, arrival_us);
  const UpdateGroup group = notif.bundle.group();

  SimConfig sim;
  sim.dag = s.benchmark.dag;
  sim.capacity_uj = s.benchmark.capacity_uj();
  sim.initial_stored_fraction = cfg.initial_stored_fraction;
  sim.trace = cfg.trace;
  sim.policy = cfg.policy;
  sim.costs = cfg.costs;
  sim.approach = approach;
  sim.horizon_us = s.horizon_us;
  sim.update = std::move(notif);
  sim.seed = run_seed;

  SingleRun out;
  out.sim = simulate(std::move(sim));
  const auto audit = audit_mixed_versions(out.sim.events, s.benchmark.dag, group);
  out.record.run_index = run_index;
  out.record.seed = run_seed;
  out.record.arrival_us = arrival_us;
  out.record.error = audit.mixed || audit.interrupted;
  out.record.aborted = out.sim.update_aborted;
  out.record.completion_us = out.sim.completion_us.value_or(-1.0);
  out.record.dmr = out.sim.dmr();
  out.record.misses = out.sim.deadline_misses;
  out.record.instances = out.sim.routine_instances;
  return out;
}

Metrics run_experiment(const Scenario& s, Approach approach,
                       const ExperimentConfig& cfg) {
  Metrics m;
  m.scenario = std::to_string(s.id);
  m.approach = approach_name(approach);
  m.runs = cfg.runs;

  double completion_sum = 0.0;
  std::size_t completion_n = 0;
  double dmr_sum = 0.0;
  std::size_t errors = 0;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    SingleRun one = run_single(s, approach, cfg, r);
    if (one.record.error) ++errors;
    if (one.record.completion_us >= 0.0) {
      completion_sum += one.record.completion_us;
      ++completion_n;
    }
    dmr_sum += one.record.dmr;
    m.records.push_back(one.record);
  }
  m.error_rate = cfg.runs ? static_cast<double>(errors) / cfg.runs : 0.0;
  m.mean_completion_us = completion_n ? completion_sum / completion_n : 0.0;
  m.mean_dmr = cfg.runs ? dmr_sum / cfg.runs : 0.0;
  return m;
}

Dag offline_apply_oracle(const Dag& original, const UpdateBundle& bundle,
                         const std::map<TaskId, TaskProfile>& insert_profiles) {
  std::set<TaskId> removed;
  std::set<TaskId> inserted;
  for (const auto& m : bundle.members) {
    if (m.op == UpdateOp::Insert) {
      if (original.has_task(m.target)) {
        throw UpdateError(UpdateErrc::TargetExists,
                          "oracle: insert target occupied");
      }
      auto it = insert_profiles.find(m.target);
      if (it == insert_profiles.end() || it->second.exec_time_us <= 0.0 ||
          it->second.energy_uj <= 0.0) {
        throw UpdateError(UpdateErrc::MissingInsertProfile,
                          "oracle: insert member lacks a profile");
      }
      inserted.insert(m.target);
    } else {
      if (!original.has_task(m.target) ||
          original.task(m.target).kind != TaskKind::Routine ||
          original.task(m.target).placeholder) {
        throw UpdateError(UpdateErrc::UnknownTask,
                          "oracle: member target is not a live routine task");
      }
      if (m.op == UpdateOp::Remove) removed.insert(m.target);
    }
  }

  Dag out(original.slot_capacity());
  for (const auto& [id, t] : original.tasks()) {
    if (removed.contains(id)) continue;
    Task copy = t;
    copy.status = TaskStatus::NotReady;
    out.add_task(copy);
  }
  for (TaskId id : inserted) {
    Task t;
    t.id = id;
    t.kind = TaskKind::Routine;
    t.profile = insert_profiles.at(id);
    out.add_task(t);
  }
  for (const Edge& e : original.edges()) {
    if (out.has_task(e.first) && out.has_task(e.second)) {
      out.add_edge(e.first, e.second);
    }
  }
  for (const auto& m : bundle.members) {
    if (!m.deps || m.op == UpdateOp::Remove) continue;
    for (TaskId dep : m.deps->set_ids()) {
      const bool known =
          (original.has_task(dep) &&
           original.task(dep).kind == TaskKind::Routine &&
           !original.task(dep).placeholder) ||
          inserted.contains(dep);
      if (!known) {
        throw UpdateError(UpdateErrc::InvalidDependency,
                          "oracle: dependency names no routine task");
      }
      if (removed.contains(dep)) continue;
      try {
        out.add_edge(dep, m.target);
      } catch (const DagError& err) {
        if (err.code() == DagErrc::CycleDetected) {
          throw UpdateError(UpdateErrc::CycleDetected,
                            "oracle: dependency edges close a cycle");
        }
        throw;
      }
    }
  }
  for (const auto& m : bundle.members) {
    if (m.op == UpdateOp::Modify) out.task(m.target).profile.version += 1;
  }
  return out;
}

// ---- sweeps & reports ----

SweepResult run_sweep(const std::vector<Scenario>& scenarios,
                      const std::vector<Approach>& approaches,
                      const ExperimentConfig& cfg, std::size_t jobs) {
  if (jobs == 0) {
    jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  struct Cell {
    const Scenario* scenario;
    Approach approach;
  };
  std::vector<Cell> cells;
  for (const auto& s : scenarios) {
    for (Approach a : approaches) cells.push_back({&s, a});
  }

  SweepResult result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      result.cells[i] = run_experiment(*cells[i].scenario, cells[i].approach, cfg);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < std::min(jobs, cells.size()); ++i) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) t.join();
  return result;
}

std::string sweep_summary_csv(const SweepResult& r) {
  std::string out = "scenario,approach,runs,error_rate,mean_completion_ms,mean_dmr\n";
  for (const Metrics& m : r.cells) {
    out += m.scenario + "," + m.approach + "," + std::to_string(m.runs) + "," +
           fmt_double(m.error_rate, 6) + "," +
           fmt_double(m.mean_completion_us / 1000.0, 6) + "," +
           fmt_double(m.mean_dmr, 6) + "\n";
  }
  return out;
}

std::string run_records_csv(const Metrics& m) {
  std::string out =
      "run_index,seed,arrival_us,error,aborted,completion_us,dmr,misses,instances\n";
  for (const RunRecord& r : m.records) {
    out += std::to_string(r.run_index) + "," + std::to_string(r.seed) + "," +
           fmt_double(r.arrival_us, 6) + "," + (r.error ? "1" : "0") + "," +
           (r.aborted ? "1" : "0") + "," + fmt_double(r.completion_us, 6) +
           "," + fmt_double(r.dmr, 6) + "," + std::to_string(r.misses) + "," +
           std::to_string(r.instances) + "\n";
  }
  return out;
}

json metrics_to_json(const Metrics& m) {
  json j;
  j["scenario"] = m.scenario;
  j["approach"] = m.approach;
  j["runs"] = m.runs;
  j["error_rate"] = m.error_rate;
  j["mean_completion_us"] = m.mean_completion_us;
  j["mean_dmr"] = m.mean_dmr;
  return j;
}

}  // namespace aero
