#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aero/event_io.hpp"
#include "aero/harness.hpp"

namespace py = pybind11;
using namespace aero;

namespace {

UpdateOp op_from_string(const std::string& s) {
  if (s == "modify") return UpdateOp::Modify;
  if (s == "insert") return UpdateOp::Insert;
  if (s == "remove") return UpdateOp::Remove;
  throw py::value_error("unknown op '" + s + "'");
}

UpdatePacket packet_from_kwargs(int seq, int task_id, const std::string& opcode,
                                const py::bytes& code,
                                const std::optional<std::vector<int>>& group,
                                const std::optional<std::vector<int>>& deps) {
  UpdatePacket p;
  p.seq = static_cast<std::uint8_t>(seq);
  p.task_id = TaskId{static_cast<std::uint8_t>(task_id)};
  p.opcode = to_opcode(op_from_string(opcode));
  if (group) {
    TaskBitmap bm;
    for (int id : *group) bm.set(TaskId{static_cast<std::uint8_t>(id)});
    p.group_field = bm;
  }
  if (deps) {
    TaskBitmap bm;
    for (int id : *deps) bm.set(TaskId{static_cast<std::uint8_t>(id)});
    p.dep_field = bm;
    p.dag_flag = true;
  }
  const std::string raw = code;
  p.code_segment.assign(raw.begin(), raw.end());
  return p;
}

py::dict packet_to_dict(const UpdatePacket& p) {
  py::dict d;
  d["seq"] = p.seq;
  if (p.group_field) {
    py::list ids;
    for (auto id : p.group_field->set_ids()) ids.append(id.value);
    d["group"] = ids;
  } else {
    d["group"] = py::none();
  }
  switch (p.opcode) {
    case UpdateOpCode::ModifyExisting: d["opcode"] = "modify"; break;
    case UpdateOpCode::InsertNew: d["opcode"] = "insert"; break;
    case UpdateOpCode::RemoveObsolete: d["opcode"] = "remove"; break;
  }
  d["dag_flag"] = p.dag_flag;
  d["task_id"] = p.task_id.value;
  if (p.dep_field) {
    py::list ids;
    for (auto id : p.dep_field->set_ids()) ids.append(id.value);
    d["deps"] = ids;
  } else {
    d["deps"] = py::none();
  }
  d["code"] = py::bytes(std::string(p.code_segment.begin(), p.code_segment.end()));
  return d;
}

py::dict metrics_to_dict(const Metrics& m) {
  py::dict d;
  d["scenario"] = m.scenario;
  d["approach"] = m.approach;
  d["runs"] = m.runs;
  d["error_rate"] = m.error_rate;
  d["mean_completion_us"] = m.mean_completion_us;
  d["mean_dmr"] = m.mean_dmr;
  py::list records;
  for (const auto& r : m.records) {
    py::dict rd;
    rd["run_index"] = r.run_index;
    rd["seed"] = r.seed;
    rd["arrival_us"] = r.arrival_us;
    rd["error"] = r.error;
    rd["completion_us"] = r.completion_us;
    rd["dmr"] = r.dmr;
    records.append(rd);
  }
  d["records"] = records;
  return d;
}

}  // namespace

PYBIND11_MODULE(_aero, m) {
  m.doc() = "Runtime-aware OTA update simulator for energy-harvesting task graphs";

  py::register_exception<DagError>(m, "DagError");
  py::register_exception<CodecError>(m, "CodecError");
  py::register_exception<BundleError>(m, "BundleError");
  py::register_exception<EnergyError>(m, "EnergyError");
  py::register_exception<UpdateError>(m, "UpdateError");

  py::class_<Dag>(m, "Dag")
      .def(py::init<std::size_t>(), py::arg("slot_capacity") = 32)
      .def(
          "add_task",
          [](Dag& dag, int id, double exec_time_us, double energy_uj,
             unsigned priority, const std::string& kind) {
            Task t;
            t.id = TaskId{static_cast<std::uint8_t>(id)};
            auto k = task_kind_from_name(kind);
            if (!k) throw py::value_error("unknown kind '" + kind + "'");
            t.kind = *k;
            t.profile = {exec_time_us, energy_uj, priority, 0};
            dag.add_task(t);
          },
          py::arg("id"), py::arg("exec_time_us"), py::arg("energy_uj"),
          py::arg("priority") = 0, py::arg("kind") = "routine")
      .def("add_edge",
           [](Dag& dag, int from, int to) {
             dag.add_edge(TaskId{static_cast<std::uint8_t>(from)},
                          TaskId{static_cast<std::uint8_t>(to)});
           })
      .def("remove_task",
           [](Dag& dag, int id) { dag.remove_task(TaskId{static_cast<std::uint8_t>(id)}); })
      .def("sources",
           [](const Dag& dag) {
             std::vector<int> out;
             for (auto id : dag.sources()) out.push_back(id.value);
             return out;
           })
      .def("edges",
           [](const Dag& dag) {
             std::vector<std::pair<int, int>> out;
             for (const auto& [f, t] : dag.edges()) out.push_back({f.value, t.value});
             return out;
           })
      .def("task_ids",
           [](const Dag& dag) {
             std::vector<int> out;
             for (const auto& [id, t] : dag.tasks()) out.push_back(id.value);
             return out;
           })
      .def("version",
           [](const Dag& dag, int id) {
             return dag.task(TaskId{static_cast<std::uint8_t>(id)}).profile.version;
           })
      .def("topological_order",
           [](const Dag& dag) {
             std::vector<int> out;
             for (auto id : dag.topological_order()) out.push_back(id.value);
             return out;
           })
      .def("to_json", [](const Dag& dag) { return dag_to_json(dag).dump(2); })
      .def_static("from_json",
                  [](const std::string& text) { return dag_from_json(json::parse(text)); })
      .def("__len__", [](const Dag& dag) { return dag.tasks().size(); });

  m.def(
      "compute_affected_block",
      [](const Dag& dag, const std::vector<std::pair<int, std::string>>& members) {
        UpdateGroup group;
        for (const auto& [id, op] : members) {
          group.members.push_back(
              {TaskId{static_cast<std::uint8_t>(id)}, op_from_string(op)});
        }
        const auto block = compute_affected_block(dag, group);
        std::vector<int> nodes;
        for (auto id : block.nodes) nodes.push_back(id.value);
        std::vector<std::pair<int, int>> edges;
        for (const auto& [f, t] : block.blocked_edges) edges.push_back({f.value, t.value});
        return py::make_tuple(nodes, edges);
      },
      py::arg("dag"), py::arg("members"),
      "Affected block of a group given as [(task_id, op), ...]; returns "
      "(nodes, blocked_entry_edges).");

  m.def(
      "encode_packet",
      [](int seq, int task_id, const std::string& opcode, const py::bytes& code,
         const std::optional<std::vector<int>>& group,
         const std::optional<std::vector<int>>& deps, std::size_t n_max) {
        const auto bytes =
            encode_packet(packet_from_kwargs(seq, task_id, opcode, code, group, deps), n_max);
        return py::bytes(std::string(bytes.begin(), bytes.end()));
      },
      py::arg("seq"), py::arg("task_id"), py::arg("opcode"), py::arg("code"),
      py::arg("group") = py::none(), py::arg("deps") = py::none(),
      py::arg("n_max") = 32);

  m.def(
      "decode_packet",
      [](const py::bytes& raw, std::size_t n_max) {
        const std::string s = raw;
        const auto p = decode_packet(
            std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(s.data()), s.size()),
            n_max);
        return packet_to_dict(p);
      },
      py::arg("raw"), py::arg("n_max") = 32);

  m.def("capacity_from_capacitor", &capacity_from_capacitor, py::arg("c_mf"),
        py::arg("v_max"), "Stored energy of a capacitor in microjoules.");

  py::class_<HarvestTrace>(m, "HarvestTrace")
      .def_static("constant", &HarvestTrace::constant, py::arg("power_uw"))
      .def_static("from_csv",
                  [](const std::string& path) { return HarvestTrace::from_csv(path); })
      .def("power_at_us", &HarvestTrace::power_at_us)
      .def("energy_between_us", &HarvestTrace::energy_between_us);

  py::class_<EnergyState>(m, "EnergyState")
      .def(py::init([](double stored_uj, double capacity_uj) {
             return EnergyState{stored_uj, capacity_uj, 0.0};
           }),
           py::arg("stored_uj"), py::arg("capacity_uj"))
      .def_readwrite("stored_uj", &EnergyState::stored_uj)
      .def_readwrite("capacity_uj", &EnergyState::capacity_uj)
      .def_readwrite("now_us", &EnergyState::now_us);

  m.def(
      "harvest",
      [](EnergyState& state, const HarvestTrace& trace, double until_us) {
        return harvest(state, trace, until_us);
      },
      py::arg("state"), py::arg("trace"), py::arg("until_us"),
      "Accrue harvest up to a time; returns the credited energy.");

  m.def(
      "acquire_for_task",
      [](EnergyState& state, const HarvestTrace& trace, double cost_uj) {
        const auto res = acquire_for_task(state, trace, cost_uj);
        return res.wait_us;
      },
      py::arg("state"), py::arg("trace"), py::arg("cost_uj"),
      "Wait until the stored energy covers the cost, deduct it, return the wait.");

  m.def(
      "run_experiment",
      [](const std::string& scenario_path, const std::string& approach,
         const std::string& trace_path, std::uint64_t seed, std::size_t runs) {
        const Scenario scenario = load_scenario(scenario_path);
        const auto a = approach_from_name(approach);
        if (!a) throw py::value_error("unknown approach '" + approach + "'");
        ExperimentConfig cfg;
        cfg.trace = HarvestTrace::from_csv(trace_path);
        cfg.seed = seed;
        cfg.runs = runs;
        return metrics_to_dict(run_experiment(scenario, *a, cfg));
      },
      py::arg("scenario_path"), py::arg("approach"), py::arg("trace_path"),
      py::arg("seed") = 1, py::arg("runs") = 20);

  m.def(
      "simulate_events_csv",
      [](const std::string& scenario_path, const std::string& approach,
         const std::string& trace_path, std::uint64_t seed, std::size_t run_index) {
        const Scenario scenario = load_scenario(scenario_path);
        const auto a = approach_from_name(approach);
        if (!a) throw py::value_error("unknown approach '" + approach + "'");
        ExperimentConfig cfg;
        cfg.trace = HarvestTrace::from_csv(trace_path);
        cfg.seed = seed;
        const auto one = run_single(scenario, *a, cfg, run_index);
        return events_to_csv(one.sim.events);
      },
      py::arg("scenario_path"), py::arg("approach"), py::arg("trace_path"),
      py::arg("seed") = 1, py::arg("run_index") = 0,
      "One run's event log as CSV text.");

  m.attr("__version__") = "0.1.0";
}
