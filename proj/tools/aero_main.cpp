// aero: packet tooling, graph checks, single simulations, batch sweeps and
// report rendering for the runtime-aware OTA update simulator.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "aero/event_io.hpp"
#include "aero/harness.hpp"
#include "aero/report.hpp"

namespace fs = std::filesystem;
using aero::json;

namespace {

std::vector<std::uint8_t> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::uint8_t> parse_hex(std::string s) {
  std::erase_if(s, [](char c) { return c == ' ' || c == ':' || c == '\n'; });
  if (s.size() % 2 != 0) throw std::runtime_error("odd hex digit count");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(s.substr(i, 2), nullptr, 16)));
  }
  return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0xF];
  }
  return out;
}

// ---- packet <-> json ----

json packet_to_json(const aero::UpdatePacket& p) {
  json j;
  j["seq"] = p.seq;
  if (p.group_field) {
    json arr = json::array();
    for (auto id : p.group_field->set_ids()) arr.push_back(id.value);
    j["group"] = arr;
  }
  switch (p.opcode) {
    case aero::UpdateOpCode::ModifyExisting: j["opcode"] = "modify"; break;
    case aero::UpdateOpCode::InsertNew: j["opcode"] = "insert"; break;
    case aero::UpdateOpCode::RemoveObsolete: j["opcode"] = "remove"; break;
  }
  j["dag_flag"] = p.dag_flag;
  j["task_id"] = p.task_id.value;
  if (p.dep_field) {
    json arr = json::array();
    for (auto id : p.dep_field->set_ids()) arr.push_back(id.value);
    j["deps"] = arr;
  }
  j["code_hex"] = to_hex(p.code_segment);
  return j;
}

aero::UpdatePacket packet_from_json(const json& j) {
  aero::UpdatePacket p;
  p.seq = j.at("seq").get<std::uint8_t>();
  if (j.contains("group") && !j.at("group").is_null()) {
    aero::TaskBitmap bm;
    for (const auto& v : j.at("group")) bm.set(aero::TaskId{v.get<std::uint8_t>()});
    p.group_field = bm;
  }
  const std::string op = j.at("opcode").get<std::string>();
  if (op == "modify") p.opcode = aero::UpdateOpCode::ModifyExisting;
  else if (op == "insert") p.opcode = aero::UpdateOpCode::InsertNew;
  else if (op == "remove") p.opcode = aero::UpdateOpCode::RemoveObsolete;
  else throw std::runtime_error("unknown opcode '" + op + "'");
  p.task_id = aero::TaskId{j.at("task_id").get<std::uint8_t>()};
  if (j.contains("deps") && !j.at("deps").is_null()) {
    aero::TaskBitmap bm;
    for (const auto& v : j.at("deps")) bm.set(aero::TaskId{v.get<std::uint8_t>()});
    p.dep_field = bm;
    p.dag_flag = true;
  }
  if (j.contains("dag_flag")) p.dag_flag = j.at("dag_flag").get<bool>();
  if (j.contains("code_hex")) p.code_segment = parse_hex(j.at("code_hex").get<std::string>());
  return p;
}

void print_packet_fields(const aero::UpdatePacket& p, std::size_t n_max,
                         std::ostream& out) {
  const std::size_t bitmap_bytes = (n_max + 7) / 8;
  std::size_t off = 0;
  auto row = [&](const std::string& field, std::size_t bits,
                 const std::string& value) {
    out << "  " << field << "  bits[" << off << ".." << off + bits - 1 << "]  "
        << value << "\n";
    off += bits;
  };
  out << "packet (" << aero::encoded_length(p, n_max) << " bytes, n_max=" << n_max
      << ")\n";
  row("seq        ", 8, std::to_string(p.seq));
  if (p.group_field) {
    std::string ids;
    for (auto id : p.group_field->set_ids()) ids += to_string(id) + " ";
    row("group_field", bitmap_bytes * 8, ids.empty() ? "(none)" : ids);
  }
  std::string opcode;
  switch (p.opcode) {
    case aero::UpdateOpCode::ModifyExisting: opcode = "Modify (00)"; break;
    case aero::UpdateOpCode::InsertNew: opcode = "Insert (01)"; break;
    case aero::UpdateOpCode::RemoveObsolete: opcode = "Remove (10)"; break;
  }
  row("opcode     ", 2, opcode);
  row("dag_flag   ", 1, p.dag_flag ? "1" : "0");
  row("task_id    ", 5, to_string(p.task_id));
  if (p.dep_field) {
    std::string ids;
    for (auto id : p.dep_field->set_ids()) ids += to_string(id) + " ";
    row("dep_field  ", bitmap_bytes * 8, ids.empty() ? "(none)" : ids);
  }
  row("code_length", 16, std::to_string(p.code_segment.size()));
  row("code       ", p.code_segment.size() * 8, to_hex(p.code_segment));
}

// ---- experiment configuration ----

struct CliConfig {
  fs::path trace_path;
  fs::path scenario_dir;
  aero::ExperimentConfig experiment;
};

fs::path default_config_path() {
  if (const char* env = std::getenv("AERO_CONFIG_DIR")) {
    return fs::path(env) / "default.json";
  }
  return fs::path("configs") / "default.json";
}

CliConfig load_cli_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j = json::parse(in);
  CliConfig cfg;
  const fs::path base = path.parent_path();
  cfg.trace_path = base / j.at("trace").get<std::string>();
  cfg.scenario_dir = base / j.at("scenario_dir").get<std::string>();
  cfg.experiment.runs = j.value("runs", 100u);
  cfg.experiment.seed = j.value("seed", 1ull);
  cfg.experiment.initial_stored_fraction = j.value("initial_stored_fraction", 1.0);
  cfg.experiment.policy.margin_factor = j.value("margin_factor", 1.5);
  cfg.experiment.policy.update_tasks_have_deadline =
      j.value("update_tasks_have_deadline", false);
  if (j.contains("costs")) {
    const json& c = j.at("costs");
    auto& k = cfg.experiment.costs;
    k.receive_base_us = c.value("receive_base_us", k.receive_base_us);
    k.receive_per_byte_us = c.value("receive_per_byte_us", k.receive_per_byte_us);
    k.receive_base_uj = c.value("receive_base_uj", k.receive_base_uj);
    k.receive_per_byte_uj = c.value("receive_per_byte_uj", k.receive_per_byte_uj);
    k.decode_base_us = c.value("decode_base_us", k.decode_base_us);
    k.decode_per_byte_us = c.value("decode_per_byte_us", k.decode_per_byte_us);
    k.decode_base_uj = c.value("decode_base_uj", k.decode_base_uj);
    k.decode_per_byte_uj = c.value("decode_per_byte_uj", k.decode_per_byte_uj);
    k.block_id_us = c.value("block_id_us", k.block_id_us);
    k.block_id_uj = c.value("block_id_uj", k.block_id_uj);
    k.integrate_us = c.value("integrate_us", k.integrate_us);
    k.integrate_uj = c.value("integrate_uj", k.integrate_uj);
    k.apply_base_us = c.value("apply_base_us", k.apply_base_us);
    k.apply_per_byte_us = c.value("apply_per_byte_us", k.apply_per_byte_us);
    k.apply_base_uj = c.value("apply_base_uj", k.apply_base_uj);
    k.apply_per_byte_uj = c.value("apply_per_byte_uj", k.apply_per_byte_uj);
  }
  cfg.experiment.trace = aero::HarvestTrace::from_csv(cfg.trace_path);
  return cfg;
}

aero::Scenario pick_scenario(const CliConfig& cfg, const std::string& spec) {
  if (fs::exists(spec)) return aero::load_scenario(spec);
  const int wanted = std::stoi(spec);
  for (auto& s : aero::load_scenario_dir(cfg.scenario_dir)) {
    if (s.id == wanted) return s;
  }
  throw std::runtime_error("no scenario '" + spec + "' under " +
                           cfg.scenario_dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime-aware OTA update simulator for energy-harvesting task graphs"};
  app.require_subcommand(1);

  // ---- packet ----
  auto* packet = app.add_subcommand("packet", "Encode, decode and inspect update packets");
  packet->require_subcommand(1);
  std::string pkt_json, pkt_in, pkt_hex, pkt_out;
  std::size_t pkt_nmax = 32;

  auto* p_enc = packet->add_subcommand("encode", "JSON packet description -> wire bytes");
  p_enc->add_option("--json", pkt_json, "packet description file")->required();
  p_enc->add_option("--out", pkt_out, "output file (hex to stdout when omitted)");
  p_enc->add_option("--n-max", pkt_nmax, "task slot capacity");

  auto* p_dec = packet->add_subcommand("decode", "wire bytes -> JSON fields");
  p_dec->add_option("--in", pkt_in, "packet file");
  p_dec->add_option("--hex", pkt_hex, "packet bytes as hex");
  p_dec->add_option("--n-max", pkt_nmax, "task slot capacity");

  auto* p_ins = packet->add_subcommand("inspect", "wire bytes -> field table with bit offsets");
  p_ins->add_option("--in", pkt_in, "packet file");
  p_ins->add_option("--hex", pkt_hex, "packet bytes as hex");
  p_ins->add_option("--n-max", pkt_nmax, "task slot capacity");

  // ---- dag ----
  auto* dag_cmd = app.add_subcommand("dag", "Check and display task graph files");
  dag_cmd->require_subcommand(1);
  std::string dag_in;
  auto* d_check = dag_cmd->add_subcommand("check", "validate a graph description");
  d_check->add_option("--in", dag_in, "graph JSON file")->required();
  auto* d_show = dag_cmd->add_subcommand("show", "print tasks, edges and topological order");
  d_show->add_option("--in", dag_in, "graph JSON file")->required();

  // ---- run / sweep / report ----
  std::string config_path = default_config_path().string();
  std::string scenario_spec, approach_name = "aero", out_dir = "out";
  std::string trace_override, format = "csv";
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  std::size_t runs_override = 0, jobs = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file");
    cmd->add_option("--seed", seed_override, "base seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--runs", runs_override, "runs per cell");
    cmd->add_option("--trace", trace_override, "harvest trace CSV");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario under one approach");
  add_common(run_cmd);
  run_cmd->add_option("--scenario", scenario_spec, "scenario id or file")->required();
  run_cmd->add_option("--approach", approach_name, "aero|live|intermittent");
  run_cmd->add_option("--format", format, "event log format: csv|jsonl");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the full scenario x approach grid");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  auto* report_cmd = app.add_subcommand("report", "Render comparison tables from a sweep summary");
  std::string report_in, svg_dir;
  report_cmd->add_option("--in", report_in, "summary CSV")->required();
  report_cmd->add_option("--svg", svg_dir, "also write SVG charts to this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (p_enc->parsed()) {
      std::ifstream in(pkt_json);
      if (!in) throw std::runtime_error("cannot open " + pkt_json);
      const auto p = packet_from_json(json::parse(in));
      const auto bytes = aero::encode_packet(p, pkt_nmax);
      if (pkt_out.empty()) {
        std::cout << to_hex(bytes) << "\n";
      } else {
        write_binary(pkt_out, bytes);
        std::cout << "wrote " << bytes.size() << " bytes to " << pkt_out << "\n";
      }
      return 0;
    }
    if (p_dec->parsed() || p_ins->parsed()) {
      std::vector<std::uint8_t> bytes;
      if (!pkt_hex.empty()) bytes = parse_hex(pkt_hex);
      else if (!pkt_in.empty()) bytes = read_binary(pkt_in);
      else throw std::runtime_error("need --in or --hex");
      aero::UpdatePacket p;
      try {
        p = aero::decode_packet(bytes, pkt_nmax);
      } catch (const aero::CodecError& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 2;
      }
      if (p_dec->parsed()) {
        std::cout << packet_to_json(p).dump(2) << "\n";
      } else {
        print_packet_fields(p, pkt_nmax, std::cout);
      }
      return 0;
    }

    if (d_check->parsed() || d_show->parsed()) {
      std::ifstream in(dag_in);
      if (!in) throw std::runtime_error("cannot open " + dag_in);
      json j = json::parse(in);
      const aero::Dag dag =
          aero::dag_from_json(j.contains("dag") ? j.at("dag") : j);
      const auto order = dag.topological_order();
      if (d_check->parsed()) {
        std::cout << "ok: " << dag.tasks().size() << " tasks, "
                  << dag.edges().size() << " edges, acyclic\n";
      } else {
        std::cout << "tasks:\n";
        for (const auto& [id, t] : dag.tasks()) {
          std::cout << "  " << to_string(id) << "  " << task_kind_name(t.kind)
                    << "  exec=" << t.profile.exec_time_us
                    << "us energy=" << t.profile.energy_uj
                    << "uJ priority=" << t.profile.priority
                    << " version=" << t.profile.version << "\n";
        }
        std::cout << "edges:\n";
        for (const auto& [f, t] : dag.edges()) {
          std::cout << "  " << to_string(f) << " -> " << to_string(t) << "\n";
        }
        std::cout << "topological order:";
        for (auto id : order) std::cout << " " << to_string(id);
        std::cout << "\n";
      }
      return 0;
    }

    if (run_cmd->parsed() || sweep_cmd->parsed()) {
      CliConfig cfg = load_cli_config(config_path);
      if (!trace_override.empty()) {
        cfg.experiment.trace = aero::HarvestTrace::from_csv(trace_override);
      }
      if (seed_set) cfg.experiment.seed = seed_override;
      if (runs_override > 0) cfg.experiment.runs = runs_override;
      fs::create_directories(out_dir);

      if (run_cmd->parsed()) {
        const auto approach = aero::approach_from_name(approach_name);
        if (!approach) throw std::runtime_error("unknown approach '" + approach_name + "'");
        const aero::Scenario scenario = pick_scenario(cfg, scenario_spec);

        aero::Metrics metrics;
        metrics.scenario = std::to_string(scenario.id);
        metrics.approach = approach_name;
        metrics.runs = cfg.experiment.runs;
        double completion_sum = 0.0, dmr_sum = 0.0;
        std::size_t completion_n = 0, errors = 0;
        for (std::size_t r = 0; r < cfg.experiment.runs; ++r) {
          auto one = aero::run_single(scenario, *approach, cfg.experiment, r);
          if (r == 0) {
            const fs::path log_path =
                fs::path(out_dir) / (format == "jsonl" ? "events.jsonl" : "events.csv");
            write_text(log_path, format == "jsonl"
                                     ? aero::events_to_jsonl(one.sim.events)
                                     : aero::events_to_csv(one.sim.events));
          }
          if (one.record.error) ++errors;
          if (one.record.completion_us >= 0) {
            completion_sum += one.record.completion_us;
            ++completion_n;
          }
          dmr_sum += one.record.dmr;
          metrics.records.push_back(one.record);
        }
        metrics.error_rate = static_cast<double>(errors) / cfg.experiment.runs;
        metrics.mean_completion_us =
            completion_n ? completion_sum / completion_n : 0.0;
        metrics.mean_dmr = dmr_sum / cfg.experiment.runs;

        write_text(fs::path(out_dir) / "metrics.json", metrics_to_json(metrics).dump(2) + "\n");
        write_text(fs::path(out_dir) / "records.csv", run_records_csv(metrics));
        std::cout << "scenario " << scenario.id << " " << approach_name << ": error_rate="
                  << metrics.error_rate << " mean_completion_ms="
                  << metrics.mean_completion_us / 1000.0 << " dmr=" << metrics.mean_dmr
                  << "\n";
        return 0;
      }

      // sweep
      const auto scenarios = aero::load_scenario_dir(cfg.scenario_dir);
      const std::vector<aero::Approach> approaches = {
          aero::Approach::Aero, aero::Approach::LiveUpdate,
          aero::Approach::IntermittentUpdate};
      const auto sweep = aero::run_sweep(scenarios, approaches, cfg.experiment, jobs);
      write_text(fs::path(out_dir) / "summary.csv", aero::sweep_summary_csv(sweep));
      for (const auto& cell : sweep.cells) {
        write_text(fs::path(out_dir) /
                       ("records_s" + cell.scenario + "_" + cell.approach + ".csv"),
                   aero::run_records_csv(cell));
      }
      std::cout << "wrote " << sweep.cells.size() << " cells to " << out_dir
                << "/summary.csv\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      std::ifstream in(report_in);
      if (!in) throw std::runtime_error("cannot open " + report_in);
      std::string csv((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
      const auto rows = aero::parse_summary_csv(csv);
      std::cout << aero::render_report(rows);
      if (!svg_dir.empty()) {
        for (const auto& f : aero::write_report_svgs(rows, svg_dir)) {
          std::cout << "wrote " << f << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
