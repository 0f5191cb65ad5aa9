#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aero/dag.hpp"
#include "aero/harness.hpp"
#include "support/oracles.hpp"

using namespace aero;

namespace {

Task routine(std::uint8_t id, std::uint32_t priority = 0) {
  Task t;
  t.id = TaskId{id};
  t.profile = {100.0, 1.0, priority, 0};
  return t;
}

Dag chain(std::size_t n) {
  Dag dag;
  for (std::size_t i = 0; i < n; ++i) {
    dag.add_task(routine(static_cast<std::uint8_t>(i), static_cast<std::uint32_t>(i)));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dag.add_edge(TaskId{static_cast<std::uint8_t>(i)},
                 TaskId{static_cast<std::uint8_t>(i + 1)});
  }
  return dag;
}

DagErrc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DagError& e) {
    return e.code();
  }
  FAIL("expected a DagError");
  return DagErrc::DuplicateId;
}

}  // namespace

TEST_CASE("add_task basics") {
  Dag dag;
  dag.add_task(routine(1));
  CHECK(dag.tasks().size() == 1);
  CHECK(dag.edges().empty());

  CHECK(code_of([&] { dag.add_task(routine(1)); }) == DagErrc::DuplicateId);

  Dag full;
  for (std::uint8_t i = 0; i < 32; ++i) full.add_task(routine(i));
  CHECK(code_of([&] { full.add_task(routine(32)); }) == DagErrc::CapacityExceeded);
}

TEST_CASE("profiles must be runnable for routine and update tasks") {
  Dag dag;
  Task corrupt = routine(0);
  corrupt.profile.energy_uj = 0.0;
  CHECK(code_of([&] { dag.add_task(corrupt); }) == DagErrc::InvalidProfile);
}

TEST_CASE("add_edge rejects cycles and dangling endpoints") {
  Dag dag;
  dag.add_task(routine(1));
  dag.add_task(routine(2));
  dag.add_edge(TaskId{1}, TaskId{2});
  CHECK(dag.has_edge(TaskId{1}, TaskId{2}));

  CHECK(code_of([&] { dag.add_edge(TaskId{2}, TaskId{1}); }) ==
        DagErrc::CycleDetected);
  // failed insert leaves no residue
  CHECK_FALSE(dag.has_edge(TaskId{2}, TaskId{1}));
  CHECK(code_of([&] { dag.add_edge(TaskId{1}, TaskId{9}); }) ==
        DagErrc::MissingEndpoint);
}

TEST_CASE("sources") {
  Dag lin = chain(4);
  CHECK(lin.sources() == std::set<TaskId>{TaskId{0}});

  Dag fork;
  for (std::uint8_t i = 1; i <= 4; ++i) fork.add_task(routine(i));
  fork.add_edge(TaskId{1}, TaskId{2});
  fork.add_edge(TaskId{1}, TaskId{3});
  fork.add_edge(TaskId{2}, TaskId{4});
  fork.add_edge(TaskId{3}, TaskId{4});
  CHECK(fork.sources() == std::set<TaskId>{TaskId{1}});

  // two disconnected chains: both heads, cross-checked by an in-degree scan
  Dag two;
  for (std::uint8_t i = 0; i < 4; ++i) two.add_task(routine(i));
  two.add_edge(TaskId{0}, TaskId{1});
  two.add_edge(TaskId{2}, TaskId{3});
  std::map<TaskId, int> indeg;
  for (const auto& [id, t] : two.tasks()) indeg[id] = 0;
  for (const auto& [f, t] : two.edges()) indeg[t]++;
  std::set<TaskId> expect;
  for (const auto& [id, d] : indeg) {
    if (d == 0) expect.insert(id);
  }
  CHECK(two.sources() == expect);
  CHECK(expect == std::set<TaskId>{TaskId{0}, TaskId{2}});
}

TEST_CASE("affected block on a chain") {
  Dag dag = chain(4);  // 0 -> 1 -> 2 -> 3
  UpdateGroup group{{{TaskId{1}, UpdateOp::Modify}, {TaskId{3}, UpdateOp::Modify}}};
  AffectedBlock block = compute_affected_block(dag, group);
  CHECK(block.nodes == std::set<TaskId>{TaskId{1}, TaskId{2}, TaskId{3}});
  CHECK(block.blocked_edges == std::set<Edge>{{TaskId{0}, TaskId{1}}});
}

TEST_CASE("affected block for a singleton group is the node plus its in-edges") {
  Dag fork;
  for (std::uint8_t i = 0; i < 5; ++i) fork.add_task(routine(i));
  fork.add_edge(TaskId{0}, TaskId{2});
  fork.add_edge(TaskId{1}, TaskId{2});
  fork.add_edge(TaskId{2}, TaskId{3});
  fork.add_edge(TaskId{2}, TaskId{4});
  UpdateGroup group{{{TaskId{2}, UpdateOp::Modify}}};
  AffectedBlock block = compute_affected_block(fork, group);
  CHECK(block.nodes == std::set<TaskId>{TaskId{2}});
  CHECK(block.blocked_edges ==
        std::set<Edge>{{TaskId{0}, TaskId{2}}, {TaskId{1}, TaskId{2}}});
}

TEST_CASE("affected block picks up interior nodes of parallel paths") {
  // Diamond between the two anchors: both interior branches belong to the
  // block, not just one path.
  Dag dag;
  for (std::uint8_t i = 0; i < 7; ++i) dag.add_task(routine(i));
  dag.add_edge(TaskId{0}, TaskId{3});  // entry
  dag.add_edge(TaskId{3}, TaskId{4});
  dag.add_edge(TaskId{3}, TaskId{5});
  dag.add_edge(TaskId{4}, TaskId{6});
  dag.add_edge(TaskId{5}, TaskId{6});
  dag.add_edge(TaskId{1}, TaskId{2});  // unrelated side chain
  UpdateGroup group{{{TaskId{3}, UpdateOp::Modify}, {TaskId{6}, UpdateOp::Modify}}};
  AffectedBlock block = compute_affected_block(dag, group);
  CHECK(block.nodes ==
        std::set<TaskId>{TaskId{3}, TaskId{4}, TaskId{5}, TaskId{6}});
  CHECK(block.blocked_edges == std::set<Edge>{{TaskId{0}, TaskId{3}}});
  CHECK_FALSE(block.contains(TaskId{1}));

  UpdateGroup missing{{{TaskId{9}, UpdateOp::Modify}}};
  CHECK_THROWS_AS((void)compute_affected_block(dag, missing), DagError);
}

TEST_CASE("insert members contribute nothing to the block") {
  Dag dag = chain(3);
  UpdateGroup group{{{TaskId{9}, UpdateOp::Insert}}};
  AffectedBlock block = compute_affected_block(dag, group);
  CHECK(block.nodes.empty());
  CHECK(block.blocked_edges.empty());
}

TEST_CASE("affected block matches brute-force path enumeration") {
  SplitMix64 rng(20260810);
  for (int trial = 0; trial < 1000; ++trial) {
    Dag dag = testing::random_dag(rng, 10);
    std::vector<TaskId> ids;
    for (const auto& [id, t] : dag.tasks()) ids.push_back(id);
    std::set<TaskId> anchors;
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(3, ids.size()));
    for (std::size_t i = 0; i < k; ++i) anchors.insert(ids[rng.below(ids.size())]);

    UpdateGroup group;
    for (TaskId a : anchors) group.members.push_back({a, UpdateOp::Modify});

    AffectedBlock block = compute_affected_block(dag, group);
    CHECK(block.nodes == testing::brute_force_block_nodes(dag, anchors));
    CHECK(block.blocked_edges == testing::brute_force_entry_edges(dag, block.nodes));
    // no blocked edge may point outside the block
    for (const Edge& e : block.blocked_edges) {
      CHECK(block.nodes.contains(e.second));
    }
  }
}

TEST_CASE("block growth is monotone in the group") {
  SplitMix64 rng(77001);
  for (int trial = 0; trial < 300; ++trial) {
    Dag dag = testing::random_dag(rng, 10);
    std::vector<TaskId> ids;
    for (const auto& [id, t] : dag.tasks()) ids.push_back(id);

    UpdateGroup small;
    UpdateGroup big;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      TaskId id = ids[rng.below(ids.size())];
      if (!big.targets(id)) big.members.push_back({id, UpdateOp::Modify});
      if (big.members.size() >= 4) break;
    }
    if (big.members.size() < 2) continue;
    small.members.assign(big.members.begin(),
                         big.members.begin() + big.members.size() / 2);

    auto b_small = compute_affected_block(dag, small);
    auto b_big = compute_affected_block(dag, big);
    for (TaskId id : b_small.nodes) CHECK(b_big.nodes.contains(id));
  }
}

TEST_CASE("acyclicity holds under random mutation") {
  SplitMix64 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    Dag dag;
    const std::size_t n = 2 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      dag.add_task(routine(static_cast<std::uint8_t>(i)));
    }
    for (int step = 0; step < 20; ++step) {
      TaskId a{static_cast<std::uint8_t>(rng.below(n))};
      TaskId b{static_cast<std::uint8_t>(rng.below(n))};
      try {
        dag.add_edge(a, b);
      } catch (const DagError&) {
      }
      CHECK_NOTHROW((void)dag.topological_order());
    }
  }
}

TEST_CASE("dag json round-trips losslessly") {
  Dag dag = chain(4);
  dag.task(TaskId{2}).profile.version = 3;
  json j = dag_to_json(dag);
  Dag back = dag_from_json(j);
  CHECK(back.structurally_equal(dag));
  CHECK(dag_to_json(back) == j);
}
