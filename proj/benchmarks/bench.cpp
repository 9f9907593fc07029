#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "ftfloor/catalog.hpp"
#include "ftfloor/kb.hpp"
#include "ftfloor/pddl.hpp"
#include "ftfloor/sim.hpp"
#include "ftfloor/topology.hpp"

using namespace ftfloor;

namespace {

const ServiceCatalog& catalog() {
  static ServiceCatalog cat = generate(default_topology());
  return cat;
}

const KnowledgeBase& catalog_kb() {
  static KnowledgeBase kb(as_triples(catalog()));
  return kb;
}

constexpr const char* kTransport =
    "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven";

}  // namespace

// Full catalog generation: topology walk plus rule expansion for every service.
static void BM_CatalogGenerate(benchmark::State& state) {
  for (auto _ : state) {
    ServiceCatalog cat = generate(default_topology());
    benchmark::DoNotOptimize(cat.services().size());
  }
}
BENCHMARK(BM_CatalogGenerate);

// Condition retrieval for one service over the full catalog knowledge base.
static void BM_ConditionsOf(benchmark::State& state) {
  const KnowledgeBase& kb = catalog_kb();
  for (auto _ : state) {
    auto pre = kb.conditions_of(kTransport, ConditionRole::pre);
    benchmark::DoNotOptimize(pre.size());
  }
}
BENCHMARK(BM_ConditionsOf);

// A three-pattern join with shared variables across the whole store.
static void BM_MatchJoin(benchmark::State& state) {
  const KnowledgeBase& kb = catalog_kb();
  const std::vector<TriplePattern> patterns{
      {Var{"?svc"}, vocab::kHasPrecondition, Var{"?cond"}},
      {Var{"?cond"}, vocab::kIsCheckedBy, Var{"?chk"}},
      {Var{"?cond"}, vocab::kRequiredValue, Var{"?val"}},
  };
  for (auto _ : state) {
    auto rows = kb.match(patterns);
    benchmark::DoNotOptimize(rows.size());
  }
}
BENCHMARK(BM_MatchJoin);

// Breadth-first planning for the bundled burn-and-store task (4-step optimum).
static void BM_SolveBurnAndStore(benchmark::State& state) {
  FactoryState initial =
      initial_state(catalog().topology(), parse_scenario("workpiece wp_1 sink_1\n"));
  const std::vector<std::string> goal{"(burned wp_1)", "(stored wp_1)"};
  for (auto _ : state) {
    pddl::PlanResult result = pddl::solve(catalog(), initial, goal);
    benchmark::DoNotOptimize(result.expanded);
  }
}
BENCHMARK(BM_SolveBurnAndStore);

BENCHMARK_MAIN();
