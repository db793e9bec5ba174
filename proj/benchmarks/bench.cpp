#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "reviewchain/scenario.hpp"

namespace {

using namespace reviewchain;

std::string scenario_text(const char* name) {
  std::ifstream in(std::string(REVIEWCHAIN_SCENARIO_DIR) + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void BM_MerkleRoot(benchmark::State& state) {
  std::vector<ManuscriptId> ids;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    ids.push_back(ManuscriptId::from_bytes(sha256("leaf " + std::to_string(i)).bytes));
  }
  for (auto _ : state) benchmark::DoNotOptimize(merkle_root(ids));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MerkleRoot)->RangeMultiplier(4)->Range(1, 1024);

void BM_DistributionForCitation(benchmark::State& state) {
  auto run = run_scenario(ScenarioScript::parse(scenario_text("two-papers.scn")));
  const auto& eco = run.eco;
  const auto& cited = eco.graph().node(run.names.manuscripts.at("m1"));
  const auto& citing = eco.graph().node(run.names.manuscripts.at("m2"));
  const auto amount = static_cast<TokenAmount>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(distribution_for_citation(cited, amount, citing, eco.contracts(),
                                                       eco.policy(), eco.ledger().treasury()));
  }
}
BENCHMARK(BM_DistributionForCitation)->Arg(60)->Arg(1000000);

void BM_ScenarioRun(benchmark::State& state) {
  const auto script = ScenarioScript::parse(scenario_text("ten-users.scn"));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(script).eco.state_digest());
}
BENCHMARK(BM_ScenarioRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
