#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reviewchain/ecosystem.hpp"

namespace reviewchain {

/// One parsed script line.
struct ScenarioStep {
  std::size_t line = 0;
  std::string command;
  std::vector<std::string> args;
};

struct ScenarioScript {
  std::optional<std::uint64_t> seed;
  /// key=value overrides applied on top of the defaults, in script order.
  std::vector<std::pair<std::string, std::string>> policy_overrides;
  std::vector<ScenarioStep> steps;

  /// Throws ParseError("line N: ...") for unknown commands, bad arity or
  /// directives after the first step.
  static ScenarioScript parse(std::string_view text);
};

struct ScenarioOptions {
  std::uint64_t default_seed = 0;
  /// Take precedence over the script's own directives.
  std::optional<std::uint64_t> seed;
  std::optional<PolicyConfig> policy;
  /// Execute only the first n steps.
  std::optional<std::size_t> stop_after;
};

/// Symbolic names used in a script, mapped to what they denote.
struct NameTable {
  std::map<std::string, Address> users;
  std::map<std::string, ContractId> contracts;
  std::map<std::string, ManuscriptKey> manuscripts;

  std::string export_text() const;
  static NameTable parse(std::string_view text);
};

struct ScenarioRun {
  Ecosystem eco;
  NameTable names;
  std::size_t steps_executed = 0;
};

/// Builds the policy a script runs under: defaults, then script
/// overrides, unless options.policy replaces them wholesale.
PolicyConfig effective_policy(const ScenarioScript& script, const ScenarioOptions& options);

/// Runs every step in order. A failing step throws Error with the original
/// category and a message naming the step index and script line.
ScenarioRun run_scenario(const ScenarioScript& script, const ScenarioOptions& options = {});

/// key=value summary: seed, policy, balances, node states, digests.
std::string scenario_report(const ScenarioRun& run);

/// Writes ledger.txt, accounts.txt, names.txt, graph.json, graph.dot,
/// audit.log and report.txt into `dir`, creating it if needed.
void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir);

/// SHA-256 of the canonical ledger export.
Hash32 ledger_digest(const Ledger& ledger);

}  // namespace reviewchain
