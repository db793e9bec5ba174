#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "reviewchain/scenario.hpp"

namespace reviewchain::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Options {
  std::string out_dir = "reviewchain-out";
  std::optional<std::uint64_t> seed;
  std::string policy_file;
};

ScenarioOptions scenario_options(const Options& o) {
  ScenarioOptions s;
  s.seed = o.seed;
  if (!o.policy_file.empty()) s.policy = PolicyConfig::parse(read_file(o.policy_file));
  return s;
}

/// Persisted state as written by `run`/`init`, parsed strictly.
struct Stored {
  AccountRegistry accounts;
  std::vector<TokenTransaction> txs;
  NameTable names;
  std::string graph_text;
};

Stored load(const Options& o) {
  const fs::path dir = o.out_dir;
  Stored s;
  s.accounts = AccountRegistry::parse(read_file(dir / "accounts.txt"));
  s.txs = parse_ledger_export(read_file(dir / "ledger.txt"));
  s.names = NameTable::parse(read_file(dir / "names.txt"));
  s.graph_text = read_file(dir / "graph.json");
  return s;
}

int run_script(const Options& o, const std::string& text, std::ostream& out) {
  auto run = run_scenario(ScenarioScript::parse(text), scenario_options(o));
  write_artifacts(run, o.out_dir);
  out << "steps=" << run.steps_executed << '\n'
      << "ledger_digest=" << ledger_digest(run.eco.ledger()).hex() << '\n'
      << "out=" << o.out_dir << '\n';
  return kOk;
}

int balance(const Options& o, const std::string& who, std::ostream& out) {
  auto s = load(o);
  Address addr;
  if (auto it = s.names.users.find(who); it != s.names.users.end()) {
    addr = it->second;
  } else if (who.size() == 64) {
    addr = Address::from_hex(who);
  } else {
    throw Error(ErrorCode::UnknownEntity, "unknown user " + who);
  }
  auto replay = replay_transactions(s.txs, s.accounts);
  if (!s.accounts.knows(addr)) throw Error(ErrorCode::UnknownAddress, "unknown address " + addr.hex());
  Balance b;
  if (auto it = replay.balances.find(addr); it != replay.balances.end()) b = it->second;
  out << who << " spendable=" << b.spendable << " escrowed=" << b.escrowed << '\n';
  return replay.report.ok() ? kOk : kViolations;
}

int show(const Options& o, const std::string& what, std::ostream& out) {
  auto s = load(o);
  auto graph = PublicationGraph::parse_nodelink(s.graph_text);
  const ManuscriptNode* node = nullptr;
  if (auto it = s.names.manuscripts.find(what); it != s.names.manuscripts.end()) {
    node = &graph.node(it->second);
  } else if (what == "genesis") {
    node = &graph.node(0);
  } else if (what.size() == 64) {
    node = graph.find(ManuscriptId::from_hex(what));
  } else if (!what.empty() && std::all_of(what.begin(), what.end(), ::isdigit)) {
    node = &graph.node(static_cast<ManuscriptKey>(std::stoul(what)));
  }
  if (node == nullptr) throw Error(ErrorCode::UnknownManuscript, "unknown manuscript " + what);
  out << "key=" << node->key << '\n'
      << "id=" << node->id.hex() << '\n'
      << "genesis=" << (node->genesis ? "yes" : "no") << '\n'
      << "state=" << to_string(node->state) << '\n'
      << "version=" << node->meta.version << '\n'
      << "author_stake=" << node->authorship.author_stake << '\n';
  for (const auto& a : node->authorship.authors) {
    out << "author=" << a.author.hex() << ' ' << format_rational(a.share) << '\n';
  }
  for (const auto& r : node->confirmations) {
    out << "review=" << r.reviewer.hex() << ' ' << to_string(r.verdict) << " v" << r.version_signed
        << '\n';
  }
  for (const auto& r : node->remarks) {
    out << "remark=" << r.agent.hex() << ' ' << to_string(r.kind) << ' ' << r.stake << '\n';
  }
  for (const auto& c : node->citations) out << "cites=" << c.hex() << '\n';
  out << "confirmations=" << tally_confirmations(*node) << '\n';
  return kOk;
}

int verify(const Options& o, std::ostream& out, std::ostream& err) {
  auto s = load(o);
  auto replay = replay_transactions(s.txs, s.accounts);
  Report report = replay.report;
  auto graph = PublicationGraph::parse_nodelink(s.graph_text);
  report.merge(verify_graph(graph, s.accounts));
  for (const auto& n : graph.nodes()) {
    if (!s.accounts.knows(n.account())) {
      report.add("manuscript #" + std::to_string(n.key) + " has no ledger account");
    }
  }
  for (const auto& [name, key] : s.names.manuscripts) {
    if (!graph.contains(key)) report.add("name " + name + " refers to a missing manuscript");
  }
  for (const auto& [name, addr] : s.names.users) {
    if (!s.accounts.knows(addr)) report.add("name " + name + " refers to an unknown account");
  }
  const auto report_path = fs::path(o.out_dir) / "report.txt";
  if (fs::exists(report_path)) {
    std::istringstream lines(read_file(report_path));
    std::string digest = "ledger_digest=" + sha256(read_file(fs::path(o.out_dir) / "ledger.txt")).hex();
    bool found = false;
    for (std::string line; std::getline(lines, line);) {
      if (line.rfind("ledger_digest=", 0) == 0) found = line == digest;
    }
    if (!found) report.add("report.txt ledger digest does not match ledger.txt");
  }
  for (const auto& v : report.violations) err << "violation: " << v << '\n';
  if (!report.ok()) {
    err << "error category=IntegrityViolation count=" << report.violations.size() << '\n';
    return kViolations;
  }
  out << "ok transactions=" << s.txs.size() << " manuscripts=" << graph.nodes().size() << '\n';
  return kOk;
}

int export_graph(const Options& o, const std::string& format, std::ostream& out) {
  if (format != "nodelink" && format != "dot") {
    throw Error(ErrorCode::UnknownFormat, "unknown export format " + format);
  }
  auto graph = PublicationGraph::parse_nodelink(load(o).graph_text);
  out << (format == "dot" ? graph.export_dot() : graph.export_nodelink());
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-review token ledger and publication graph node"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--out", o.out_dir, "State directory")->capture_default_str();
  app.add_option("--seed", o.seed, "Scenario seed (overrides the script)");
  app.add_option("--policy", o.policy_file, "Policy key=value file (overrides the script)");

  std::string script_path, user, manuscript, format;
  auto* init = app.add_subcommand("init", "Create a genesis-only state");
  auto* run = app.add_subcommand("run", "Run a scenario script");
  run->add_option("script", script_path)->required();
  auto* bal = app.add_subcommand("balance", "Print a user's balance");
  bal->add_option("user", user)->required();
  auto* sh = app.add_subcommand("show", "Print a manuscript");
  sh->add_option("manuscript", manuscript)->required();
  auto* ver = app.add_subcommand("verify", "Check ledger and graph integrity");
  auto* exp = app.add_subcommand("export", "Print the graph as nodelink or dot");
  exp->add_option("format", format)->required();
  for (auto* sub : {init, run, bal, sh, ver, exp}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error category=Usage message=" << e.what() << '\n';
    return kUsage;
  }

  try {
    if (init->parsed()) return run_script(o, "", out);
    if (run->parsed()) return run_script(o, read_file(script_path), out);
    if (bal->parsed()) return balance(o, user, out);
    if (sh->parsed()) return show(o, manuscript, out);
    if (ver->parsed()) return verify(o, out, err);
    if (exp->parsed()) return export_graph(o, format, out);
  } catch (const Error& e) {
    err << "error category=" << to_string(e.code()) << " message=" << e.what() << '\n';
    return e.code() == ErrorCode::ParseError && ver->parsed() ? kViolations : kFailed;
  } catch (const std::exception& e) {
    err << "error category=Internal message=" << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace reviewchain::cli
