#include "reviewchain/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "reviewchain/text.hpp"

namespace reviewchain {

namespace {

struct CommandShape {
  std::size_t positional;
  std::set<std::string> keys;
  std::set<std::string> required;
};

const std::map<std::string, CommandShape>& command_shapes() {
  static const std::map<std::string, CommandShape> shapes = {
      {"create-user", {1, {"name", "keywords", "ids", "roles", "optin"}, {}}},
      {"propose-contract",
       {1,
        {"kind", "parties", "shares", "stake", "manuscript", "venue", "target", "covered",
         "clawback", "venue-id", "k", "whitelist"},
        {"kind", "parties"}}},
      {"sign-contract", {2, {}, {}}},
      {"cancel-contract", {2, {}, {}}},
      {"submit", {1, {"contract", "cites", "keywords", "content"}, {"contract", "cites"}}},
      {"revise", {1, {"contract", "cites", "keywords", "content"}, {}}},
      {"review", {3, {"report"}, {}}},
      {"attach-remark", {3, {"kind"}, {}}},
      {"withdraw", {1, {"signers"}, {}}},
      {"advance-tick", {0, {}, {}}},
  };
  return shapes;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + why);
}

std::uint64_t parse_count(std::string_view text, ErrorCode code, const std::string& what) {
  if (text.empty() || text.size() > 19 ||
      !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(code, what + " expects an unsigned integer, got '" + std::string(text) + "'");
  }
  return std::stoull(std::string(text));
}

bool is_genesis_name(const std::string& n) { return n == "G" || n == "genesis"; }

/// Which positional arguments / keys name which kind of entity.
void check_references(const ScenarioStep& step, const KeyValues& kv,
                      std::set<std::string>& users, std::set<std::string>& contracts,
                      std::set<std::string>& manuscripts) {
  auto need = [&](const std::set<std::string>& pool, const std::string& name, const char* what) {
    if (!pool.contains(name)) parse_fail(step.line, std::string("undeclared ") + what + " '" + name + "'");
  };
  auto need_list = [&](const std::set<std::string>& pool, const std::string& list, const char* what) {
    for (const auto& n : split_list(list)) need(pool, n, what);
  };
  auto declare = [&](std::set<std::string>& pool, const std::string& name) {
    if (name.empty() || !pool.insert(name).second || is_genesis_name(name)) {
      parse_fail(step.line, "name '" + name + "' already declared");
    }
  };
  const auto& p = kv.positional;
  const auto& c = step.command;
  if (c == "create-user") {
    declare(users, p[0]);
  } else if (c == "propose-contract") {
    need_list(users, kv.get("parties"), "user");
    if (kv.has("manuscript")) need(manuscripts, kv.get("manuscript"), "manuscript");
    if (kv.has("venue")) need(contracts, kv.get("venue"), "contract");
    if (kv.has("target")) need(contracts, kv.get("target"), "contract");
    if (kv.has("whitelist")) need_list(users, kv.get("whitelist"), "user");
    declare(contracts, p[0]);
  } else if (c == "sign-contract") {
    need(contracts, p[0], "contract");
    need(users, p[1], "user");
  } else if (c == "cancel-contract") {
    need(contracts, p[0], "contract");
    need_list(users, p[1], "user");
  } else if (c == "submit" || c == "revise") {
    if (c == "revise") need(manuscripts, p[0], "manuscript");
    if (kv.has("contract")) need(contracts, kv.get("contract"), "contract");
    if (kv.has("cites")) need_list(manuscripts, kv.get("cites"), "manuscript");
    if (c == "submit") declare(manuscripts, p[0]);
  } else if (c == "review") {
    need(manuscripts, p[0], "manuscript");
    need(users, p[1], "user");
    if (p[2] != "confirm" && p[2] != "revise") parse_fail(step.line, "verdict must be confirm or revise");
  } else if (c == "attach-remark") {
    need(manuscripts, p[0], "manuscript");
    need(users, p[1], "user");
    need(contracts, p[2], "contract");
  } else if (c == "withdraw") {
    need(manuscripts, p[0], "manuscript");
    if (kv.has("signers")) need_list(users, kv.get("signers"), "user");
  }
}

}  // namespace

ScenarioScript ScenarioScript::parse(std::string_view text) {
  ScenarioScript script;
  std::set<std::string> users, contracts, manuscripts{"G", "genesis"};
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::vector<std::string> tokens;
    try {
      tokens = tokenize(raw);
    } catch (const Error& e) {
      parse_fail(lineno, e.what());
    }
    if (tokens.empty()) continue;
    const auto& cmd = tokens.front();
    if (cmd == "seed" || cmd == "policy") {
      if (!script.steps.empty()) parse_fail(lineno, cmd + " must precede the first command");
      if (cmd == "seed") {
        if (tokens.size() != 2) parse_fail(lineno, "seed takes one value");
        try {
          script.seed = parse_count(tokens[1], ErrorCode::ParseError, "seed");
        } catch (const Error& e) {
          parse_fail(lineno, e.what());
        }
      } else {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          auto eq = tokens[i].find('=');
          if (eq == std::string::npos || eq == 0) parse_fail(lineno, "policy expects key=value");
          script.policy_overrides.emplace_back(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
        }
        try {
          effective_policy(script, {});
        } catch (const Error& e) {
          parse_fail(lineno, e.what());
        }
      }
      continue;
    }
    auto shape = command_shapes().find(cmd);
    if (shape == command_shapes().end()) parse_fail(lineno, "unknown command '" + cmd + "'");
    ScenarioStep step{lineno, cmd, {tokens.begin() + 1, tokens.end()}};
    auto kv = KeyValues::parse(step.args);
    const bool tick = cmd == "advance-tick";
    if (tick ? kv.positional.size() > 1 : kv.positional.size() != shape->second.positional) {
      parse_fail(lineno, cmd + " expects " + std::to_string(shape->second.positional) +
                             " positional argument(s)");
    }
    for (const auto& [k, _] : kv.named) {
      if (!shape->second.keys.contains(k)) parse_fail(lineno, cmd + " does not take '" + k + "'");
    }
    for (const auto& k : shape->second.required) {
      if (!kv.has(k)) parse_fail(lineno, cmd + " requires " + k + "=");
    }
    if (tick && !kv.positional.empty()) {
      try {
        parse_count(kv.positional[0], ErrorCode::ParseError, "advance-tick");
      } catch (const Error& e) {
        parse_fail(lineno, e.what());
      }
    }
    check_references(step, kv, users, contracts, manuscripts);
    script.steps.push_back(std::move(step));
  }
  return script;
}

// --- names -----------------------------------------------------------------

std::string NameTable::export_text() const {
  std::ostringstream out;
  for (const auto& [n, a] : users) out << "user " << n << ' ' << a.hex() << '\n';
  for (const auto& [n, c] : contracts) out << "contract " << n << ' ' << c.hex() << '\n';
  for (const auto& [n, k] : manuscripts) out << "manuscript " << n << ' ' << k << '\n';
  return out.str();
}

NameTable NameTable::parse(std::string_view text) {
  NameTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) parse_fail(lineno, "names: expected '<kind> <name> <value>'");
    if (tok[0] == "user") {
      t.users[tok[1]] = Address::from_hex(tok[2]);
    } else if (tok[0] == "contract") {
      t.contracts[tok[1]] = ContractId::from_hex(tok[2]);
    } else if (tok[0] == "manuscript") {
      t.manuscripts[tok[1]] = static_cast<ManuscriptKey>(parse_count(tok[2], ErrorCode::ParseError, "key"));
    } else {
      parse_fail(lineno, "names: unknown kind " + tok[0]);
    }
  }
  if (t.export_text() != text) throw Error(ErrorCode::ParseError, "names file is not canonical");
  return t;
}

// --- execution -------------------------------------------------------------

PolicyConfig effective_policy(const ScenarioScript& script, const ScenarioOptions& options) {
  if (options.policy) return *options.policy;
  std::string text;
  for (const auto& [k, v] : script.policy_overrides) text += k + "=" + v + "\n";
  return PolicyConfig::parse(text);
}

namespace {

class Runner {
 public:
  Runner(ScenarioRun& run) : run_(run) {
    run_.names.manuscripts["G"] = 0;
  }

  void execute(const ScenarioStep& step) {
    const auto kv = KeyValues::parse(step.args);
    const auto& p = kv.positional;
    const auto& c = step.command;
    auto& eco = run_.eco;
    if (c == "create-user") {
      std::string record;
      for (const auto& [k, v] : kv.named) record += k + "=" + quote(v) + " ";
      const auto& acct = eco.create_user(Profile::parse_record(record));
      run_.names.users[p[0]] = acct.address;
    } else if (c == "propose-contract") {
      const auto& contract = eco.propose_contract(proposal(kv));
      run_.names.contracts[p[0]] = contract.id;
    } else if (c == "sign-contract") {
      eco.sign_contract(contract(p[0]), user(p[1]));
    } else if (c == "cancel-contract") {
      eco.cancel_contract(contract(p[0]), users(p[1]));
    } else if (c == "submit") {
      const auto& a = eco.contracts().get(contract(kv.get("contract")));
      SubmitArgs args;
      for (const auto& s : a.shares) args.authors.push_back({s.party, s.weight});
      args.authorship_contract = a.id;
      args.content_digest = sha256(kv.get_or("content", p[0]));
      args.citations = manuscripts(kv.get("cites"));
      args.keywords = keywords(kv.get_or("keywords", ""));
      run_.names.manuscripts[p[0]] = eco.submit(args).key;
    } else if (c == "revise") {
      const auto key = manuscript(p[0]);
      const auto& node = eco.graph().node(key);
      ReviseArgs args;
      args.content_digest =
          sha256(kv.get_or("content", p[0] + " v" + std::to_string(node.meta.version + 1)));
      if (kv.has("cites")) args.citations = manuscripts(kv.get("cites"));
      if (kv.has("keywords")) args.keywords = keywords(kv.get("keywords"));
      if (kv.has("contract")) {
        const auto& a = eco.contracts().get(contract(kv.get("contract")));
        args.authorship_contract = a.id;
        std::vector<AuthorShare> authors;
        for (const auto& s : a.shares) authors.push_back({s.party, s.weight});
        args.authors = std::move(authors);
      }
      eco.revise(key, args);
    } else if (c == "review") {
      eco.review(manuscript(p[0]), user(p[1]), parse_verdict(p[2]), kv.get_or("report", ""));
    } else if (c == "attach-remark") {
      const auto id = contract(p[2]);
      RemarkKind kind = eco.contracts().get(id).kind == ContractKind::Indexing
                            ? RemarkKind::Indexing
                            : RemarkKind::Funding;
      if (kv.has("kind")) kind = parse_remark_kind(kv.get("kind"));
      eco.attach_remark(manuscript(p[0]), user(p[1]), id, kind);
    } else if (c == "withdraw") {
      const auto key = manuscript(p[0]);
      std::vector<Address> signers;
      if (kv.has("signers")) {
        signers = users(kv.get("signers"));
      } else {
        for (const auto& a : eco.graph().node(key).authorship.authors) signers.push_back(a.author);
      }
      eco.withdraw(key, signers);
    } else if (c == "advance-tick") {
      eco.advance_tick(p.empty() ? 1 : parse_count(p[0], ErrorCode::ParseError, "advance-tick"));
    }
  }

 private:
  Address user(const std::string& n) const {
    auto it = run_.names.users.find(n);
    if (it == run_.names.users.end()) throw Error(ErrorCode::UnknownEntity, "unknown user " + n);
    return it->second;
  }
  std::vector<Address> users(const std::string& list) const {
    std::vector<Address> out;
    for (const auto& n : split_list(list)) out.push_back(user(n));
    return out;
  }
  ContractId contract(const std::string& n) const {
    auto it = run_.names.contracts.find(n);
    if (it == run_.names.contracts.end()) {
      throw Error(ErrorCode::UnknownEntity, "unknown contract " + n);
    }
    return it->second;
  }
  ManuscriptKey manuscript(const std::string& n) const {
    if (is_genesis_name(n)) return 0;
    auto it = run_.names.manuscripts.find(n);
    if (it == run_.names.manuscripts.end()) {
      throw Error(ErrorCode::UnknownEntity, "unknown manuscript " + n);
    }
    return it->second;
  }
  std::vector<ManuscriptKey> manuscripts(const std::string& list) const {
    std::vector<ManuscriptKey> out;
    for (const auto& n : split_list(list)) out.push_back(manuscript(n));
    return out;
  }
  static std::set<std::string> keywords(const std::string& list) {
    std::set<std::string> out;
    for (auto k : split_list(list)) {
      std::transform(k.begin(), k.end(), k.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (!k.empty()) out.insert(k);
    }
    return out;
  }
  static Rational fraction(const KeyValues& kv, const std::string& key) {
    return kv.has(key) ? parse_rational(kv.get(key)) : Rational{0};
  }

  ProposeRequest proposal(const KeyValues& kv) const {
    const auto& policy = run_.eco.policy();
    ProposeRequest req;
    req.kind = parse_contract_kind(kv.get("kind"));
    req.parties = users(kv.get("parties"));
    auto shares = split_list(kv.get_or("shares", ""));
    if (shares.empty() && req.parties.size() == 1) shares = {"1"};
    if (shares.size() != req.parties.size()) {
      throw Error(ErrorCode::InvalidShares, "one share per party required");
    }
    for (std::size_t i = 0; i < shares.size(); ++i) {
      req.shares.push_back({req.parties[i], parse_rational(shares[i])});
    }
    auto stake = [&](TokenAmount fallback) {
      return kv.has("stake") ? parse_count(kv.get("stake"), ErrorCode::InvalidTerms, "stake")
                             : fallback;
    };
    if (kv.has("manuscript")) req.manuscript = manuscript(kv.get("manuscript"));
    switch (req.kind) {
      case ContractKind::Authorship: {
        AuthorshipTerms t;
        if (kv.has("venue")) t.venue = contract(kv.get("venue"));
        req.terms = t;
        req.stake_required = stake(policy.author_stake);
        break;
      }
      case ContractKind::Review:
        req.terms = ReviewTerms{};
        req.stake_required = stake(policy.reviewer_stake);
        break;
      case ContractKind::Funding: {
        FundingTerms t;
        t.covered_fraction = fraction(kv, "covered");
        t.clawback_share = fraction(kv, "clawback");
        if (kv.has("target")) t.target = contract(kv.get("target"));
        req.terms = t;
        req.stake_required = stake(0);
        break;
      }
      case ContractKind::Indexing: {
        IndexingTerms t;
        t.venue_id = kv.get_or("venue-id", "");
        if (kv.has("k")) {
          t.k_override = static_cast<std::uint32_t>(
              std::min<std::uint64_t>(parse_count(kv.get("k"), ErrorCode::InvalidTerms, "k"), 1000));
        }
        if (kv.has("whitelist")) t.reviewer_whitelist = users(kv.get("whitelist"));
        t.clawback_share = fraction(kv, "clawback");
        req.terms = t;
        req.stake_required = stake(0);
        break;
      }
    }
    return req;
  }

  ScenarioRun& run_;
};

}  // namespace

ScenarioRun run_scenario(const ScenarioScript& script, const ScenarioOptions& options) {
  const auto policy = effective_policy(script, options);
  const auto seed = options.seed.value_or(script.seed.value_or(options.default_seed));
  ScenarioRun run{Ecosystem(policy, seed), {}, 0};
  Runner runner(run);
  const auto limit = std::min(script.steps.size(), options.stop_after.value_or(script.steps.size()));
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& step = script.steps[i];
    try {
      runner.execute(step);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(i + 1) + " (line " + std::to_string(step.line) +
                                ", " + step.command + "): " + e.what());
    }
    run.steps_executed = i + 1;
  }
  return run;
}

Hash32 ledger_digest(const Ledger& ledger) { return sha256(ledger.export_text()); }

std::string scenario_report(const ScenarioRun& run) {
  const auto& eco = run.eco;
  std::ostringstream out;
  out << "seed=" << eco.seed() << '\n';
  std::istringstream policy(eco.policy().to_text());
  for (std::string line; std::getline(policy, line);) out << "policy." << line << '\n';
  out << "steps=" << run.steps_executed << '\n';
  out << "transactions=" << eco.ledger().transactions().size() << '\n';
  out << "ledger_digest=" << ledger_digest(eco.ledger()).hex() << '\n';
  out << "state_digest=" << eco.state_digest().hex() << '\n';
  out << "audit_digest=" << sha256(eco.audit_log()).hex() << '\n';
  out << "circulating=" << eco.ledger().circulating_total() << '\n';
  const auto t = eco.ledger().balance_of(eco.ledger().treasury());
  out << "treasury.spendable=" << t.spendable << '\n';
  out << "treasury.escrowed=" << t.escrowed << '\n';
  for (const auto& [name, addr] : run.names.users) {
    const auto b = eco.ledger().balance_of(addr);
    out << "balance." << name << ".spendable=" << b.spendable << '\n';
    out << "balance." << name << ".escrowed=" << b.escrowed << '\n';
  }
  for (const auto& [name, key] : run.names.manuscripts) {
    const auto& n = eco.graph().node(key);
    out << "node." << name << ".key=" << key << '\n';
    out << "node." << name << ".state=" << to_string(n.state) << '\n';
    out << "node." << name << ".version=" << n.meta.version << '\n';
    out << "node." << name << ".id=" << n.id.hex() << '\n';
    out << "node." << name << ".account=" << eco.ledger().balance_of(n.account()).spendable << '\n';
  }
  out << "settlements=" << eco.reports().size() << '\n';
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace

void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto& eco = run.eco;
  write_file(dir / "ledger.txt", eco.ledger().export_text());
  write_file(dir / "accounts.txt", eco.ledger().registry().export_text());
  write_file(dir / "names.txt", run.names.export_text());
  write_file(dir / "graph.json", eco.graph().export_nodelink());
  write_file(dir / "graph.dot", eco.graph().export_dot());
  write_file(dir / "audit.log", eco.audit_log());
  write_file(dir / "report.txt", scenario_report(run));
}

}  // namespace reviewchain
