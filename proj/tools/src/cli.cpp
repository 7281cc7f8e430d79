/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedmod/errors.hpp"
#include "fedmod/experiments.hpp"
#include "fedmod/random.hpp"
#include "fedmod/synth.hpp"

namespace fedmod::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(std::string_view kind) {
  static const std::map<std::string_view, int> kCodes = {
      {"ParseError", kParse},
      {"SchemaError", kSchema},
      {"DomainError", kDomain},
      {"BoundsError", kDomain},
      {"StratificationError", kDegenerate},
      {"DegenerateInputError", kDegenerate},
      {"DegenerateTrainingError", kDegenerate},
      {"NumericError", kDegenerate},
      {"PoolTooSmallError", kDegenerate},
      {"LookupError", kLookup},
      {"GraphError", kGraph},
      {"IoError", kIo},
      {"UnavailableError", kUnavailable},
  };
  auto it = kCodes.find(kind);
  return it == kCodes.end() ? kInternal : it->second;
}

namespace {

struct Globals {
  std::uint64_t seed = 1;
  double threshold = 0.5;
  std::string trainer = "logistic";
  std::string out = ".";
  std::string store = "fedmod-store";
  std::string label_scheme = "toxicity_score";
  std::string tie_rule = "mean_score";
  bool include_local = false;
  std::optional<double> learning_rate;
  std::optional<std::uint32_t> epochs;
};

ExperimentConfig make_config(const Globals& g) {
  ExperimentConfig cfg;
  cfg.seed = g.seed;
  cfg.labels.threshold = g.threshold;
  cfg.labels.validate();
  cfg.trainer = trainer_from_string(g.trainer);
  if (g.label_scheme == "content_warning") cfg.label_scheme = LabelScheme::content_warning;
  else if (g.label_scheme != "toxicity_score") throw DomainError("unknown label scheme " + g.label_scheme);
  if (g.tie_rule == "local_fallback") cfg.tie_rule = TieRule::local_fallback;
  else if (g.tie_rule != "mean_score") throw DomainError("unknown tie rule " + g.tie_rule);
  cfg.include_local_in_ensemble = g.include_local;
  if (g.learning_rate) cfg.train.learning_rate = *g.learning_rate;
  if (g.epochs) cfg.train.epochs = *g.epochs;
  cfg.train.validate();
  return cfg;
}

fs::path out_dir(const Globals& g) {
  fs::path p(g.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

FederationGraph load_store(const Globals& g, const ExperimentConfig& cfg) {
  LoadOptions opts;
  opts.labels = cfg.labels;
  return load_federation(g.store, opts);
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunInfo run_info(const ExperimentConfig& cfg, std::chrono::steady_clock::time_point start) {
  RunInfo info;
  info.seed = cfg.seed;
  info.config = cfg.snapshot();
  info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  info.peak_rss_kb = peak_rss_kb();
  return info;
}

// ------------------------------------------------------------- commands

struct IngestArgs {
  std::string domain;
  std::string input;
  std::string edges;
  std::uint64_t registered_users = 0;
};

void cmd_ingest(const Globals& g, const IngestArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = make_config(g);
  LoadOptions opts;
  opts.labels = cfg.labels;
  FederationGraph graph;
  if (fs::exists(fs::path(g.store) / "instances.jsonl")) graph = load_federation(g.store, opts);
  if (graph.has_instance(a.domain)) throw GraphError("instance " + a.domain + " already in the store");
  InstanceCorpus corpus = load_corpus(a.input, a.domain, opts);
  const std::size_t n = corpus.local_toots.size() + corpus.federated_toots.size();
  graph.add_instance(std::move(corpus));
  if (a.registered_users) graph.set_registered_users(a.domain, a.registered_users);

  std::size_t edges = 0, skipped_edges = 0;
  if (!a.edges.empty()) {
    std::ifstream in(a.edges, std::ios::binary);
    if (!in) throw IoError("cannot read " + a.edges);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = a.edges + " line " + std::to_string(line_number) + ": ";
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + e.what());
      }
      if (!j.is_object() || !j.contains("follower") || !j.contains("followee") || !j["follower"].is_string() ||
          !j["followee"].is_string()) {
        throw SchemaError(where + "edge needs string fields \"follower\" and \"followee\"");
      }
      const UserRef from = UserRef::parse(j["follower"].get<std::string>());
      const UserRef to = UserRef::parse(j["followee"].get<std::string>());
      if (!graph.has_instance(from.domain) || !graph.has_instance(to.domain)) {
        ++skipped_edges;
        continue;
      }
      graph.add_follow(from, to);
      ++edges;
    }
  }
  save_federation(graph, g.store);
  out << "ingested " << n << " toots into " << a.domain << " (" << edges << " follow edges, " << skipped_edges
      << " skipped for unknown instances)\n";
}

struct SynthArgs {
  SynthConfig cfg;
};

void cmd_synth(const Globals& g, SynthArgs a, std::ostream& out) {
  a.cfg.seed = g.seed;
  const SynthFederation fed = generate_federation(a.cfg);
  save_federation(fed.graph, g.store);
  out << "wrote " << fed.graph.instance_count() << " instances to " << g.store << "\n";
}

void cmd_train(const Globals& g, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = make_config(g);
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  fs::create_directories(dir / "models");
  fs::create_directories(dir / "profiles");
  const auto prepared = prepare_instances(graph, cfg);
  std::string csv = "domain,train_n,test_n,vocabulary,local_f1,model_bytes,error\n";
  for (const auto& p : prepared) {
    if (!p.ok()) {
      csv += p.domain + ",NA,NA,NA,NA,NA,\"" + *p.error + "\"\n";
      continue;
    }
    const std::string bytes = serialize_model(*p.model);
    write_file(dir / "models" / (p.domain + ".fmlm"), bytes);
    write_file(dir / "profiles" / (p.domain + ".fmtp"), serialize_profile(p.profile));
    const double f1 = evaluate(*p.model, p.split.test, cfg.tokenizer).macro_f1;
    csv += p.domain + "," + std::to_string(p.split.train.size()) + "," + std::to_string(p.split.test.size()) + "," +
           std::to_string(p.vocab.size()) + "," + format_real(f1) + "," + std::to_string(bytes.size()) + ",\n";
  }
  write_file(dir / "train.csv", csv);
  write_file(dir / "train_run.json", run_info_json(run_info(cfg, start)));
  out << "trained " << prepared.size() << " instances; wrote " << (dir / "train.csv").string() << "\n";
}

void cmd_crossmatrix(const Globals& g, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = make_config(g);
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  const CrossMatrix m = run_cross_matrix(graph, cfg);
  write_file(dir / "crossmatrix.csv", cross_matrix_csv(m));
  write_file(dir / "crossmatrix_run.json", run_info_json(run_info(cfg, start)));
  out << "wrote " << (dir / "crossmatrix.csv").string() << "\n";
}

struct PairArgs {
  std::size_t k = 3;
  std::size_t presample_f = 0;
};

void apply_pairing(ExperimentConfig& cfg, const PairArgs& a) {
  cfg.pairing.k = a.k;
  if (a.presample_f) cfg.pairing.presample_f = a.presample_f;
  cfg.pairing.validate();
}

void cmd_pair(const Globals& g, const PairArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = make_config(g);
  apply_pairing(cfg, a);
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  const auto prepared = prepare_instances(graph, cfg);

  SimNetwork net;
  for (const auto& p : prepared) {
    if (!p.ok()) continue;
    auto& node = net.add_node(p.domain);
    node.publish_profile(p.profile);
    node.publish_model(*p.model);
  }
  RoundOptions opts;
  opts.pairing = cfg.pairing;
  opts.rate_limit = cfg.rate_limit;
  const RoundResult round = net.fetch_round(&graph, opts);

  std::string csv = "domain,pool,rank,peer,similarity,selected\n";
  auto decisions = ojson::array();
  for (const auto& [domain, r] : round.instances) {
    const char* pool = r.decision.provenance() == PoolProvenance::full ? "full" : "presampled";
    for (std::size_t i = 0; i < r.decision.ranking.size(); ++i) {
      const auto& peer = r.decision.ranking[i];
      const bool sel = std::find(r.decision.selected.begin(), r.decision.selected.end(), peer.domain) !=
                       r.decision.selected.end();
      csv += domain + "," + pool + "," + std::to_string(i + 1) + "," + peer.domain + "," +
             format_real(peer.similarity) + "," + (sel ? "true" : "false") + "\n";
    }
    decisions.push_back(ojson::parse(pairing_decision_json(r.decision)));
  }
  ojson j;
  j["decisions"] = std::move(decisions);
  j["profile_fetches"] = round.profile_fetches;
  j["model_fetches"] = round.model_fetches;
  j["warnings"] = round.warnings;
  j["run"] = ojson::parse(run_info_json(run_info(cfg, start)));
  write_file(dir / "pairing.csv", csv);
  write_file(dir / "pairing.json", j.dump(2));
  for (const auto& w : round.warnings) out << "warning: " << w << "\n";
  out << "profile fetches " << round.profile_fetches << ", model fetches " << round.model_fetches << "; wrote "
      << (dir / "pairing.csv").string() << "\n";
}

struct EnsembleArgs {
  PairArgs pair;
  bool audit = false;
};

void cmd_ensemble_eval(const Globals& g, const EnsembleArgs& a, std::ostream& out) {
  ExperimentConfig cfg = make_config(g);
  apply_pairing(cfg, a.pair);
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  const auto prepared = prepare_instances(graph, cfg);
  const CrossMatrix cross = run_cross_matrix(prepared, cfg.tokenizer);
  const EnsembleReport report = run_ensemble_experiment(graph, prepared, cross, cfg);
  write_file(dir / "ensemble.csv", ensemble_csv(report));
  write_file(dir / "ensemble.json", ensemble_json(report));

  if (a.audit) {
    std::map<std::string, ModelPtr> models;
    for (const auto& p : prepared) {
      if (p.ok()) models[p.domain] = p.model;
    }
    std::string lines;
    for (const auto& row : report.rows) {
      if (row.error) continue;
      const auto& p = *std::find_if(prepared.begin(), prepared.end(),
                                    [&](const PreparedInstance& x) { return x.domain == row.domain; });
      std::vector<ModelPtr> members;
      for (const auto& peer : row.selected) members.push_back(models.at(peer));
      Ensemble e(members, cfg.tie_rule, p.model);
      if (cfg.include_local_in_ensemble) e = e.with_local_member();
      for (const Toot& t : p.split.test) {
        auto rec = ojson::parse(audit_record_json(t, vote(e, t, cfg.tokenizer)));
        rec["instance"] = row.domain;
        rec["members"] = row.selected;
        lines += rec.dump() + "\n";
      }
    }
    write_file(dir / "audit.jsonl", lines);
  }
  out << "mean local macro-F1 " << format_real(report.mean_local_f1, 4) << ", ensemble "
      << format_real(report.mean_ensemble_f1, 4) << ", P@1 " << format_real(report.mean_p_at_1, 3) << ", P@3 "
      << format_real(report.mean_p_at_3, 3) << "\n";
}

struct SeedsArgs {
  std::size_t seeds = 1;
};

void cmd_noise_exp(const Globals& g, const PairArgs& pa, const SeedsArgs& sa, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = make_config(g);
  apply_pairing(cfg, pa);
  if (sa.seeds == 0) throw DomainError("--seeds must be positive");
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  const auto grid = default_noise_grid();

  std::string csv;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_level;
  ojson runs = ojson::array();
  for (std::size_t s = 0; s < sa.seeds; ++s) {
    ExperimentConfig c = cfg;
    c.seed = cfg.seed + s;
    const NoiseReport r = run_noise_experiment(graph, grid, c);
    std::string body = noise_csv(r);
    const auto nl = body.find('\n');
    if (csv.empty()) csv = "seed," + body.substr(0, nl + 1);
    std::istringstream rows(body.substr(nl + 1));
    for (std::string line; std::getline(rows, line);) csv += std::to_string(c.seed) + "," + line + "\n";
    for (const auto& sm : r.summary) {
      per_level[sm.level.name()].first.push_back(sm.mean_local_degradation);
      per_level[sm.level.name()].second.push_back(sm.mean_ensemble_degradation);
    }
    runs.push_back(ojson::parse(noise_json(r)));
  }
  std::string summary = "level,median_local_degradation,median_ensemble_degradation\n";
  for (const auto& level : grid) {
    const auto& [loc, ens] = per_level[level.name()];
    summary += level.name() + "," + format_real(median(loc)) + "," + format_real(median(ens)) + "\n";
  }
  write_file(dir / "noise.csv", csv);
  write_file(dir / "noise_summary.csv", summary);
  ojson j;
  j["seeds"] = std::move(runs);
  j["run"] = ojson::parse(run_info_json(run_info(cfg, start)));
  write_file(dir / "noise.json", j.dump(2));
  out << summary;
}

struct BudgetArgs {
  std::size_t n_min = 500;
  std::size_t n_max = 10000;
  std::size_t n_step = 500;
  std::size_t seeds = 1;
};

void cmd_budget_exp(const Globals& g, const BudgetArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = make_config(g);
  if (a.seeds == 0) throw DomainError("--seeds must be positive");
  const FederationGraph graph = load_store(g, cfg);
  const auto dir = out_dir(g);
  BudgetGrid grid;
  grid.n_min = a.n_min;
  grid.n_max = a.n_max;
  grid.n_step = a.n_step;

  std::string csv;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> cells;
  for (std::size_t s = 0; s < a.seeds; ++s) {
    ExperimentConfig c = cfg;
    c.seed = cfg.seed + s;
    const BudgetReport r = run_budget_experiment(graph, grid, c);
    std::string body = budget_csv(r);
    const auto nl = body.find('\n');
    if (csv.empty()) csv = "seed," + body.substr(0, nl + 1);
    std::istringstream rows(body.substr(nl + 1));
    for (std::string line; std::getline(rows, line);) csv += std::to_string(c.seed) + "," + line + "\n";
    for (const auto& row : r.rows) {
      cells[{row.domain, std::string(to_string(row.mode)), row.requested_n}].push_back(
          row.macro_f1.value_or(std::nan("")));
    }
  }
  std::string summary = "domain,mode,requested_n,median_macro_f1\n";
  for (const auto& [key, values] : cells) {
    const auto& [domain, mode, n] = key;
    summary += domain + "," + mode + "," + std::to_string(n) + "," + format_real(median(values)) + "\n";
  }
  write_file(dir / "budget.csv", csv);
  write_file(dir / "budget_summary.csv", summary);
  write_file(dir / "budget_run.json", run_info_json(run_info(cfg, start)));
  out << "wrote " << (dir / "budget.csv").string() << " and " << (dir / "budget_summary.csv").string() << "\n";
}

void cmd_report(const Globals& g, std::ostream& out) {
  const fs::path dir(g.out);
  std::string md = "# fedmod report\n";
  bool any = false;
  for (const char* name : {"train.csv", "ensemble.csv", "pairing.csv", "noise_summary.csv", "budget_summary.csv",
                           "crossmatrix.csv"}) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    any = true;
    md += "\n## " + std::string(name) + "\n\n";
    std::istringstream rows(read_file(p));
    std::string line;
    bool header = true;
    while (std::getline(rows, line)) {
      std::string cells;
      std::size_t columns = 1;
      for (char ch : line) {
        if (ch == ',') {
          cells += " | ";
          ++columns;
        } else {
          cells.push_back(ch);
        }
      }
      md += "| " + cells + " |\n";
      if (header) {
        md += "|";
        for (std::size_t i = 0; i < columns; ++i) md += "---|";
        md += "\n";
        header = false;
      }
    }
  }
  if (!any) throw IoError("no experiment outputs found in " + dir.string());
  write_file(dir / "report.md", md);
  out << md;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fedmod: decentralized moderation by model pairing"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threshold", g.threshold, "Toxicity label threshold")
      ->check(CLI::IsMember({0.5, 0.8}))
      ->capture_default_str();
  app.add_option("--trainer", g.trainer, "Classifier trainer")
      ->check(CLI::IsMember({"logistic", "hinge"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--store", g.store, "Federation store directory")->capture_default_str();
  app.add_option("--label-scheme", g.label_scheme, "toxicity_score or content_warning")->capture_default_str();
  app.add_option("--tie-rule", g.tie_rule, "mean_score or local_fallback")->capture_default_str();
  app.add_flag("--include-local", g.include_local, "Add the local model to the voting ensemble");
  app.add_option("--learning-rate", g.learning_rate, "Override the training learning rate");
  app.add_option("--epochs", g.epochs, "Override the training epoch budget");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Add one instance's JSONL timeline to the store");
  ingest_cmd->add_option("--domain", ingest.domain, "Instance domain")->required();
  ingest_cmd->add_option("--input", ingest.input, "JSONL toot file")->required();
  ingest_cmd->add_option("--edges", ingest.edges, "JSONL follow edges {follower, followee}");
  ingest_cmd->add_option("--registered-users", ingest.registered_users, "Registered user count");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic federation into the store");
  synth_cmd->add_option("--instances", synth.cfg.instances)->capture_default_str();
  synth_cmd->add_option("--clusters", synth.cfg.clusters)->capture_default_str();
  synth_cmd->add_option("--toots-per-instance", synth.cfg.toots_per_instance)->capture_default_str();
  synth_cmd->add_option("--users", synth.cfg.users_per_instance)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train and profile every instance");
  auto* cross_cmd = app.add_subcommand("crossmatrix", "Cross-instance transfer matrix");

  PairArgs pair;
  auto* pair_cmd = app.add_subcommand("pair", "Run one profile exchange round and record pairing decisions");
  auto add_pair_opts = [](CLI::App* cmd, PairArgs& p) {
    cmd->add_option("--k", p.k, "Peers whose models are fetched")->capture_default_str();
    cmd->add_option("--presample-f", p.presample_f, "Pre-sample the f peers with most shared follows (0: off)")
        ->capture_default_str();
  };
  add_pair_opts(pair_cmd, pair);

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble-eval", "Local versus top-k ensemble macro-F1 and P@k");
  add_pair_opts(ens_cmd, ens.pair);
  ens_cmd->add_flag("--audit", ens.audit, "Write one vote record per test toot to audit.jsonl");

  PairArgs noise_pair;
  SeedsArgs noise_seeds;
  auto* noise_cmd = app.add_subcommand("noise-exp", "Label-noise robustness of local and ensemble models");
  add_pair_opts(noise_cmd, noise_pair);
  noise_cmd->add_option("--seeds", noise_seeds.seeds, "Consecutive seeds to run")->capture_default_str();

  BudgetArgs budget;
  auto* budget_cmd = app.add_subcommand("budget-exp", "Macro-F1 against annotation budget");
  budget_cmd->add_option("--n-min", budget.n_min)->capture_default_str();
  budget_cmd->add_option("--n-max", budget.n_max)->capture_default_str();
  budget_cmd->add_option("--n-step", budget.n_step)->capture_default_str();
  budget_cmd->add_option("--seeds", budget.seeds, "Consecutive seeds to run")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "Render the CSV outputs in --out as markdown");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error[UsageError]: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (ingest_cmd->parsed()) cmd_ingest(g, ingest, out);
    else if (synth_cmd->parsed()) cmd_synth(g, synth, out);
    else if (train_cmd->parsed()) cmd_train(g, out);
    else if (cross_cmd->parsed()) cmd_crossmatrix(g, out);
    else if (pair_cmd->parsed()) cmd_pair(g, pair, out);
    else if (ens_cmd->parsed()) cmd_ensemble_eval(g, ens, out);
    else if (noise_cmd->parsed()) cmd_noise_exp(g, noise_pair, noise_seeds, out);
    else if (budget_cmd->parsed()) cmd_budget_exp(g, budget, out);
    else if (report_cmd->parsed()) cmd_report(g, out);
  } catch (const Error& e) {
    err << "error[" << e.kind() << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error[InternalError]: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}

}  // namespace fedmod::cli
