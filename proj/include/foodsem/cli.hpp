#ifndef FOODSEM_CLI_HPP
#define FOODSEM_CLI_HPP

// Command-line front end. Every subcommand prints one JSON summary line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "foodsem/balancer.hpp"
#include "foodsem/bioc.hpp"
#include "foodsem/folds.hpp"
#include "foodsem/gateway.hpp"
#include "foodsem/ir.hpp"
#include "foodsem/nel_eval.hpp"
#include "foodsem/pipeline.hpp"
#include "foodsem/prompt.hpp"
#include "foodsem/simulator.hpp"

#ifndef FOODSEM_DATA_DIR
#define FOODSEM_DATA_DIR "data"
#endif

namespace foodsem {

namespace fs = std::filesystem;

struct RunConfig {
  std::string corpus_dir;
  std::string ontology;
  std::string kind;
  std::string pools = std::string(FOODSEM_DATA_DIR) + "/pools/default_pools.jsonl";
  std::string lexicon;
  std::string general;
  std::string ir;
  std::string artificial;
  std::string out = "out";
  std::size_t threshold = kDefaultThreshold;
  std::vector<std::size_t> set_sizes{7, 9, 12};
  bool all_sources = false;
  std::size_t folds = 5;
  std::optional<std::size_t> fold_index;
  std::uint64_t seed = 42;
  std::string uri_mode = "short";
  std::string prompt_uri_mode = "full";
  std::size_t n_shot = 0;
  std::size_t token_budget = kDefaultTokenBudget;
  std::size_t general_target = kDefaultGeneralTarget;
  std::string token_lengths;
  std::string prompts;
  std::string responses;
  std::string gold;
  std::string pred;
  GatewayConfig gateway;
  CorruptionProfile profile;
};

namespace cli_detail {

using Json = nlohmann::ordered_json;

inline std::optional<Ontology> ontology_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto o = parse_ontology(s);
  if (!o) throw Error(ErrorKind::ConfigError, "unknown ontology '" + s + "' (foodon|snomed|hansard)");
  return o;
}

inline std::optional<SourceKind> kind_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "recipe") return SourceKind::Recipe;
  if (s == "abstract") return SourceKind::Abstract;
  throw Error(ErrorKind::ConfigError, "unknown corpus kind '" + s + "' (recipe|abstract)");
}

inline UriMode uri_flag(const std::string& s) {
  auto m = parse_uri_mode(s);
  if (!m) throw Error(ErrorKind::ConfigError, "unknown uri mode '" + s + "' (short|full)");
  return *m;
}

inline void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorKind::ConfigError, "missing " + what);
  if (!fs::is_regular_file(path)) throw Error(ErrorKind::ConfigError, what + " " + path + " does not exist");
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << text;
}

inline std::string ir_jsonl(const std::vector<IRPair>& pairs) {
  std::string s;
  for (const IRPair& p : pairs) s += to_json(p).dump() + "\n";
  return s;
}

inline std::string text_jsonl(const std::vector<IRPair>& pairs) {
  std::string s;
  for (const IRPair& p : pairs) s += Json{{"text", render_training_text(p)}}.dump() + "\n";
  return s;
}

inline std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::FormatError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline fs::path fold_dir(const RunConfig& c, std::size_t i) { return fs::path(c.out) / ("fold_" + std::to_string(i)); }

inline std::size_t need_fold(const RunConfig& c) {
  if (!c.fold_index) throw Error(ErrorKind::ConfigError, "missing --fold-index");
  return *c.fold_index;
}

inline PhrasePools pools_of(const RunConfig& c) {
  require_file(c.pools, "phrase pool file");
  return load_phrase_pools(c.pools);
}

inline CorpusLoad load_corpus(const RunConfig& c) {
  if (c.corpus_dir.empty()) throw Error(ErrorKind::ConfigError, "missing --corpus-dir");
  return load_corpus_dir(c.corpus_dir, ontology_flag(c.ontology), kind_flag(c.kind));
}

// Corpus pairs from --ir, or converted from --corpus-dir when no IR file is given.
inline std::vector<IRPair> corpus_pairs(const RunConfig& c) {
  if (!c.ir.empty()) {
    require_file(c.ir, "IR file");
    return read_ir_jsonl(c.ir);
  }
  const CorpusLoad load = load_corpus(c);
  return flatten(build_ir_dataset(load.documents, pools_of(c), uri_flag(c.uri_mode), derive_seed(c.seed, "convert"))
                     .sequences);
}

inline BalanceSettings balance_settings(const RunConfig& c) {
  BalanceSettings s;
  s.threshold = c.threshold;
  s.set_sizes = c.set_sizes;
  s.uri_mode = uri_flag(c.uri_mode);
  s.seed = derive_seed(c.seed, "balance");
  if (c.all_sources) s.analysis_kind.reset();
  if (auto o = ontology_flag(c.ontology)) s.ontologies = {*o};
  return s;
}

inline LabelLexicon extra_lexicon(const RunConfig& c) {
  if (c.lexicon.empty()) return {};
  require_file(c.lexicon, "lexicon");
  return load_lexicon(c.lexicon);
}

inline void write_distributions(const RunConfig& c, const BalanceRun& run) {
  for (const auto& [o, b] : run.per_ontology)
    write_text(fs::path(c.out) / ("distribution_" + std::string(to_string(o)) + ".tsv"), distribution_table(b.report));
}

inline Json per_ontology_counts(const BalanceRun& run) {
  Json j = Json::object();
  for (Ontology o : kOntologyOrder)
    if (auto it = run.per_ontology.find(o); it != run.per_ontology.end())
      j[std::string(to_string(o))] = it->second.batch.pairs.size();
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_ingest(const RunConfig& c, std::ostream& out) {
  const CorpusLoad load = load_corpus(c);
  std::string s;
  std::size_t annotations = 0;
  Json per = Json::object();
  for (const auto& d : load.documents) {
    s += to_json(d).dump() + "\n";
    annotations += d.annotations.size();
    Json& slot = per[std::string(to_string(d.ontology))][std::string(to_string(d.source_kind))];
    slot = slot.is_null() ? d.annotations.size() : slot.get<std::size_t>() + d.annotations.size();
  }
  write_text(fs::path(c.out) / "documents.jsonl", s);
  out << Json{{"command", "ingest"},
              {"files", load.files.size()},
              {"documents", load.documents.size()},
              {"annotations", annotations},
              {"annotations_by_ontology", per},
              {"notes", load.notes.size()}}
             .dump()
      << "\n";
  return 0;
}

struct Converted {
  IRDataset dataset;
  std::vector<IRPair> pairs;
};

inline Converted convert(const RunConfig& c) {
  const CorpusLoad load = load_corpus(c);
  Converted r;
  r.dataset = build_ir_dataset(load.documents, pools_of(c), uri_flag(c.uri_mode), derive_seed(c.seed, "convert"));
  std::string ir, text;
  for (std::size_t i = 0; i < r.dataset.sequences.size(); ++i) {
    const IRSequence& seq = r.dataset.sequences[i];
    for (const IRPair& p : seq.pairs) {
      ir += to_json(p, i).dump() + "\n";
      r.pairs.push_back(p);
    }
    text += Json{{"text", render_training_text(seq)}}.dump() + "\n";
  }
  write_text(fs::path(c.out) / "ir_dataset.jsonl", ir);
  write_text(fs::path(c.out) / "ir_dataset_text.jsonl", text);
  return r;
}

inline int cmd_convert(const RunConfig& c, std::ostream& out) {
  const Converted r = convert(c);
  out << Json{{"command", "convert"},
              {"sequences", r.dataset.sequences.size()},
              {"pairs", r.pairs.size()},
              {"duplicate_sources", r.dataset.duplicate_sources.size()}}
             .dump()
      << "\n";
  return 0;
}

inline int cmd_analyze(const RunConfig& c, std::ostream& out) {
  const std::vector<IRPair> pairs = corpus_pairs(c);
  const BalanceSettings s = balance_settings(c);
  const LabelLexicon lexicon = extra_lexicon(c);
  Json per = Json::object();
  for (Ontology o : s.ontologies) {
    std::vector<IRPair> analyzed;
    for (const IRPair& p : pairs)
      if (p.task == Task::Nel && p.ontology == o && (!s.analysis_kind || p.source_kind == s.analysis_kind))
        analyzed.push_back(p);
    DistributionReport r = entity_distribution(analyzed, o, s.threshold);
    extend_with_lexicon(r, lexicon);
    write_text(fs::path(c.out) / ("distribution_" + std::string(to_string(o)) + ".tsv"), distribution_table(r));
    per[std::string(to_string(o))] = {{"entities", r.counts.size()},
                                      {"mentions", r.total_mentions()},
                                      {"total_deficit", r.total_deficit()}};
  }
  out << Json{{"command", "analyze"}, {"threshold", s.threshold}, {"ontologies", per}}.dump() << "\n";
  return 0;
}

inline BalanceRun balance(const RunConfig& c, const std::vector<IRPair>& pairs) {
  const BalanceRun run = balance_corpus(pairs, extra_lexicon(c), pools_of(c), balance_settings(c));
  const std::vector<IRPair> art = run.artificial();
  write_distributions(c, run);
  write_text(fs::path(c.out) / "artificial.jsonl", ir_jsonl(art));
  write_text(fs::path(c.out) / "artificial_text.jsonl", text_jsonl(art));
  return run;
}

inline int cmd_balance(const RunConfig& c, std::ostream& out) {
  const BalanceRun run = balance(c, corpus_pairs(c));
  out << Json{{"command", "balance"},
              {"artificial", per_ontology_counts(run)},
              {"total_artificial", run.artificial().size()},
              {"leakage", run.leakage.size()}}
             .dump()
      << "\n";
  return run.leakage.empty() ? 0 : 1;
}

struct FoldRun {
  std::size_t dropped = 0;
  std::size_t leakage = 0;
  std::vector<std::size_t> train_sizes, test_sizes;
  std::size_t general_count = 0;
};

inline FoldRun folds(const RunConfig& c, const std::vector<IRPair>& corpus, const std::vector<IRPair>& artificial) {
  std::vector<IRPair> all = corpus;
  all.insert(all.end(), artificial.begin(), artificial.end());
  const DedupResult dedup = dedup_by_instruction(all);
  const Datasets datasets = split_into_datasets(dedup.kept);
  const FoldPlan plan = plan_folds(datasets, c.folds, derive_seed(c.seed, "folds"));
  write_text(fs::path(c.out) / "fold_plan.jsonl", fold_plan_jsonl(plan));

  std::vector<IRPair> general;
  if (!c.general.empty()) {
    require_file(c.general, "general corpus");
    std::ifstream in(c.general);
    general = parse_general_corpus(in, c.general);
  }
  FoldOptions options;
  options.token_budget = c.token_budget;
  options.general_target = c.general_target;
  if (!c.token_lengths.empty()) {
    // Sidecar lines: {"pair_id": ..., "tokens": n}
    require_file(c.token_lengths, "token length sidecar");
    std::unordered_map<std::string, std::size_t> lengths;
    for (const Json& j : read_jsonl(c.token_lengths))
      lengths[j.at("pair_id").get<std::string>()] = j.at("tokens").get<std::size_t>();
    options.token_counter = sidecar_token_counter(std::move(lengths));
  }

  FoldRun r;
  r.dropped = dedup.dropped_ids.size();
  for (std::size_t i = 0; i < plan.k; ++i) {
    const FoldManifest m = materialize_fold(plan, datasets, i, general, options);
    r.leakage += verify_no_leakage(m).size();
    r.train_sizes.push_back(m.train.size());
    r.test_sizes.push_back(m.test.size());
    r.general_count = m.general_count;
    const fs::path dir = fold_dir(c, i);
    write_text(dir / "train.jsonl", ir_jsonl(m.train));
    write_text(dir / "test.jsonl", ir_jsonl(m.test));
    write_text(dir / "train_text.jsonl", text_jsonl(m.train));
  }
  return r;
}

inline Json fold_summary(const FoldRun& r) {
  return {{"dedup_dropped", r.dropped},
          {"train_sizes", r.train_sizes},
          {"test_sizes", r.test_sizes},
          {"general_per_fold", r.general_count},
          {"leakage", r.leakage}};
}

inline int cmd_folds(const RunConfig& c, std::ostream& out) {
  const std::vector<IRPair> corpus = corpus_pairs(c);
  std::vector<IRPair> artificial;
  if (!c.artificial.empty()) {
    require_file(c.artificial, "artificial pair file");
    artificial = read_ir_jsonl(c.artificial);
  }
  const FoldRun r = folds(c, corpus, artificial);
  Json j{{"command", "folds"}, {"k", c.folds}};
  j.update(fold_summary(r));
  out << j.dump() << "\n";
  return r.leakage == 0 ? 0 : 1;
}

inline std::string default_prompts(const RunConfig& c, std::size_t fold) {
  return (fold_dir(c, fold) / ("prompts_" + std::to_string(c.n_shot) + "shot.jsonl")).string();
}

inline std::string default_responses(const RunConfig& c, std::size_t fold) {
  return (fold_dir(c, fold) / "responses.jsonl").string();
}

inline int cmd_prompts(const RunConfig& c, std::ostream& out) {
  const std::size_t i = need_fold(c);
  const std::string test_path = (fold_dir(c, i) / "test.jsonl").string();
  const std::string train_path = (fold_dir(c, i) / "train.jsonl").string();
  require_file(test_path, "fold test file");
  require_file(train_path, "fold train file");
  const std::vector<IRPair> test = read_ir_jsonl(test_path);
  const std::vector<IRPair> train = read_ir_jsonl(train_path);
  const UriMode mode = uri_flag(c.prompt_uri_mode);
  const std::uint64_t seed = derive_seed(c.seed, "prompts");
  std::string s;
  for (const IRPair& p : test) {
    const NShotPrompt np =
        build_nshot_prompt(p.instruction, p.task, p.ontology, c.n_shot, train, prompt_seed(seed, p.pair_id), mode);
    s += Json{{"instance_id", p.pair_id}, {"n", c.n_shot}, {"prompt", np.body}}.dump() + "\n";
  }
  const std::string path = c.prompts.empty() ? default_prompts(c, i) : c.prompts;
  write_text(path, s);
  out << Json{{"command", "prompts"}, {"fold", i}, {"n", c.n_shot}, {"prompts", test.size()}, {"file", path}}.dump()
      << "\n";
  return 0;
}

inline int cmd_run(const RunConfig& c, std::ostream& out) {
  GatewayConfig g = c.gateway;
  g.apply_environment();
  validate(g);
  std::string prompts_path = c.prompts;
  std::string responses_path = c.responses;
  if (prompts_path.empty() || responses_path.empty()) {
    const std::size_t i = need_fold(c);
    if (prompts_path.empty()) prompts_path = default_prompts(c, i);
    if (responses_path.empty()) responses_path = default_responses(c, i);
  }
  require_file(prompts_path, "prompt file");
  std::vector<PromptItem> items;
  for (const Json& j : read_jsonl(prompts_path))
    items.push_back({j.at("instance_id").get<std::string>(), j.at("prompt").get<std::string>()});
  const std::vector<Completion> done = complete_batch(items, g);
  std::string s;
  std::size_t failures = 0;
  for (const Completion& r : done) {
    s += to_json(r).dump() + "\n";
    failures += r.transport_failure ? 1 : 0;
  }
  write_text(responses_path, s);
  out << Json{{"command", "run"},
              {"prompts", items.size()},
              {"responses", done.size()},
              {"transport_failures", failures},
              {"file", responses_path}}
             .dump()
      << "\n";
  return 0;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  c.profile.validate();
  std::string gold_path = c.gold;
  std::string responses_path = c.responses;
  if (gold_path.empty() || responses_path.empty()) {
    const std::size_t i = need_fold(c);
    if (gold_path.empty()) gold_path = (fold_dir(c, i) / "test.jsonl").string();
    if (responses_path.empty()) responses_path = default_responses(c, i);
  }
  require_file(gold_path, "gold file");
  CorruptionProfile profile = c.profile;
  profile.rng_seed = derive_seed(c.seed, "simulate");
  std::string s;
  std::size_t n = 0;
  for (const IRPair& p : read_ir_jsonl(gold_path)) {
    if (p.task == Task::General) continue;
    Completion r;
    r.instance_id = p.pair_id;
    r.prompt = p.instruction;
    r.response = simulate_response(p, profile);
    r.attempts = 1;
    s += to_json(r).dump() + "\n";
    ++n;
  }
  write_text(responses_path, s);
  out << Json{{"command", "simulate"}, {"responses", n}, {"file", responses_path}}.dump() << "\n";
  return 0;
}

inline std::string group_of(const IRPair& p) {
  if (p.task == Task::Ner) return "ner_" + std::string(p.source_kind ? to_string(*p.source_kind) : "corpus");
  const std::string onto(to_string(*p.ontology));
  if (p.source == PairSource::Artificial) return "artificial_" + onto;
  return std::string(p.source_kind ? to_string(*p.source_kind) : "corpus") + "_" + onto;
}

inline int cmd_eval(const RunConfig& c, std::ostream& out) {
  std::string gold_path = c.gold;
  std::string pred_path = c.pred;
  std::string fold_label = c.fold_index ? "fold_" + std::to_string(*c.fold_index) : "all";
  if (gold_path.empty() || pred_path.empty()) {
    const std::size_t i = need_fold(c);
    if (gold_path.empty()) gold_path = (fold_dir(c, i) / "test.jsonl").string();
    if (pred_path.empty()) pred_path = default_responses(c, i);
  }
  require_file(gold_path, "gold file");
  require_file(pred_path, "prediction file");
  const std::vector<IRPair> gold = read_ir_jsonl(gold_path);

  // Predictions: transcript lines {instance_id, response} or IR lines {pair_id, response}.
  std::map<std::string, std::string> responses;
  for (const Json& j : read_jsonl(pred_path)) {
    const std::string id = j.contains("instance_id") ? j["instance_id"].get<std::string>() : j.at("pair_id").get<std::string>();
    if (!responses.emplace(id, j.value("response", "")).second)
      throw Error(ErrorKind::AlignmentError, "duplicate prediction for '" + id + "'");
  }
  std::set<std::string> gold_ids;
  for (const IRPair& p : gold) gold_ids.insert(p.pair_id);
  for (const auto& [id, r] : responses)
    if (!gold_ids.count(id)) throw Error(ErrorKind::AlignmentError, "prediction '" + id + "' has no gold instance");

  std::map<std::string, std::pair<std::vector<GoldInstance>, std::vector<PredictionMap>>> nel;
  std::map<std::string, NerTally> ner;
  std::map<std::string, std::size_t> ner_instances;
  for (const IRPair& p : gold) {
    if (p.task == Task::General) continue;
    const auto it = responses.find(p.pair_id);
    const std::string response = it == responses.end() ? std::string() : it->second;
    const std::string group = group_of(p);
    if (p.task == Task::Ner) {
      ner[group].add(p.ner_gold, parse_ner_response(response));
      ++ner_instances[group];
    } else {
      auto& [g, preds] = nel[group];
      g.push_back({p.pair_id, p.nel_gold});
      preds.push_back(parse_response(response, *p.ontology, p.pair_id));
    }
  }

  Json report = Json::object();
  std::string tsv = "fold\ttest_set\tprecision\trecall\tf1\n";
  Json brief = Json::object();
  for (const auto& [group, gp] : nel) {
    const EvalReport r = score_nel(gp.first, gp.second);
    report[group] = to_json(r);
    tsv += summary_row(fold_label, group, r.macro_weighted) + "\n";
    brief[group] = {{"precision", r.macro_weighted.precision},
                    {"recall", r.macro_weighted.recall},
                    {"f1", r.macro_weighted.f1}};
  }
  for (const auto& [group, tally] : ner) {
    const MetricTriple m = tally.metrics();
    report[group] = {{"micro", {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}}},
                     {"counts", {{"instances", ner_instances[group]}, {"tp", tally.tp}, {"fp", tally.fp}, {"fn", tally.fn}}}};
    tsv += summary_row(fold_label, group, m) + "\n";
    brief[group] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  const fs::path dir = c.fold_index ? fold_dir(c, *c.fold_index) : fs::path(c.out);
  write_text(dir / "eval_report.json", report.dump(2) + "\n");
  write_text(dir / "summary.tsv", tsv);
  out << Json{{"command", "eval"}, {"fold", fold_label}, {"groups", brief}}.dump() << "\n";
  return 0;
}

inline int cmd_pipeline(const RunConfig& c, std::ostream& out) {
  const Converted conv = convert(c);
  const BalanceRun run = balance(c, conv.pairs);
  const FoldRun fr = folds(c, conv.pairs, run.artificial());
  const std::size_t artificial = run.artificial().size();
  Json j{{"command", "pipeline"},
         {"sequences", conv.dataset.sequences.size()},
         {"corpus_pairs", conv.pairs.size()},
         {"artificial", per_ontology_counts(run)},
         {"total_artificial", artificial},
         {"fine_tuning_instances", conv.dataset.sequences.size() + artificial},
         {"total_pairs", conv.pairs.size() + artificial},
         {"balance_leakage", run.leakage.size()},
         {"k", c.folds}};
  j.update(fold_summary(fr));
  out << j.dump() << "\n";
  return run.leakage.empty() && fr.leakage == 0 ? 0 : 1;
}

}  // namespace cli_detail

/// Runs one subcommand. Exit status: 0 success, 1 validation error, 2
/// configuration error or bad usage.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  RunConfig c;
  CLI::App app{"Food-semantics instruction data toolkit", "foodsem"};
  app.require_subcommand(1);

  auto common = [&c](CLI::App* s) {
    s->add_option("--out", c.out, "output directory");
    s->add_option("--seed", c.seed, "top-level seed");
  };
  auto corpus = [&c](CLI::App* s) {
    s->add_option("--corpus-dir", c.corpus_dir, "directory of BioC XML files");
    s->add_option("--ontology", c.ontology, "foodon|snomed|hansard");
    s->add_option("--kind", c.kind, "recipe|abstract (default: from file name)");
    s->add_option("--pools", c.pools, "phrase pool JSONL");
    s->add_option("--uri-mode", c.uri_mode, "short|full");
  };
  auto balancing = [&c](CLI::App* s) {
    s->add_option("--ir", c.ir, "corpus IR JSONL (instead of --corpus-dir)");
    s->add_option("--threshold", c.threshold, "coverage threshold");
    s->add_option("--lexicon", c.lexicon, "label lexicon TSV");
    s->add_option("--set-sizes", c.set_sizes, "artificial set sizes");
    s->add_flag("--all-sources", c.all_sources, "measure coverage on abstracts too");
  };
  auto folding = [&c](CLI::App* s) {
    s->add_option("--folds", c.folds, "number of folds");
    s->add_option("--general", c.general, "general-instruction JSONL");
    s->add_option("--token-budget", c.token_budget, "max tokens for general instances");
    s->add_option("--general-target", c.general_target, "general instances per fold");
    s->add_option("--token-lengths", c.token_lengths, "JSONL sidecar of exact token counts");
  };

  auto* ingest = app.add_subcommand("ingest", "parse BioC files into documents.jsonl");
  common(ingest);
  corpus(ingest);
  auto* conv = app.add_subcommand("convert", "build IR sequences from BioC files");
  common(conv);
  corpus(conv);
  auto* analyze = app.add_subcommand("analyze", "entity distribution and deficits");
  common(analyze);
  corpus(analyze);
  balancing(analyze);
  auto* bal = app.add_subcommand("balance", "generate artificial NEL pairs");
  common(bal);
  corpus(bal);
  balancing(bal);
  auto* fold = app.add_subcommand("folds", "plan and write cross-validation folds");
  common(fold);
  corpus(fold);
  folding(fold);
  fold->add_option("--ir", c.ir, "corpus IR JSONL (instead of --corpus-dir)");
  fold->add_option("--artificial", c.artificial, "artificial IR JSONL");
  auto* prompts = app.add_subcommand("prompts", "build n-shot prompts for a fold's test set");
  common(prompts);
  prompts->add_option("--fold-index", c.fold_index, "fold");
  prompts->add_option("--n-shot", c.n_shot, "0|1|5 exemplars");
  prompts->add_option("--uri-mode", c.prompt_uri_mode, "exemplar reference rendering");
  prompts->add_option("--prompts", c.prompts, "output file");
  auto* run = app.add_subcommand("run", "send prompts to a chat-completions endpoint");
  common(run);
  run->add_option("--fold-index", c.fold_index, "fold");
  run->add_option("--n-shot", c.n_shot, "selects the default prompt file");
  run->add_option("--prompts", c.prompts, "prompt JSONL");
  run->add_option("--responses", c.responses, "transcript output");
  run->add_option("--endpoint-url", c.gateway.endpoint_url, "endpoint (env FOODSEM_ENDPOINT)");
  run->add_option("--model", c.gateway.model_name, "model name (env FOODSEM_MODEL)");
  run->add_option("--max-in-flight", c.gateway.max_in_flight, "concurrent requests");
  run->add_option("--max-new-tokens", c.gateway.max_new_tokens, "generation limit");
  run->add_option("--temperature", c.gateway.temperature, "sampling temperature");
  run->add_option("--timeout", c.gateway.request_timeout, "request timeout, seconds");
  run->add_option("--attempts", c.gateway.retry.max_attempts, "attempts per prompt");
  run->add_option("--backoff", c.gateway.retry.backoff_base, "retry backoff base, seconds");
  auto* sim = app.add_subcommand("simulate", "gold-derived responses with optional corruption");
  common(sim);
  sim->add_option("--fold-index", c.fold_index, "fold");
  sim->add_option("--gold", c.gold, "IR JSONL to answer");
  sim->add_option("--responses", c.responses, "transcript output");
  sim->add_option("--p-drop", c.profile.p_drop_mention, "drop a mention");
  sim->add_option("--p-corrupt", c.profile.p_corrupt_ref, "corrupt a reference");
  sim->add_option("--p-format", c.profile.p_format_noise, "format noise");
  sim->add_option("--p-empty", c.profile.p_empty, "empty response");
  auto* ev = app.add_subcommand("eval", "score responses against gold");
  common(ev);
  ev->add_option("--fold-index", c.fold_index, "fold");
  ev->add_option("--gold", c.gold, "gold IR JSONL");
  ev->add_option("--pred", c.pred, "transcript or IR JSONL with responses");
  auto* pipe = app.add_subcommand("pipeline", "convert, balance and folds in one go");
  common(pipe);
  corpus(pipe);
  balancing(pipe);
  folding(pipe);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(c, out);
    if (*conv) return cmd_convert(c, out);
    if (*analyze) return cmd_analyze(c, out);
    if (*bal) return cmd_balance(c, out);
    if (*fold) return cmd_folds(c, out);
    if (*prompts) return cmd_prompts(c, out);
    if (*run) return cmd_run(c, out);
    if (*sim) return cmd_simulate(c, out);
    if (*ev) return cmd_eval(c, out);
    if (*pipe) return cmd_pipeline(c, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.is_config_error() ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace foodsem

#endif  // FOODSEM_CLI_HPP
