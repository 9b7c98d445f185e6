// Acceptance runner: one PASS/FAIL/SKIP line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "foodsem/balancer.hpp"
#include "foodsem/cli.hpp"
#include "foodsem/folds.hpp"
#include "support.hpp"

using namespace foodsem;
namespace ts = testing_support;

namespace {

struct Outcome {
  enum { Pass, Fail, Skip } status = Pass;
  std::string detail;
};

Outcome fail(std::string why) { return {Outcome::Fail, std::move(why)}; }

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.status != Outcome::Skip && secs >= limit_s) {
    std::ostringstream why;
    why << "took " << secs << " s, limit " << limit_s << " s";
    o = fail(o.detail.empty() ? why.str() : o.detail + "; " + why.str());
  }
  const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
  if (o.status == Outcome::Fail) ++failures;
  std::cout << tag << "  " << name << "  (" << std::fixed << std::setprecision(3) << secs << " s)";
  if (!o.detail.empty()) std::cout << "  " << o.detail;
  std::cout << std::endl;
}

Outcome listing_golden() {
  std::vector<AnnotatedDocument> docs;
  for (const char* f : {"listing_foodon.xml", "listing_hansard.xml", "listing_snomedct.xml"}) {
    const Ontology o = *ontology_from_filename(f);
    for (auto& d : parse_bioc_collection(read_file(ts::fixture(f)), SourceKind::Recipe, o))
      docs.push_back(resolve_spans(std::move(d)));
  }
  const AnnotatedDocument& listing = docs.at(0);
  if (listing.doc_id != "0recipe1006") return fail("unexpected doc id " + listing.doc_id);
  if (listing.annotations.size() != 7) return fail("expected 7 annotations in the listing");
  if (listing.annotations[0].surface_text != "CREAM CHEESE" || listing.annotations[0].entity_refs.size() != 2)
    return fail("annotation 1 differs");
  const auto bundles = group_ontology_variants(docs);
  if (bundles.size() != 1 || bundles[0].source_id != "0recipe1006") return fail("grouping did not yield 0recipe1006");
  const IRSequence seq = build_ir_sequence(bundles[0], ts::default_pools(), UriMode::Short, 1);
  if (seq.pairs.size() != 4) return fail("expected 4 pairs");
  if (seq.pairs[0].task != Task::Ner) return fail("first pair is not NER");
  const std::vector<std::string> ner{"cream cheese", "beef",    "olives",     "onion",
                                     "Worcestershire sauce", "walnuts", "cheese ball"};
  if (seq.pairs[0].ner_gold != ner) return fail("NER gold differs");
  std::size_t nel = 0;
  for (const auto& p : seq.pairs) {
    if (p.task != Task::Nel) continue;
    ++nel;
    if (p.ontology != Ontology::FoodOn) continue;
    const RefSet* cc = p.nel_gold.find("cream cheese");
    const RefSet want{{Ontology::FoodOn, "FOODON", "03301889", {}}, {Ontology::FoodOn, "FOODON", "00001013", {}}};
    if (!cc || *cc != want) return fail("FoodOn gold for cream cheese differs");
  }
  if (nel != 3) return fail("expected 3 NEL pairs");
  return {};
}

Outcome round_trip() {
  std::mt19937_64 g(1234);
  std::size_t n = 0, mismatches = 0;
  for (int rep = 0; rep < 200; ++rep)
    for (Ontology o : kOntologyOrder)
      for (UriMode mode : {UriMode::Short, UriMode::FullUri}) {
        const IRPair p = ts::random_nel_pair(g, o, mode, "rt-" + std::to_string(n++));
        const PredictionMap m = parse_response(p.response, o, p.pair_id);
        if (!m.meaningful || m.entries != p.nel_gold) ++mismatches;
      }
  if (mismatches) return fail(std::to_string(mismatches) + " of " + std::to_string(n) + " pairs did not round-trip");
  return {Outcome::Pass, std::to_string(n) + " pairs"};
}

Outcome metric_oracle() {
  std::mt19937_64 g(777);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const ts::ScoreFixture f = ts::random_score_fixture(g);
    const EvalReport r = score_nel(f.gold, f.preds);
    const ts::OracleScore o = ts::oracle_score(f.gold, f.preds);
    if (r.per_entity.size() != o.per_entity.size()) return fail("entity sets differ at fixture " + std::to_string(i));
    auto track = [&worst](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    for (const auto& [e, m] : r.per_entity) {
      const auto it = o.per_entity.find(e);
      if (it == o.per_entity.end()) return fail("entity missing from oracle");
      const auto& [p, rc, f1, gc] = it->second;
      track(m.precision, p);
      track(m.recall, rc);
      track(m.f1, f1);
      if (m.gold_count != gc) return fail("gold counts differ");
    }
    track(r.macro_weighted.precision, o.p);
    track(r.macro_weighted.recall, o.r);
    track(r.macro_weighted.f1, o.f1);
  }
  std::ostringstream d;
  d << "max |diff| = " << std::scientific << worst;
  if (worst > 1e-12) return fail(d.str());
  return {Outcome::Pass, d.str()};
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// Every data row of every fold summary must end in the given metric text.
std::string check_summaries(const fs::path& out, std::size_t k, const std::string& value) {
  const std::string want = "\t" + value + "\t" + value + "\t" + value;
  for (std::size_t i = 0; i < k; ++i) {
    std::ifstream in(out / ("fold_" + std::to_string(i)) / "summary.tsv");
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      if (!line.ends_with(want)) return "fold " + std::to_string(i) + ": " + line;
    }
    if (rows == 0) return "fold " + std::to_string(i) + " has no rows";
  }
  return {};
}

Outcome simulator_identity() {
  ts::TempDir tmp;
  const std::string out = tmp.path.string();
  if (cli({"pipeline", "--corpus-dir", ts::data_path("toy").string(), "--out", out}) != 0) return fail("pipeline failed");
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string f = std::to_string(i);
    if (cli({"simulate", "--fold-index", f, "--out", out}) != 0 || cli({"eval", "--fold-index", f, "--out", out}) != 0)
      return fail("simulate/eval failed on fold " + f);
  }
  if (auto bad = check_summaries(tmp.path, 5, "1.000"); !bad.empty()) return fail("zero corruption: " + bad);
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string f = std::to_string(i);
    if (cli({"simulate", "--fold-index", f, "--p-empty", "1", "--out", out}) != 0 ||
        cli({"eval", "--fold-index", f, "--out", out}) != 0)
      return fail("simulate/eval failed on fold " + f);
  }
  if (auto bad = check_summaries(tmp.path, 5, "0.000"); !bad.empty()) return fail("p_empty = 1: " + bad);
  return {};
}

Outcome balancer_conservation() {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 g(seed);
    for (Ontology o : kOntologyOrder) {
      DistributionReport r;
      r.ontology = o;
      LabelLexicon lex;
      std::size_t expected = 0;
      const int entities = 1 + static_cast<int>(g() % 25);
      for (int e = 0; e < entities; ++e) {
        const EntityRef ref = ts::random_ref(g, o);
        if (r.counts.count(ref)) continue;
        const std::size_t count = g() % 220;
        r.set_count(ref, count);
        expected += count < 150 ? 150 - count : 0;
        for (int l = 0; l < 1 + static_cast<int>(g() % 3); ++l) lex.add(ref, ts::random_mention(g));
      }
      BalanceOptions opt;
      opt.rng_seed = seed;
      const ArtificialBatch b = generate_artificial_pairs(r, lex, ts::default_pools(), opt);
      const std::string where = "seed " + std::to_string(seed) + " " + std::string(to_string(o));
      if (b.label_instances != expected) return fail(where + ": label instances differ from deficit sum");
      std::size_t sum = 0, odd = 0;
      for (std::size_t s : b.set_sizes) {
        sum += s;
        if (s != 7 && s != 9 && s != 12) ++odd;
      }
      if (sum != expected) return fail(where + ": set sizes do not sum to deficit");
      if (odd > 1) return fail(where + ": more than one remainder set");
      if (b.pairs.size() != b.set_sizes.size()) return fail(where + ": one pair per set expected");
      if (!assert_no_leakage(b.pairs, {}).empty()) return fail(where + ": duplicate instructions");
    }
  }
  return {Outcome::Pass, "200 seeds x 3 ontologies"};
}

IRPair fold_pair(DatasetId d, const std::string& id, const std::string& instruction) {
  IRPair p;
  p.pair_id = id;
  p.instruction = instruction;
  if (d == DatasetId::NerCafeteria) {
    p.task = Task::Ner;
  } else {
    p.task = Task::Nel;
    p.ontology = d == DatasetId::NelFoodOn ? Ontology::FoodOn : d == DatasetId::NelSnomed ? Ontology::SnomedCt
                                                                                          : Ontology::Hansard;
  }
  return p;
}

Outcome fold_properties() {
  std::mt19937_64 g(2024);
  for (int config = 0; config < 200; ++config) {
    std::vector<IRPair> all;
    for (DatasetId d : kDatasetOrder) {
      const std::size_t n = 1 + g() % 120;
      for (std::size_t i = 0; i < n; ++i) {
        // Roughly one in twenty instructions repeats an earlier one.
        const std::string instr = g() % 20 == 0 ? "repeat " + std::to_string(g() % 5) : "q" + std::to_string(all.size());
        all.push_back(fold_pair(d, std::string(to_string(d)) + "-" + std::to_string(i), instr));
      }
    }
    const Datasets datasets = split_into_datasets(dedup_by_instruction(all).kept);
    const FoldPlan plan = plan_folds(datasets, 5, g());
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < 5; ++i) {
      const FoldManifest m = materialize_fold(plan, datasets, i, {});
      if (!verify_no_leakage(m).empty()) return fail("leakage in config " + std::to_string(config));
      std::map<DatasetId, double> per;
      for (const auto& p : m.test) {
        ++seen[p.pair_id];
        per[*dataset_of(p)] += 1;
      }
      for (const auto& [d, pairs] : datasets)
        if (std::abs(per[d] - static_cast<double>(pairs.size()) / 5.0) > 1.0)
          return fail("test fraction off in config " + std::to_string(config));
    }
    std::size_t total = 0;
    for (const auto& [d, pairs] : datasets) total += pairs.size();
    if (seen.size() != total) return fail("test sets do not cover config " + std::to_string(config));
    for (const auto& [id, n] : seen)
      if (n != 1) return fail(id + " appears in " + std::to_string(n) + " test sets");
  }
  return {Outcome::Pass, "200 configurations"};
}

Outcome accounting() {
  const char* dir = std::getenv("FOODSEM_CORPUS_DIR");
  if (!dir || !*dir) return {Outcome::Skip, "set FOODSEM_CORPUS_DIR to the public CafeteriaFCD/SA BioC files"};
  ts::TempDir tmp;
  std::vector<std::string> args{"pipeline", "--corpus-dir", dir, "--out", tmp.path.string()};
  if (const char* lex = std::getenv("FOODSEM_LEXICON"); lex && *lex) {
    args.push_back("--lexicon");
    args.push_back(lex);
  }
  std::ostringstream out, err;
  if (run_cli(args, out, err) != 0) return fail("pipeline failed: " + err.str());
  const auto j = nlohmann::json::parse(out.str());
  std::ostringstream d;
  bool ok = true;
  const auto seq = j["sequences"].get<std::size_t>();
  d << "sequences " << seq;
  ok &= seq == 1479;
  auto near = [&](const char* name, double got, double want) {
    d << ", " << name << " " << got;
    ok &= std::abs(got - want) <= 0.05 * want;
  };
  near("foodon", j["artificial"].value("foodon", 0.0), 13492);
  near("hansard", j["artificial"].value("hansard", 0.0), 1611);
  near("snomedct", j["artificial"].value("snomedct", 0.0), 4445);
  near("total", j["fine_tuning_instances"].get<double>(), 21027);
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

}  // namespace

int main() {
  criterion("listing golden test", 1.0, listing_golden);
  criterion("response round trip", 10.0, round_trip);
  criterion("metric oracle equivalence", 30.0, metric_oracle);
  criterion("end-to-end simulator identity", 60.0, simulator_identity);
  criterion("balancer conservation", 30.0, balancer_conservation);
  criterion("fold properties", 30.0, fold_properties);
  criterion("corpus accounting", 1e9, accounting);
  return failures == 0 ? 0 : 1;
}
