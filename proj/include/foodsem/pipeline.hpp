#ifndef FOODSEM_PIPELINE_HPP
#define FOODSEM_PIPELINE_HPP

// Corpus-level stages shared by the command line and the test suites.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "foodsem/balancer.hpp"
#include "foodsem/bioc.hpp"
#include "foodsem/folds.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::optional<Ontology> ontology_from_filename(std::string_view name) {
  const std::string n = ascii_lower(name);
  if (n.find("foodon") != std::string::npos) return Ontology::FoodOn;
  if (n.find("snomed") != std::string::npos) return Ontology::SnomedCt;
  if (n.find("hansard") != std::string::npos) return Ontology::Hansard;
  return std::nullopt;
}

inline SourceKind source_kind_from_filename(std::string_view name) {
  const std::string n = ascii_lower(name);
  for (std::string_view marker : {"abstract", "cafeteriasa", "_sa_", "_sa.", "-sa-", "-sa."})
    if (n.find(marker) != std::string::npos) return SourceKind::Abstract;
  return SourceKind::Recipe;
}

struct CorpusLoad {
  std::vector<AnnotatedDocument> documents;  // spans resolved
  std::vector<std::string> notes;
  std::vector<std::string> files;
};

/// Reads every *.xml file under `dir` (sorted by name). Ontology and source
/// kind come from the overrides or, failing that, from the file name.
inline CorpusLoad load_corpus_dir(const std::filesystem::path& dir, std::optional<Ontology> ontology = {},
                                  std::optional<SourceKind> kind = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::ConfigError, "corpus dir " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && ascii_lower(entry.path().extension().string()) == ".xml") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  CorpusLoad load;
  for (const fs::path& f : files) {
    const std::string name = f.filename().string();
    const auto onto = ontology ? ontology : ontology_from_filename(name);
    if (!onto)
      throw Error(ErrorKind::ConfigError, "cannot tell the ontology of " + f.string() + "; pass --ontology");
    const SourceKind k = kind ? *kind : source_kind_from_filename(name);
    auto docs = parse_bioc_collection(read_file(f), k, *onto);
    for (auto& d : docs) {
      d = resolve_spans(std::move(d));
      load.notes.insert(load.notes.end(), d.notes.begin(), d.notes.end());
      load.documents.push_back(std::move(d));
    }
    load.files.push_back(f.string());
  }
  return load;
}

struct IRDataset {
  std::vector<IRSequence> sequences;
  std::vector<std::string> duplicate_sources;  // bundles dropped for repeating an earlier text
};

/// Groups variants, drops bundles whose text repeats an earlier bundle, and
/// converts the rest.
inline IRDataset build_ir_dataset(const std::vector<AnnotatedDocument>& docs, const PhrasePools& pools,
                                  UriMode mode, std::uint64_t seed) {
  IRDataset out;
  std::unordered_set<std::string> texts;
  for (const DocumentBundle& b : group_ontology_variants(docs)) {
    const std::string key = collapse_whitespace(b.variants.begin()->second.full_text);
    if (!texts.insert(key).second) {
      out.duplicate_sources.push_back(b.source_id);
      continue;
    }
    out.sequences.push_back(build_ir_sequence(b, pools, mode, seed));
  }
  return out;
}

inline std::vector<IRPair> flatten(const std::vector<IRSequence>& sequences) {
  std::vector<IRPair> out;
  for (const auto& s : sequences) out.insert(out.end(), s.pairs.begin(), s.pairs.end());
  return out;
}

struct OntologyBalance {
  DistributionReport report;
  ArtificialBatch batch;
};

struct BalanceRun {
  std::map<Ontology, OntologyBalance> per_ontology;
  std::vector<LeakageViolation> leakage;

  std::vector<IRPair> artificial() const {
    std::vector<IRPair> out;
    for (const auto& [o, b] : per_ontology) out.insert(out.end(), b.batch.pairs.begin(), b.batch.pairs.end());
    return out;
  }
};

struct BalanceSettings {
  std::size_t threshold = kDefaultThreshold;
  std::vector<std::size_t> set_sizes{7, 9, 12};
  UriMode uri_mode = UriMode::Short;
  std::uint64_t seed = 0;
  /// Corpus kind the distribution is measured on; none = every corpus pair.
  std::optional<SourceKind> analysis_kind = SourceKind::Recipe;
  std::vector<Ontology> ontologies{kOntologyOrder.begin(), kOntologyOrder.end()};
};

/// Per ontology: measure coverage on the analysis corpus, then synthesize
/// artificial pairs for the deficits. Labels come from the observed gold
/// mentions, supplemented by `extra_lexicon`.
inline BalanceRun balance_corpus(const std::vector<IRPair>& cafeteria, const LabelLexicon& extra_lexicon,
                                 const PhrasePools& pools, const BalanceSettings& settings) {
  BalanceRun run;
  LabelLexicon lexicon = lexicon_from_gold(cafeteria);
  lexicon.merge(extra_lexicon);
  std::unordered_set<std::string> reserved;
  for (const IRPair& p : cafeteria) reserved.insert(p.instruction);

  for (Ontology o : settings.ontologies) {
    std::vector<IRPair> analyzed;
    for (const IRPair& p : cafeteria)
      if (p.task == Task::Nel && p.ontology == o &&
          (!settings.analysis_kind || p.source_kind == settings.analysis_kind))
        analyzed.push_back(p);
    OntologyBalance ob;
    ob.report = entity_distribution(analyzed, o, settings.threshold);
    extend_with_lexicon(ob.report, extra_lexicon);
    BalanceOptions opts;
    opts.set_sizes = settings.set_sizes;
    opts.rng_seed = derive_seed(settings.seed, to_string(o));
    opts.uri_mode = settings.uri_mode;
    opts.reserved_instructions = reserved;
    ob.batch = generate_artificial_pairs(ob.report, lexicon, pools, opts);
    for (const IRPair& p : ob.batch.pairs) reserved.insert(p.instruction);
    run.per_ontology.emplace(o, std::move(ob));
  }
  run.leakage = assert_no_leakage(run.artificial(), cafeteria);
  return run;
}

inline std::vector<IRPair> read_ir_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  std::vector<IRPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    try {
      out.push_back(ir_pair_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace foodsem

#endif  // FOODSEM_PIPELINE_HPP
