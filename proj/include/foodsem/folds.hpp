#ifndef FOODSEM_FOLDS_HPP
#define FOODSEM_FOLDS_HPP

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "foodsem/balancer.hpp"
#include "foodsem/common.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

enum class DatasetId { NelFoodOn, NelSnomed, NelHansard, NerCafeteria };

inline constexpr std::array<DatasetId, 4> kDatasetOrder = {DatasetId::NelHansard, DatasetId::NelFoodOn,
                                                           DatasetId::NelSnomed, DatasetId::NerCafeteria};

inline std::string_view to_string(DatasetId d) {
  switch (d) {
    case DatasetId::NelFoodOn: return "nel_foodon";
    case DatasetId::NelSnomed: return "nel_snomedct";
    case DatasetId::NelHansard: return "nel_hansard";
    case DatasetId::NerCafeteria: return "ner_cafeteria";
  }
  return "nel_foodon";
}

inline std::optional<DatasetId> parse_dataset_id(std::string_view s) {
  for (DatasetId d : kDatasetOrder)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

inline std::optional<DatasetId> dataset_of(const IRPair& p) {
  if (p.task == Task::Ner) return DatasetId::NerCafeteria;
  if (p.task != Task::Nel || !p.ontology) return std::nullopt;
  switch (*p.ontology) {
    case Ontology::FoodOn: return DatasetId::NelFoodOn;
    case Ontology::SnomedCt: return DatasetId::NelSnomed;
    case Ontology::Hansard: return DatasetId::NelHansard;
  }
  return std::nullopt;
}

using Datasets = std::map<DatasetId, std::vector<IRPair>>;

inline Datasets split_into_datasets(const std::vector<IRPair>& pairs) {
  Datasets out;
  for (const IRPair& p : pairs)
    if (auto d = dataset_of(p)) out[*d].push_back(p);
  return out;
}

struct DedupResult {
  std::vector<IRPair> kept;
  std::vector<std::string> dropped_ids;
};

/// Keeps the first pair for every instruction text.
inline DedupResult dedup_by_instruction(const std::vector<IRPair>& pairs) {
  DedupResult r;
  std::unordered_set<std::string> seen;
  for (const IRPair& p : pairs) {
    if (seen.insert(p.instruction).second) r.kept.push_back(p);
    else r.dropped_ids.push_back(p.pair_id);
  }
  return r;
}

struct ChunkAssignment {
  std::string instance_id;
  std::size_t chunk = 0;
};

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t rng_seed = 0;
  /// Per dataset, assignments in shuffled order; position i goes to chunk i % k.
  std::map<DatasetId, std::vector<ChunkAssignment>> datasets;

  std::vector<std::size_t> chunk_sizes(DatasetId d) const {
    std::vector<std::size_t> sizes(k, 0);
    if (auto it = datasets.find(d); it != datasets.end())
      for (const auto& a : it->second) ++sizes[a.chunk];
    return sizes;
  }
};

inline FoldPlan plan_folds(const Datasets& datasets, std::size_t k, std::uint64_t rng_seed) {
  if (k < 2) throw Error(ErrorKind::ConfigError, "need at least 2 folds, got " + std::to_string(k));
  FoldPlan plan;
  plan.k = k;
  plan.rng_seed = rng_seed;
  for (const auto& [id, pairs] : datasets) {
    if (pairs.empty()) throw Error(ErrorKind::EmptyDataset, "dataset " + std::string(to_string(id)) + " is empty");
    std::vector<std::string> ids;
    std::unordered_set<std::string> unique;
    for (const IRPair& p : pairs) {
      if (!unique.insert(p.pair_id).second)
        throw Error(ErrorKind::FormatError, "duplicate instance id '" + p.pair_id + "' in " + std::string(to_string(id)));
      ids.push_back(p.pair_id);
    }
    Rng rng(derive_seed(rng_seed, "folds:" + std::string(to_string(id))));
    rng.shuffle(ids);
    auto& out = plan.datasets[id];
    for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], i % k});
  }
  return plan;
}

using TokenCounter = std::function<std::size_t(const IRPair&)>;

/// ceil(code points / 4) of the training rendering; a stand-in for a model
/// tokenizer.
inline std::size_t approx_token_count(const IRPair& p) {
  const std::string text = render_training_text(p);
  return (utf8_chars_before(text, text.size()) + 3) / 4;
}

/// Counter backed by precomputed lengths keyed by pair_id, falling back to
/// the approximation for unknown ids.
inline TokenCounter sidecar_token_counter(std::unordered_map<std::string, std::size_t> lengths) {
  return [lengths = std::move(lengths)](const IRPair& p) {
    if (auto it = lengths.find(p.pair_id); it != lengths.end()) return it->second;
    return approx_token_count(p);
  };
}

inline constexpr std::size_t kDefaultTokenBudget = 1024;
inline constexpr std::size_t kDefaultGeneralTarget = 34229;

struct FoldOptions {
  std::size_t token_budget = kDefaultTokenBudget;
  std::size_t general_target = kDefaultGeneralTarget;
  TokenCounter token_counter = approx_token_count;
};

struct FoldManifest {
  std::size_t fold_index = 0;
  std::vector<IRPair> train;
  std::vector<IRPair> test;
  std::size_t general_count = 0;
  std::size_t general_fitting = 0;    // general instances within the token budget
  std::size_t general_shortfall = 0;  // target minus what could be supplied
};

/// Test = chunk `fold_index` of every dataset; train = the other chunks plus
/// general-instruction instances within the token budget, shuffled together.
inline FoldManifest materialize_fold(const FoldPlan& plan, const Datasets& datasets, std::size_t fold_index,
                                     const std::vector<IRPair>& general, const FoldOptions& options = {}) {
  if (fold_index >= plan.k)
    throw Error(ErrorKind::ConfigError,
                "fold index " + std::to_string(fold_index) + " out of range for k=" + std::to_string(plan.k));
  FoldManifest m;
  m.fold_index = fold_index;
  for (DatasetId id : kDatasetOrder) {
    auto planned = plan.datasets.find(id);
    auto data = datasets.find(id);
    if (planned == plan.datasets.end() || data == datasets.end()) continue;
    std::unordered_map<std::string, const IRPair*> by_id;
    for (const IRPair& p : data->second) by_id.emplace(p.pair_id, &p);
    for (const ChunkAssignment& a : planned->second) {
      auto it = by_id.find(a.instance_id);
      if (it == by_id.end())
        throw Error(ErrorKind::FormatError, "planned instance '" + a.instance_id + "' missing from dataset");
      (a.chunk == fold_index ? m.test : m.train).push_back(*it->second);
    }
  }

  std::vector<const IRPair*> fitting;
  for (const IRPair& g : general)
    if (options.token_counter(g) <= options.token_budget) fitting.push_back(&g);
  m.general_fitting = fitting.size();
  Rng general_rng(derive_seed(plan.rng_seed, "general"));
  general_rng.shuffle(fitting);
  m.general_count = std::min(options.general_target, fitting.size());
  m.general_shortfall = options.general_target - m.general_count;
  for (std::size_t i = 0; i < m.general_count; ++i) m.train.push_back(*fitting[i]);

  Rng rng(derive_seed(plan.rng_seed, "fold:" + std::to_string(fold_index)));
  rng.shuffle(m.train);
  return m;
}

/// Instruction texts present in both train and test.
inline std::vector<LeakageViolation> verify_no_leakage(const FoldManifest& m) {
  std::unordered_map<std::string, const IRPair*> train;
  for (const IRPair& p : m.train) train.emplace(p.instruction, &p);
  std::vector<LeakageViolation> out;
  for (const IRPair& p : m.test)
    if (auto it = train.find(p.instruction); it != train.end())
      out.push_back({it->second->pair_id, p.pair_id, p.instruction});
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string fold_plan_jsonl(const FoldPlan& plan) {
  std::string out;
  for (const auto& [id, assignments] : plan.datasets)
    for (const auto& a : assignments) {
      nlohmann::ordered_json j;
      j["dataset_id"] = to_string(id);
      j["instance_id"] = a.instance_id;
      j["chunk"] = a.chunk;
      out += j.dump() + "\n";
    }
  return out;
}

inline FoldPlan parse_fold_plan(std::istream& in, std::size_t k, std::uint64_t rng_seed) {
  FoldPlan plan;
  plan.k = k;
  plan.rng_seed = rng_seed;
  std::string line;
  while (std::getline(in, line)) {
    if (trim_view(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto id = parse_dataset_id(j.at("dataset_id").get<std::string>());
    if (!id) throw Error(ErrorKind::FormatError, "unknown dataset " + j["dataset_id"].dump());
    const auto chunk = j.at("chunk").get<std::size_t>();
    if (chunk >= k) throw Error(ErrorKind::FormatError, "chunk out of range in fold plan");
    plan.datasets[*id].push_back({j.at("instance_id").get<std::string>(), chunk});
  }
  return plan;
}

/// General-instruction corpus: line-delimited records with
/// {prompt|instruction, response} and optional context.
inline std::vector<IRPair> parse_general_corpus(std::istream& in, const std::string& origin = "<general>") {
  std::vector<IRPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::FormatError, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
    IRPair p;
    p.task = Task::General;
    p.source = PairSource::General;
    std::string instruction = j.contains("prompt") ? j["prompt"].get<std::string>() : j.value("instruction", "");
    if (j.contains("context") && j["context"].is_string() && !j["context"].get<std::string>().empty())
      instruction += "\n" + j["context"].get<std::string>();
    p.instruction = std::move(instruction);
    p.response = j.value("response", "");
    if (trim_view(p.instruction).empty())
      throw Error(ErrorKind::FormatError, origin + ":" + std::to_string(lineno) + ": record has no instruction");
    std::string n = std::to_string(out.size());
    if (n.size() < 7) n.insert(0, 7 - n.size(), '0');
    p.pair_id = "gen-" + n;
    p.source_id = p.pair_id;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace foodsem

#endif  // FOODSEM_FOLDS_HPP
