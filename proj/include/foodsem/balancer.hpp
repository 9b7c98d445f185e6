#ifndef FOODSEM_BALANCER_HPP
#define FOODSEM_BALANCER_HPP

// Entity coverage analysis and synthesis of artificial NEL pairs that lift
// every entity to the mention threshold.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "foodsem/common.hpp"
#include "foodsem/entity_ref.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

inline constexpr std::size_t kDefaultThreshold = 150;

struct DistributionReport {
  Ontology ontology = Ontology::FoodOn;
  std::size_t threshold = kDefaultThreshold;
  std::map<EntityRef, std::size_t> counts;
  std::map<EntityRef, std::size_t> deficits;

  std::size_t total_mentions() const {
    std::size_t n = 0;
    for (const auto& [e, k] : counts) n += k;
    return n;
  }
  std::size_t total_deficit() const {
    std::size_t n = 0;
    for (const auto& [e, d] : deficits) n += d;
    return n;
  }

  void set_count(const EntityRef& e, std::size_t k) {
    counts[e] = k;
    deficits[e] = k < threshold ? threshold - k : 0;
  }

  /// Entities by count, highest first (ties in entity order).
  std::vector<std::pair<EntityRef, std::size_t>> by_count() const {
    std::vector<std::pair<EntityRef, std::size_t>> rows(counts.begin(), counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
  }
};

/// Counts, per entity, the (pair, mention) gold occurrences in NEL pairs of
/// one ontology.
inline DistributionReport entity_distribution(const std::vector<IRPair>& pairs, Ontology ontology,
                                              std::size_t threshold = kDefaultThreshold) {
  DistributionReport report;
  report.ontology = ontology;
  report.threshold = threshold;
  std::map<EntityRef, std::size_t> counts;
  for (const IRPair& p : pairs) {
    if (p.task != Task::Nel || p.ontology != ontology)
      throw Error(ErrorKind::MixedOntology, "pair '" + p.pair_id + "' is not a " +
                                                std::string(to_string(ontology)) + " NEL pair");
    for (const auto& [mention, refs] : p.nel_gold)
      for (const EntityRef& e : refs) ++counts[e];
  }
  for (const auto& [e, k] : counts) report.set_count(e, k);
  return report;
}

/// Surface labels per entity, in insertion order, without duplicates.
class LabelLexicon {
 public:
  void add(const EntityRef& e, std::string_view label) {
    std::string clean = collapse_whitespace(label);
    if (clean.empty()) return;
    auto& labels = labels_[e];
    if (std::find(labels.begin(), labels.end(), clean) == labels.end()) labels.push_back(std::move(clean));
  }
  void merge(const LabelLexicon& other) {
    for (const auto& [e, labels] : other.labels_)
      for (const auto& l : labels) add(e, l);
  }
  const std::vector<std::string>* find(const EntityRef& e) const {
    auto it = labels_.find(e);
    return it == labels_.end() || it->second.empty() ? nullptr : &it->second;
  }
  std::size_t size() const { return labels_.size(); }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

 private:
  std::map<EntityRef, std::vector<std::string>> labels_;
};

/// Gold mention texts observed for each entity, in corpus order.
inline LabelLexicon lexicon_from_gold(const std::vector<IRPair>& pairs) {
  LabelLexicon lex;
  for (const IRPair& p : pairs) {
    if (p.task != Task::Nel) continue;
    for (const auto& [mention, refs] : p.nel_gold)
      for (const EntityRef& e : refs) lex.add(e, mention);
  }
  return lex;
}

/// Tab-separated {ontology, namespace, local_id, label}; a header line and
/// '#' comments are skipped.
inline LabelLexicon parse_lexicon(std::istream& in, const std::string& origin = "<lexicon>") {
  LabelLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (lineno == 1 && !cols.empty() && cols[0] == "ontology") continue;
    if (cols.size() != 4)
      throw Error(ErrorKind::FormatError, origin + ":" + std::to_string(lineno) + ": expected 4 tab-separated columns");
    const auto onto = parse_ontology(cols[0]);
    if (!onto) throw Error(ErrorKind::FormatError, origin + ":" + std::to_string(lineno) + ": unknown ontology");
    if (trim_view(cols[3]).empty())
      throw Error(ErrorKind::FormatError, origin + ":" + std::to_string(lineno) + ": empty label");
    lex.add(EntityRef{*onto, trim(cols[1]), trim(cols[2]), {}}, cols[3]);
  }
  return lex;
}

inline LabelLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open lexicon " + path);
  return parse_lexicon(in, path);
}

/// Adds zero-count rows for lexicon entities of the report's ontology that the
/// corpus never mentions.
inline void extend_with_lexicon(DistributionReport& report, const LabelLexicon& lexicon) {
  for (const auto& [e, labels] : lexicon)
    if (e.ontology == report.ontology && !report.counts.count(e)) report.set_count(e, 0);
}

struct BalanceOptions {
  std::vector<std::size_t> set_sizes{7, 9, 12};
  std::uint64_t rng_seed = 0;
  UriMode uri_mode = UriMode::Short;
  std::size_t max_redraws = 64;
  /// Instructions already used elsewhere (e.g. by the corpus pairs).
  std::unordered_set<std::string> reserved_instructions;
};

struct ArtificialBatch {
  std::vector<IRPair> pairs;
  std::vector<std::size_t> set_sizes;  // label instances per pair, in pair order
  std::size_t label_instances = 0;
  std::vector<std::string> notes;
};

/// Splits `total` labels into sets: each size drawn uniformly from the sizes
/// that still fit; a tail shorter than the smallest size becomes one final
/// undersized set.
inline std::vector<std::size_t> partition_sizes(std::size_t total, const std::vector<std::size_t>& sizes, Rng& rng) {
  std::vector<std::size_t> out;
  if (sizes.empty()) throw Error(ErrorKind::ConfigError, "set sizes must not be empty");
  const std::size_t smallest = *std::min_element(sizes.begin(), sizes.end());
  if (smallest == 0) throw Error(ErrorKind::ConfigError, "set sizes must be positive");
  std::size_t remaining = total;
  while (remaining > 0) {
    if (remaining < smallest) {
      out.push_back(remaining);
      break;
    }
    std::vector<std::size_t> fitting;
    for (std::size_t s : sizes)
      if (s <= remaining) fitting.push_back(s);
    const std::size_t s = rng.pick(fitting);
    out.push_back(s);
    remaining -= s;
  }
  return out;
}

inline std::string artificial_pair_id(Ontology o, std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 6) n.insert(0, 6 - n.size(), '0');
  return "art-" + std::string(to_string(o)) + "-" + n;
}

inline ArtificialBatch generate_artificial_pairs(const DistributionReport& report, const LabelLexicon& lexicon,
                                                 const PhrasePools& pools, const BalanceOptions& options) {
  struct LabelInstance {
    std::string label;
    EntityRef entity;
  };
  std::vector<LabelInstance> instances;
  for (const auto& [e, d] : report.deficits) {
    if (d == 0) continue;
    const auto* labels = lexicon.find(e);
    if (!labels)
      throw Error(ErrorKind::MissingLabel, "no label for " + render_entity_ref(e, UriMode::Short) + " (deficit " +
                                               std::to_string(d) + ")");
    for (std::size_t i = 0; i < d; ++i) instances.push_back({(*labels)[i % labels->size()], e});
  }

  ArtificialBatch batch;
  batch.label_instances = instances.size();
  if (instances.empty()) return batch;

  const auto& phrases = pools.get({PoolKind::NelInstruction, report.ontology});
  const auto& openers = pools.get({PoolKind::ArtificialOpener, {}});
  Rng rng(derive_seed(options.rng_seed, "balance:" + std::string(to_string(report.ontology))));
  rng.shuffle(instances);
  const auto sizes = partition_sizes(instances.size(), options.set_sizes, rng);

  std::unordered_set<std::string> used = options.reserved_instructions;
  std::size_t cursor = 0;
  for (std::size_t set_index = 0; set_index < sizes.size(); ++set_index) {
    std::vector<LabelInstance> set(instances.begin() + static_cast<std::ptrdiff_t>(cursor),
                                   instances.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[set_index]));
    cursor += sizes[set_index];

    IRPair pair;
    pair.pair_id = artificial_pair_id(report.ontology, set_index);
    pair.task = Task::Nel;
    pair.ontology = report.ontology;
    pair.source = PairSource::Artificial;
    pair.source_id = pair.pair_id;

    bool placed = false;
    for (std::size_t attempt = 0; attempt <= options.max_redraws && !placed; ++attempt) {
      if (attempt > 0) rng.shuffle(set);
      std::vector<std::string> shown;
      std::vector<std::pair<std::string, RefSet>> entries;
      MentionLinks gold;
      for (const LabelInstance& li : set) {
        const std::string display = sanitize_mention(li.label);
        shown.push_back(display);
        const std::string key = normalize_mention(display);
        if (!gold.find(key)) entries.emplace_back(display, RefSet{});
        gold.insert(key, RefSet{li.entity});
        for (auto& [d, refs] : entries)
          if (normalize_mention(d) == key) refs.insert(li.entity);
      }
      std::string instruction = fill_mention_template(rng.pick(phrases), shown);
      if (used.count(instruction)) continue;
      used.insert(instruction);
      pair.instruction = std::move(instruction);
      pair.response = render_nel_response(rng.pick(openers), entries, options.uri_mode);
      for (const auto& [key, refs] : gold)
        if (refs.size() > 1)
          batch.notes.push_back(pair.pair_id + ": label '" + key + "' links " + std::to_string(refs.size()) +
                                " entities");
      pair.nel_gold = std::move(gold);
      placed = true;
    }
    if (!placed)
      throw Error(ErrorKind::DuplicateUnavoidable,
                  pair.pair_id + ": no unique instruction after " + std::to_string(options.max_redraws) + " redraws");
    batch.pairs.push_back(std::move(pair));
    batch.set_sizes.push_back(sizes[set_index]);
  }
  return batch;
}

struct LeakageViolation {
  std::string first_id;
  std::string second_id;
  std::string instruction;
};

/// Instances sharing an instruction text, within `artificial` or between
/// `artificial` and `cafeteria`.
inline std::vector<LeakageViolation> assert_no_leakage(const std::vector<IRPair>& artificial,
                                                       const std::vector<IRPair>& cafeteria) {
  std::vector<LeakageViolation> out;
  std::map<std::string, std::string> seen;
  for (const IRPair& p : cafeteria) seen.emplace(p.instruction, p.pair_id);
  std::map<std::string, std::string> art_seen;
  for (const IRPair& p : artificial) {
    if (auto it = art_seen.find(p.instruction); it != art_seen.end()) {
      out.push_back({it->second, p.pair_id, p.instruction});
      continue;
    }
    art_seen.emplace(p.instruction, p.pair_id);
    if (auto it = seen.find(p.instruction); it != seen.end()) out.push_back({it->second, p.pair_id, p.instruction});
  }
  return out;
}

inline std::string distribution_table(const DistributionReport& r) {
  std::ostringstream out;
  out << "ontology\tnamespace\tlocal_id\tcount\tdeficit\n";
  for (const auto& [e, k] : r.by_count())
    out << to_string(r.ontology) << '\t' << e.ns << '\t' << e.local_id << '\t' << k << '\t' << r.deficits.at(e)
        << '\n';
  return out.str();
}

}  // namespace foodsem

#endif  // FOODSEM_BALANCER_HPP
