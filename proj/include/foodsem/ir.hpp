#ifndef FOODSEM_IR_HPP
#define FOODSEM_IR_HPP

// Instruction-response pairs: the NER pair and per-ontology NEL pairs built
// from one source document, the phrase pools they draw wording from, and the
// response text grammar shared with the response parser.

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "foodsem/bioc.hpp"
#include "foodsem/common.hpp"
#include "foodsem/entity_ref.hpp"

namespace foodsem {

enum class Task { Ner, Nel, General };
enum class PairSource { Cafeteria, Artificial, General };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::Ner: return "ner";
    case Task::Nel: return "nel";
    case Task::General: return "general";
  }
  return "ner";
}

inline std::string_view to_string(PairSource s) {
  switch (s) {
    case PairSource::Cafeteria: return "cafeteria";
    case PairSource::Artificial: return "artificial";
    case PairSource::General: return "general";
  }
  return "cafeteria";
}

/// Normalized mention -> linked entities, in first-mention order. Inserting an
/// existing key unions the reference sets. Equality ignores order.
class MentionLinks {
 public:
  using Entry = std::pair<std::string, RefSet>;

  void insert(const std::string& key, const RefSet& refs) {
    if (RefSet* existing = find(key)) {
      existing->merge(refs);
      return;
    }
    entries_.emplace_back(key, refs);
  }
  RefSet* find(std::string_view key) {
    for (auto& e : entries_)
      if (e.first == key) return &e.second;
    return nullptr;
  }
  const RefSet* find(std::string_view key) const { return const_cast<MentionLinks*>(this)->find(key); }
  bool erase(std::string_view key) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == key; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const MentionLinks& a, const MentionLinks& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, refs] : a) {
      const RefSet* other = b.find(k);
      if (!other || !(*other == refs)) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
};

struct IRPair {
  std::string pair_id;
  Task task = Task::Ner;
  std::optional<Ontology> ontology;  // set iff task == Nel
  std::string instruction;
  std::string response;
  std::vector<std::string> ner_gold;  // Ner: mentions as displayed, in text order
  MentionLinks nel_gold;              // Nel: normalized mention -> entities
  PairSource source = PairSource::Cafeteria;
  std::string source_id;
  std::optional<SourceKind> source_kind;
};

struct IRSequence {
  std::string source_id;
  std::vector<IRPair> pairs;
};

// ---------------------------------------------------------------------------
// Phrase pools

enum class PoolKind { NerInstruction, NelInstruction, NerOpener, NelOpener, ArtificialOpener };

struct PoolKey {
  PoolKind kind = PoolKind::NerInstruction;
  std::optional<Ontology> ontology;  // only for NelInstruction
  friend auto operator<=>(const PoolKey&, const PoolKey&) = default;
};

inline std::string to_string(const PoolKey& key) {
  switch (key.kind) {
    case PoolKind::NerInstruction: return "ner_instruction";
    case PoolKind::NelInstruction: return "nel_instruction:" + std::string(to_string(key.ontology.value_or(Ontology::FoodOn)));
    case PoolKind::NerOpener: return "response_opener:ner";
    case PoolKind::NelOpener: return "response_opener:nel";
    case PoolKind::ArtificialOpener: return "response_opener:artificial";
  }
  return {};
}

inline std::optional<PoolKey> parse_pool_key(std::string_view s) {
  if (s == "ner_instruction") return PoolKey{PoolKind::NerInstruction, {}};
  if (s == "response_opener:ner") return PoolKey{PoolKind::NerOpener, {}};
  if (s == "response_opener:nel") return PoolKey{PoolKind::NelOpener, {}};
  if (s == "response_opener:artificial") return PoolKey{PoolKind::ArtificialOpener, {}};
  constexpr std::string_view nel = "nel_instruction:";
  if (s.starts_with(nel)) {
    if (auto o = parse_ontology(s.substr(nel.size()))) return PoolKey{PoolKind::NelInstruction, *o};
  }
  return std::nullopt;
}

struct PhrasePool {
  PoolKey key;
  std::vector<std::string> phrases;
};

/// Placeholder replaced by the mention list in NEL instruction phrases.
inline constexpr std::string_view kMentionSlot = "{mentions}";

class PhrasePools {
 public:
  /// Adds a phrase, enforcing the pool invariants (non-empty, unique).
  void add(const PoolKey& key, std::string phrase) {
    phrase = trim(phrase);
    if (phrase.empty()) throw Error(ErrorKind::PoolFormatError, "empty phrase in pool " + to_string(key));
    const bool opener = key.kind == PoolKind::NerOpener || key.kind == PoolKind::NelOpener ||
                        key.kind == PoolKind::ArtificialOpener;
    if (opener && phrase.back() != ':')
      throw Error(ErrorKind::PoolFormatError, "response opener must end with ':': '" + phrase + "'");
    PhrasePool& pool = pools_[key];
    pool.key = key;
    if (std::find(pool.phrases.begin(), pool.phrases.end(), phrase) != pool.phrases.end())
      throw Error(ErrorKind::PoolFormatError, "duplicate phrase in pool " + to_string(key) + ": '" + phrase + "'");
    pool.phrases.push_back(std::move(phrase));
  }

  const std::vector<std::string>& get(const PoolKey& key) const {
    auto it = pools_.find(key);
    if (it == pools_.end() || it->second.phrases.empty())
      throw Error(ErrorKind::EmptyPool, "no phrases for pool " + to_string(key));
    return it->second.phrases;
  }

  bool has(const PoolKey& key) const {
    auto it = pools_.find(key);
    return it != pools_.end() && !it->second.phrases.empty();
  }

  std::size_t pool_count() const { return pools_.size(); }
  auto begin() const { return pools_.begin(); }
  auto end() const { return pools_.end(); }

 private:
  std::map<PoolKey, PhrasePool> pools_;
};

/// Reads line-delimited {"kind": ..., "phrase": ...} records.
inline PhrasePools parse_phrase_pools(std::istream& in, const std::string& origin = "<pool>") {
  PhrasePools pools;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::PoolFormatError, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("kind") || !rec.contains("phrase") || !rec["kind"].is_string() ||
        !rec["phrase"].is_string())
      throw Error(ErrorKind::PoolFormatError, origin + ":" + std::to_string(lineno) + ": expected {kind, phrase}");
    const auto key = parse_pool_key(rec["kind"].get<std::string>());
    if (!key)
      throw Error(ErrorKind::PoolFormatError,
                  origin + ":" + std::to_string(lineno) + ": unknown kind " + rec["kind"].dump());
    pools.add(*key, rec["phrase"].get<std::string>());
  }
  if (pools.pool_count() == 0) throw Error(ErrorKind::EmptyPool, origin + " contains no phrases");
  return pools;
}

inline PhrasePools load_phrase_pools(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open pool file " + path);
  return parse_phrase_pools(in, path);
}

// ---------------------------------------------------------------------------
// Response grammar

/// Makes a mention safe to embed in the list grammar: separators and brackets
/// become spaces, " - " becomes "-", whitespace is collapsed.
inline std::string sanitize_mention(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == ',' || c == ';' || c == ':' || c == '[' || c == ']' || c == '{' || c == '}') c = ' ';
  }
  out = collapse_whitespace(out);
  for (std::size_t p; (p = out.find(" - ")) != std::string::npos;) out.replace(p, 3, "-");
  return out;
}

inline std::string render_ref_list(const RefSet& refs, UriMode mode) {
  std::vector<std::string> parts;
  for (const EntityRef& r : refs) parts.push_back(render_entity_ref(r, mode));
  return join(parts, "; ");
}

/// "<opener> m1 - r1; r2, m2 - r3."
inline std::string render_nel_response(std::string_view opener,
                                       const std::vector<std::pair<std::string, RefSet>>& entries, UriMode mode) {
  std::vector<std::string> parts;
  for (const auto& [mention, refs] : entries) parts.push_back(mention + " - " + render_ref_list(refs, mode));
  std::string out(opener);
  if (!parts.empty()) out += " " + join(parts, ", ") + ".";
  return out;
}

inline std::string render_nel_response(std::string_view opener, const MentionLinks& gold, UriMode mode) {
  std::vector<std::pair<std::string, RefSet>> entries(gold.begin(), gold.end());
  return render_nel_response(opener, entries, mode);
}

inline std::string render_ner_response(std::string_view opener, const std::vector<std::string>& mentions) {
  std::string out(opener);
  if (!mentions.empty()) out += " " + join(mentions, ", ") + ".";
  return out;
}

/// Opener part of a rendered response (through the first ':' that is not part
/// of a URI scheme), or empty when there is none.
inline std::string response_opener(std::string_view response) {
  for (std::size_t p = response.find(':'); p != std::string_view::npos; p = response.find(':', p + 1)) {
    if (response.substr(p + 1, 2) == "//") continue;
    const std::string_view head = response.substr(0, p + 1);
    if (head.find(" - ") != std::string_view::npos) return {};
    return std::string(trim_view(head));
  }
  return {};
}

/// Fills a NEL instruction phrase with a comma-separated mention list. Phrases
/// without a slot get the list appended.
inline std::string fill_mention_template(std::string_view phrase, const std::vector<std::string>& mentions) {
  const std::string list = join(mentions, ", ");
  std::string out(phrase);
  if (auto p = out.find(kMentionSlot); p != std::string::npos) {
    out.replace(p, kMentionSlot.size(), list);
    return out;
  }
  return out + " " + list;
}

inline std::string render_training_text(const IRPair& pair) {
  return "[INST] " + pair.instruction + " [/INST] " + pair.response;
}

inline std::string render_training_text(const IRSequence& seq) {
  std::vector<std::string> parts;
  for (const IRPair& p : seq.pairs) parts.push_back(render_training_text(p));
  return join(parts, "\n");
}

// ---------------------------------------------------------------------------
// Sequence construction

namespace detail {

struct MentionOccurrence {
  std::optional<Span> span;
  std::size_t variant_rank;
  std::size_t annotation_index;
  std::string display;
  const MentionAnnotation* annotation;
};

inline bool occurrence_before(const MentionOccurrence& a, const MentionOccurrence& b) {
  if (a.span.has_value() != b.span.has_value()) return a.span.has_value();
  if (a.span && a.span->start != b.span->start) return a.span->start < b.span->start;
  if (a.span && a.span->end != b.span->end) return a.span->end > b.span->end;
  return std::tie(a.variant_rank, a.annotation_index) < std::tie(b.variant_rank, b.annotation_index);
}

inline std::vector<MentionOccurrence> occurrences(const AnnotatedDocument& doc, std::size_t rank) {
  std::vector<MentionOccurrence> out;
  for (std::size_t i = 0; i < doc.annotations.size(); ++i) {
    const MentionAnnotation& a = doc.annotations[i];
    std::string display = a.resolved_span ? sanitize_mention(span_text(doc.full_text, *a.resolved_span))
                                          : sanitize_mention(ascii_lower(a.surface_text));
    if (display.empty()) continue;
    out.push_back({a.resolved_span, rank, i, std::move(display), &a});
  }
  return out;
}

inline std::size_t ontology_rank(Ontology o) {
  for (std::size_t i = 0; i < kOntologyOrder.size(); ++i)
    if (kOntologyOrder[i] == o) return i;
  return kOntologyOrder.size();
}

}  // namespace detail

/// Mentions for the NER pair: every annotated span across the variants,
/// dropping spans nested inside another variant's longer span, deduplicated
/// by normalized text and ordered by first occurrence in the text.
inline std::vector<std::string> ner_mentions(const DocumentBundle& bundle) {
  std::vector<detail::MentionOccurrence> all;
  for (const auto& [onto, doc] : bundle.variants) {
    auto occ = detail::occurrences(doc, detail::ontology_rank(onto));
    all.insert(all.end(), occ.begin(), occ.end());
  }
  std::vector<detail::MentionOccurrence> kept;
  for (const auto& o : all) {
    const bool nested = o.span && std::any_of(all.begin(), all.end(), [&](const detail::MentionOccurrence& other) {
                          return other.span && other.span->start <= o.span->start && o.span->end <= other.span->end &&
                                 (other.span->end - other.span->start) > (o.span->end - o.span->start);
                        });
    if (!nested) kept.push_back(o);
  }
  std::stable_sort(kept.begin(), kept.end(), detail::occurrence_before);
  std::vector<std::string> mentions, keys;
  for (const auto& o : kept) {
    const std::string key = normalize_mention(o.display);
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    keys.push_back(key);
    mentions.push_back(o.display);
  }
  return mentions;
}

/// Gold NEL entries for one variant, in text order, restricted to references
/// of the variant's ontology; repeated mentions are merged.
inline std::vector<std::pair<std::string, RefSet>> nel_entries(const AnnotatedDocument& doc) {
  auto occ = detail::occurrences(doc, 0);
  std::stable_sort(occ.begin(), occ.end(), detail::occurrence_before);
  std::vector<std::pair<std::string, RefSet>> entries;
  std::vector<std::string> keys;
  for (const auto& o : occ) {
    RefSet refs;
    for (const EntityRef& r : o.annotation->entity_refs)
      if (accepted_for(r, doc.ontology)) refs.insert(r);
    if (refs.empty()) continue;
    const std::string key = normalize_mention(o.display);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it != keys.end()) {
      entries[static_cast<std::size_t>(it - keys.begin())].second.merge(refs);
      continue;
    }
    keys.push_back(key);
    entries.emplace_back(o.display, std::move(refs));
  }
  return entries;
}

inline std::string ner_pair_id(std::string_view source_id) { return std::string(source_id) + "#ner"; }
inline std::string nel_pair_id(std::string_view source_id, Ontology o) {
  return std::string(source_id) + "#nel-" + std::string(to_string(o));
}

/// Converts one bundle into its NER pair followed by one NEL pair per present
/// ontology (Hansard, FoodOn, SNOMED-CT order). Wording is drawn from the
/// pools with a stream seeded by (rng_seed, source_id).
inline IRSequence build_ir_sequence(const DocumentBundle& bundle, const PhrasePools& pools, UriMode uri_mode,
                                    std::uint64_t rng_seed) {
  if (bundle.variants.empty()) throw Error(ErrorKind::FormatError, "bundle '" + bundle.source_id + "' is empty");
  DocumentBundle resolved = bundle;
  for (auto& [onto, doc] : resolved.variants) doc = resolve_spans(std::move(doc));

  Rng rng(derive_seed(rng_seed, "ir:" + bundle.source_id));
  const AnnotatedDocument& any = resolved.variants.begin()->second;

  IRSequence seq;
  seq.source_id = bundle.source_id;

  IRPair ner;
  ner.pair_id = ner_pair_id(bundle.source_id);
  ner.task = Task::Ner;
  ner.instruction = rng.pick(pools.get({PoolKind::NerInstruction, {}})) + "\n" + trim(any.full_text);
  ner.ner_gold = ner_mentions(resolved);
  ner.response = render_ner_response(rng.pick(pools.get({PoolKind::NerOpener, {}})), ner.ner_gold);
  ner.source = PairSource::Cafeteria;
  ner.source_id = bundle.source_id;
  ner.source_kind = any.source_kind;
  seq.pairs.push_back(ner);

  for (Ontology onto : kOntologyOrder) {
    auto it = resolved.variants.find(onto);
    if (it == resolved.variants.end()) continue;
    const auto& phrases = pools.get({PoolKind::NelInstruction, onto});
    const auto& openers = pools.get({PoolKind::NelOpener, {}});
    auto entries = nel_entries(it->second);
    if (entries.empty()) continue;
    IRPair nel;
    nel.pair_id = nel_pair_id(bundle.source_id, onto);
    nel.task = Task::Nel;
    nel.ontology = onto;
    nel.instruction = fill_mention_template(rng.pick(phrases), ner.ner_gold);
    nel.response = render_nel_response(rng.pick(openers), entries, uri_mode);
    for (const auto& [display, refs] : entries) nel.nel_gold.insert(normalize_mention(display), refs);
    nel.source = PairSource::Cafeteria;
    nel.source_id = bundle.source_id;
    nel.source_kind = any.source_kind;
    seq.pairs.push_back(std::move(nel));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Line-delimited IR records

inline nlohmann::ordered_json to_json(const IRPair& p, std::optional<std::size_t> sequence_index = std::nullopt) {
  nlohmann::ordered_json j;
  j["pair_id"] = p.pair_id;
  j["task"] = to_string(p.task);
  j["ontology"] = p.ontology ? nlohmann::ordered_json(to_string(*p.ontology)) : nlohmann::ordered_json(nullptr);
  j["instruction"] = p.instruction;
  j["response"] = p.response;
  if (p.task == Task::Nel) {
    auto gold = nlohmann::ordered_json::array();
    for (const auto& [mention, refs] : p.nel_gold) {
      nlohmann::ordered_json e;
      e["mention"] = mention;
      auto arr = nlohmann::ordered_json::array();
      for (const EntityRef& r : refs) arr.push_back(to_json(r));
      e["entity_refs"] = std::move(arr);
      gold.push_back(std::move(e));
    }
    j["gold"] = std::move(gold);
  } else if (p.task == Task::Ner) {
    j["gold"] = p.ner_gold;
  } else {
    j["gold"] = nullptr;
  }
  j["source"] = to_string(p.source);
  j["source_id"] = p.source_id;
  j["sequence_index"] = sequence_index ? nlohmann::ordered_json(*sequence_index) : nlohmann::ordered_json(nullptr);
  j["source_kind"] = p.source_kind ? nlohmann::ordered_json(to_string(*p.source_kind)) : nlohmann::ordered_json(nullptr);
  return j;
}

inline IRPair ir_pair_from_json(const nlohmann::json& j) {
  IRPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  const std::string task = j.at("task").get<std::string>();
  if (task == "ner") p.task = Task::Ner;
  else if (task == "nel") p.task = Task::Nel;
  else if (task == "general") p.task = Task::General;
  else throw Error(ErrorKind::FormatError, "pair '" + p.pair_id + "': unknown task " + task);
  if (j.contains("ontology") && !j["ontology"].is_null()) {
    auto o = parse_ontology(j["ontology"].get<std::string>());
    if (!o) throw Error(ErrorKind::FormatError, "pair '" + p.pair_id + "': unknown ontology");
    p.ontology = *o;
  }
  if ((p.task == Task::Nel) != p.ontology.has_value())
    throw Error(ErrorKind::FormatError, "pair '" + p.pair_id + "': ontology must be set exactly for nel pairs");
  p.instruction = j.at("instruction").get<std::string>();
  p.response = j.at("response").get<std::string>();
  if (p.task == Task::Nel) {
    for (const auto& e : j.at("gold")) {
      RefSet refs;
      for (const auto& r : e.at("entity_refs")) refs.insert(entity_ref_from_json(r));
      p.nel_gold.insert(e.at("mention").get<std::string>(), refs);
    }
  } else if (p.task == Task::Ner) {
    p.ner_gold = j.at("gold").get<std::vector<std::string>>();
  }
  const std::string source = j.value("source", std::string("cafeteria"));
  if (source == "cafeteria") p.source = PairSource::Cafeteria;
  else if (source == "artificial") p.source = PairSource::Artificial;
  else if (source == "general") p.source = PairSource::General;
  else throw Error(ErrorKind::FormatError, "pair '" + p.pair_id + "': unknown source " + source);
  p.source_id = j.value("source_id", std::string());
  if (j.contains("source_kind") && !j["source_kind"].is_null())
    p.source_kind = parse_source_kind(j["source_kind"].get<std::string>());
  return p;
}

}  // namespace foodsem

#endif  // FOODSEM_IR_HPP
