#ifndef FOODSEM_NEL_EVAL_HPP
#define FOODSEM_NEL_EVAL_HPP

// Response parsing and NEL scoring.
//
// Scoring unit is the (instance, gold mention, entity) triple. Predicted
// mentions that are not gold mentions are ignored. Per entity e:
//   tp = gold triples of e whose predicted set for that mention contains e
//   fn = gold_count(e) - tp
//   fp = predictions of e on gold mentions whose gold set lacks e
// Macro-weighted metrics weight each entity by gold_count(e) / sum(gold_count).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "foodsem/common.hpp"
#include "foodsem/entity_ref.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

struct PredictionMap {
  std::string instance_id;
  Ontology ontology = Ontology::FoodOn;
  MentionLinks entries;
  bool meaningful = false;
  std::vector<std::string> parse_notes;
};

namespace detail {

// Offset just past the response opener, or 0 when the text has none. The
// opener ends at the first ':' that is not a URI scheme separator, provided no
// " - " entry separator precedes it.
inline std::size_t opener_end(std::string_view text) {
  for (std::size_t p = text.find(':'); p != std::string_view::npos; p = text.find(':', p + 1)) {
    if (text.substr(p + 1, 2) == "//") continue;
    if (text.substr(0, p).find(" - ") != std::string_view::npos) return 0;
    return p + 1;
  }
  return 0;
}

// Splits on ',' and newlines that are outside brackets and parentheses.
inline std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  int square = 0, round = 0;
  for (char c : s) {
    if (c == '[') ++square;
    else if (c == ']' && square > 0) --square;
    else if (c == '(') ++round;
    else if (c == ')' && round > 0) --round;
    if ((c == ',' || c == '\n') && square == 0 && round == 0) {
      out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    cur.push_back(c);
  }
  out.push_back(std::move(cur));
  return out;
}

// Drops list decorations a model may add: bullets, "1." / "1)" numbering,
// markdown emphasis and quotes.
inline std::string strip_decoration(std::string_view s) {
  s = trim_view(s);
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*' || s[0] == '+') && s[1] == ' ') s = trim_view(s.substr(2));
  if (s.starts_with("\xE2\x80\xA2")) s = trim_view(s.substr(3));
  std::size_t d = 0;
  while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
  if (d > 0 && d + 1 < s.size() && (s[d] == '.' || s[d] == ')') && s[d + 1] == ' ') s = trim_view(s.substr(d + 2));
  auto decoration = [](char c) { return c == '*' || c == '"' || c == '\'' || c == '`' || c == '_'; };
  while (!s.empty() && decoration(s.front())) s.remove_prefix(1);
  while (!s.empty() && decoration(s.back())) s.remove_suffix(1);
  return std::string(trim_view(s));
}

inline std::string_view strip_final_period(std::string_view s) {
  s = trim_view(s);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return s;
}

inline std::string without_cr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (c != '\r') out.push_back(c);
  return out;
}

}  // namespace detail

/// Extracts mention -> entity predictions from a free-form response. Never
/// throws; anything unusable is recorded in parse_notes.
inline PredictionMap parse_response(std::string_view raw, Ontology ontology, std::string instance_id = {}) {
  PredictionMap pm;
  pm.instance_id = std::move(instance_id);
  pm.ontology = ontology;
  const std::string text = detail::without_cr(raw);
  if (trim_view(text).empty()) {
    pm.parse_notes.push_back("empty response");
    return pm;
  }
  std::string_view body = std::string_view(text).substr(detail::opener_end(text));
  body = detail::strip_final_period(body);

  struct Pending {
    std::string mention;
    std::vector<std::string> ref_tokens;
  };
  std::vector<Pending> entries;
  std::string prefix;  // text of a mention that itself contained a comma

  auto ref_tokens = [](std::string_view s) {
    std::vector<std::string> toks;
    for (const std::string& t : split(s, ';'))
      if (!trim_view(t).empty()) toks.push_back(trim(t));
    return toks;
  };

  for (const std::string& seg_raw : detail::split_top_level(body)) {
    const std::string_view seg = trim_view(seg_raw);
    if (seg.empty()) continue;
    const std::size_t dash = seg.find(" - ");
    if (dash != std::string_view::npos) {
      std::string mention = detail::strip_decoration(seg.substr(0, dash));
      if (!prefix.empty()) mention = prefix + ", " + mention;
      prefix.clear();
      entries.push_back({std::move(mention), ref_tokens(seg.substr(dash + 3))});
      continue;
    }
    const auto toks = ref_tokens(seg);
    const bool all_refs = !toks.empty() && std::all_of(toks.begin(), toks.end(), [](const std::string& t) {
      return detail::try_parse_entity_ref(t).has_value();
    });
    if (all_refs && !entries.empty() && prefix.empty()) {
      auto& target = entries.back().ref_tokens;
      target.insert(target.end(), toks.begin(), toks.end());
    } else {
      prefix = prefix.empty() ? std::string(seg) : prefix + ", " + std::string(seg);
    }
  }
  if (!prefix.empty()) pm.parse_notes.push_back("unparsed text: '" + prefix + "'");

  for (const Pending& e : entries) {
    const std::string key = normalize_mention(e.mention);
    RefSet refs;
    for (const std::string& tok : e.ref_tokens) {
      auto ref = detail::try_parse_entity_ref(tok);
      if (!ref) {
        pm.parse_notes.push_back("unrecognized reference '" + tok + "' for mention '" + key + "'");
        continue;
      }
      if (!accepted_for(*ref, ontology)) {
        pm.parse_notes.push_back("reference '" + tok + "' is not a " + std::string(to_string(ontology)) + " entity");
        continue;
      }
      refs.insert(*ref);
    }
    if (key.empty() || refs.empty()) {
      pm.parse_notes.push_back("entry '" + e.mention + "' has no usable reference");
      continue;
    }
    pm.entries.insert(key, refs);
  }
  pm.meaningful = !pm.entries.empty();
  if (!pm.meaningful) pm.parse_notes.push_back("no " + std::string(to_string(ontology)) + " references recovered");
  return pm;
}

/// Mention list of a NER response, as displayed, deduplicated by normalized
/// text in order of appearance.
inline std::vector<std::string> parse_ner_response(std::string_view raw) {
  const std::string text = detail::without_cr(raw);
  std::string_view body = std::string_view(text).substr(detail::opener_end(text));
  body = detail::strip_final_period(body);
  std::vector<std::string> mentions, keys;
  for (const std::string& seg : detail::split_top_level(body)) {
    std::string m = collapse_whitespace(detail::strip_decoration(seg));
    if (m.empty()) continue;
    std::string key = normalize_mention(m);
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    keys.push_back(std::move(key));
    mentions.push_back(std::move(m));
  }
  return mentions;
}

struct ChainedInstruction {
  std::string text;
  bool empty_mentions = false;
};

/// NEL instruction for the mentions a NER step produced.
inline ChainedInstruction chain_ner_to_nel(const std::vector<std::string>& mentions, std::string_view nel_template) {
  std::vector<std::string> clean;
  for (const auto& m : mentions) {
    std::string s = sanitize_mention(m);
    if (!s.empty()) clean.push_back(std::move(s));
  }
  return {fill_mention_template(nel_template, clean), clean.empty()};
}

// ---------------------------------------------------------------------------
// Scoring

struct GoldInstance {
  std::string instance_id;
  MentionLinks links;
};

struct EntityScore {
  std::size_t gold_count = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::map<EntityRef, EntityScore> per_entity;
  MetricTriple macro_weighted;
  std::size_t instances = 0;
  std::size_t non_meaningful = 0;
};

inline double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

inline EvalReport score_nel(const std::vector<GoldInstance>& gold, const std::vector<PredictionMap>& preds) {
  std::map<std::string, const PredictionMap*> by_id;
  for (const PredictionMap& p : preds) {
    if (!by_id.emplace(p.instance_id, &p).second)
      throw Error(ErrorKind::AlignmentError, "duplicate prediction for instance '" + p.instance_id + "'");
  }
  std::map<std::string, bool> gold_ids;
  for (const GoldInstance& g : gold) gold_ids[g.instance_id] = true;
  for (const auto& [id, p] : by_id)
    if (!gold_ids.count(id)) throw Error(ErrorKind::AlignmentError, "prediction '" + id + "' has no gold instance");

  EvalReport report;
  report.instances = gold.size();
  static const RefSet kNothing;
  for (const GoldInstance& g : gold) {
    auto it = by_id.find(g.instance_id);
    const PredictionMap* pred = it == by_id.end() ? nullptr : it->second;
    const bool usable = pred && pred->meaningful;
    if (!usable) ++report.non_meaningful;
    for (const auto& [mention, gold_refs] : g.links) {
      const RefSet* predicted = usable ? pred->entries.find(mention) : nullptr;
      const RefSet& pset = predicted ? *predicted : kNothing;
      for (const EntityRef& e : gold_refs) {
        EntityScore& s = report.per_entity[e];
        ++s.gold_count;
        if (pset.contains(e)) ++s.tp;
      }
      for (const EntityRef& e : pset)
        if (!gold_refs.contains(e)) ++report.per_entity[e].fp;
    }
  }
  // Entities never in gold have no recall and zero weight.
  std::erase_if(report.per_entity, [](const auto& kv) { return kv.second.gold_count == 0; });

  std::size_t total_gold = 0;
  for (auto& [e, s] : report.per_entity) {
    s.fn = s.gold_count - s.tp;
    s.precision = s.tp + s.fp > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    s.recall = s.gold_count > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.gold_count) : 0.0;
    s.f1 = f1_of(s.precision, s.recall);
    total_gold += s.gold_count;
  }
  if (total_gold > 0) {
    for (const auto& [e, s] : report.per_entity) {
      const double n = static_cast<double>(s.gold_count);
      report.macro_weighted.precision += n * s.precision;
      report.macro_weighted.recall += n * s.recall;
      report.macro_weighted.f1 += n * s.f1;
    }
    const double total = static_cast<double>(total_gold);
    report.macro_weighted.precision /= total;
    report.macro_weighted.recall /= total;
    report.macro_weighted.f1 /= total;
  }
  return report;
}

/// Exact-match set scores over normalized mentions.
inline MetricTriple score_ner(const std::vector<std::string>& gold_mentions,
                              const std::vector<std::string>& predicted_mentions) {
  std::vector<std::string> g, p;
  for (const auto& m : gold_mentions) g.push_back(normalize_mention(m));
  for (const auto& m : predicted_mentions) p.push_back(normalize_mention(m));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (g.empty() && p.empty()) return {1.0, 1.0, 1.0};
  std::vector<std::string> both;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(both));
  MetricTriple m;
  m.precision = p.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(p.size());
  m.recall = g.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(g.size());
  m.f1 = f1_of(m.precision, m.recall);
  return m;
}

/// Pooled NER counts over many instances.
struct NerTally {
  std::size_t tp = 0, fp = 0, fn = 0;

  void add(const std::vector<std::string>& gold_mentions, const std::vector<std::string>& predicted_mentions) {
    std::vector<std::string> g, p;
    for (const auto& m : gold_mentions) g.push_back(normalize_mention(m));
    for (const auto& m : predicted_mentions) p.push_back(normalize_mention(m));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::vector<std::string> both;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(both));
    tp += both.size();
    fp += p.size() - both.size();
    fn += g.size() - both.size();
  }

  MetricTriple metrics() const {
    if (tp + fp + fn == 0) return {1.0, 1.0, 1.0};
    MetricTriple m;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = f1_of(m.precision, m.recall);
    return m;
  }
};

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  auto table = nlohmann::ordered_json::array();
  for (const auto& [e, s] : r.per_entity) {
    nlohmann::ordered_json row;
    row["ontology"] = to_string(e.ontology);
    row["namespace"] = e.ns;
    row["local_id"] = e.local_id;
    row["gold_count"] = s.gold_count;
    row["tp"] = s.tp;
    row["fp"] = s.fp;
    row["fn"] = s.fn;
    row["precision"] = s.precision;
    row["recall"] = s.recall;
    row["f1"] = s.f1;
    table.push_back(std::move(row));
  }
  j["per_entity"] = std::move(table);
  j["macro_weighted"] = {{"precision", r.macro_weighted.precision},
                         {"recall", r.macro_weighted.recall},
                         {"f1", r.macro_weighted.f1}};
  j["counts"] = {{"instances", r.instances}, {"non_meaningful", r.non_meaningful}};
  return j;
}

/// One row in the layout of the results tables: fold, test set, P, R, F1.
inline std::string summary_row(std::string_view fold, std::string_view test_set, const MetricTriple& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.*s\t%.*s\t%.3f\t%.3f\t%.3f", static_cast<int>(fold.size()), fold.data(),
                static_cast<int>(test_set.size()), test_set.data(), m.precision, m.recall, m.f1);
  return buf;
}

}  // namespace foodsem

#endif  // FOODSEM_NEL_EVAL_HPP
