#ifndef FOODSEM_BIOC_HPP
#define FOODSEM_BIOC_HPP

// BioC-XML ingestion: documents with a full_text infon and annotations whose
// semantic_tags infon holds ';'-separated entity URIs.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "foodsem/common.hpp"
#include "foodsem/entity_ref.hpp"

namespace foodsem {

/// Half-open range of UTF-8 code points into a document's full_text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct MentionAnnotation {
  std::string annotation_id;
  std::string surface_text;
  // Stored as found in the file; the unit is not known, so nothing reads them.
  long long declared_offset = 0;
  long long declared_length = 0;
  std::optional<Span> resolved_span;
  RefSet entity_refs;

  friend bool operator==(const MentionAnnotation& a, const MentionAnnotation& b) {
    return a.annotation_id == b.annotation_id && a.surface_text == b.surface_text &&
           a.declared_offset == b.declared_offset && a.declared_length == b.declared_length &&
           a.resolved_span == b.resolved_span && a.entity_refs == b.entity_refs;
  }
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string full_text;
  SourceKind source_kind = SourceKind::Recipe;
  Ontology ontology = Ontology::FoodOn;
  std::optional<std::string> category;
  std::vector<MentionAnnotation> annotations;
  /// Validation flags raised during parsing and span resolution.
  std::vector<std::string> notes;

  friend bool operator==(const AnnotatedDocument& a, const AnnotatedDocument& b) {
    return a.doc_id == b.doc_id && a.full_text == b.full_text && a.source_kind == b.source_kind &&
           a.ontology == b.ontology && a.category == b.category && a.annotations == b.annotations;
  }
};

struct DocumentBundle {
  std::string source_id;
  std::map<Ontology, AnnotatedDocument> variants;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string attr(const ptree& node, const std::string& name) {
  if (auto a = node.get_child_optional("<xmlattr>." + name)) return a->data();
  return {};
}

inline long long attr_int(const ptree& node, const std::string& name) {
  const std::string v = trim(attr(node, name));
  if (v.empty()) return 0;
  try {
    return std::stoll(v);
  } catch (const std::exception&) {
    return 0;
  }
}

inline void collect_annotations(const ptree& node, std::vector<const ptree*>& out) {
  for (const auto& [key, child] : node) {
    if (key == "annotation") out.push_back(&child);
    else if (key == "passage") collect_annotations(child, out);
  }
}

inline AnnotatedDocument parse_document(const ptree& node, SourceKind kind, Ontology ontology) {
  AnnotatedDocument doc;
  doc.source_kind = kind;
  doc.ontology = ontology;
  doc.doc_id = trim(node.get<std::string>("id", ""));

  std::optional<std::string> full_text;
  for (const auto& [key, child] : node) {
    if (key != "infon") continue;
    const std::string k = attr(child, "key");
    if (k == "full_text") full_text = child.data();
    else if (k == "category") doc.category = trim(child.data());
  }
  if (!full_text || trim_view(*full_text).empty())
    throw Error(ErrorKind::MissingFullText, "document '" + doc.doc_id + "' has no full_text infon");
  doc.full_text = std::move(*full_text);

  std::vector<const ptree*> annotation_nodes;
  collect_annotations(node, annotation_nodes);
  for (std::size_t i = 0; i < annotation_nodes.size(); ++i) {
    const ptree& a = *annotation_nodes[i];
    MentionAnnotation m;
    m.annotation_id = attr(a, "id");
    if (m.annotation_id.empty()) m.annotation_id = std::to_string(i + 1);
    m.surface_text = trim(a.get<std::string>("text", ""));
    if (auto loc = a.get_child_optional("location")) {
      m.declared_offset = attr_int(*loc, "offset");
      m.declared_length = attr_int(*loc, "length");
    }
    std::string tags;
    for (const auto& [key, child] : a) {
      if (key == "infon" && attr(child, "key") == "semantic_tags") tags += child.data() + ";";
    }
    for (const std::string& raw : split(tags, ';')) {
      if (trim_view(raw).empty()) continue;
      CanonicalTag c = canonicalize_tag(raw, ontology);
      if (c.flag) doc.notes.push_back("doc " + doc.doc_id + " annotation " + m.annotation_id + ": " + *c.flag);
      m.entity_refs.insert(c.ref);
    }
    if (m.entity_refs.empty())
      throw Error(ErrorKind::EmptySemanticTags,
                  "document '" + doc.doc_id + "' annotation '" + m.annotation_id + "' has no semantic tags");
    const bool has_own = std::any_of(m.entity_refs.begin(), m.entity_refs.end(),
                                     [&](const EntityRef& r) { return r.ontology == ontology; });
    if (!has_own)
      doc.notes.push_back("doc " + doc.doc_id + " annotation " + m.annotation_id + ": no " +
                          std::string(to_string(ontology)) + " reference");
    doc.annotations.push_back(std::move(m));
  }
  if (doc.annotations.empty()) doc.notes.push_back("doc " + doc.doc_id + ": no annotations");
  return doc;
}

}  // namespace detail

/// Parses a BioC collection (or a bare document element) into documents
/// tagged with the given source kind and ontology.
inline std::vector<AnnotatedDocument> parse_bioc_collection(std::string_view xml, SourceKind kind,
                                                            Ontology ontology) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::MalformedXml, e.what());
  }

  std::vector<AnnotatedDocument> docs;
  for (const auto& [key, child] : tree) {
    if (key == "document") {
      docs.push_back(detail::parse_document(child, kind, ontology));
    } else if (key == "collection") {
      for (const auto& [k2, doc] : child)
        if (k2 == "document") docs.push_back(detail::parse_document(doc, kind, ontology));
    }
  }
  return docs;
}

namespace detail {

// Lowercased copy with whitespace runs folded to one space, plus the byte
// offset in the original of every kept byte.
struct FoldedText {
  std::string text;
  std::vector<std::size_t> origin;
};

inline FoldedText fold_text(std::string_view s) {
  FoldedText f;
  f.text.reserve(s.size());
  f.origin.reserve(s.size());
  bool in_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (is_space(c)) {
      if (!in_space) {
        f.text.push_back(' ');
        f.origin.push_back(i);
      }
      in_space = true;
      continue;
    }
    in_space = false;
    f.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    f.origin.push_back(i);
  }
  return f;
}

inline bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct ByteSpan {
  std::size_t start, end;
  bool overlaps(const ByteSpan& o) const { return start < o.end && o.start < end; }
};

}  // namespace detail

/// Locates every annotation in full_text by case-insensitive,
/// whitespace-folded search. Each annotation takes the first occurrence not
/// already claimed; whole-word occurrences free of any claimed span win, then
/// whole-word occurrences free of same-text claims, then bare substrings.
/// Annotations that cannot be found keep resolved_span = none and are noted.
inline AnnotatedDocument resolve_spans(AnnotatedDocument doc) {
  const detail::FoldedText folded = detail::fold_text(doc.full_text);
  struct Claim {
    detail::ByteSpan span;
    std::string key;
  };
  std::vector<Claim> claims;

  for (MentionAnnotation& m : doc.annotations) {
    m.resolved_span.reset();
    const std::string needle = normalize_mention(m.surface_text);
    if (needle.empty()) {
      doc.notes.push_back("doc " + doc.doc_id + " annotation " + m.annotation_id + ": empty mention text");
      continue;
    }
    std::vector<detail::ByteSpan> hits;
    std::vector<bool> whole_word;
    for (std::size_t p = folded.text.find(needle); p != std::string::npos; p = folded.text.find(needle, p + 1)) {
      const std::size_t q = p + needle.size();
      hits.push_back({folded.origin[p], folded.origin[q - 1] + 1});
      const bool left = p == 0 || !detail::word_char(folded.text[p - 1]) || !detail::word_char(needle.front());
      const bool right = q == folded.text.size() || !detail::word_char(folded.text[q]) ||
                         !detail::word_char(needle.back());
      whole_word.push_back(left && right);
    }
    auto free_of = [&](const detail::ByteSpan& s, bool same_text_only) {
      return std::none_of(claims.begin(), claims.end(), [&](const Claim& c) {
        return (!same_text_only || c.key == needle) && c.span.overlaps(s);
      });
    };
    std::optional<detail::ByteSpan> chosen;
    for (int pass = 0; pass < 4 && !chosen; ++pass) {
      const bool need_word = pass < 2;
      const bool same_only = pass % 2 == 1;
      for (std::size_t i = 0; i < hits.size(); ++i) {
        if (need_word && !whole_word[i]) continue;
        if (free_of(hits[i], same_only)) {
          chosen = hits[i];
          break;
        }
      }
    }
    if (!chosen) {
      doc.notes.push_back("doc " + doc.doc_id + " annotation " + m.annotation_id + ": mention '" +
                          m.surface_text + "' not found in text");
      continue;
    }
    claims.push_back({*chosen, needle});
    m.resolved_span = Span{utf8_chars_before(doc.full_text, chosen->start),
                           utf8_chars_before(doc.full_text, chosen->end)};
  }
  return doc;
}

/// Text covered by a code-point span.
inline std::string span_text(std::string_view text, const Span& span) {
  std::size_t cp = 0, begin = std::string_view::npos, end = text.size();
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool boundary = i == text.size() || (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80;
    if (!boundary) continue;
    if (cp == span.start && begin == std::string_view::npos) begin = i;
    if (cp == span.end) {
      end = i;
      break;
    }
    ++cp;
  }
  if (begin == std::string_view::npos) return {};
  return std::string(text.substr(begin, end - begin));
}

/// Source document identity shared by the per-ontology variants of one text:
/// the doc_id with any trailing ontology marker ("_foodon", "-hansard",
/// ".snomedct", ...) removed.
inline std::string source_id_of(std::string_view doc_id) {
  const std::string lower = ascii_lower(doc_id);
  for (std::string_view marker : {"snomed-ct", "snomedct", "snomed", "foodon", "hansard"}) {
    if (lower.size() > marker.size() + 1 && lower.ends_with(marker)) {
      const char sep = lower[lower.size() - marker.size() - 1];
      if (sep == '_' || sep == '-' || sep == '.' || sep == ':')
        return std::string(doc_id.substr(0, doc_id.size() - marker.size() - 1));
    }
  }
  return std::string(doc_id);
}

inline std::vector<DocumentBundle> group_ontology_variants(const std::vector<AnnotatedDocument>& docs) {
  std::map<std::string, DocumentBundle> by_source;
  for (const AnnotatedDocument& d : docs) {
    const std::string sid = source_id_of(d.doc_id);
    DocumentBundle& b = by_source[sid];
    b.source_id = sid;
    if (!b.variants.empty() && b.variants.begin()->second.full_text != d.full_text)
      throw Error(ErrorKind::VariantTextMismatch, "source '" + sid + "': document '" + d.doc_id +
                                                      "' text differs from '" + b.variants.begin()->second.doc_id +
                                                      "'");
    if (b.variants.count(d.ontology))
      throw Error(ErrorKind::DuplicateVariant,
                  "source '" + sid + "' has two " + std::string(to_string(d.ontology)) + " documents");
    b.variants.emplace(d.ontology, d);
  }
  std::vector<DocumentBundle> out;
  out.reserve(by_source.size());
  for (auto& [sid, b] : by_source) out.push_back(std::move(b));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// BioC XML in the layout the parser reads.
inline std::string to_bioc_xml(const std::vector<AnnotatedDocument>& docs) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<collection>\n";
  for (const AnnotatedDocument& d : docs) {
    out += "  <document>\n    <id>" + xml_escape(d.doc_id) + "</id>\n";
    out += "    <infon key=\"full_text\">" + xml_escape(d.full_text) + "</infon>\n";
    for (const MentionAnnotation& m : d.annotations) {
      std::vector<std::string> tags;
      for (const EntityRef& r : m.entity_refs) tags.push_back(render_semantic_tag(r));
      out += "    <annotation id=\"" + xml_escape(m.annotation_id) + "\"> <infon key=\"semantic_tags\">" +
             xml_escape(join(tags, ";")) + "</infon>\n";
      out += "      <location offset=\"" + std::to_string(m.declared_offset) + "\" length=\"" +
             std::to_string(m.declared_length) + "\" /> <text>" + xml_escape(m.surface_text) +
             "</text> </annotation>\n";
    }
    if (d.category) out += "    <infon key=\"category\">" + xml_escape(*d.category) + "</infon>\n";
    out += "  </document>\n";
  }
  out += "</collection>\n";
  return out;
}

inline nlohmann::ordered_json to_json(const EntityRef& r) {
  nlohmann::ordered_json j;
  j["ontology"] = to_string(r.ontology);
  j["namespace"] = r.ns;
  j["local_id"] = r.local_id;
  j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
  return j;
}

inline EntityRef entity_ref_from_json(const nlohmann::json& j) {
  EntityRef r;
  const auto o = parse_ontology(j.at("ontology").get<std::string>());
  if (!o) throw Error(ErrorKind::FormatError, "unknown ontology " + j.at("ontology").dump());
  r.ontology = *o;
  r.ns = j.at("namespace").get<std::string>();
  r.local_id = j.at("local_id").get<std::string>();
  if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<std::string>();
  return r;
}

/// One line of the document dump.
inline nlohmann::ordered_json to_json(const AnnotatedDocument& d) {
  nlohmann::ordered_json j;
  j["doc_id"] = d.doc_id;
  j["source_kind"] = to_string(d.source_kind);
  j["ontology"] = to_string(d.ontology);
  j["category"] = d.category ? nlohmann::ordered_json(*d.category) : nlohmann::ordered_json(nullptr);
  j["full_text"] = d.full_text;
  auto anns = nlohmann::ordered_json::array();
  for (const MentionAnnotation& m : d.annotations) {
    nlohmann::ordered_json a;
    a["id"] = m.annotation_id;
    a["text"] = m.surface_text;
    a["declared_offset"] = m.declared_offset;
    a["declared_length"] = m.declared_length;
    a["resolved_span"] = m.resolved_span ? nlohmann::ordered_json::array({m.resolved_span->start, m.resolved_span->end})
                                         : nlohmann::ordered_json(nullptr);
    auto refs = nlohmann::ordered_json::array();
    for (const EntityRef& r : m.entity_refs) refs.push_back(to_json(r));
    a["entity_refs"] = std::move(refs);
    anns.push_back(std::move(a));
  }
  j["annotations"] = std::move(anns);
  return j;
}

inline AnnotatedDocument document_from_json(const nlohmann::json& j) {
  AnnotatedDocument d;
  d.doc_id = j.at("doc_id").get<std::string>();
  const auto kind = parse_source_kind(j.at("source_kind").get<std::string>());
  const auto onto = parse_ontology(j.at("ontology").get<std::string>());
  if (!kind || !onto) throw Error(ErrorKind::FormatError, "document '" + d.doc_id + "': bad source_kind/ontology");
  d.source_kind = *kind;
  d.ontology = *onto;
  if (!j.at("category").is_null()) d.category = j["category"].get<std::string>();
  d.full_text = j.at("full_text").get<std::string>();
  for (const auto& a : j.at("annotations")) {
    MentionAnnotation m;
    m.annotation_id = a.at("id").get<std::string>();
    m.surface_text = a.at("text").get<std::string>();
    m.declared_offset = a.at("declared_offset").get<long long>();
    m.declared_length = a.at("declared_length").get<long long>();
    if (!a.at("resolved_span").is_null())
      m.resolved_span = Span{a["resolved_span"][0].get<std::size_t>(), a["resolved_span"][1].get<std::size_t>()};
    for (const auto& r : a.at("entity_refs")) m.entity_refs.insert(entity_ref_from_json(r));
    d.annotations.push_back(std::move(m));
  }
  return d;
}

}  // namespace foodsem

#endif  // FOODSEM_BIOC_HPP
