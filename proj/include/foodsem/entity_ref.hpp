#ifndef FOODSEM_ENTITY_REF_HPP
#define FOODSEM_ENTITY_REF_HPP

#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "foodsem/common.hpp"

namespace foodsem {

namespace ns {
inline constexpr std::string_view kFoodOn = "FOODON";
inline constexpr std::string_view kNcbiTaxon = "NCBITaxon";
inline constexpr std::string_view kSnomed = "SNOMEDCT";
inline constexpr std::string_view kHansard = "AG";
inline constexpr std::string_view kOther = "OTHER";
}  // namespace ns

inline constexpr std::string_view kOboPrefix = "http://purl.obolibrary.org/obo/";
inline constexpr std::string_view kSnomedUriPrefix = "http://purl.bioontology.org/ontology/SNOMEDCT/";

/// Canonical identity of an ontology entity. The label is carried for display
/// (Hansard codes come with a bracketed name) and never takes part in
/// comparisons.
struct EntityRef {
  Ontology ontology = Ontology::FoodOn;
  std::string ns;
  std::string local_id;
  std::optional<std::string> label;

  friend bool operator==(const EntityRef& a, const EntityRef& b) {
    return a.ontology == b.ontology && a.ns == b.ns && a.local_id == b.local_id;
  }
  friend bool operator<(const EntityRef& a, const EntityRef& b) {
    return std::tie(a.ontology, a.ns, a.local_id) < std::tie(b.ontology, b.ns, b.local_id);
  }
};

/// True when `ref` lives in one of the namespaces a response for `ontology` may
/// legitimately contain.
inline bool accepted_for(const EntityRef& ref, Ontology ontology) {
  if (ref.ontology != ontology) return false;
  switch (ontology) {
    case Ontology::FoodOn: return ref.ns == ns::kFoodOn || ref.ns == ns::kNcbiTaxon;
    case Ontology::SnomedCt: return ref.ns == ns::kSnomed;
    case Ontology::Hansard: return ref.ns == ns::kHansard;
  }
  return false;
}

/// Insertion-ordered set of entity references. Order is kept so rendered
/// responses list references as the corpus annotated them; equality is set
/// equality.
class RefSet {
 public:
  RefSet() = default;
  RefSet(std::initializer_list<EntityRef> refs) {
    for (const auto& r : refs) insert(r);
  }

  bool insert(const EntityRef& ref) {
    if (contains(ref)) return false;
    refs_.push_back(ref);
    return true;
  }
  void merge(const RefSet& other) {
    for (const auto& r : other) insert(r);
  }
  bool contains(const EntityRef& ref) const {
    return std::find(refs_.begin(), refs_.end(), ref) != refs_.end();
  }

  std::size_t size() const { return refs_.size(); }
  bool empty() const { return refs_.empty(); }
  using const_iterator = std::vector<EntityRef>::const_iterator;
  const_iterator begin() const { return refs_.begin(); }
  const_iterator end() const { return refs_.end(); }
  const EntityRef& operator[](std::size_t i) const { return refs_[i]; }
  EntityRef& operator[](std::size_t i) { return refs_[i]; }

  friend bool operator==(const RefSet& a, const RefSet& b) {
    if (a.size() != b.size()) return false;
    for (const auto& r : a)
      if (!b.contains(r)) return false;
    return true;
  }

 private:
  std::vector<EntityRef> refs_;
};

namespace detail {

inline bool is_id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
}

inline bool valid_local_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), is_id_char);
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// AG(.segment)* with alphanumeric segments.
inline bool valid_hansard_code(std::string_view code) {
  if (code.size() < 2 || code.substr(0, 2) != "AG") return false;
  std::string_view rest = code.substr(2);
  while (!rest.empty()) {
    if (rest.front() != '.') return false;
    rest.remove_prefix(1);
    std::size_t n = 0;
    while (n < rest.size() && std::isalnum(static_cast<unsigned char>(rest[n]))) ++n;
    if (n == 0) return false;
    rest.remove_prefix(n);
  }
  return true;
}

inline std::optional<EntityRef> from_prefix(std::string_view prefix, std::string_view id) {
  if (!valid_local_id(id)) return std::nullopt;
  const std::string p = ascii_lower(prefix);
  if (p == "foodon") return EntityRef{Ontology::FoodOn, std::string(ns::kFoodOn), std::string(id), {}};
  if (p == "ncbitaxon") return EntityRef{Ontology::FoodOn, std::string(ns::kNcbiTaxon), std::string(id), {}};
  if (p == "snomedct" || p == "snomed" || p == "sctid") {
    if (!all_digits(id)) return std::nullopt;
    return EntityRef{Ontology::SnomedCt, std::string(ns::kSnomed), std::string(id), {}};
  }
  return std::nullopt;
}

inline std::optional<EntityRef> parse_uri(std::string_view t) {
  if (auto pos = t.find("/obo/"); pos != std::string_view::npos) {
    std::string_view tail = t.substr(pos + 5);
    const std::size_t sep = tail.find_first_of("_-:");
    if (sep == std::string_view::npos) return std::nullopt;
    return from_prefix(tail.substr(0, sep), tail.substr(sep + 1));
  }
  for (std::string_view marker : {std::string_view("/ontology/SNOMEDCT/"), std::string_view("snomed.info/id/"),
                                  std::string_view("snomed.info/sct/")}) {
    if (auto pos = t.find(marker); pos != std::string_view::npos) {
      std::string_view id = t.substr(pos + marker.size());
      if (!all_digits(id)) return std::nullopt;
      return EntityRef{Ontology::SnomedCt, std::string(ns::kSnomed), std::string(id), {}};
    }
  }
  return std::nullopt;
}

inline std::optional<EntityRef> parse_hansard(std::string_view t) {
  std::size_t end = 0;
  while (end < t.size() && !is_space(t[end]) && t[end] != '[') ++end;
  std::string_view code = t.substr(0, end);
  while (!code.empty() && code.back() == '.') code.remove_suffix(1);
  if (!valid_hansard_code(code)) return std::nullopt;
  EntityRef ref{Ontology::Hansard, std::string(ns::kHansard), std::string(code), {}};
  std::string_view rest = trim_view(t.substr(end));
  if (rest.empty()) return ref;
  if (rest.front() != '[') return std::nullopt;
  const std::size_t close = rest.rfind(']');
  if (close == std::string_view::npos) return std::nullopt;
  if (!trim_view(rest.substr(close + 1)).empty()) return std::nullopt;
  std::string label = collapse_whitespace(rest.substr(1, close - 1));
  if (!label.empty()) ref.label = std::move(label);
  return ref;
}

inline std::optional<EntityRef> try_parse_entity_ref(std::string_view token) {
  std::string_view t = trim_view(token);
  while (!t.empty() && (t.back() == '.' || t.back() == ',' || t.back() == ';')) t = trim_view(t.substr(0, t.size() - 1));
  if (t.empty()) return std::nullopt;
  if (starts_with_icase(t, "http://") || starts_with_icase(t, "https://")) return parse_uri(t);
  if (t.size() >= 2 && t.substr(0, 2) == "AG") {
    if (auto h = parse_hansard(t)) return h;
  }
  std::size_t p = 0;
  while (p < t.size() && std::isalpha(static_cast<unsigned char>(t[p]))) ++p;
  if (p == 0 || p >= t.size()) return std::nullopt;
  if (t[p] != '-' && t[p] != '_' && t[p] != ':') return std::nullopt;
  return from_prefix(t.substr(0, p), trim_view(t.substr(p + 1)));
}

}  // namespace detail

/// Inverse of render_entity_ref. Accepts Short and full-URI spellings, dash,
/// underscore or colon separators, surrounding whitespace, trailing
/// punctuation, and an optional Hansard bracketed label.
inline EntityRef parse_entity_ref(std::string_view token) {
  if (auto ref = detail::try_parse_entity_ref(token)) return *ref;
  throw Error(ErrorKind::UnrecognizedRef, "'" + std::string(token) + "' is not an entity reference");
}

inline std::string render_entity_ref(const EntityRef& ref, UriMode mode) {
  if (ref.ns == ns::kHansard) {
    if (ref.label && !ref.label->empty()) return ref.local_id + " [" + *ref.label + "]";
    return ref.local_id;
  }
  if (ref.ns == ns::kFoodOn || ref.ns == ns::kNcbiTaxon) {
    if (mode == UriMode::FullUri) return std::string(kOboPrefix) + ref.ns + "_" + ref.local_id;
    return ref.ns + "-" + ref.local_id;
  }
  if (ref.ns == ns::kSnomed) return ref.ns + "-" + ref.local_id;
  return ref.local_id;
}

/// Form written into BioC semantic_tags when serializing documents.
inline std::string render_semantic_tag(const EntityRef& ref) {
  if (ref.ns == ns::kSnomed) return std::string(kSnomedUriPrefix) + ref.local_id;
  return render_entity_ref(ref, UriMode::FullUri);
}

struct CanonicalTag {
  EntityRef ref;
  std::optional<std::string> flag;
};

/// Maps one semantic_tags URI to an EntityRef within a document tagged with
/// `doc_ontology`. Nothing is rejected: unknown prefixes land in the OTHER
/// namespace and cross-ontology identifiers are flagged.
inline CanonicalTag canonicalize_tag(std::string_view raw, Ontology doc_ontology) {
  const std::string_view tag = trim_view(raw);
  if (auto ref = detail::try_parse_entity_ref(tag)) {
    CanonicalTag out{*ref, std::nullopt};
    if (ref->ns == ns::kNcbiTaxon) {
      out.flag = "cross-ontology taxon " + ref->local_id;
    } else if (ref->ontology != doc_ontology) {
      out.flag = "reference " + std::string(tag) + " belongs to " + std::string(to_string(ref->ontology)) +
                 ", document is " + std::string(to_string(doc_ontology));
    }
    return out;
  }
  if (doc_ontology == Ontology::SnomedCt && detail::all_digits(tag))
    return {EntityRef{Ontology::SnomedCt, std::string(ns::kSnomed), std::string(tag), {}}, std::nullopt};
  return {EntityRef{doc_ontology, std::string(ns::kOther), std::string(tag), {}},
          "unknown URI prefix: " + std::string(tag)};
}

}  // namespace foodsem

#endif  // FOODSEM_ENTITY_REF_HPP
