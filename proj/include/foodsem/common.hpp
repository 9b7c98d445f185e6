#ifndef FOODSEM_COMMON_HPP
#define FOODSEM_COMMON_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foodsem {

enum class ErrorKind {
  MalformedXml,
  MissingFullText,
  EmptySemanticTags,
  VariantTextMismatch,
  DuplicateVariant,
  EmptyPool,
  PoolFormatError,
  UnrecognizedRef,
  MixedOntology,
  MissingLabel,
  DuplicateUnavoidable,
  EmptyDataset,
  InsufficientExemplars,
  AlignmentError,
  ConfigError,
  FormatError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::MissingFullText: return "MissingFullText";
    case ErrorKind::EmptySemanticTags: return "EmptySemanticTags";
    case ErrorKind::VariantTextMismatch: return "VariantTextMismatch";
    case ErrorKind::DuplicateVariant: return "DuplicateVariant";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::PoolFormatError: return "PoolFormatError";
    case ErrorKind::UnrecognizedRef: return "UnrecognizedRef";
    case ErrorKind::MixedOntology: return "MixedOntology";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::DuplicateUnavoidable: return "DuplicateUnavoidable";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InsufficientExemplars: return "InsufficientExemplars";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit. `kind()` lets callers branch without
/// parsing the message; the message names the offending record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Configuration problems map to CLI exit status 2, everything else to 1.
  bool is_config_error() const noexcept { return kind_ == ErrorKind::ConfigError; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Domain enums

enum class Ontology { FoodOn, SnomedCt, Hansard };

/// Fixed order used for NEL pairs inside a sequence and for reports.
inline constexpr std::array<Ontology, 3> kOntologyOrder = {Ontology::Hansard, Ontology::FoodOn,
                                                           Ontology::SnomedCt};

inline std::string_view to_string(Ontology o) {
  switch (o) {
    case Ontology::FoodOn: return "foodon";
    case Ontology::SnomedCt: return "snomedct";
    case Ontology::Hansard: return "hansard";
  }
  return "foodon";
}

/// Display names as they appear in instructions.
inline std::string_view display_name(Ontology o) {
  switch (o) {
    case Ontology::FoodOn: return "FoodOn";
    case Ontology::SnomedCt: return "SNOMED-CT";
    case Ontology::Hansard: return "Hansard";
  }
  return "FoodOn";
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Accepts "foodon", "snomed", "snomedct", "snomed-ct", "hansard" in any case.
inline std::optional<Ontology> parse_ontology(std::string_view s) {
  const std::string v = ascii_lower(s);
  if (v == "foodon") return Ontology::FoodOn;
  if (v == "snomed" || v == "snomedct" || v == "snomed-ct" || v == "snomed_ct") return Ontology::SnomedCt;
  if (v == "hansard") return Ontology::Hansard;
  return std::nullopt;
}

enum class SourceKind { Recipe, Abstract };

inline std::string_view to_string(SourceKind k) {
  return k == SourceKind::Recipe ? "recipe" : "abstract";
}

inline std::optional<SourceKind> parse_source_kind(std::string_view s) {
  const std::string v = ascii_lower(s);
  if (v == "recipe") return SourceKind::Recipe;
  if (v == "abstract") return SourceKind::Abstract;
  return std::nullopt;
}

enum class UriMode { Short, FullUri };

inline std::string_view to_string(UriMode m) { return m == UriMode::Short ? "short" : "full"; }

inline std::optional<UriMode> parse_uri_mode(std::string_view s) {
  const std::string v = ascii_lower(s);
  if (v == "short") return UriMode::Short;
  if (v == "full" || v == "fulluri" || v == "full_uri") return UriMode::FullUri;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text helpers

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim_view(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

/// Trims and folds every whitespace run into one space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim_view(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

/// Key used for mention dedup, gold keys, and gold/prediction alignment.
inline std::string normalize_mention(std::string_view s) { return ascii_lower(collapse_whitespace(s)); }

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

inline bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

/// Number of UTF-8 code points in the first `bytes` bytes of `s`.
inline std::size_t utf8_chars_before(std::string_view s, std::size_t bytes) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < bytes && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Seeded randomness. std::mt19937_64 output is fixed by the standard; the
// distribution and shuffle helpers below are ours so results do not depend on
// the standard library implementation.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Expands one seed into an independent stream per named stage or item.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ splitmix64(fnv1a(tag)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return unit() < p;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(v.size()))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace foodsem

#endif  // FOODSEM_COMMON_HPP
