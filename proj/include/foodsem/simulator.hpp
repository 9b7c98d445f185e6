#ifndef FOODSEM_SIMULATOR_HPP
#define FOODSEM_SIMULATOR_HPP

// Gold-derived stand-in for a model: renders the expected answer and then
// damages it according to a corruption profile.

#include <string>
#include <vector>

#include "foodsem/common.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

struct CorruptionProfile {
  double p_drop_mention = 0.0;
  double p_corrupt_ref = 0.0;
  double p_format_noise = 0.0;
  double p_empty = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    for (double p : {p_drop_mention, p_corrupt_ref, p_format_noise, p_empty})
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::ConfigError, "corruption probabilities must lie in [0,1]");
  }
};

namespace detail {

inline EntityRef perturb_digit(const EntityRef& ref, const RefSet& avoid, Rng& rng) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    EntityRef out = ref;
    std::vector<std::size_t> digits;
    for (std::size_t i = 0; i < out.local_id.size(); ++i)
      if (std::isdigit(static_cast<unsigned char>(out.local_id[i]))) digits.push_back(i);
    if (digits.empty()) {
      out.local_id += '9';
    } else {
      const std::size_t pos = rng.pick(digits);
      const int d = out.local_id[pos] - '0';
      out.local_id[pos] = static_cast<char>('0' + (d + 1 + static_cast<int>(rng.below(9))) % 10);
    }
    if (!avoid.contains(out)) return out;
  }
  EntityRef out = ref;
  out.local_id += "99";
  return out;
}

enum class FormatNoise { None, NewlineEntries, DropOpener, SwitchUriMode };

}  // namespace detail

/// Deterministic in (profile.rng_seed, pair.pair_id). A zero profile yields a
/// response that parses back to the gold exactly.
inline std::string simulate_response(const IRPair& pair, const CorruptionProfile& profile) {
  Rng rng(derive_seed(profile.rng_seed, "sim:" + pair.pair_id));
  if (rng.bernoulli(profile.p_empty)) return {};

  detail::FormatNoise noise = detail::FormatNoise::None;
  if (rng.bernoulli(profile.p_format_noise)) {
    const std::size_t kinds = pair.task == Task::Nel ? 3 : 2;
    noise = static_cast<detail::FormatNoise>(1 + rng.below(kinds));
  }
  std::string opener = response_opener(pair.response);
  if (opener.empty()) opener = "Here is the answer:";
  if (noise == detail::FormatNoise::DropOpener) opener.clear();
  const std::string_view separator = noise == detail::FormatNoise::NewlineEntries ? "\n" : ", ";

  std::vector<std::string> parts;
  if (pair.task == Task::Nel) {
    UriMode mode = pair.response.find(kOboPrefix) != std::string::npos ? UriMode::FullUri : UriMode::Short;
    if (noise == detail::FormatNoise::SwitchUriMode) mode = mode == UriMode::Short ? UriMode::FullUri : UriMode::Short;
    for (const auto& [mention, refs] : pair.nel_gold) {
      if (rng.bernoulli(profile.p_drop_mention)) continue;
      RefSet shown;
      for (const EntityRef& r : refs) shown.insert(rng.bernoulli(profile.p_corrupt_ref) ? detail::perturb_digit(r, refs, rng) : r);
      parts.push_back(mention + " - " + render_ref_list(shown, mode));
    }
  } else {
    for (const std::string& m : pair.ner_gold)
      if (!rng.bernoulli(profile.p_drop_mention)) parts.push_back(m);
  }

  std::string out = opener;
  if (!parts.empty()) {
    if (!out.empty()) out += noise == detail::FormatNoise::NewlineEntries ? "\n" : " ";
    out += join(parts, separator) + ".";
  }
  return out;
}

}  // namespace foodsem

#endif  // FOODSEM_SIMULATOR_HPP
