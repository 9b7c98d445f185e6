#ifndef FOODSEM_PROMPT_HPP
#define FOODSEM_PROMPT_HPP

#include <optional>
#include <string>
#include <vector>

#include "foodsem/common.hpp"
#include "foodsem/ir.hpp"

namespace foodsem {

inline constexpr std::string_view kExamplesHeader =
    "The following are examples of questions (with answers) about nutrition.";
inline constexpr std::string_view kBridge =
    "Respond to the following question in the same manner as seen in the examples above.";

struct NShotPrompt {
  std::size_t n = 0;
  Task task = Task::Ner;
  std::optional<Ontology> ontology;
  std::vector<IRPair> exemplars;
  std::string body;
};

/// Exemplar response with its references re-rendered in `mode`.
inline std::string exemplar_answer(const IRPair& p, UriMode mode) {
  if (p.task != Task::Nel) return p.response;
  const std::string opener = response_opener(p.response);
  return trim(render_nel_response(opener, p.nel_gold, mode));
}

/// n = 0 gives the instruction alone. Otherwise: header, n "Question/Answer"
/// blocks sampled without replacement from pool pairs of the same task and
/// ontology (never the target itself), the bridge sentence, and the target
/// question with an empty answer.
inline NShotPrompt build_nshot_prompt(const std::string& target_instruction, Task task,
                                      std::optional<Ontology> ontology, std::size_t n,
                                      const std::vector<IRPair>& exemplar_pool, std::uint64_t rng_seed,
                                      UriMode uri_mode = UriMode::FullUri) {
  NShotPrompt prompt;
  prompt.n = n;
  prompt.task = task;
  prompt.ontology = ontology;
  if (n == 0) {
    prompt.body = target_instruction;
    return prompt;
  }
  std::vector<const IRPair*> matching;
  for (const IRPair& p : exemplar_pool)
    if (p.task == task && p.ontology == ontology && p.instruction != target_instruction) matching.push_back(&p);
  if (matching.size() < n)
    throw Error(ErrorKind::InsufficientExemplars, "need " + std::to_string(n) + " exemplars, pool has " +
                                                      std::to_string(matching.size()) + " matching");
  Rng rng(rng_seed);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(matching.size() - i));
    std::swap(matching[i], matching[j]);
    prompt.exemplars.push_back(*matching[i]);
  }
  std::string body(kExamplesHeader);
  for (const IRPair& ex : prompt.exemplars)
    body += " Question: " + ex.instruction + "\nAnswer: " + exemplar_answer(ex, uri_mode) + "\n";
  body += std::string(kBridge) + " Question: " + target_instruction + "\nAnswer:";
  prompt.body = std::move(body);
  return prompt;
}

/// Seed for the exemplar draw of one test instance.
inline std::uint64_t prompt_seed(std::uint64_t seed, std::string_view instance_id) {
  return derive_seed(seed, "prompt:" + std::string(instance_id));
}

}  // namespace foodsem

#endif  // FOODSEM_PROMPT_HPP
