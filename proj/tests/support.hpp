#ifndef FOODSEM_TEST_SUPPORT_HPP
#define FOODSEM_TEST_SUPPORT_HPP

// Fixtures, random generators and independent oracles shared by the unit
// tests and the acceptance runner.

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "foodsem/bioc.hpp"
#include "foodsem/ir.hpp"
#include "foodsem/nel_eval.hpp"
#include "foodsem/pipeline.hpp"

#ifndef FOODSEM_FIXTURE_DIR
#define FOODSEM_FIXTURE_DIR "tests/fixtures"
#endif

namespace testing_support {

using namespace foodsem;
namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(FOODSEM_FIXTURE_DIR) / name; }
inline fs::path data_path(const std::string& rel) { return fs::path(FOODSEM_DATA_DIR) / rel; }

inline const PhrasePools& default_pools() {
  static const PhrasePools pools = load_phrase_pools(data_path("pools/default_pools.jsonl").string());
  return pools;
}

inline std::vector<AnnotatedDocument> listing_documents() {
  std::vector<AnnotatedDocument> docs;
  for (auto [file, onto] : {std::pair{"listing_foodon.xml", Ontology::FoodOn},
                            std::pair{"listing_hansard.xml", Ontology::Hansard},
                            std::pair{"listing_snomedct.xml", Ontology::SnomedCt}})
    for (auto& d : parse_bioc_collection(read_file(fixture(file)), SourceKind::Recipe, onto)) docs.push_back(d);
  return docs;
}

inline DocumentBundle listing_bundle() { return group_ontology_variants(listing_documents()).at(0); }

// A scratch directory removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("foodsem-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// ---------------------------------------------------------------------------
// Random generators

inline std::string random_word(std::mt19937_64& g) {
  static const std::vector<std::string> syllables = {"ba", "ke", "lo", "mi", "nu", "ra", "so", "ti",
                                                     "ve", "za", "chee", "pep", "oli", "tom", "gar"};
  std::uniform_int_distribution<int> n(1, 3);
  std::uniform_int_distribution<std::size_t> pick(0, syllables.size() - 1);
  std::string w;
  for (int i = n(g); i > 0; --i) w += syllables[pick(g)];
  return w;
}

inline std::string random_mention(std::mt19937_64& g) {
  std::uniform_int_distribution<int> words(1, 3);
  std::string m;
  for (int i = words(g); i > 0; --i) m += (m.empty() ? "" : " ") + random_word(g);
  return m;
}

inline std::string random_digits(std::mt19937_64& g, int len) {
  std::uniform_int_distribution<int> d(0, 9);
  std::string s;
  for (int i = 0; i < len; ++i) s += static_cast<char>('0' + d(g));
  return s;
}

inline EntityRef random_ref(std::mt19937_64& g, Ontology o) {
  std::uniform_int_distribution<int> coin(0, 1);
  switch (o) {
    case Ontology::FoodOn:
      if (coin(g)) return {Ontology::FoodOn, std::string(ns::kFoodOn), random_digits(g, 8), std::nullopt};
      return {Ontology::FoodOn, std::string(ns::kNcbiTaxon), std::to_string(1 + g() % 99999), std::nullopt};
    case Ontology::SnomedCt:
      return {Ontology::SnomedCt, std::string(ns::kSnomed), std::to_string(100000 + g() % 900000000000ULL),
              std::nullopt};
    case Ontology::Hansard: {
      std::string code = "AG.0" + std::to_string(1 + g() % 9);
      for (int i = static_cast<int>(g() % 3); i >= 0; --i) {
        if (coin(g)) code += "." + std::string(1, static_cast<char>('a' + g() % 14));
        else code += ".0" + std::to_string(1 + g() % 9);
      }
      std::string label = random_word(g);
      label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
      if (coin(g)) label += "/" + random_word(g);
      return {Ontology::Hansard, std::string(ns::kHansard), code, label};
    }
  }
  return {};
}

// A Nel pair with a gold map and a response rendered from it.
inline IRPair random_nel_pair(std::mt19937_64& g, Ontology o, UriMode mode, const std::string& id) {
  IRPair p;
  p.pair_id = id;
  p.task = Task::Nel;
  p.ontology = o;
  p.source = PairSource::Artificial;
  std::uniform_int_distribution<int> mentions(1, 9), refs(1, 4);
  std::vector<std::pair<std::string, RefSet>> entries;
  std::set<std::string> used;
  for (int i = mentions(g); i > 0; --i) {
    std::string m = random_mention(g);
    if (!used.insert(normalize_mention(m)).second) continue;
    RefSet rs;
    for (int j = refs(g); j > 0; --j) rs.insert(random_ref(g, o));
    entries.emplace_back(m, rs);
  }
  const auto& openers = default_pools().get({PoolKind::NelOpener, {}});
  p.response = render_nel_response(openers[g() % openers.size()], entries, mode);
  std::vector<std::string> names;
  for (const auto& [m, rs] : entries) {
    p.nel_gold.insert(normalize_mention(m), rs);
    names.push_back(m);
  }
  const auto& phrases = default_pools().get({PoolKind::NelInstruction, o});
  p.instruction = fill_mention_template(phrases[g() % phrases.size()], names);
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force scoring oracle: materializes every (instance, mention, entity)
// triple and counts directly from the definitions.

struct OracleScore {
  std::map<EntityRef, std::tuple<double, double, double, std::size_t>> per_entity;  // p, r, f1, gold_count
  double p = 0, r = 0, f1 = 0;
};

inline OracleScore oracle_score(const std::vector<GoldInstance>& gold, const std::vector<PredictionMap>& preds) {
  struct Triple {
    std::string instance, mention;
    EntityRef entity;
  };
  std::vector<Triple> gold_triples, pred_triples;
  std::map<std::string, const PredictionMap*> pred_of;
  for (const auto& p : preds) pred_of[p.instance_id] = &p;
  for (const auto& gi : gold) {
    for (const auto& [m, refs] : gi.links)
      for (const auto& e : refs) gold_triples.push_back({gi.instance_id, m, e});
    auto it = pred_of.find(gi.instance_id);
    if (it == pred_of.end() || !it->second->meaningful) continue;
    for (const auto& [m, refs] : it->second->entries) {
      if (!gi.links.find(m)) continue;  // only gold mentions count
      for (const auto& e : refs) pred_triples.push_back({gi.instance_id, m, e});
    }
  }
  auto in = [](const std::vector<Triple>& v, const Triple& t) {
    for (const auto& x : v)
      if (x.instance == t.instance && x.mention == t.mention && x.entity == t.entity) return true;
    return false;
  };
  std::set<EntityRef> entities;
  for (const auto& t : gold_triples) entities.insert(t.entity);
  OracleScore out;
  double total = 0;
  for (const auto& e : entities) {
    double gc = 0, tp = 0, fp = 0;
    for (const auto& t : gold_triples)
      if (t.entity == e) {
        gc += 1;
        if (in(pred_triples, t)) tp += 1;
      }
    for (const auto& t : pred_triples)
      if (t.entity == e && !in(gold_triples, t)) fp += 1;
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp / gc;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    out.per_entity[e] = {p, r, f, static_cast<std::size_t>(gc)};
    total += gc;
  }
  for (const auto& [e, v] : out.per_entity) {
    const double w = static_cast<double>(std::get<3>(v)) / total;
    out.p += w * std::get<0>(v);
    out.r += w * std::get<1>(v);
    out.f1 += w * std::get<2>(v);
  }
  return out;
}

// Random scoring fixture: up to 10 instances over up to 8 entities, with
// predictions that keep, drop, swap and add references and mentions.
struct ScoreFixture {
  std::vector<GoldInstance> gold;
  std::vector<PredictionMap> preds;
};

inline ScoreFixture random_score_fixture(std::mt19937_64& g) {
  std::uniform_int_distribution<int> n_inst(1, 10), n_ent(1, 8), n_ment(1, 4), n_ref(1, 3);
  std::uniform_real_distribution<double> u(0, 1);
  const Ontology o = kOntologyOrder[g() % 3];
  std::vector<EntityRef> universe;
  const int ents = n_ent(g);
  while (static_cast<int>(universe.size()) < ents) {
    EntityRef e = random_ref(g, o);
    if (std::find(universe.begin(), universe.end(), e) == universe.end()) universe.push_back(e);
  }
  auto any_entity = [&] { return universe[g() % universe.size()]; };
  ScoreFixture f;
  const int insts = n_inst(g);
  for (int i = 0; i < insts; ++i) {
    GoldInstance gi;
    gi.instance_id = "i" + std::to_string(i);
    for (int m = n_ment(g); m > 0; --m) {
      RefSet rs;
      for (int k = n_ref(g); k > 0; --k) rs.insert(any_entity());
      gi.links.insert("m" + std::to_string(g() % 6), rs);
    }
    PredictionMap pm;
    pm.instance_id = gi.instance_id;
    pm.ontology = o;
    const double mode = u(g);
    if (mode < 0.1) {
      pm.meaningful = false;
    } else {
      for (const auto& [m, rs] : gi.links) {
        if (u(g) < 0.15) continue;
        RefSet out;
        for (const auto& e : rs)
          if (u(g) > 0.25) out.insert(e);
        if (u(g) < 0.4) out.insert(any_entity());
        if (!out.empty()) pm.entries.insert(m, out);
      }
      if (u(g) < 0.3) pm.entries.insert("spurious" + std::to_string(i), RefSet{any_entity()});
      pm.meaningful = !pm.entries.empty();
    }
    f.gold.push_back(std::move(gi));
    if (u(g) > 0.05) f.preds.push_back(std::move(pm));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Partition oracle: all size sequences the remainder rule can produce.

inline void enumerate_partitions(std::size_t remaining, const std::vector<std::size_t>& sizes,
                                 std::vector<std::size_t>& current, std::vector<std::vector<std::size_t>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  const std::size_t smallest = *std::min_element(sizes.begin(), sizes.end());
  if (remaining < smallest) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (std::size_t s : sizes)
    if (s <= remaining) {
      current.push_back(s);
      enumerate_partitions(remaining - s, sizes, current, out);
      current.pop_back();
    }
}

}  // namespace testing_support

#endif  // FOODSEM_TEST_SUPPORT_HPP
