#include <gtest/gtest.h>

#include <random>

#include "foodsem/nel_eval.hpp"
#include "support.hpp"

using namespace foodsem;

namespace {

EntityRef food(const std::string& id) { return {Ontology::FoodOn, "FOODON", id, {}}; }
EntityRef taxon(const std::string& id) { return {Ontology::FoodOn, "NCBITaxon", id, {}}; }

const char* kListingFoodOnResponse =
    "Definitely, the entities are linked suitably:\n"
    "cream cheese - FOODON-03301889; FOODON-00001013,\n"
    "onion - FOODON-03301704;\n"
    "NCBITaxon-4679,\n"
    "worcestershire sauce - FOODON-03305003;\n"
    "FOODON-03311146,\n"
    "walnuts - NCBITaxon-16718,\n"
    "cheese - FOODON-00001013.";

const char* kOneShotAnswer =
    "Absolutely, the entities are related properly: cheddar cheese - "
    "http://purl.obolibrary.org/obo/FOODON_03302458; http://purl.obolibrary.org/obo/FOODON_00001013, cookie dough - "
    "http://purl.obolibrary.org/obo/FOODON_03310689; http://purl.obolibrary.org/obo/FOODON_00002466; "
    "http://purl.obolibrary.org/obo/FOODON_03301585; http://purl.obolibrary.org/obo/FOODON_03311552, flax - "
    "http://purl.obolibrary.org/obo/NCBITaxon_4006.";

GoldInstance gold_of(const std::string& id, std::vector<std::pair<std::string, RefSet>> links) {
  GoldInstance g;
  g.instance_id = id;
  for (auto& [m, r] : links) g.links.insert(m, r);
  return g;
}

PredictionMap pred_of(const std::string& id, std::vector<std::pair<std::string, RefSet>> links) {
  PredictionMap p;
  p.instance_id = id;
  for (auto& [m, r] : links) p.entries.insert(m, r);
  p.meaningful = !p.entries.empty();
  return p;
}

}  // namespace

TEST(ParseResponse, ListingFoodOnResponse) {
  const PredictionMap m = parse_response(kListingFoodOnResponse, Ontology::FoodOn);
  EXPECT_TRUE(m.meaningful);
  MentionLinks want;
  want.insert("cream cheese", {food("03301889"), food("00001013")});
  want.insert("onion", {food("03301704"), taxon("4679")});
  want.insert("worcestershire sauce", {food("03305003"), food("03311146")});
  want.insert("walnuts", {taxon("16718")});
  want.insert("cheese", {food("00001013")});
  EXPECT_EQ(m.entries, want);
}

TEST(ParseResponse, Empty) {
  const PredictionMap m = parse_response("", Ontology::FoodOn);
  EXPECT_FALSE(m.meaningful);
  EXPECT_TRUE(m.entries.empty());
}

TEST(ParseResponse, OneShotFullUris) {
  const PredictionMap m = parse_response(kOneShotAnswer, Ontology::FoodOn);
  ASSERT_NE(m.entries.find("cheddar cheese"), nullptr);
  EXPECT_EQ(*m.entries.find("cheddar cheese"), (RefSet{food("03302458"), food("00001013")}));
  ASSERT_NE(m.entries.find("flax"), nullptr);
  EXPECT_EQ(*m.entries.find("flax"), RefSet{taxon("4006")});
  EXPECT_EQ(m.entries.find("cookie dough")->size(), 4u);
}

TEST(ParseResponse, ProseWithoutRefs) {
  const PredictionMap m =
      parse_response("I am sorry, I cannot link these entities - they are not in my knowledge.", Ontology::FoodOn);
  EXPECT_FALSE(m.meaningful);
  EXPECT_TRUE(m.entries.empty());
}

TEST(ParseResponse, TolerantFallbacks) {
  const char* messy =
      "  - Cream  Cheese - FOODON_03301889 ;FOODON-00001013\n"
      "* onion - http://purl.obolibrary.org/obo/FOODON_03301704.\n"
      "2. beef - SNOMEDCT-226916002\n";
  const PredictionMap m = parse_response(messy, Ontology::FoodOn);
  EXPECT_TRUE(m.meaningful);
  EXPECT_EQ(*m.entries.find("cream cheese"), (RefSet{food("03301889"), food("00001013")}));
  EXPECT_EQ(*m.entries.find("onion"), RefSet{food("03301704")});
  // Out-of-ontology references are discarded.
  EXPECT_EQ(m.entries.find("beef"), nullptr);
}

TEST(ParseResponse, WrongOntologyIsNotMeaningful) {
  EXPECT_FALSE(parse_response("Sure: beef - SNOMEDCT-226916002.", Ontology::FoodOn).meaningful);
  EXPECT_TRUE(parse_response("Sure: beef - SNOMEDCT-226916002.", Ontology::SnomedCt).meaningful);
}

TEST(ParseResponse, HansardLabelsWithCommasInside) {
  const PredictionMap m = parse_response(
      "Certainly, the entities are associated properly: onion - AG.01.h.02.e [Onion/leek/garlic], "
      "cheese ball - AG.01.e.02 [Cheese]; AG.01.n.18 [Preserve].",
      Ontology::Hansard);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries.find("cheese ball")->size(), 2u);
}

TEST(ParseNerResponse, ListAndOpener) {
  EXPECT_EQ(parse_ner_response("Certainly, the entities connected with food are outlined as follows:\n"
                               "cream cheese, beef, olives, onion, Worcestershire sauce, walnuts, cheese ball."),
            (std::vector<std::string>{"cream cheese", "beef", "olives", "onion", "Worcestershire sauce", "walnuts",
                                      "cheese ball"}));
  EXPECT_TRUE(parse_ner_response("").empty());
}

TEST(ChainNerToNel, TwoMentions) {
  const ChainedInstruction c =
      chain_ner_to_nel({"green tea", "oil"}, "Could you provide links to the FoodOn ontology for these entities: {mentions}?");
  EXPECT_EQ(c.text, "Could you provide links to the FoodOn ontology for these entities: green tea, oil?");
  EXPECT_FALSE(c.empty_mentions);
}

TEST(ChainNerToNel, EmptyFlagged) {
  const ChainedInstruction c = chain_ner_to_nel({}, "Link to FoodOn: {mentions}");
  EXPECT_TRUE(c.empty_mentions);
}

TEST(ChainNerToNel, ListingSevenMentions) {
  const IRSequence seq =
      build_ir_sequence(testing_support::listing_bundle(), testing_support::default_pools(), UriMode::Short, 1);
  const ChainedInstruction c = chain_ner_to_nel(seq.pairs[0].ner_gold, "Link to FoodOn: {mentions}.");
  EXPECT_EQ(c.text,
            "Link to FoodOn: cream cheese, beef, olives, onion, Worcestershire sauce, walnuts, cheese ball.");
}

TEST(ScoreNel, Perfect) {
  const std::vector<GoldInstance> gold{gold_of("a", {{"x", {food("1"), food("2")}}, {"y", {food("3")}}})};
  const EvalReport r = score_nel(gold, {pred_of("a", {{"x", {food("2"), food("1")}}, {"y", {food("3")}}})});
  EXPECT_DOUBLE_EQ(r.macro_weighted.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_weighted.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_weighted.f1, 1.0);
}

TEST(ScoreNel, AllEmpty) {
  const std::vector<GoldInstance> gold{gold_of("a", {{"x", {food("1")}}}), gold_of("b", {{"y", {food("2")}}})};
  PredictionMap empty_a, empty_b;
  empty_a.instance_id = "a";
  empty_b.instance_id = "b";
  const EvalReport r = score_nel(gold, {empty_a, empty_b});
  EXPECT_EQ(r.macro_weighted.precision, 0.0);
  EXPECT_EQ(r.macro_weighted.recall, 0.0);
  EXPECT_EQ(r.macro_weighted.f1, 0.0);
  EXPECT_EQ(r.non_meaningful, 2u);
}

TEST(ScoreNel, TwoEntityFixture) {
  // e1 gold 3 times: predicted correctly twice plus once on a mention lacking it.
  const EntityRef e1 = food("1"), e2 = food("2");
  const std::vector<GoldInstance> gold2{gold_of("a", {{"m1", {e1}}, {"m2", {e1}}, {"m3", {e1}}}),
                                        gold_of("b", {{"m4", {e2}}})};
  const std::vector<PredictionMap> preds{pred_of("a", {{"m1", {e1}}, {"m2", {e1}}}),
                                         pred_of("b", {{"m4", {e1}}})};
  const EvalReport r = score_nel(gold2, preds);
  const EntityScore& s1 = r.per_entity.at(e1);
  const EntityScore& s2 = r.per_entity.at(e2);
  EXPECT_EQ(s1.gold_count, 3u);
  EXPECT_EQ(s1.tp, 2u);
  EXPECT_EQ(s1.fp, 1u);
  EXPECT_EQ(s1.fn, 1u);
  EXPECT_DOUBLE_EQ(s1.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s1.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s1.f1, 2.0 / 3.0);
  EXPECT_EQ(s2.tp + s2.fp, 0u);
  EXPECT_EQ(s2.f1, 0.0);
  EXPECT_NEAR(r.macro_weighted.f1, 0.5, 1e-15);
  const auto o = testing_support::oracle_score(gold2, preds);
  EXPECT_NEAR(o.f1, r.macro_weighted.f1, 1e-12);
}

TEST(ScoreNel, SpuriousMentionsIgnored) {
  const std::vector<GoldInstance> gold{gold_of("a", {{"x", {food("1")}}})};
  const EvalReport base = score_nel(gold, {pred_of("a", {{"x", {food("1")}}})});
  const EvalReport extra = score_nel(gold, {pred_of("a", {{"x", {food("1")}}, {"zzz", {food("7")}}})});
  EXPECT_EQ(to_json(base).dump(), to_json(extra).dump());
}

TEST(ScoreNel, AlignmentErrors) {
  const std::vector<GoldInstance> gold{gold_of("a", {{"x", {food("1")}}})};
  for (const auto& preds : {std::vector<PredictionMap>{pred_of("zz", {{"x", {food("1")}}})},
                            std::vector<PredictionMap>{pred_of("a", {}), pred_of("a", {})}}) {
    try {
      score_nel(gold, preds);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::AlignmentError);
    }
  }
}

TEST(ScoreNel, MetricsBoundedAndWeightsSumToOne) {
  std::mt19937_64 g(3);
  for (int i = 0; i < 200; ++i) {
    const auto f = testing_support::random_score_fixture(g);
    const EvalReport r = score_nel(f.gold, f.preds);
    double total = 0, weights = 0;
    for (const auto& [e, s] : r.per_entity) total += static_cast<double>(s.gold_count);
    for (const auto& [e, s] : r.per_entity) {
      weights += static_cast<double>(s.gold_count) / total;
      for (double v : {s.precision, s.recall, s.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      const double f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
      EXPECT_NEAR(s.f1, f1, 1e-15);
    }
    EXPECT_NEAR(weights, 1.0, 1e-12);
  }
}

TEST(ScoreNel, MatchesOracle) {
  std::mt19937_64 g(17);
  for (int i = 0; i < 200; ++i) {
    const auto f = testing_support::random_score_fixture(g);
    const EvalReport r = score_nel(f.gold, f.preds);
    const auto o = testing_support::oracle_score(f.gold, f.preds);
    ASSERT_EQ(r.per_entity.size(), o.per_entity.size());
    for (const auto& [e, s] : r.per_entity) {
      const auto& [p, rc, f1, gc] = o.per_entity.at(e);
      EXPECT_NEAR(s.precision, p, 1e-12);
      EXPECT_NEAR(s.recall, rc, 1e-12);
      EXPECT_NEAR(s.f1, f1, 1e-12);
      EXPECT_EQ(s.gold_count, gc);
    }
    EXPECT_NEAR(r.macro_weighted.precision, o.p, 1e-12);
    EXPECT_NEAR(r.macro_weighted.recall, o.r, 1e-12);
    EXPECT_NEAR(r.macro_weighted.f1, o.f1, 1e-12);
  }
}

TEST(ScoreNel, Monotonicity) {
  std::mt19937_64 g(23);
  for (int i = 0; i < 150; ++i) {
    const auto f = testing_support::random_score_fixture(g);
    const EvalReport base = score_nel(f.gold, f.preds);
    // Remove one correct prediction.
    auto fewer = f.preds;
    bool removed = false;
    for (auto& p : fewer) {
      for (const auto& gi : f.gold)
        if (gi.instance_id == p.instance_id)
          for (const auto& [m, refs] : gi.links)
            if (RefSet* pr = p.entries.find(m); !removed && pr)
              for (const auto& e : refs)
                if (!removed && pr->contains(e)) {
                  RefSet kept;
                  for (const auto& x : *pr)
                    if (!(x == e)) kept.insert(x);
                  *pr = kept;
                  removed = true;
                }
    }
    if (removed) {
      const EvalReport r = score_nel(f.gold, fewer);
      EXPECT_LE(r.macro_weighted.precision, base.macro_weighted.precision + 1e-12);
      EXPECT_LE(r.macro_weighted.recall, base.macro_weighted.recall + 1e-12);
      EXPECT_LE(r.macro_weighted.f1, base.macro_weighted.f1 + 1e-12);
    }
    // Add a spurious entity on a gold mention.
    auto more = f.preds;
    if (!more.empty() && !f.gold.empty()) {
      const GoldInstance* gi = nullptr;
      for (const auto& x : f.gold)
        if (x.instance_id == more[0].instance_id) gi = &x;
      if (gi && !gi->links.empty()) {
        const auto& [m, refs] = *gi->links.begin();
        const EntityRef junk{refs[0].ontology, refs[0].ns, "999999999999", {}};
        RefSet add{junk};
        more[0].entries.insert(m, add);
        more[0].meaningful = true;
        const EvalReport r = score_nel(f.gold, more);
        EXPECT_LE(r.macro_weighted.precision, base.macro_weighted.precision + 1e-12);
      }
    }
  }
}

TEST(ScoreNer, Cases) {
  const auto same = score_ner({"a", "b"}, {"B", " a "});
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.f1, 1.0);
  const auto missing = score_ner({"a", "b", "c", "d"}, {"a", "b", "c"});
  EXPECT_EQ(missing.precision, 1.0);
  EXPECT_EQ(missing.recall, 0.75);
  EXPECT_NEAR(missing.f1, 6.0 / 7.0, 1e-15);
  const auto none = score_ner({"a"}, {});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

TEST(EvalReportJson, Layout) {
  const std::vector<GoldInstance> gold{gold_of("a", {{"x", {food("1")}}})};
  const auto j = to_json(score_nel(gold, {pred_of("a", {{"x", {food("1")}}})}));
  EXPECT_TRUE(j.contains("per_entity"));
  EXPECT_TRUE(j.contains("macro_weighted"));
  EXPECT_EQ(j["counts"]["instances"], 1);
  EXPECT_EQ(summary_row("0", "artificial_foodon", {1.0, 0.5, 2.0 / 3.0}), "0\tartificial_foodon\t1.000\t0.500\t0.667");
}
