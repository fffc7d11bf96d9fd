// SPDX-License-Identifier: Apache-2.0
#include <set>
#include <string>
#include <vector>

#include "cookgen/baseline.hpp"
#include "cookgen/corpus.hpp"
#include "cookgen/eval.hpp"
#include "cookgen/model.hpp"
#include "cookgen/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cookgen;
using testsupport::fixture_path;

namespace {

// Independent scoring: plain loops over sorted ids, no shared code with the
// library's pooled counting.
struct BruteScore {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0;
};

BruteScore brute_force(const ActionSets& pred, const ActionSets& gold) {
  BruteScore s;
  for (const auto& [id, p] : pred) {
    const auto& g = gold.at(id);
    for (const auto& a : p) s.tp += g.count(a) ? 1 : 0;
    for (const auto& a : p) s.fp += g.count(a) ? 0 : 1;
    for (const auto& a : g) s.fn += p.count(a) ? 0 : 1;
  }
  s.precision = s.tp + s.fp == 0 ? (s.tp + s.fn == 0 ? 1.0 : 0.0)
                                 : double(s.tp) / double(s.tp + s.fp);
  s.recall = s.tp + s.fn == 0 ? (s.tp + s.fp == 0 ? 1.0 : 0.0)
                              : double(s.tp) / double(s.tp + s.fn);
  return s;
}

}  // namespace

TEST_SUITE("baseline_eval") {
  TEST_CASE("the rule baseline is exactly lexicon intersection") {
    std::set<std::string> lexicon = {"boil", "chop", "stir"};
    CHECK(rule_predict({"boil", "the", "water"}, lexicon) == std::set<std::string>{"boil"});
    CHECK(rule_predict({"chop", "then", "chop", "and", "stir"}, lexicon) ==
          std::set<std::string>{"chop", "stir"});
    CHECK(rule_predict({"the", "water"}, lexicon) == std::set<std::string>{});
    CHECK(rule_predict({}, lexicon) == std::set<std::string>{});
    CHECK(rule_predict({"boil"}, {}) == std::set<std::string>{});
  }

  TEST_CASE("baseline predictions grow with the lexicon and never leave it") {
    Rng rng(41);
    std::vector<std::string> universe;
    for (char c = 'a'; c <= 'z'; ++c) universe.push_back(std::string(1, c));
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::string> tokens;
      std::set<std::string> small, big;
      for (const auto& w : universe) {
        if (rng.next_below(3) == 0) tokens.push_back(w);
        if (rng.next_below(4) == 0) small.insert(w);
      }
      big = small;
      for (const auto& w : universe)
        if (rng.next_below(4) == 0) big.insert(w);

      auto from_small = rule_predict(tokens, small);
      auto from_big = rule_predict(tokens, big);
      for (const auto& a : from_small) {
        CHECK(small.count(a) == 1);
        CHECK(from_big.count(a) == 1);  // monotone in the lexicon
      }
      for (const auto& a : from_big) CHECK(big.count(a) == 1);
    }
  }

  TEST_CASE("a corpus-derived lexicon is the union of gold actions") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    auto lexicon = lexicon_from_records(records);
    std::set<std::string> expect;
    for (const auto& r : records) expect.insert(r.gold_actions.begin(), r.gold_actions.end());
    CHECK(lexicon == expect);
    CHECK(lexicon.count("boil") == 1);
  }

  TEST_CASE("worked example: precision one, recall one half") {
    EvalReport r = score_sets({{"r", {"boil"}}}, {{"r", {"boil", "drain"}}});
    CHECK(r.tp == 1);
    CHECK(r.fp == 0);
    CHECK(r.fn == 1);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 0.5);
  }

  TEST_CASE("worked example: pooled counts across three recipes") {
    ActionSets pred = {{"a", {"boil", "stir"}}, {"b", {"chop"}}, {"c", {"whisk", "fold"}}};
    ActionSets gold = {{"a", {"boil"}}, {"b", {"chop", "dice"}}, {"c", {"whisk"}}};
    // tp: boil, chop, whisk; fp: stir, fold; fn: dice.
    EvalReport r = score_sets(pred, gold);
    CHECK(r.tp == 3);
    CHECK(r.fp == 2);
    CHECK(r.fn == 1);
    CHECK(r.precision == 0.6);
    CHECK(r.recall == 0.75);
  }

  TEST_CASE("empty sides follow the stated conventions") {
    EvalReport both = score_sets({{"r", {}}}, {{"r", {}}});
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);

    EvalReport pred_only = score_sets({{"r", {"boil"}}}, {{"r", {}}});
    CHECK(pred_only.precision == 0.0);
    CHECK(pred_only.recall == 0.0);

    EvalReport gold_only = score_sets({{"r", {}}}, {{"r", {"boil"}}});
    CHECK(gold_only.precision == 0.0);
    CHECK(gold_only.recall == 0.0);
  }

  TEST_CASE("matching prediction and gold scores perfectly") {
    auto records = load_corpus(fixture_path("synthetic64.jsonl"));
    ActionSets gold;
    for (const auto& r : records) gold[r.id] = r.gold_actions;
    EvalReport r = score_sets(gold, gold, true);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(*r.macro_precision == 1.0);
    CHECK(*r.macro_recall == 1.0);
  }

  TEST_CASE("recipe id mismatches are reported, not scored") {
    CHECK_THROWS_WITH_AS(score_sets({{"only-predicted", {}}}, {{"only-gold", {}}}),
                         doctest::Contains("only-gold"), error);
    CHECK_THROWS_WITH_AS(score_sets({{"r1", {}}, {"surplus", {}}}, {{"r1", {}}}),
                         doctest::Contains("surplus"), error);
  }

  TEST_CASE("per-recipe rows come back sorted by id") {
    ActionSets pred = {{"z9", {}}, {"a1", {}}, {"m5", {}}};
    EvalReport r = score_sets(pred, pred);
    REQUIRE(r.per_recipe.size() == 3);
    CHECK(r.per_recipe[0].id == "a1");
    CHECK(r.per_recipe[1].id == "m5");
    CHECK(r.per_recipe[2].id == "z9");
  }

  TEST_CASE("pooled and averaged scoring agree with brute force on random sets") {
    Rng rng(2718);
    std::vector<std::string> universe;
    for (int w = 0; w < 12; ++w) universe.push_back("w" + std::to_string(w));
    for (int trial = 0; trial < 1000; ++trial) {
      ActionSets pred, gold;
      const int recipes = 1 + static_cast<int>(rng.next_below(6));
      for (int i = 0; i < recipes; ++i) {
        std::string id = "r" + std::to_string(i);
        for (const auto& w : universe) {
          if (rng.next_below(3) == 0) pred[id].insert(w);
          if (rng.next_below(3) == 0) gold[id].insert(w);
        }
        pred[id];  // ensure the id exists even when empty
        gold[id];
      }
      BruteScore want = brute_force(pred, gold);
      EvalReport got = score_sets(pred, gold, true);
      CHECK(got.tp == want.tp);
      CHECK(got.fp == want.fp);
      CHECK(got.fn == want.fn);
      CHECK(got.precision == want.precision);
      CHECK(got.recall == want.recall);

      // Macro: equal-weight mean of per-recipe ratios under the same
      // conventions.
      double mp = 0.0, mr = 0.0;
      for (const auto& [id, p] : pred) {
        BruteScore one = brute_force({{id, p}}, {{id, gold.at(id)}});
        mp += one.precision;
        mr += one.recall;
      }
      CHECK(*got.macro_precision == mp / recipes);
      CHECK(*got.macro_recall == mr / recipes);
    }
  }

  TEST_CASE("macro averages are absent unless requested") {
    EvalReport r = score_sets({{"r", {"x"}}}, {{"r", {"x"}}});
    CHECK_FALSE(r.macro_precision.has_value());
    CHECK_FALSE(r.macro_recall.has_value());
    CHECK_FALSE(r.resource.has_value());
  }

  TEST_CASE("metrics always land in the unit interval") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      ActionSets pred, gold;
      for (int i = 0; i < 3; ++i) {
        std::string id = std::to_string(i);
        if (rng.next_below(2)) pred[id].insert("a" + std::to_string(rng.next_below(4)));
        else pred[id];
        if (rng.next_below(2)) gold[id].insert("a" + std::to_string(rng.next_below(4)));
        else gold[id];
      }
      EvalReport r = score_sets(pred, gold, true);
      for (double m : {r.precision, r.recall, *r.macro_precision, *r.macro_recall}) {
        CHECK(m >= 0.0);
        CHECK(m <= 1.0);
      }
    }
  }

  TEST_CASE("the bundled ambiguity corpus scores as hand-counted") {
    auto records = load_corpus(fixture_path("ambiguity.jsonl"));
    auto lexicon = load_lexicon(fixture_path("ambiguity_lexicon.txt"));
    ActionSets pred, gold;
    for (const auto& r : records) {
      pred[r.id] = rule_predict(r.instruction_words, lexicon);
      gold[r.id] = r.gold_actions;
    }
    EvalReport got = score_sets(pred, gold);
    BruteScore want = brute_force(pred, gold);
    CHECK(got.tp == want.tp);
    CHECK(got.fp == want.fp);
    CHECK(got.fn == want.fn);
    CHECK(got.precision == want.precision);
    CHECK(got.recall == want.recall);
    // The noun collisions ("roast", "steam" as food words) cost precision;
    // the out-of-lexicon action ("strain") costs recall.
    CHECK(got.precision == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
    CHECK(got.recall == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }

  TEST_CASE("resource reporting scales with the materialized model") {
    HyperParams h;
    h.vocab_size = 100;
    h.embed_dim = 8;
    h.hidden1_dim = 8;
    h.hidden2_dim = 8;
    h.max_len = 16;
    h.variant = Variant::nn;
    ModelParams p = init_params(h, 1);
    ResourceReport r = resource_report(p);
    CHECK(r.param_count == param_count(h));
    CHECK(r.est_bytes_f32 == 4 * param_count(h));
  }
}
