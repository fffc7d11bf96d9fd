// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "cookgen/corpus.hpp"
#include "cookgen/model.hpp"
#include "cookgen/rng.hpp"
#include "cookgen/tape.hpp"
#include "cookgen/training.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cookgen;
using testsupport::fixture_path;

namespace {

RecipeRecord make_record(const std::string& id, const std::string& instructions,
                         const std::vector<std::string>& actions) {
  RecipeRecord r;
  r.id = id;
  r.instruction_words = tokenize(instructions);
  for (const auto& a : actions) r.gold_actions.insert(a);
  return r;
}

HyperParams small_hyper(Variant v, int vocab, int width = 16, int L = 12) {
  HyperParams h;
  h.vocab_size = vocab;
  h.embed_dim = width;
  h.hidden1_dim = width;
  h.hidden2_dim = width;
  h.max_len = L;
  h.poly_order = 3;
  h.variant = v;
  return h;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  auto pa = tensor_ptrs(a), pb = tensor_ptrs(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t k = 0; k < pa.size(); ++k)
    if (pa[k]->rows() != pb[k]->rows() || pa[k]->cols() != pb[k]->cols() ||
        !(pa[k]->array() == pb[k]->array()).all())
      return false;
  return true;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("weighted tag loss reproduces the hand-worked value") {
    // One word, predicted action probability p, label 1, default weights:
    // loss = 0.881 * (-ln p). Engineer p exactly via a zeroed model: every
    // hidden activation is zero, so the score is sigmoid(0) = 0.5.
    RecipeRecord r = make_record("a", "boil", {"boil"});
    Vocabulary vocab = build_vocab({r}, 1);
    ModelParams p = init_params(small_hyper(Variant::nn, vocab.size()), 1);
    for (Matd* t : tensor_ptrs(p)) t->setZero();
    Rng rng(1);
    EncodedExample ex = encode_example(r, vocab, 12, 1.0, rng);
    double got = wce_tag_loss(p, ex, 0.119, 0.881);
    CHECK(std::abs(got - 0.881 * -std::log(0.5)) < 1e-12);
  }

  TEST_CASE("the documented example value holds for probability 0.9") {
    // WCE at (p=0.9, y=1) with the default class weights.
    Tape tape;
    Var probs = tape.leaf(Matd::Constant(1, 1, 0.9));
    double loss = tape.value(weighted_binary_cross_entropy(probs, Matd::Constant(1, 1, 1.0),
                                                           0.119, 0.881))(0, 0);
    CHECK(std::abs(loss - 0.881 * -std::log(0.9)) < 1e-12);
    CHECK(loss == doctest::Approx(0.0928226).epsilon(1e-5));
  }

  TEST_CASE("extreme probabilities stay finite through the clamp") {
    Tape tape;
    Matd labels(2, 1);
    labels << 1, 0;
    Matd probs(2, 1);
    probs << 0.0, 1.0;  // worst case on both sides
    double loss = tape.value(
        weighted_binary_cross_entropy(tape.leaf(probs), labels, 0.119, 0.881))(0, 0);
    CHECK(std::isfinite(loss));
    CHECK(loss > 1.0);  // both terms are large, not silently zeroed
  }

  TEST_CASE("unit weights reduce the tag loss to plain cross-entropy") {
    RecipeRecord r = make_record("a", "chop the onions and saute them", {"chop", "saute"});
    Vocabulary vocab = build_vocab({r}, 1);
    ModelParams p = init_params(small_hyper(Variant::nn, vocab.size()), 3);
    Rng rng(1);
    EncodedExample ex = encode_example(r, vocab, 12, 1.0, rng);
    auto scores = tag_tokens(p, ex.word_ids);
    double naive = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      double y = ex.tag_labels[i];
      naive += -(y * std::log(scores[i]) + (1.0 - y) * std::log(1.0 - scores[i]));
    }
    naive /= static_cast<double>(scores.size());
    CHECK(std::abs(wce_tag_loss(p, ex, 1.0, 1.0) - naive) < 1e-12);
  }

  TEST_CASE("zero parameters price every next token at ln M") {
    RecipeRecord r = make_record("a", "boil the water", {"boil"});
    Vocabulary vocab = build_vocab({r}, 1);
    for (Variant v : {Variant::nn, Variant::pf}) {
      ModelParams p = init_params(small_hyper(v, vocab.size()), 1);
      for (Matd* t : tensor_ptrs(p)) t->setZero();
      Rng rng(1);
      EncodedExample ex = encode_example(r, vocab, 12, 1.0, rng);
      CHECK(std::abs(ce_next_token_loss(p, ex) - std::log(double(vocab.size()))) < 1e-12);
    }
  }

  TEST_CASE("a zero learning rate leaves parameters bitwise untouched") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    ModelParams init = init_params(small_hyper(Variant::nn, vocab.size()), 7);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.seed = 5;
    auto [trained, report] = train(init, records, vocab, cfg);
    CHECK(params_equal(trained, init));
    REQUIRE(report.epoch_loss.size() == 3);
    CHECK(report.epoch_loss[0] == report.epoch_loss[1]);
    CHECK(report.epoch_loss[1] == report.epoch_loss[2]);
  }

  TEST_CASE("zero epochs is a no-op with a completed report") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    ModelParams init = init_params(small_hyper(Variant::pf, vocab.size()), 2);
    auto [trained, report] = train(init, records, vocab, TrainConfig{});
    CHECK(params_equal(trained, init));
    CHECK(report.epoch_loss.empty());
    CHECK(report.best_epoch == 0);
    CHECK(report.stopping_reason == "completed");
  }

  TEST_CASE("training is bitwise deterministic, thread count included") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.learning_rate = 0.005;
    cfg.seed = 11;
    cfg.partial_fraction = 0.8;  // exercise the augmentation streams too
    auto run = [&](int threads) {
      TrainConfig c = cfg;
      c.threads = threads;
      return train(init_params(small_hyper(Variant::nn, vocab.size()), 11), records, vocab, c);
    };
    auto [p1, r1] = run(1);
    auto [p2, r2] = run(1);
    auto [p3, r3] = run(3);
    CHECK(params_equal(p1, p2));
    CHECK(params_equal(p1, p3));
    CHECK(r1.epoch_loss == r2.epoch_loss);
    CHECK(r1.epoch_loss == r3.epoch_loss);
    CHECK(r1.best_epoch == r2.best_epoch);
  }

  TEST_CASE("an inactive gradient clip does not alter the trajectory") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    auto run = [&](double clip) {
      TrainConfig c;
      c.epochs = 3;
      c.learning_rate = 0.01;
      c.seed = 3;
      c.grad_clip_norm = clip;
      return train(init_params(small_hyper(Variant::nn, vocab.size()), 3), records, vocab, c);
    };
    auto [loose1, rl1] = run(1e6);
    auto [loose2, rl2] = run(1e7);  // both far above any real gradient norm
    auto [tight, rt] = run(1e-3);
    CHECK(params_equal(loose1, loose2));
    CHECK(rl1.epoch_loss == rl2.epoch_loss);
    CHECK_FALSE(params_equal(loose1, tight));
  }

  TEST_CASE("loss decreases over the first epochs on the bundled corpus") {
    auto records = load_corpus(fixture_path("synthetic64.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.002;
    cfg.seed = 1;
    auto [params, report] =
        train(init_params(small_hyper(Variant::nn, vocab.size(), 32, 16), 1), records, vocab,
              cfg);
    REQUIRE(report.epoch_loss.size() == 5);
    for (std::size_t e = 1; e < report.epoch_loss.size(); ++e)
      CHECK(report.epoch_loss[e] < report.epoch_loss[e - 1]);
    CHECK(report.best_epoch == 5);
    CHECK(report.holdout_loss.empty());
  }

  TEST_CASE("a single recipe can be memorized to near-zero loss") {
    RecipeRecord r = make_record("a", "marinate the chicken", {"marinate"});
    Vocabulary vocab = build_vocab({r}, 1);
    Rng rng(1);
    for (Variant v : {Variant::nn, Variant::pf}) {
      CAPTURE(variant_name(v));
      TrainConfig cfg;
      cfg.epochs = 400;
      cfg.learning_rate = 0.01;
      cfg.batch_size = 1;
      cfg.seed = 2;
      auto [params, report] =
          train(init_params(small_hyper(v, vocab.size()), 2), {r}, vocab, cfg);
      CHECK(report.epoch_loss.back() < 0.01);
      EncodedExample ex = encode_example(r, vocab, 12, 1.0, rng);
      CHECK(ce_next_token_loss(params, ex) < 0.01);
    }
  }

  TEST_CASE("divergence is reported with its epoch and batch") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    // Exploded starting point: the first forward pass overflows.
    ModelParams p = init_params(small_hyper(Variant::pf, vocab.size()), 1);
    for (Matd* t : tensor_ptrs(p)) *t *= 1e8;
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_WITH_AS(train(std::move(p), records, vocab, cfg),
                         doctest::Contains("epoch 1, batch 1"), error);
  }

  TEST_CASE("early stopping returns the best-epoch parameters") {
    auto records = load_corpus(fixture_path("synthetic64.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.learning_rate = 0.05;  // deliberately hot so the holdout loss churns
    cfg.seed = 4;
    cfg.early_stop_patience = 1;
    auto [params, report] =
        train(init_params(small_hyper(Variant::nn, vocab.size(), 16, 16), 4), records, vocab,
              cfg);
    CHECK(report.stopping_reason == "early_stop");
    const std::size_t ran = report.holdout_loss.size();
    CHECK(ran < 40);
    CHECK(report.epoch_loss.size() == ran);
    REQUIRE(report.best_epoch >= 1);
    REQUIRE(static_cast<std::size_t>(report.best_epoch) <= ran);
    // The reported best epoch is the holdout minimum.
    double best = report.holdout_loss[static_cast<std::size_t>(report.best_epoch) - 1];
    for (double h : report.holdout_loss) CHECK(best <= h);
  }

  TEST_CASE("tagging rejects the polynomial variant") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.objective = Objective::tagging;
    CHECK_THROWS_AS(
        train(init_params(small_hyper(Variant::pf, vocab.size()), 1), records, vocab, cfg),
        error);
  }

  TEST_CASE("the tagging objective trains the scoring head") {
    RecipeRecord r = make_record("a", "boil the water then drain it", {"boil", "drain"});
    Vocabulary vocab = build_vocab({r}, 1);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 1;
    cfg.objective = Objective::tagging;
    auto [params, report] =
        train(init_params(small_hyper(Variant::nn, vocab.size()), 6), {r}, vocab, cfg);
    CHECK(report.epoch_loss.back() < report.epoch_loss.front());
    auto scores = tag_tokens(params, [&] {
      std::vector<int> ids;
      for (const auto& w : r.instruction_words) ids.push_back(vocab.id(w));
      return ids;
    }());
    auto labels = make_tag_labels(r, vocab);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == 1)
        CHECK(scores[i] > 0.5);
      else
        CHECK(scores[i] < 0.5);
    }
  }

  TEST_CASE("config validation rejects nonsense") {
    auto records = load_corpus(fixture_path("tiny.jsonl"));
    Vocabulary vocab = build_vocab(records, 1);
    ModelParams p = init_params(small_hyper(Variant::nn, vocab.size()), 1);
    auto with = [&](auto mutate) {
      TrainConfig c;
      c.epochs = 1;
      mutate(c);
      return train(p, records, vocab, c);
    };
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.learning_rate = -1.0; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.batch_size = 0; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.epochs = -1; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.partial_fraction = 0.0; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.partial_fraction = 1.5; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.grad_clip_norm = 0.0; }), error);
    CHECK_THROWS_AS(with([](TrainConfig& c) { c.threads = 0; }), error);
  }

  TEST_CASE("the end-to-end gradient check is wired up") {
    for (Variant v : {Variant::nn, Variant::pf}) {
      GradCheckResult r = model_grad_check(v, 1);
      CAPTURE(r.analytic);
      CAPTURE(r.numeric);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}
