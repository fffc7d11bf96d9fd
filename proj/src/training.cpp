// SPDX-License-Identifier: Apache-2.0
#include "cookgen/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace cookgen {

namespace {

// Independent deterministic stream for a (purpose, epoch, item) triple.
Rng substream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a, std::uint64_t b = 0) {
  Rng r1(seed ^ (purpose * 0x9E3779B97F4A7C15ULL));
  Rng r2(r1.next_u64() ^ (a * 0xBF58476D1CE4E5B9ULL));
  return Rng(r2.next_u64() ^ (b * 0x94D049BB133111EBULL));
}

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;

int last_non_pad(const std::vector<int>& sequence) {
  for (int i = static_cast<int>(sequence.size()); i-- > 0;)
    if (sequence[static_cast<std::size_t>(i)] != Vocabulary::kPad) return i;
  return -1;
}

void validate_config(const TrainConfig& c) {
  if (c.learning_rate < 0.0) throw error("train: learning_rate must be >= 0");
  if (c.epochs < 0) throw error("train: epochs must be >= 0");
  if (c.batch_size < 1) throw error("train: batch_size must be >= 1");
  if (!(c.grad_clip_norm > 0.0)) throw error("train: grad_clip_norm must be positive");
  if (c.early_stop_patience < 0) throw error("train: early_stop_patience must be >= 0");
  if (c.wce_weight0 < 0.0 || c.wce_weight1 < 0.0) throw error("train: WCE weights must be >= 0");
  if (!(c.partial_fraction > 0.0 && c.partial_fraction <= 1.0))
    throw error("train: partial_fraction must be in (0, 1]");
  if (c.threads < 1) throw error("train: threads must be >= 1");
}

// Inputs of one training example for either objective.
struct Item {
  std::vector<int> sequence;  // generation
  std::vector<int> word_ids;  // tagging
  std::vector<int> labels;
};

Var item_loss(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
              const TrainConfig& cfg, const Item& item) {
  if (cfg.objective == Objective::generation)
    return taped_generation_loss(tape, vars, hyper, item.sequence);
  return taped_tag_loss(tape, vars, hyper, item.word_ids, item.labels, cfg.wce_weight0,
                        cfg.wce_weight1);
}

double item_loss_value(const ModelParams& params, const TrainConfig& cfg, const Item& item) {
  Tape tape;
  ParamVars vars = register_params(tape, params);
  return tape.value(item_loss(tape, vars, params.hyper, cfg, item))(0, 0);
}

Item make_item(const RecipeRecord& record, const Vocabulary& vocab, const HyperParams& hyper,
               const TrainConfig& cfg, int epoch, std::size_t index) {
  Item item;
  if (cfg.objective == Objective::generation) {
    if (cfg.partial_fraction < 1.0) {
      Rng rng = substream(cfg.seed, kAugmentStream, static_cast<std::uint64_t>(epoch), index);
      item.sequence = build_sequence(sample_partial(record, vocab, cfg.partial_fraction, rng),
                                     record.gold_actions, vocab, hyper.max_len);
    } else {
      std::vector<int> ids;
      ids.reserve(record.instruction_words.size());
      for (const std::string& w : record.instruction_words) ids.push_back(vocab.id(w));
      item.sequence = build_sequence(ids, record.gold_actions, vocab, hyper.max_len);
    }
  } else {
    for (const std::string& w : record.instruction_words) item.word_ids.push_back(vocab.id(w));
    item.labels = make_tag_labels(record, vocab);
    if (static_cast<int>(item.word_ids.size()) > hyper.max_len) {
      item.word_ids.resize(static_cast<std::size_t>(hyper.max_len));
      item.labels.resize(static_cast<std::size_t>(hyper.max_len));
    }
  }
  return item;
}

}  // namespace

Var taped_generation_loss(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                          const std::vector<int>& sequence) {
  const int last = last_non_pad(sequence);
  if (last < 1)
    throw error("taped_generation_loss: need at least 2 non-PAD tokens, got " +
                std::to_string(last + 1));
  Var logits = taped_prefix_logits(tape, vars, hyper, sequence, last);
  std::vector<int> targets(sequence.begin() + 1, sequence.begin() + last + 1);
  return softmax_cross_entropy_rows(logits, targets);
}

Var taped_tag_loss(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                   const std::vector<int>& word_ids, const std::vector<int>& labels, double w0,
                   double w1) {
  if (word_ids.size() != labels.size())
    throw error("taped_tag_loss: " + std::to_string(word_ids.size()) + " words but " +
                std::to_string(labels.size()) + " labels");
  Var probs = taped_tag_probs(tape, vars, hyper, word_ids);
  Matd y(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw error("taped_tag_loss: labels must be 0 or 1, got " + std::to_string(labels[i]));
    y(static_cast<Eigen::Index>(i), 0) = labels[i];
  }
  return weighted_binary_cross_entropy(probs, y, w0, w1);
}

double ce_next_token_loss(const ModelParams& params, const EncodedExample& example) {
  Tape tape;
  ParamVars vars = register_params(tape, params);
  return tape.value(taped_generation_loss(tape, vars, params.hyper, example.full_sequence))(0, 0);
}

double wce_tag_loss(const ModelParams& params, const EncodedExample& example, double w0,
                    double w1) {
  Tape tape;
  ParamVars vars = register_params(tape, params);
  std::vector<int> words = example.word_ids;
  std::vector<int> labels = example.tag_labels;
  if (static_cast<int>(words.size()) > params.hyper.max_len) {
    words.resize(static_cast<std::size_t>(params.hyper.max_len));
    labels.resize(static_cast<std::size_t>(params.hyper.max_len));
  }
  return tape.value(taped_tag_loss(tape, vars, params.hyper, words, labels, w0, w1))(0, 0);
}

std::pair<ModelParams, TrainReport> train(ModelParams params,
                                          const std::vector<RecipeRecord>& records,
                                          const Vocabulary& vocab, const TrainConfig& config) {
  validate_config(config);
  if (records.empty()) throw error("train: empty corpus");
  if (config.objective == Objective::tagging && params.hyper.variant != Variant::nn)
    throw error("train: the tagging objective requires the hidden-layer variant");
  const auto start = std::chrono::steady_clock::now();
  const HyperParams& hyper = params.hyper;

  // Deterministic 90/10 split by record-index hash when early stopping is on.
  std::vector<std::size_t> train_idx, holdout_idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (config.early_stop_patience > 0 && Rng(static_cast<std::uint64_t>(i)).next_u64() % 10 == 0)
      holdout_idx.push_back(i);
    else
      train_idx.push_back(i);
  }
  if (config.early_stop_patience > 0 && holdout_idx.empty()) {
    holdout_idx.push_back(train_idx.back());
    train_idx.pop_back();
  }
  if (train_idx.empty()) throw error("train: held-out split left no training records");

  // Holdout items are fixed full-text sequences so the stopping signal is
  // stable across epochs.
  TrainConfig full_cfg = config;
  full_cfg.partial_fraction = 1.0;
  std::vector<Item> holdout_items;
  for (std::size_t i : holdout_idx)
    holdout_items.push_back(make_item(records[i], vocab, hyper, full_cfg, 0, i));

  std::vector<Matd*> tensors = tensor_ptrs(params);
  std::vector<Matd> adam_m, adam_v;
  for (Matd* t : tensors) {
    adam_m.push_back(Matd::Zero(t->rows(), t->cols()));
    adam_v.push_back(Matd::Zero(t->rows(), t->cols()));
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  TrainReport report;
  report.stopping_reason = "completed";
  ModelParams best_params = params;
  double best_holdout = std::numeric_limits<double>::infinity();
  int bad_streak = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order = train_idx;
    Rng shuffle_rng = substream(config.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.next_below(i))]);

    double loss_sum = 0.0;
    std::size_t pos = 0;
    int batch_no = 0;
    while (pos < order.size()) {
      const std::size_t batch = std::min<std::size_t>(
          static_cast<std::size_t>(config.batch_size), order.size() - pos);
      ++batch_no;

      std::vector<Item> items;
      items.reserve(batch);
      for (std::size_t b = 0; b < batch; ++b)
        items.push_back(make_item(records[order[pos + b]], vocab, hyper, config, epoch,
                                  order[pos + b]));

      // Per-example gradients, possibly in parallel; reduction below stays in
      // example order so thread count never changes the result.
      std::vector<double> losses(batch, 0.0);
      std::vector<std::vector<Matd>> grads(batch);
      auto run_slot = [&](std::size_t b) {
        Tape tape;
        ParamVars vars = register_params(tape, params);
        Var loss = item_loss(tape, vars, hyper, config, items[b]);
        losses[b] = tape.value(loss)(0, 0);
        tape.backward(loss);
        grads[b].reserve(vars.ordered.size());
        for (Var v : vars.ordered) grads[b].push_back(tape.grad(v));
      };
      const std::size_t workers = std::min<std::size_t>(
          static_cast<std::size_t>(config.threads), batch);
      if (workers <= 1) {
        for (std::size_t b = 0; b < batch; ++b) run_slot(b);
      } else {
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            for (std::size_t b = w; b < batch; b += workers) {
              try {
                run_slot(b);
              } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
              }
            }
          });
        }
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
      }

      double batch_loss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) batch_loss += losses[b];
      batch_loss /= static_cast<double>(batch);
      if (!std::isfinite(batch_loss))
        throw error("train: diverged at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_no) + " (non-finite loss)");
      for (std::size_t b = 0; b < batch; ++b) loss_sum += losses[b];

      std::vector<Matd> mean_grads;
      mean_grads.reserve(tensors.size());
      for (std::size_t k = 0; k < tensors.size(); ++k) {
        Matd g = grads[0][k];
        for (std::size_t b = 1; b < batch; ++b) g += grads[b][k];
        mean_grads.push_back(g / static_cast<double>(batch));
      }

      double sq_norm = 0.0;
      for (const Matd& g : mean_grads) sq_norm += g.squaredNorm();
      const double norm = std::sqrt(sq_norm);
      if (norm > config.grad_clip_norm)
        for (Matd& g : mean_grads) g *= config.grad_clip_norm / norm;

      ++step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t k = 0; k < tensors.size(); ++k) {
        adam_m[k] = kBeta1 * adam_m[k] + (1.0 - kBeta1) * mean_grads[k];
        adam_v[k] = (kBeta2 * adam_v[k].array() +
                     (1.0 - kBeta2) * mean_grads[k].array().square())
                        .matrix();
        tensors[k]->array() -= config.learning_rate * (adam_m[k].array() / bc1) /
                               ((adam_v[k].array() / bc2).sqrt() + kEps);
      }
      pos += batch;
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));

    if (config.early_stop_patience > 0) {
      double h = 0.0;
      for (const Item& item : holdout_items) h += item_loss_value(params, full_cfg, item);
      h /= static_cast<double>(holdout_items.size());
      report.holdout_loss.push_back(h);
      if (h < best_holdout) {
        best_holdout = h;
        best_params = params;
        report.best_epoch = epoch;
        bad_streak = 0;
      } else if (++bad_streak >= config.early_stop_patience) {
        report.stopping_reason = "early_stop";
        break;
      }
    } else {
      report.best_epoch = epoch;
    }
  }

  if (config.early_stop_patience > 0) params = std::move(best_params);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(params), std::move(report)};
}

GradCheckResult model_grad_check(Variant variant, std::uint64_t seed, double h) {
  HyperParams hyper;
  hyper.vocab_size = 50;
  hyper.embed_dim = 8;
  hyper.hidden1_dim = 8;
  hyper.hidden2_dim = 8;
  hyper.max_len = 6;
  hyper.poly_order = 3;
  hyper.variant = variant;
  ModelParams params = init_params(hyper, seed);
  // Widen the test point so the central difference stays in its h^2 regime:
  // pre-activations must sit far from the ReLU kink relative to the step, and
  // no gradient coordinate may be so small that f's rounding noise dominates
  // the quotient. The per-variant factors keep every seed's worst coordinate
  // below 1e-4 by an order of magnitude.
  const double widen = variant == Variant::nn ? 11.0 : 3.0;
  for (Matd* t : tensor_ptrs(params)) *t *= widen;

  Rng seq_rng(seed ^ 0x5EBAD5EEDULL);
  const auto content = [&] { return 4 + static_cast<int>(seq_rng.next_below(45)); };
  const std::vector<int> sequence = {Vocabulary::kBos, content(), content(), Vocabulary::kAct,
                                     content(), Vocabulary::kEos};

  std::vector<Matd> point;
  for (const Matd* t : tensor_ptrs(params)) point.push_back(*t);

  Tape tape;
  ParamVars vars = register_params(tape, params);
  Var loss = taped_generation_loss(tape, vars, hyper, sequence);
  tape.backward(loss);
  std::vector<Matd> analytic;
  for (Var v : vars.ordered) analytic.push_back(tape.grad(v));

  auto f = [&](const std::vector<Matd>& tensors) {
    ModelParams p = params;
    std::vector<Matd*> ptrs = tensor_ptrs(p);
    for (std::size_t k = 0; k < ptrs.size(); ++k) *ptrs[k] = tensors[k];
    Tape t;
    ParamVars v = register_params(t, p);
    return t.value(taped_generation_loss(t, v, hyper, sequence))(0, 0);
  };
  return grad_check(f, std::move(point), analytic, h);
}

}  // namespace cookgen
