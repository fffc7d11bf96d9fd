// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cookgen/corpus.hpp"
#include "cookgen/gradcheck.hpp"
#include "cookgen/model.hpp"

namespace cookgen {

enum class Objective { generation, tagging };

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 0;
  int batch_size = 8;
  double grad_clip_norm = 1.0;
  // 0 trains on every record and disables the held-out split and early
  // stopping; the returned parameters are then the final-epoch ones.
  int early_stop_patience = 0;
  double wce_weight0 = 0.119;
  double wce_weight1 = 0.881;
  std::uint64_t seed = 0;
  // Generation objective: fraction of each recipe's words kept when building
  // its training sequence, resampled every epoch. 1.0 uses the full text.
  double partial_fraction = 1.0;
  Objective objective = Objective::generation;
  // Worker threads for per-example gradients. Gradients are reduced in
  // example order, so the result is identical for any thread count.
  int threads = 1;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  // Parallel to epoch_loss when a held-out split exists, else empty.
  std::vector<double> holdout_loss;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  std::string stopping_reason;  // "completed" or "early_stop"
  // Informational only; never part of determinism comparisons.
  double wall_clock_seconds = 0.0;
};

// Teacher-forced mean cross-entropy over next-token predictions at positions
// 1..last non-PAD of the example's full sequence.
double ce_next_token_loss(const ModelParams& params, const EncodedExample& example);

// Weighted binary cross-entropy of the tag head over the example's words
// (truncated to the model length when longer).
double wce_tag_loss(const ModelParams& params, const EncodedExample& example, double w0,
                    double w1);

// Taped losses used by the trainer and the gradient checker.
Var taped_generation_loss(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                          const std::vector<int>& sequence);
Var taped_tag_loss(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                   const std::vector<int>& word_ids, const std::vector<int>& labels, double w0,
                   double w1);

// Mini-batch training with adaptive-moment updates (beta1 0.9, beta2 0.999,
// eps 1e-8), global-norm gradient clipping, deterministic shuffling, and
// optional early stopping on a deterministic 90/10 held-out split. Returns
// the best-epoch parameters when a holdout exists, else the final ones.
// A non-finite batch loss aborts with a diagnostic naming epoch and batch.
std::pair<ModelParams, TrainReport> train(ModelParams params,
                                          const std::vector<RecipeRecord>& records,
                                          const Vocabulary& vocab, const TrainConfig& config);

// End-to-end gradient check of the full generation loss on a fixed toy
// configuration (vocabulary 50, embedding 8, length 6, polynomial order 3).
// The seeded test point is drawn wider than training init so activation
// inputs sit away from the ReLU kink, where central differences are
// ill-posed.
GradCheckResult model_grad_check(Variant variant, std::uint64_t seed, double h = 1e-5);

}  // namespace cookgen
