// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cookgen/tape.hpp"
#include "cookgen/types.hpp"

namespace cookgen {

enum class Variant { nn, pf };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct HyperParams {
  int vocab_size = 0;   // M
  int embed_dim = 0;    // d
  int hidden1_dim = 0;  // d_1, hidden-layer variant only
  int hidden2_dim = 0;  // d_2, hidden-layer variant only
  int max_len = 0;      // L
  int poly_order = 1;   // J, polynomial variant only
  Variant variant = Variant::nn;
  bool has_bias = false;
};

// Trainable tensors. The polynomial variant leaves w1/w2 empty (0x0); b_out
// is empty unless has_bias, keeping the headline parameter counts intact.
struct ModelParams {
  HyperParams hyper;
  Matd embed;  // M x d token embedding
  Matd pos;    // L x d position embedding
  Matd w1;     // d x d_1
  Matd w2;     // d_1 x d_2
  Matd w_out;  // d_2 x M (nn) or d x M (pf)
  Matd b_out;  // 1 x M when has_bias
};

// Tensors of the active variant in their canonical (checkpoint) order.
std::vector<std::string> tensor_names(const HyperParams& hyper);
std::vector<Matd*> tensor_ptrs(ModelParams& params);
std::vector<const Matd*> tensor_ptrs(const ModelParams& params);

// All weights Uniform(-0.05, 0.05), drawn in canonical tensor order.
ModelParams init_params(const HyperParams& hyper, std::uint64_t seed);

std::int64_t param_count(const HyperParams& hyper);
std::int64_t param_count(const ModelParams& params);

// Intermediates of one forward pass, retained for inspection.
struct ForwardTrace {
  Matd embedded;              // kept rows of E[tokens] + P_e
  Matd hidden1, hidden2;      // hidden-layer variant
  std::vector<Matd> moments;  // polynomial variant, one 1 x d row per power
  Matd aggregated;            // 1 x d_2 or 1 x d
  Matd logits;                // 1 x M
};

// Next-token logits for a token prefix. Rows at PAD positions are excluded
// from the mean so padding never biases the aggregate; at least one non-PAD
// token is required.
Matd forward_nn(const ModelParams& params, const std::vector<int>& tokens,
                ForwardTrace* trace = nullptr);
Matd forward_pf(const ModelParams& params, const std::vector<int>& tokens,
                ForwardTrace* trace = nullptr);
Matd forward(const ModelParams& params, const std::vector<int>& tokens,
             ForwardTrace* trace = nullptr);

// Per-position action probability, hidden-layer variant only: each hidden
// row is read out through the output column of the action-marker token and
// squashed. Output length always equals input length.
std::vector<double> tag_tokens(const ModelParams& params, const std::vector<int>& tokens);

// Tape registration for training and gradient checks. Handles follow the
// canonical tensor order of the active variant.
struct ParamVars {
  Var embed, pos, w1, w2, w_out, b_out;
  std::vector<Var> ordered;
};
ParamVars register_params(Tape& tape, const ModelParams& params);

// Taped logits rows for teacher forcing: row t holds the next-token logits
// after consuming tokens[0..t], for t = 0..count-1 (prefix rows must be
// PAD-free). One matmul per layer for the whole sequence; running prefix
// means realize the per-prefix aggregation.
Var taped_prefix_logits(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                        const std::vector<int>& tokens, int count);

// Taped per-position action probabilities (column vector), mirroring
// tag_tokens.
Var taped_tag_probs(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                    const std::vector<int>& tokens);

}  // namespace cookgen
