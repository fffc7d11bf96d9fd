// SPDX-License-Identifier: Apache-2.0
#include "cookgen/model.hpp"

#include <cmath>
#include <utility>

#include "cookgen/corpus.hpp"
#include "cookgen/kernels.hpp"
#include "cookgen/rng.hpp"

namespace cookgen {

namespace {

void validate_hyper(const HyperParams& h) {
  if (h.vocab_size <= 0 || h.embed_dim <= 0 || h.max_len <= 0)
    throw error("model: vocab_size, embed_dim and max_len must be positive");
  if (h.variant == Variant::nn && (h.hidden1_dim <= 0 || h.hidden2_dim <= 0))
    throw error("model: hidden dimensions must be positive for the hidden-layer variant");
  if (h.variant == Variant::pf && h.poly_order < 1)
    throw error("model: polynomial order must be >= 1, got " + std::to_string(h.poly_order));
}

// Validate ids and length; return (position, id) for the rows entering the
// aggregate, PAD rows excluded.
std::vector<std::pair<int, int>> kept_positions(const std::vector<int>& tokens,
                                                const HyperParams& h) {
  if (static_cast<int>(tokens.size()) > h.max_len)
    throw error("forward: sequence length " + std::to_string(tokens.size()) +
                " exceeds maximum " + std::to_string(h.max_len));
  std::vector<std::pair<int, int>> kept;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id < 0 || id >= h.vocab_size)
      throw error("forward: token id " + std::to_string(id) + " out of range for vocabulary " +
                  std::to_string(h.vocab_size));
    if (id != Vocabulary::kPad) kept.emplace_back(static_cast<int>(i), id);
  }
  if (kept.empty()) throw error("forward: no non-PAD tokens in input");
  return kept;
}

Matd embed_rows(const ModelParams& p, const std::vector<std::pair<int, int>>& kept) {
  Matd h(static_cast<Eigen::Index>(kept.size()), p.hyper.embed_dim);
  for (std::size_t r = 0; r < kept.size(); ++r)
    h.row(static_cast<Eigen::Index>(r)) = p.embed.row(kept[r].second) + p.pos.row(kept[r].first);
  return h;
}

Matd output_row(const ModelParams& p, const Matd& aggregated) {
  Matd logits = aggregated * p.w_out;
  if (p.hyper.has_bias) logits += p.b_out;
  return logits;
}

}  // namespace

std::string variant_name(Variant v) { return v == Variant::nn ? "nn" : "pf"; }

Variant variant_from_name(const std::string& name) {
  if (name == "nn") return Variant::nn;
  if (name == "pf") return Variant::pf;
  throw error("model: unknown variant '" + name + "' (expected nn or pf)");
}

std::vector<std::string> tensor_names(const HyperParams& hyper) {
  std::vector<std::string> names{"embed", "pos"};
  if (hyper.variant == Variant::nn) {
    names.push_back("w1");
    names.push_back("w2");
  }
  names.push_back("w_out");
  if (hyper.has_bias) names.push_back("b_out");
  return names;
}

std::vector<Matd*> tensor_ptrs(ModelParams& p) {
  std::vector<Matd*> out{&p.embed, &p.pos};
  if (p.hyper.variant == Variant::nn) {
    out.push_back(&p.w1);
    out.push_back(&p.w2);
  }
  out.push_back(&p.w_out);
  if (p.hyper.has_bias) out.push_back(&p.b_out);
  return out;
}

std::vector<const Matd*> tensor_ptrs(const ModelParams& p) {
  std::vector<const Matd*> out{&p.embed, &p.pos};
  if (p.hyper.variant == Variant::nn) {
    out.push_back(&p.w1);
    out.push_back(&p.w2);
  }
  out.push_back(&p.w_out);
  if (p.hyper.has_bias) out.push_back(&p.b_out);
  return out;
}

ModelParams init_params(const HyperParams& hyper, std::uint64_t seed) {
  validate_hyper(hyper);
  ModelParams p;
  p.hyper = hyper;
  p.embed.resize(hyper.vocab_size, hyper.embed_dim);
  p.pos.resize(hyper.max_len, hyper.embed_dim);
  if (hyper.variant == Variant::nn) {
    p.w1.resize(hyper.embed_dim, hyper.hidden1_dim);
    p.w2.resize(hyper.hidden1_dim, hyper.hidden2_dim);
    p.w_out.resize(hyper.hidden2_dim, hyper.vocab_size);
  } else {
    p.w1.resize(0, 0);
    p.w2.resize(0, 0);
    p.w_out.resize(hyper.embed_dim, hyper.vocab_size);
  }
  if (hyper.has_bias)
    p.b_out.resize(1, hyper.vocab_size);
  else
    p.b_out.resize(0, 0);
  Rng rng(seed);
  for (Matd* t : tensor_ptrs(p)) {
    double* data = t->data();
    const Eigen::Index n = t->size();
    for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-0.05, 0.05);
  }
  return p;
}

std::int64_t param_count(const HyperParams& h) {
  validate_hyper(h);
  const std::int64_t M = h.vocab_size, d = h.embed_dim, L = h.max_len;
  std::int64_t count = M * d + L * d;
  if (h.variant == Variant::nn) {
    const std::int64_t d1 = h.hidden1_dim, d2 = h.hidden2_dim;
    count += d * d1 + d1 * d2 + d2 * M;
  } else {
    count += d * M;
  }
  if (h.has_bias) count += M;
  return count;
}

std::int64_t param_count(const ModelParams& params) {
  std::int64_t count = 0;
  for (const Matd* t : tensor_ptrs(params)) count += t->size();
  return count;
}

Matd forward_nn(const ModelParams& p, const std::vector<int>& tokens, ForwardTrace* trace) {
  if (p.hyper.variant != Variant::nn)
    throw error("forward_nn: params belong to the " + variant_name(p.hyper.variant) + " variant");
  const auto kept = kept_positions(tokens, p.hyper);
  Matd h = embed_rows(p, kept);
  Matd h1 = relu(h * p.w1).eval();
  Matd h2 = relu(h1 * p.w2).eval();
  Matd agg = row_mean(h2);
  Matd logits = output_row(p, agg);
  if (trace) {
    trace->embedded = std::move(h);
    trace->hidden1 = std::move(h1);
    trace->hidden2 = std::move(h2);
    trace->aggregated = std::move(agg);
    trace->logits = logits;
  }
  return logits;
}

Matd forward_pf(const ModelParams& p, const std::vector<int>& tokens, ForwardTrace* trace) {
  if (p.hyper.variant != Variant::pf)
    throw error("forward_pf: params belong to the " + variant_name(p.hyper.variant) + " variant");
  const auto kept = kept_positions(tokens, p.hyper);
  Matd h = embed_rows(p, kept);
  std::vector<Matd> moments;
  moments.reserve(static_cast<std::size_t>(p.hyper.poly_order));
  Matd s = Matd::Zero(1, p.hyper.embed_dim);
  for (int j = 1; j <= p.hyper.poly_order; ++j) {
    moments.push_back(row_mean(elem_pow(h, j)));
    s += moments.back();
  }
  Matd logits = output_row(p, s);
  if (trace) {
    trace->embedded = std::move(h);
    trace->moments = std::move(moments);
    trace->aggregated = std::move(s);
    trace->logits = logits;
  }
  return logits;
}

Matd forward(const ModelParams& p, const std::vector<int>& tokens, ForwardTrace* trace) {
  return p.hyper.variant == Variant::nn ? forward_nn(p, tokens, trace)
                                        : forward_pf(p, tokens, trace);
}

std::vector<double> tag_tokens(const ModelParams& p, const std::vector<int>& tokens) {
  if (p.hyper.variant != Variant::nn)
    throw error("tag_tokens: the tag head requires the hidden-layer variant");
  if (static_cast<int>(tokens.size()) > p.hyper.max_len)
    throw error("tag_tokens: sequence length " + std::to_string(tokens.size()) +
                " exceeds maximum " + std::to_string(p.hyper.max_len));
  if (tokens.empty()) throw error("tag_tokens: empty input");
  // Every position gets a probability, PAD included: output length must
  // always equal input length.
  Matd h(static_cast<Eigen::Index>(tokens.size()), p.hyper.embed_dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id < 0 || id >= p.hyper.vocab_size)
      throw error("tag_tokens: token id " + std::to_string(id) +
                  " out of range for vocabulary " + std::to_string(p.hyper.vocab_size));
    h.row(static_cast<Eigen::Index>(i)) = p.embed.row(id) + p.pos.row(static_cast<Eigen::Index>(i));
  }
  Matd h2 = relu(relu(h * p.w1).eval() * p.w2).eval();
  Matd z = h2 * p.w_out.col(Vocabulary::kAct);
  if (p.hyper.has_bias) z.array() += p.b_out(0, Vocabulary::kAct);
  std::vector<double> probs(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double x = z(static_cast<Eigen::Index>(i), 0);
    probs[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return probs;
}

ParamVars register_params(Tape& tape, const ModelParams& p) {
  ParamVars vars;
  vars.embed = tape.leaf(p.embed);
  vars.ordered.push_back(vars.embed);
  vars.pos = tape.leaf(p.pos);
  vars.ordered.push_back(vars.pos);
  if (p.hyper.variant == Variant::nn) {
    vars.w1 = tape.leaf(p.w1);
    vars.ordered.push_back(vars.w1);
    vars.w2 = tape.leaf(p.w2);
    vars.ordered.push_back(vars.w2);
  }
  vars.w_out = tape.leaf(p.w_out);
  vars.ordered.push_back(vars.w_out);
  if (p.hyper.has_bias) {
    vars.b_out = tape.leaf(p.b_out);
    vars.ordered.push_back(vars.b_out);
  }
  return vars;
}

namespace {

Var taped_embed(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                const std::vector<int>& tokens, int count, const char* who) {
  if (vars.embed.tape != &tape)
    throw error(std::string(who) + ": parameters are registered on a different tape");
  if (count < 1 || count > static_cast<int>(tokens.size()))
    throw error(std::string(who) + ": prefix count " + std::to_string(count) +
                " out of range for " + std::to_string(tokens.size()) + " tokens");
  if (count > hyper.max_len)
    throw error(std::string(who) + ": prefix count " + std::to_string(count) +
                " exceeds maximum length " + std::to_string(hyper.max_len));
  std::vector<int> tok(tokens.begin(), tokens.begin() + count);
  std::vector<int> positions(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    positions[static_cast<std::size_t>(i)] = i;
    if (tok[static_cast<std::size_t>(i)] < 0 || tok[static_cast<std::size_t>(i)] >= hyper.vocab_size)
      throw error(std::string(who) + ": token id " +
                  std::to_string(tok[static_cast<std::size_t>(i)]) +
                  " out of range for vocabulary " + std::to_string(hyper.vocab_size));
  }
  return add(gather_rows(vars.embed, tok), gather_rows(vars.pos, positions));
}

}  // namespace

Var taped_prefix_logits(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                        const std::vector<int>& tokens, int count) {
  for (int i = 0; i < count && i < static_cast<int>(tokens.size()); ++i)
    if (tokens[static_cast<std::size_t>(i)] == Vocabulary::kPad)
      throw error("taped_prefix_logits: PAD inside the teacher-forced prefix at position " +
                  std::to_string(i));
  Var h = taped_embed(tape, vars, hyper, tokens, count, "taped_prefix_logits");
  Var agg{};
  if (hyper.variant == Variant::nn) {
    Var h1 = relu(matmul(h, vars.w1));
    Var h2 = relu(matmul(h1, vars.w2));
    agg = prefix_row_means(h2);
  } else {
    agg = prefix_row_means(h);  // j = 1 power is the identity
    for (int j = 2; j <= hyper.poly_order; ++j)
      agg = add(agg, prefix_row_means(elem_pow(h, j)));
  }
  Var logits = matmul(agg, vars.w_out);
  if (hyper.has_bias) logits = add_rowwise(logits, vars.b_out);
  return logits;
}

Var taped_tag_probs(Tape& tape, const ParamVars& vars, const HyperParams& hyper,
                    const std::vector<int>& tokens) {
  if (hyper.variant != Variant::nn)
    throw error("taped_tag_probs: the tag head requires the hidden-layer variant");
  Var h = taped_embed(tape, vars, hyper, tokens, static_cast<int>(tokens.size()),
                      "taped_tag_probs");
  Var h1 = relu(matmul(h, vars.w1));
  Var h2 = relu(matmul(h1, vars.w2));
  Var z = matmul(h2, gather_cols(vars.w_out, {Vocabulary::kAct}));
  if (hyper.has_bias) z = add_rowwise(z, gather_cols(vars.b_out, {Vocabulary::kAct}));
  return sigmoid(z);
}

}  // namespace cookgen
