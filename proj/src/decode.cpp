// SPDX-License-Identifier: Apache-2.0
#include "cookgen/decode.hpp"

#include <algorithm>

namespace cookgen {

GenerationResult generate(const ModelParams& params, const Vocabulary& vocab,
                          const std::vector<int>& prefix, int max_len) {
  if (prefix.empty()) throw error("generate: empty prefix");
  if (max_len > params.hyper.max_len)
    throw error("generate: max_len " + std::to_string(max_len) + " exceeds model length " +
                std::to_string(params.hyper.max_len));
  if (static_cast<int>(prefix.size()) >= max_len)
    throw error("generate: prefix length " + std::to_string(prefix.size()) +
                " leaves no room before max_len " + std::to_string(max_len));
  if (vocab.size() != params.hyper.vocab_size)
    throw error("generate: vocabulary size " + std::to_string(vocab.size()) +
                " does not match model vocabulary " + std::to_string(params.hyper.vocab_size));
  for (int id : prefix)
    if (id == Vocabulary::kEos) throw error("generate: prefix already contains EOS");

  GenerationResult result;
  result.generated_ids = prefix;
  result.stopped_by = GenerationResult::StoppedBy::max_len;
  while (static_cast<int>(result.generated_ids.size()) < max_len) {
    const Matd logits = forward(params, result.generated_ids);
    int best = -1;
    double best_score = 0.0;
    for (int id = 0; id < vocab.size(); ++id) {
      if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == vocab.unk_id()) continue;
      const double score = logits(0, id);
      if (best < 0 || score > best_score) {
        best = id;
        best_score = score;
      }
    }
    result.generated_ids.push_back(best);
    if (best == Vocabulary::kEos) {
      result.stopped_by = GenerationResult::StoppedBy::eos;
      break;
    }
  }
  result.actions = extract_actions(result.generated_ids, vocab);
  return result;
}

std::set<std::string> extract_actions(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::set<std::string> actions;
  auto act = std::find(ids.begin(), ids.end(), Vocabulary::kAct);
  if (act == ids.end()) return actions;
  for (auto it = act + 1; it != ids.end() && *it != Vocabulary::kEos; ++it)
    if (*it >= 0 && *it < vocab.size() && !vocab.is_special(*it)) actions.insert(vocab.word(*it));
  return actions;
}

}  // namespace cookgen
