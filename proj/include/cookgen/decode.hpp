// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

#include "cookgen/corpus.hpp"
#include "cookgen/model.hpp"

namespace cookgen {

struct GenerationResult {
  enum class StoppedBy { eos, max_len };
  std::vector<int> generated_ids;  // prefix followed by the continuation
  std::set<std::string> actions;
  StoppedBy stopped_by = StoppedBy::max_len;
};

// Greedy decoding: repeatedly append the argmax next token (ties broken by
// lowest id), halting on EOS or at max_len tokens. PAD, BOS and the
// unknown-word token are masked from the distribution so an untrained model
// cannot loop on fillers. The prefix must not already contain EOS.
GenerationResult generate(const ModelParams& params, const Vocabulary& vocab,
                          const std::vector<int>& prefix, int max_len);

// Distinct ordinary words strictly after the first action marker and before
// EOS (or the end); empty when no marker was emitted. Control tokens and the
// unknown token never appear in the result.
std::set<std::string> extract_actions(const std::vector<int>& ids, const Vocabulary& vocab);

}  // namespace cookgen
