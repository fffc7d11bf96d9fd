// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

#include "cookgen/corpus.hpp"

namespace cookgen {

// Rule-based predictor: the distinct tokens that appear in the lexicon.
std::set<std::string> rule_predict(const std::vector<std::string>& tokens,
                                   const std::set<std::string>& lexicon);

// Default lexicon: the union of gold action words across records.
std::set<std::string> lexicon_from_records(const std::vector<RecipeRecord>& records);

}  // namespace cookgen
