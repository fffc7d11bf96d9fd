// SPDX-License-Identifier: Apache-2.0
#include "cookgen/baseline.hpp"

namespace cookgen {

std::set<std::string> rule_predict(const std::vector<std::string>& tokens,
                                   const std::set<std::string>& lexicon) {
  std::set<std::string> out;
  for (const std::string& t : tokens)
    if (lexicon.count(t)) out.insert(t);
  return out;
}

std::set<std::string> lexicon_from_records(const std::vector<RecipeRecord>& records) {
  std::set<std::string> lexicon;
  for (const RecipeRecord& r : records)
    lexicon.insert(r.gold_actions.begin(), r.gold_actions.end());
  return lexicon;
}

}  // namespace cookgen
