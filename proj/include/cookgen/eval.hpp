// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cookgen/model.hpp"

namespace cookgen {

struct ResourceReport {
  std::int64_t param_count = 0;
  std::int64_t est_bytes_f32 = 0;
};

ResourceReport resource_report(const ModelParams& params);

struct PerRecipeScore {
  std::string id;
  std::set<std::string> predicted;
  std::set<std::string> gold;
};

struct EvalReport {
  // Micro-averaged: counts pooled over all recipes. An empty denominator
  // scores 1 when the other side is empty too, else 0.
  double precision = 0.0;
  double recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::vector<PerRecipeScore> per_recipe;  // ordered by id
  // Non-default alternative: per-recipe metrics averaged with equal weight.
  std::optional<double> macro_precision;
  std::optional<double> macro_recall;
  std::optional<ResourceReport> resource;
};

using ActionSets = std::map<std::string, std::set<std::string>>;

// Both maps must cover exactly the same recipe ids; a mismatch error lists
// the symmetric difference. Macro averages are filled only on request.
EvalReport score_sets(const ActionSets& predictions, const ActionSets& gold, bool macro = false);

}  // namespace cookgen
