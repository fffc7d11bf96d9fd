// SPDX-License-Identifier: Apache-2.0
#include "cookgen/eval.hpp"

#include <algorithm>

namespace cookgen {

namespace {

double ratio(std::int64_t num, std::int64_t denom, std::int64_t other) {
  // Empty denominator: perfect when there was nothing to find either, else 0.
  if (denom == 0) return other == 0 ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

ResourceReport resource_report(const ModelParams& params) {
  ResourceReport r;
  r.param_count = param_count(params);
  r.est_bytes_f32 = 4 * r.param_count;
  return r;
}

EvalReport score_sets(const ActionSets& predictions, const ActionSets& gold, bool macro) {
  std::vector<std::string> only_pred, only_gold;
  for (const auto& [id, _] : predictions)
    if (!gold.count(id)) only_pred.push_back(id);
  for (const auto& [id, _] : gold)
    if (!predictions.count(id)) only_gold.push_back(id);
  if (!only_pred.empty() || !only_gold.empty()) {
    std::string msg = "score_sets: recipe ids differ;";
    if (!only_pred.empty()) {
      msg += " only in predictions:";
      for (const std::string& id : only_pred) msg += " " + id;
    }
    if (!only_gold.empty()) {
      msg += " only in gold:";
      for (const std::string& id : only_gold) msg += " " + id;
    }
    throw error(msg);
  }

  EvalReport report;
  double macro_p_sum = 0.0, macro_r_sum = 0.0;
  for (const auto& [id, gold_set] : gold) {
    const std::set<std::string>& pred_set = predictions.at(id);
    std::int64_t tp = 0;
    for (const std::string& w : pred_set) tp += gold_set.count(w) ? 1 : 0;
    const std::int64_t fp = static_cast<std::int64_t>(pred_set.size()) - tp;
    const std::int64_t fn = static_cast<std::int64_t>(gold_set.size()) - tp;
    report.tp += tp;
    report.fp += fp;
    report.fn += fn;
    report.per_recipe.push_back({id, pred_set, gold_set});
    macro_p_sum += ratio(tp, tp + fp, tp + fn);
    macro_r_sum += ratio(tp, tp + fn, tp + fp);
  }
  report.precision = ratio(report.tp, report.tp + report.fp, report.tp + report.fn);
  report.recall = ratio(report.tp, report.tp + report.fn, report.tp + report.fp);
  if (macro && !gold.empty()) {
    report.macro_precision = macro_p_sum / static_cast<double>(gold.size());
    report.macro_recall = macro_r_sum / static_cast<double>(gold.size());
  }
  return report;
}

}  // namespace cookgen
