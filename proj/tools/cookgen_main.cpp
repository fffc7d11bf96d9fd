// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: vocabulary building, training, generation,
// evaluation, the rule baseline, gradient checking, and resource reporting.
// Machine-readable JSON goes to standard output, logs to standard error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cookgen/baseline.hpp"
#include "cookgen/checkpoint.hpp"
#include "cookgen/corpus.hpp"
#include "cookgen/decode.hpp"
#include "cookgen/eval.hpp"
#include "cookgen/model.hpp"
#include "cookgen/training.hpp"

namespace {

using cookgen::error;
using nlohmann::json;

// Flat key=value configuration text; '#' starts a comment.
std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("config: cannot read " + path);
  std::map<std::string, std::string> cfg;
  std::string line;
  long line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error("config: " + path + " line " + std::to_string(line_no) +
                  ": expected key=value");
    cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text);

template <>
int parse_value<int>(const std::string& key, const std::string& text) {
  try {
    return std::stoi(text);
  } catch (const std::exception&) {
    throw error("config: key " + key + ": cannot parse integer from '" + text + "'");
  }
}

template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& key, const std::string& text) {
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw error("config: key " + key + ": cannot parse integer from '" + text + "'");
  }
}

template <>
double parse_value<double>(const std::string& key, const std::string& text) {
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw error("config: key " + key + ": cannot parse number from '" + text + "'");
  }
}

template <>
bool parse_value<bool>(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw error("config: key " + key + ": cannot parse boolean from '" + text + "'");
}

template <>
std::string parse_value<std::string>(const std::string& key, const std::string& text) {
  (void)key;
  return text;
}

// Resolution order: explicit flag, then config-file key, then built-in
// default (the variable's current value).
template <typename T>
void merge(const CLI::Option* opt, const std::map<std::string, std::string>& cfg,
           const std::string& key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  const auto it = cfg.find(key);
  if (it != cfg.end()) value = parse_value<T>(key, it->second);
}

int thread_cap() {
  const char* env = std::getenv("COOKGEN_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const int n = std::stoi(env);
    if (n < 1) throw error("");
    return n;
  } catch (const std::exception&) {
    throw error("COOKGEN_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
}

// Optional switch: prepend title and ingredient words to each recipe's word
// list so they enter the model input.
std::vector<cookgen::RecipeRecord> prepend_context(std::vector<cookgen::RecipeRecord> records) {
  for (cookgen::RecipeRecord& r : records) {
    std::vector<std::string> words = r.title;
    for (const auto& line : r.ingredients) words.insert(words.end(), line.begin(), line.end());
    words.insert(words.end(), r.instruction_words.begin(), r.instruction_words.end());
    r.instruction_words = std::move(words);
  }
  return records;
}

json report_to_json(const cookgen::TrainReport& report) {
  return json{{"epoch_loss", report.epoch_loss},
              {"holdout_loss", report.holdout_loss},
              {"best_epoch", report.best_epoch},
              {"stopping_reason", report.stopping_reason},
              {"wall_clock_seconds", report.wall_clock_seconds}};
}

json eval_to_json(const cookgen::EvalReport& report) {
  json j{{"precision", report.precision},
         {"recall", report.recall},
         {"tp", report.tp},
         {"fp", report.fp},
         {"fn", report.fn},
         {"resource", nullptr}};
  if (report.macro_precision) {
    j["macro_precision"] = *report.macro_precision;
    j["macro_recall"] = *report.macro_recall;
  }
  if (report.resource)
    j["resource"] = json{{"param_count", report.resource->param_count},
                         {"est_bytes_f32", report.resource->est_bytes_f32}};
  return j;
}

struct TrainOptions {
  std::string corpus, vocab, out, config_path, variant = "nn", objective = "generation";
  std::uint64_t seed = 0;
  int embed_dim = 32, hidden1 = 32, hidden2 = 32, max_len = 32, poly_order = 3;
  bool bias = false, include_context = false;
  cookgen::TrainConfig cfg;
};

void run_train(TrainOptions& o, const std::map<const char*, CLI::Option*>& opts) {
  std::map<std::string, std::string> cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path);
  merge(opts.at("variant"), cfg, "variant", o.variant);
  merge(opts.at("objective"), cfg, "objective", o.objective);
  merge(opts.at("seed"), cfg, "seed", o.seed);
  merge(opts.at("d"), cfg, "d", o.embed_dim);
  merge(opts.at("d1"), cfg, "d_1", o.hidden1);
  merge(opts.at("d2"), cfg, "d_2", o.hidden2);
  merge(opts.at("L"), cfg, "L", o.max_len);
  merge(opts.at("J"), cfg, "J", o.poly_order);
  merge(opts.at("bias"), cfg, "bias", o.bias);
  merge(opts.at("context"), cfg, "include_title_ingredients", o.include_context);
  merge(opts.at("epochs"), cfg, "epochs", o.cfg.epochs);
  merge(opts.at("batch"), cfg, "batch_size", o.cfg.batch_size);
  merge(opts.at("lr"), cfg, "learning_rate", o.cfg.learning_rate);
  merge(opts.at("clip"), cfg, "grad_clip_norm", o.cfg.grad_clip_norm);
  merge(opts.at("patience"), cfg, "early_stop_patience", o.cfg.early_stop_patience);
  merge(opts.at("rho"), cfg, "rho", o.cfg.partial_fraction);
  merge(opts.at("w0"), cfg, "wce_weight0", o.cfg.wce_weight0);
  merge(opts.at("w1"), cfg, "wce_weight1", o.cfg.wce_weight1);

  auto records = cookgen::load_corpus(o.corpus);
  if (o.include_context) records = prepend_context(std::move(records));
  const cookgen::Vocabulary vocab = cookgen::Vocabulary::load(o.vocab);

  cookgen::HyperParams hyper;
  hyper.vocab_size = vocab.size();
  hyper.embed_dim = o.embed_dim;
  hyper.variant = cookgen::variant_from_name(o.variant);
  if (hyper.variant == cookgen::Variant::nn) {
    hyper.hidden1_dim = o.hidden1;
    hyper.hidden2_dim = o.hidden2;
  }
  hyper.max_len = o.max_len;
  hyper.poly_order = o.poly_order;
  hyper.has_bias = o.bias;

  o.cfg.seed = o.seed;
  o.cfg.threads = thread_cap();
  if (o.objective == "generation")
    o.cfg.objective = cookgen::Objective::generation;
  else if (o.objective == "tagging")
    o.cfg.objective = cookgen::Objective::tagging;
  else
    throw error("train: unknown objective '" + o.objective + "' (expected generation or tagging)");

  std::cerr << "training " << o.variant << " model on " << records.size() << " recipes (M="
            << hyper.vocab_size << ", threads=" << o.cfg.threads << ")\n";
  cookgen::ModelParams params = cookgen::init_params(hyper, o.seed);
  auto [trained, report] = cookgen::train(std::move(params), records, vocab, o.cfg);
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    std::cerr << "epoch " << (e + 1) << " loss " << report.epoch_loss[e];
    if (e < report.holdout_loss.size()) std::cerr << " holdout " << report.holdout_loss[e];
    std::cerr << "\n";
  }
  cookgen::save_checkpoint(o.out, trained);
  json j = report_to_json(report);
  j["checkpoint"] = o.out;
  std::cout << j.dump() << "\n";
}

struct GenerateOptions {
  std::string checkpoint, vocab, corpus, text;
  double rho = 1.0;
  std::uint64_t seed = 0;
  int max_len = 0;  // 0: model length
  bool include_context = false;
};

void run_generate(const GenerateOptions& o) {
  const cookgen::ModelParams params = cookgen::load_checkpoint(o.checkpoint);
  const cookgen::Vocabulary vocab = cookgen::Vocabulary::load(o.vocab);
  const int max_len = o.max_len > 0 ? o.max_len : params.hyper.max_len;

  std::vector<cookgen::RecipeRecord> records;
  if (!o.corpus.empty()) {
    records = cookgen::load_corpus(o.corpus);
    if (o.include_context) records = prepend_context(std::move(records));
  } else {
    cookgen::RecipeRecord r;
    r.id = "text";
    r.instruction_words = cookgen::tokenize(o.text);
    if (r.instruction_words.empty()) throw error("generate: --text contains no words");
    records.push_back(std::move(r));
  }

  cookgen::Rng rng(o.seed);
  for (const cookgen::RecipeRecord& r : records) {
    std::vector<int> prefix{cookgen::Vocabulary::kBos};
    for (int id : cookgen::sample_partial(r, vocab, o.rho, rng)) prefix.push_back(id);
    if (static_cast<int>(prefix.size()) >= max_len - 1) {
      std::cerr << "warning: recipe " << r.id << ": prefix truncated to fit max_len " << max_len
                << "\n";
      prefix.resize(static_cast<std::size_t>(max_len - 2));
    }
    const cookgen::GenerationResult result = cookgen::generate(params, vocab, prefix, max_len);
    json words = json::array();
    for (int id : result.generated_ids) words.push_back(vocab.word(id));
    json actions = json::array();
    for (const std::string& a : result.actions) actions.push_back(a);
    std::cout << json{{"id", r.id}, {"generated", words}, {"actions", actions}}.dump() << "\n";
  }
}

cookgen::ActionSets load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("predictions: cannot read " + path);
  cookgen::ActionSets sets;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      std::set<std::string>& s = sets[j.at("id").get<std::string>()];
      for (const auto& a : j.at("actions"))
        for (const std::string& w : cookgen::tokenize(a.get<std::string>())) s.insert(w);
    } catch (const json::exception& e) {
      throw error("predictions: " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return sets;
}

void run_eval(const std::string& predictions_path, const std::string& gold_path, bool macro,
              const std::string& checkpoint_path) {
  const cookgen::ActionSets predictions = load_predictions(predictions_path);
  cookgen::ActionSets gold;
  for (const cookgen::RecipeRecord& r : cookgen::load_corpus(gold_path))
    gold[r.id] = r.gold_actions;
  cookgen::EvalReport report = cookgen::score_sets(predictions, gold, macro);
  if (!checkpoint_path.empty())
    report.resource = cookgen::resource_report(cookgen::load_checkpoint(checkpoint_path));
  std::cout << eval_to_json(report).dump() << "\n";
}

void run_baseline(const std::string& corpus_path, const std::string& lexicon_path,
                  const std::string& out_path) {
  const auto records = cookgen::load_corpus(corpus_path);
  const std::set<std::string> lexicon = lexicon_path.empty()
                                            ? cookgen::lexicon_from_records(records)
                                            : cookgen::load_lexicon(lexicon_path);
  std::cerr << "baseline lexicon: " << lexicon.size() << " words\n";
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw error("baseline: cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  for (const cookgen::RecipeRecord& r : records) {
    json actions = json::array();
    for (const std::string& a : cookgen::rule_predict(r.instruction_words, lexicon))
      actions.push_back(a);
    out << json{{"id", r.id}, {"actions", actions}}.dump() << "\n";
  }
}

void run_gradcheck(const std::string& variant, std::uint64_t seed) {
  const cookgen::GradCheckResult result =
      cookgen::model_grad_check(cookgen::variant_from_name(variant), seed);
  std::cout << json{{"variant", variant}, {"seed", seed}, {"max_rel_error", result.max_rel_error}}
                   .dump()
            << "\n";
}

void run_resources(const std::string& checkpoint_path) {
  const cookgen::ModelParams params = cookgen::load_checkpoint(checkpoint_path);
  const cookgen::ResourceReport r = cookgen::resource_report(params);
  std::cout << json{{"param_count", r.param_count},
                    {"est_bytes_f32", r.est_bytes_f32},
                    {"note", "GPU memory is not measured; est_bytes_f32 is the float32 weight "
                             "footprint only"}}
                   .dump()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cook-Gen: aggregation-based generative models for cooking actions"};
  app.require_subcommand(1);

  // build-vocab
  auto* sc_vocab = app.add_subcommand("build-vocab", "Build a vocabulary from a JSONL corpus");
  std::string bv_corpus, bv_out;
  int bv_min_count = 1;
  sc_vocab->add_option("--corpus", bv_corpus, "JSONL recipe corpus")->required();
  sc_vocab->add_option("--min-count", bv_min_count, "Minimum word frequency (default 1)");
  sc_vocab->add_option("--out", bv_out, "Output vocabulary JSON path")->required();

  // train
  auto* sc_train = app.add_subcommand("train", "Train a model and write a checkpoint");
  TrainOptions to;
  std::map<const char*, CLI::Option*> train_opts;
  sc_train->add_option("--corpus", to.corpus, "JSONL recipe corpus")->required();
  sc_train->add_option("--vocab", to.vocab, "Vocabulary JSON")->required();
  sc_train->add_option("--out", to.out, "Output checkpoint path")->required();
  sc_train->add_option("--config", to.config_path, "key=value config file (flags win)");
  train_opts["variant"] = sc_train->add_option("--variant", to.variant, "nn or pf");
  train_opts["objective"] =
      sc_train->add_option("--objective", to.objective, "generation or tagging");
  train_opts["seed"] = sc_train->add_option("--seed", to.seed, "PRNG seed");
  train_opts["d"] = sc_train->add_option("--d", to.embed_dim, "Embedding width");
  train_opts["d1"] = sc_train->add_option("--d1", to.hidden1, "First hidden width (nn)");
  train_opts["d2"] = sc_train->add_option("--d2", to.hidden2, "Second hidden width (nn)");
  train_opts["L"] = sc_train->add_option("--L", to.max_len, "Maximum sequence length");
  train_opts["J"] = sc_train->add_option("--J", to.poly_order, "Polynomial order (pf)");
  train_opts["bias"] = sc_train->add_flag("--bias", to.bias, "Add an output bias row");
  train_opts["context"] = sc_train->add_flag("--include-title-ingredients", to.include_context,
                                             "Prepend title and ingredient words to the input");
  train_opts["epochs"] = sc_train->add_option("--epochs", to.cfg.epochs, "Training epochs");
  train_opts["batch"] = sc_train->add_option("--batch-size", to.cfg.batch_size, "Batch size");
  train_opts["lr"] = sc_train->add_option("--learning-rate", to.cfg.learning_rate, "Step size");
  train_opts["clip"] =
      sc_train->add_option("--grad-clip-norm", to.cfg.grad_clip_norm, "Global-norm clip");
  train_opts["patience"] = sc_train->add_option("--patience", to.cfg.early_stop_patience,
                                                "Early-stop patience (0 disables)");
  train_opts["rho"] = sc_train->add_option(
      "--rho", to.cfg.partial_fraction, "Fraction of words kept per training sequence");
  train_opts["w0"] = sc_train->add_option("--wce-w0", to.cfg.wce_weight0, "WCE weight, label 0");
  train_opts["w1"] = sc_train->add_option("--wce-w1", to.cfg.wce_weight1, "WCE weight, label 1");

  // generate
  auto* sc_gen = app.add_subcommand("generate", "Generate actions from partial descriptions");
  GenerateOptions go;
  sc_gen->add_option("--checkpoint", go.checkpoint, "Model checkpoint")->required();
  sc_gen->add_option("--vocab", go.vocab, "Vocabulary JSON")->required();
  auto* gen_corpus = sc_gen->add_option("--corpus", go.corpus, "JSONL corpus to prompt from");
  auto* gen_text = sc_gen->add_option("--text", go.text, "Single recipe text to prompt from");
  gen_corpus->excludes(gen_text);
  sc_gen->add_option("--rho", go.rho, "Fraction of words kept in the prompt (default 1.0)");
  sc_gen->add_option("--seed", go.seed, "Sampling seed");
  sc_gen->add_option("--max-len", go.max_len, "Generation cap (default: model length)");
  sc_gen->add_flag("--include-title-ingredients", go.include_context,
                   "Prepend title and ingredient words to the input");

  // eval
  auto* sc_eval = app.add_subcommand("eval", "Score predictions against gold actions");
  std::string ev_pred, ev_gold, ev_ckpt;
  bool ev_macro = false;
  sc_eval->add_option("--predictions", ev_pred, "Predictions JSONL {id, actions}")->required();
  sc_eval->add_option("--gold", ev_gold, "Gold JSONL corpus")->required();
  sc_eval->add_flag("--macro", ev_macro, "Also report macro-averaged metrics (non-default)");
  sc_eval->add_option("--checkpoint", ev_ckpt, "Fill the resource block from this checkpoint");

  // baseline
  auto* sc_base = app.add_subcommand("baseline", "Rule-based lexicon-lookup predictions");
  std::string ba_corpus, ba_lexicon, ba_out;
  sc_base->add_option("--corpus", ba_corpus, "JSONL recipe corpus")->required();
  sc_base->add_option("--lexicon", ba_lexicon,
                      "Newline-delimited action words (default: corpus gold actions)");
  sc_base->add_option("--out", ba_out, "Write predictions here instead of standard output");

  // gradcheck
  auto* sc_grad = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
  std::string gc_variant;
  std::uint64_t gc_seed = 1;
  sc_grad->add_option("--variant", gc_variant, "nn or pf")->required();
  sc_grad->add_option("--seed", gc_seed, "Test-point seed (default 1)");

  // resources
  auto* sc_res = app.add_subcommand("resources", "Parameter count and byte estimate");
  std::string rs_ckpt;
  sc_res->add_option("--checkpoint", rs_ckpt, "Model checkpoint")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_vocab->parsed()) {
      const auto records = cookgen::load_corpus(bv_corpus);
      const cookgen::Vocabulary vocab = cookgen::build_vocab(records, bv_min_count);
      vocab.save(bv_out);
      std::cout << json{{"vocab_size", vocab.size()}, {"out", bv_out}}.dump() << "\n";
    } else if (sc_train->parsed()) {
      run_train(to, train_opts);
    } else if (sc_gen->parsed()) {
      if (go.corpus.empty() && go.text.empty())
        throw error("generate: provide --corpus or --text");
      run_generate(go);
    } else if (sc_eval->parsed()) {
      run_eval(ev_pred, ev_gold, ev_macro, ev_ckpt);
    } else if (sc_base->parsed()) {
      run_baseline(ba_corpus, ba_lexicon, ba_out);
    } else if (sc_grad->parsed()) {
      run_gradcheck(gc_variant, gc_seed);
    } else if (sc_res->parsed()) {
      run_resources(rs_ckpt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
