// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cookgen/rng.hpp"
#include "cookgen/types.hpp"

namespace cookgen {

// One recipe: tokenized text fields plus the gold action-word set.
struct RecipeRecord {
  std::string id;
  std::vector<std::string> title;
  std::vector<std::vector<std::string>> ingredients;
  std::vector<std::string> instruction_words;
  std::set<std::string> gold_actions;
};

// Lowercase, split on whitespace, strip leading/trailing punctuation from
// each token, drop tokens that end up empty. Idempotent on its own output.
std::vector<std::string> tokenize(const std::string& text);

// Word table with dense ids. Ids 0..3 are the fixed control tokens, the
// unknown-word id is always last, and content words sit between them ordered
// by descending corpus frequency then ascending lexicographic order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kAct = 3;

  Vocabulary(std::vector<std::string> words, std::vector<bool> action_flags);

  int size() const { return static_cast<int>(words_.size()); }
  int unk_id() const { return size() - 1; }

  const std::string& word(int id) const;
  // Unknown words map to unk_id(); never fails on tokenizer output.
  int id(const std::string& w) const;
  bool contains(const std::string& w) const { return index_.count(w) != 0; }

  // Control tokens plus the unknown-word pseudo-token. These never appear in
  // action sets and are masked from generation.
  bool is_special(int id) const { return id <= kAct || id == unk_id(); }
  bool action_flag(int id) const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<bool>& action_flags() const { return action_flags_; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::vector<bool> action_flags_;
  std::unordered_map<std::string, int> index_;
};

// Frequencies are counted over title, ingredient, and instruction words of
// every record. Words seen fewer than min_count times are dropped (they map
// to the unknown id), except gold action words, which are always retained
// and flagged.
Vocabulary build_vocab(const std::vector<RecipeRecord>& records, int min_count);

// Model-ready encoding of one record.
struct EncodedExample {
  std::string id;
  // [BOS] words [ACT] actions [EOS], padded to exactly the model length.
  std::vector<int> full_sequence;
  // Encoded instruction words, untruncated.
  std::vector<int> word_ids;
  // Order-preserving sampled subset of word_ids.
  std::vector<int> partial;
  // One 0/1 label per instruction word: is it a gold action occurrence.
  std::vector<int> tag_labels;
};

// Per-position binary labels over instruction_words.
std::vector<int> make_tag_labels(const RecipeRecord& record, const Vocabulary& vocab);

// Sample max(1, ceil(fraction * word count)) distinct positions uniformly and
// return their token ids in original order.
std::vector<int> sample_partial(const RecipeRecord& record, const Vocabulary& vocab,
                                double fraction, Rng& rng);

// Build the padded training sequence from the given instruction words (callers
// pass the full word list or a sampled subset). Words are truncated from the
// end to fit; actions never are. Throws if actions alone cannot fit.
std::vector<int> build_sequence(const std::vector<int>& word_ids,
                                const std::set<std::string>& actions, const Vocabulary& vocab,
                                int max_len);

EncodedExample encode_example(const RecipeRecord& record, const Vocabulary& vocab, int max_len,
                              double partial_fraction, Rng& rng);

// JSONL corpus: {"id","title","ingredients":[...],"instructions":[...],
// "actions":[...]} per line. Instruction strings are joined with single
// spaces before tokenization. Gold actions that never occur among the
// instruction words are reported on warn_stream (not dropped).
std::vector<RecipeRecord> load_corpus(const std::string& path, std::ostream* warn_stream = nullptr);

// Newline-delimited lowercase words.
std::set<std::string> load_lexicon(const std::string& path);

}  // namespace cookgen
