// SPDX-License-Identifier: Apache-2.0
#include "cookgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

namespace cookgen {

namespace {

using nlohmann::json;

const char* kSpecialWords[] = {"<pad>", "<bos>", "<eos>", "<act>"};
constexpr const char* kUnkWord = "<unk>";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      std::size_t b = i, e = j;
      while (b < e && is_punct(text[b])) ++b;
      while (e > b && is_punct(text[e - 1])) --e;
      if (e > b) {
        std::string w;
        w.reserve(e - b);
        for (std::size_t k = b; k < e; ++k)
          w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
        out.push_back(std::move(w));
      }
    }
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<bool> action_flags)
    : words_(std::move(words)), action_flags_(std::move(action_flags)) {
  if (words_.size() < 5)
    throw error("vocabulary: need the 4 control tokens plus <unk>, got " +
                std::to_string(words_.size()) + " words");
  if (words_.size() != action_flags_.size())
    throw error("vocabulary: " + std::to_string(words_.size()) + " words but " +
                std::to_string(action_flags_.size()) + " action flags");
  for (int s = 0; s < 4; ++s)
    if (words_[static_cast<std::size_t>(s)] != kSpecialWords[s])
      throw error("vocabulary: id " + std::to_string(s) + " must be " + kSpecialWords[s] +
                  ", got " + words_[static_cast<std::size_t>(s)]);
  if (words_.back() != kUnkWord)
    throw error("vocabulary: last id must be <unk>, got " + words_.back());
  for (int i = 0; i < size(); ++i) {
    if (action_flags_[static_cast<std::size_t>(i)] && is_special(i))
      throw error("vocabulary: action flag set on special id " + std::to_string(i));
    if (!index_.emplace(words_[static_cast<std::size_t>(i)], i).second)
      throw error("vocabulary: duplicate word " + words_[static_cast<std::size_t>(i)]);
  }
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size())
    throw error("vocabulary: id " + std::to_string(id) + " out of range for size " +
                std::to_string(size()));
  return words_[static_cast<std::size_t>(id)];
}

int Vocabulary::id(const std::string& w) const {
  auto it = index_.find(w);
  return it == index_.end() ? unk_id() : it->second;
}

bool Vocabulary::action_flag(int id) const {
  if (id < 0 || id >= size())
    throw error("vocabulary: id " + std::to_string(id) + " out of range for size " +
                std::to_string(size()));
  return action_flags_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  json j;
  j["format_version"] = 1;
  j["words"] = words_;
  j["action_flags"] = action_flags_;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("vocabulary: cannot write " + path);
  out << j.dump() << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("vocabulary: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw error("vocabulary: " + path + ": " + e.what());
  }
  if (j.value("format_version", 0) != 1)
    throw error("vocabulary: " + path + ": unsupported format_version");
  return Vocabulary(j.at("words").get<std::vector<std::string>>(),
                    j.at("action_flags").get<std::vector<bool>>());
}

Vocabulary build_vocab(const std::vector<RecipeRecord>& records, int min_count) {
  if (records.empty()) throw error("build_vocab: empty corpus");
  std::map<std::string, long> freq;
  std::set<std::string> actions;
  for (const RecipeRecord& r : records) {
    for (const std::string& w : r.title) ++freq[w];
    for (const auto& line : r.ingredients)
      for (const std::string& w : line) ++freq[w];
    for (const std::string& w : r.instruction_words) ++freq[w];
    actions.insert(r.gold_actions.begin(), r.gold_actions.end());
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [w, n] : freq)
    if (n >= min_count || actions.count(w)) kept.emplace_back(w, n);
  // Gold actions can occur only outside the counted fields in odd corpora;
  // they are retained regardless.
  for (const std::string& a : actions)
    if (!freq.count(a)) kept.emplace_back(a, 0);
  std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::string> words(std::begin(kSpecialWords), std::end(kSpecialWords));
  std::vector<bool> flags(4, false);
  for (const auto& [w, n] : kept) {
    words.push_back(w);
    flags.push_back(actions.count(w) != 0);
  }
  words.push_back(kUnkWord);
  flags.push_back(false);
  return Vocabulary(std::move(words), std::move(flags));
}

std::vector<int> make_tag_labels(const RecipeRecord& record, const Vocabulary&) {
  std::vector<int> labels;
  labels.reserve(record.instruction_words.size());
  for (const std::string& w : record.instruction_words)
    labels.push_back(record.gold_actions.count(w) ? 1 : 0);
  return labels;
}

std::vector<int> sample_partial(const RecipeRecord& record, const Vocabulary& vocab,
                                double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw error("sample_partial: fraction must be in (0, 1], got " + std::to_string(fraction));
  const std::size_t n = record.instruction_words.size();
  if (n == 0) throw error("sample_partial: recipe " + record.id + " has no instruction words");
  // The nudge keeps exact products exact: fraction*n computed in binary can
  // land a hair above an integer and must not round the count up.
  std::size_t k = static_cast<std::size_t>(
      std::max(1.0, std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  k = std::min(k, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.next_below(n - i))]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<int> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(vocab.id(record.instruction_words[i]));
  return out;
}

std::vector<int> build_sequence(const std::vector<int>& word_ids,
                                const std::set<std::string>& actions, const Vocabulary& vocab,
                                int max_len) {
  const int overhead = 3 + static_cast<int>(actions.size());
  if (overhead > max_len)
    throw error("build_sequence: " + std::to_string(actions.size()) +
                " actions cannot fit in sequence length " + std::to_string(max_len));
  const std::size_t budget = static_cast<std::size_t>(max_len - overhead);
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(max_len));
  seq.push_back(Vocabulary::kBos);
  seq.insert(seq.end(), word_ids.begin(),
             word_ids.begin() + static_cast<std::ptrdiff_t>(std::min(budget, word_ids.size())));
  seq.push_back(Vocabulary::kAct);
  for (const std::string& a : actions) seq.push_back(vocab.id(a));
  seq.push_back(Vocabulary::kEos);
  seq.resize(static_cast<std::size_t>(max_len), Vocabulary::kPad);
  return seq;
}

EncodedExample encode_example(const RecipeRecord& record, const Vocabulary& vocab, int max_len,
                              double partial_fraction, Rng& rng) {
  EncodedExample ex;
  ex.id = record.id;
  ex.word_ids.reserve(record.instruction_words.size());
  for (const std::string& w : record.instruction_words) ex.word_ids.push_back(vocab.id(w));
  ex.full_sequence = build_sequence(ex.word_ids, record.gold_actions, vocab, max_len);
  ex.partial = sample_partial(record, vocab, partial_fraction, rng);
  ex.tag_labels = make_tag_labels(record, vocab);
  return ex;
}

std::vector<RecipeRecord> load_corpus(const std::string& path, std::ostream* warn_stream) {
  std::ostream& warn = warn_stream ? *warn_stream : std::cerr;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("corpus: cannot read " + path);
  std::vector<RecipeRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw error("corpus: " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      RecipeRecord r;
      r.id = j.at("id").get<std::string>();
      r.title = tokenize(j.at("title").get<std::string>());
      for (const auto& ing : j.at("ingredients"))
        r.ingredients.push_back(tokenize(ing.get<std::string>()));
      std::string joined;
      for (const auto& ins : j.at("instructions")) {
        if (!joined.empty()) joined += ' ';
        joined += ins.get<std::string>();
      }
      r.instruction_words = tokenize(joined);
      for (const auto& a : j.at("actions"))
        for (const std::string& w : tokenize(a.get<std::string>())) r.gold_actions.insert(w);
      if (r.instruction_words.empty())
        throw error("corpus: " + path + " line " + std::to_string(line_no) + ": recipe " + r.id +
                    " has no instruction words");
      const std::set<std::string> distinct(r.instruction_words.begin(),
                                           r.instruction_words.end());
      for (const std::string& a : r.gold_actions)
        if (!distinct.count(a))
          warn << "warning: recipe " << r.id << ": gold action '" << a
               << "' not among instruction words\n";
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw error("corpus: " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::set<std::string> load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("lexicon: cannot read " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line))
    for (const std::string& w : tokenize(line)) words.insert(w);
  if (words.empty()) throw error("lexicon: " + path + " contains no words");
  return words;
}

}  // namespace cookgen
