// SPDX-License-Identifier: Apache-2.0
//
// Writes the bundled fixture files deterministically: the 64-recipe synthetic
// training corpus, the hand-written tiny and ambiguity corpora, the ambiguity
// lexicon, and the frozen partial-sampling golden line. Outputs are committed;
// rerunning must reproduce them byte for byte.

#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cookgen/corpus.hpp"

namespace {

using cookgen::error;
using nlohmann::json;

const std::vector<std::string> kVerbs = {"marinate", "boil",  "saute", "grill",
                                         "chop",     "simmer", "roast", "whisk",
                                         "knead",    "steam",  "glaze", "sear"};

const std::vector<std::string> kNouns = {
    "chicken",  "lentils",   "potatoes",    "carrots",   "onions",    "garlic",
    "rice",     "beans",     "salmon",      "beef",      "pork",      "tofu",
    "noodles",  "dough",     "batter",      "spinach",   "kale",      "broccoli",
    "peppers",  "mushrooms", "tomatoes",    "eggplant",  "zucchini",  "squash",
    "corn",     "peas",      "shrimp",      "scallops",  "mussels",   "clams",
    "turkey",   "duck",      "lamb",        "ribs",      "brisket",   "sausage",
    "bacon",    "eggs",      "cheese",      "butter",    "cream",     "milk",
    "yogurt",   "bread",     "buns",        "tortillas", "pasta",     "gnocchi",
    "dumplings", "pancakes", "waffles",     "oats",      "barley",    "quinoa",
    "couscous", "polenta",   "cabbage",     "cauliflower", "asparagus", "leeks",
    "celery",   "radishes",  "beets",       "turnips"};

const std::vector<std::string> kAdjectives = {
    "fresh",  "red",     "green",  "sweet",  "spicy",  "tender", "crispy", "golden",
    "smoked", "dried",   "ripe",   "young",  "wild",   "whole",  "firm",   "soft",
    "thick",  "thin",    "warm",   "cold",   "small",  "large",  "juicy",  "earthy",
    "nutty",  "zesty",   "mild",   "hot",    "plump",  "crunchy", "silky", "flaky",
    "glossy", "fragrant", "hearty", "rustic", "creamy", "tangy",  "smoky", "briny"};

const std::vector<std::string> kPantry = {
    "paprika",  "thyme",    "basil",    "oregano",  "cumin",    "salt",
    "pepper",   "vinegar",  "honey",    "mustard",  "soy",      "ginger",
    "sesame",   "olive",    "oil",      "flour",    "sugar",    "yeast",
    "cinnamon", "nutmeg",   "cloves",   "saffron",  "turmeric", "rosemary",
    "sage",     "parsley",  "dill",     "chives",   "capers",   "olives",
    "almonds",  "walnuts",  "pecans",   "raisins",  "dates",    "figs",
    "lemon",    "lime",     "orange",   "apple",    "pear",     "plum",
    "cherry",   "mango",    "papaya",   "coconut",  "vanilla",  "cocoa",
    "coffee",   "cardamom", "wine",     "stock",    "broth",    "molasses",
    "tahini",   "miso",     "harissa",  "sumac",    "zaatar",   "fennel",
    "anise",    "juniper",  "bay",      "lemongrass"};

std::string cap(std::string w) {
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

void check_pools() {
  std::set<std::string> seen;
  auto add_all = [&](const std::vector<std::string>& pool, std::size_t want, const char* name) {
    if (pool.size() != want)
      throw error(std::string(name) + ": expected " + std::to_string(want) + " words, got " +
                  std::to_string(pool.size()));
    for (const std::string& w : pool)
      if (!seen.insert(w).second) throw error("fixture pools: duplicate word " + w);
  };
  add_all(kVerbs, 12, "verbs");
  add_all(kNouns, 64, "nouns");
  add_all(kAdjectives, 40, "adjectives");
  add_all(kPantry, 64, "pantry");
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path);
  for (const std::string& line : lines) out << line << "\n";
}

// 64 recipes over 12 planted action verbs. Every recipe keys its actions to a
// unique noun so a partial prompt that loses the verb still identifies the
// recipe. Indices 0..47 are one-action recipes of 3-4 words; 48..63 are
// two-action recipes of 5-7 words, where a 0.8 prompt drops one word.
std::vector<std::string> synthetic_corpus() {
  std::vector<std::string> lines;
  for (int i = 0; i < 64; ++i) {
    const std::string& verb = kVerbs[static_cast<std::size_t>(i % 12)];
    const std::string& second = kVerbs[static_cast<std::size_t>((i + 5) % 12)];
    const std::string& noun = kNouns[static_cast<std::size_t>(i)];
    const std::string& adj = kAdjectives[static_cast<std::size_t>(i % 40)];
    const std::string& pantry = kPantry[static_cast<std::size_t>(i)];

    std::string instruction;
    json actions = json::array();
    if (i < 24) {
      instruction = cap(verb) + " the " + noun + ".";
      actions.push_back(verb);
    } else if (i < 48) {
      instruction = cap(verb) + " the " + adj + " " + noun + ".";
      actions.push_back(verb);
    } else if (i < 56) {
      instruction = cap(verb) + " and " + second + " the " + noun + ".";
      actions.push_back(verb);
      actions.push_back(second);
    } else if (i < 60) {
      instruction = cap(verb) + " the " + noun + " then " + second + " it.";
      actions.push_back(verb);
      actions.push_back(second);
    } else {
      instruction = cap(verb) + " the " + adj + " " + noun + " then " + second + " it.";
      actions.push_back(verb);
      actions.push_back(second);
    }

    char id[8];
    std::snprintf(id, sizeof id, "r%03d", i);
    const json record = {{"id", id},
                         {"title", cap(adj) + " " + noun + " recipe"},
                         {"ingredients", json::array({noun, pantry})},
                         {"instructions", json::array({instruction})},
                         {"actions", actions}};
    lines.push_back(record.dump());
  }
  return lines;
}

std::vector<std::string> tiny_corpus() {
  const auto rec = [](const char* id, const char* title, std::vector<std::string> ingredients,
                      const char* instruction, std::vector<std::string> actions) {
    return json{{"id", id},
                {"title", title},
                {"ingredients", ingredients},
                {"instructions", json::array({instruction})},
                {"actions", actions}}
        .dump();
  };
  return {
      rec("t1", "Water recipe", {"water"}, "Bring the water to boil.", {"boil"}),
      rec("t2", "Chicken recipe", {"chicken", "soy"}, "Marinate the chicken.", {"marinate"}),
      rec("t3", "Onion recipe", {"onions"}, "Chop the onions and saute them.",
          {"chop", "saute"}),
      rec("t4", "Egg recipe", {"eggs"}, "Whisk the eggs.", {"whisk"}),
      rec("t5", "Sauce recipe", {"tomatoes"}, "Simmer the sauce until thick.", {"simmer"}),
      rec("t6", "Bun recipe", {"flour", "yeast"}, "Knead the dough then steam it.",
          {"knead", "steam"}),
  };
}

// Instruction nouns that collide with lexicon verbs; the rule baseline must
// overpredict here in a way the scorer quantifies exactly.
std::vector<std::string> ambiguity_corpus() {
  const auto rec = [](const char* id, const char* instruction, std::vector<std::string> actions) {
    return json{{"id", id},
                {"title", "Ambiguity fixture"},
                {"ingredients", json::array()},
                {"instructions", json::array({instruction})},
                {"actions", actions}}
        .dump();
  };
  return {
      rec("a1", "Boil the roast until tender.", {"boil"}),
      rec("a2", "Glaze the carrots with honey.", {"glaze"}),
      rec("a3", "Serve the steam buns warm.", {}),
      rec("a4", "Whisk the eggs and fold in the cream.", {"whisk"}),
      rec("a5", "Simmer the broth then strain it.", {"simmer", "strain"}),
      rec("a6", "Sear the duck skin side down.", {"sear"}),
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the bundled fixture files"};
  std::string out_dir = "fixtures";
  app.add_option("--out-dir", out_dir, "Directory to write fixtures into (default: fixtures)");
  CLI11_PARSE(app, argc, argv);

  try {
    check_pools();
    write_lines(out_dir + "/synthetic64.jsonl", synthetic_corpus());
    write_lines(out_dir + "/tiny.jsonl", tiny_corpus());
    write_lines(out_dir + "/ambiguity.jsonl", ambiguity_corpus());
    write_lines(out_dir + "/ambiguity_lexicon.txt",
                {"boil", "roast", "glaze", "steam", "whisk", "simmer", "sear"});

    // Frozen sampling: recipe t3, half its words, seed 7.
    const auto records = cookgen::load_corpus(out_dir + "/tiny.jsonl");
    const cookgen::Vocabulary vocab = cookgen::build_vocab(records, 1);
    cookgen::Rng rng(7);
    std::string golden;
    for (int id : cookgen::sample_partial(records.at(2), vocab, 0.5, rng)) {
      if (!golden.empty()) golden += ' ';
      golden += vocab.word(id);
    }
    write_lines(out_dir + "/golden_partial.txt", {golden});
    std::cerr << "fixtures written to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
