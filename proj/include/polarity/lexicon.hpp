#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polarity/core.hpp"

namespace polarity {

constexpr int kDefaultNegationWindow = 2;

/// One base method: a token->score table with optional negation flipping.
struct Lexicon {
    std::string name;
    std::unordered_map<std::string, double> entries;
    std::unordered_set<std::string> negation_tokens;
    int negation_window = kDefaultNegationWindow;
};

/// Ordered collection of base methods; order is fixed for an experiment.
struct MethodBank {
    std::vector<Lexicon> methods;

    std::vector<std::string> method_names() const;
    void validate() const;  // >= 3 methods, unique non-empty names, sane entries
};

struct EmoticonMap {
    std::map<std::string, Polarity> mapping;  // ordered for deterministic iteration

    bool empty() const { return mapping.empty(); }
    std::set<std::string> token_set() const;
};

/// Per-sentence, per-method polarity outputs, aligned with dataset order.
struct PredictionMatrix {
    std::vector<std::string> method_names;
    std::vector<std::string> ids;                        // dataset record order
    std::vector<std::vector<Polarity>> rows;             // rows[i][m], aligned with ids
    std::unordered_map<std::string, std::size_t> row_of;

    const std::vector<Polarity>& row(const std::string& id) const;
    PredictionMatrix restricted_to(const std::vector<std::string>& subset) const;
};

/// Sign of the summed entry scores of matched tokens; a scored token preceded
/// by a negation token within negation_window positions contributes with
/// flipped sign. Zero total maps to Neutral.
Polarity score_sentence(const Lexicon& lexicon, const std::vector<std::string>& tokens);

/// Unique label of all matched emoticons; nullopt when none match or the
/// matches disagree.
std::optional<Polarity> emoticon_label(const std::vector<std::string>& tokens,
                                       const EmoticonMap& map);

/// Copy of the dataset with emoticon_label filled for every record.
Dataset annotate_emoticons(const Dataset& dataset, const EmoticonMap& map);

PredictionMatrix run_base_methods(const MethodBank& bank, const Dataset& dataset,
                                  int threads = 1);

/// File format: `token<TAB>score` lines, `#` comments, and an optional
/// `!negation` section listing one negation token per line.
Lexicon load_lexicon(const std::filesystem::path& path);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

/// Loads every *.txt under dir, sorted by filename.
MethodBank load_method_bank(const std::filesystem::path& dir);

/// File format: `emoticon<TAB>label` per line, `#` comments.
EmoticonMap load_emoticon_map(const std::filesystem::path& path);
void save_emoticon_map(const EmoticonMap& map, const std::filesystem::path& path);

}  // namespace polarity
