#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarity/errors.hpp"

namespace polarity {

/// Three-way sentence polarity. The numeric order (Negative < Neutral <
/// Positive) is only used for deterministic iteration, never to break votes.
enum class Polarity : int { Negative = 0, Neutral = 1, Positive = 2 };

constexpr int kNumClasses = 3;
constexpr std::array<Polarity, 3> kAllPolarities = {Polarity::Negative, Polarity::Neutral,
                                                    Polarity::Positive};

inline int label_index(Polarity p) { return static_cast<int>(p); }
inline Polarity label_at(int i) { return static_cast<Polarity>(i); }

/// Ordinal encoding used as a learner feature: Negative/Neutral/Positive -> -1/0/+1.
inline double label_signed(Polarity p) { return static_cast<double>(label_index(p) - 1); }

std::string_view label_name(Polarity p);

/// Parses "positive"/"negative"/"neutral" (case-insensitive). Returns nullopt
/// for anything else; callers decide whether that is "unlabeled" or an error.
std::optional<Polarity> parse_label(std::string_view text);

struct SentenceRecord {
    std::string id;
    std::string text;
    std::optional<Polarity> gold;
    std::optional<Polarity> emoticon_label;  // filled from an EmoticonMap, not persisted
};

struct Dataset {
    std::string name;
    std::vector<SentenceRecord> records;

    bool fully_labeled() const;
};

/// Record-index -> fold-index map for k-fold cross validation.
struct FoldAssignment {
    int k = 0;
    std::vector<int> fold_of;                      // aligned with Dataset::records
    std::unordered_map<std::string, int> by_id;

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

/// Lowercases word runs, splits on Unicode whitespace, and emits each
/// punctuation run as a single token. Sequences present in `preserve` are
/// kept verbatim as single tokens (emoticons); matches are attempted at
/// token boundaries and inside punctuation runs, longest match first.
std::vector<std::string> tokenize(std::string_view text,
                                  const std::set<std::string>& preserve = {});

/// TSV with header `id<TAB>label<TAB>text`; label is one of
/// positive/negative/neutral/unlabeled (case-insensitive).
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Stratified by gold label when every record carries one, uniform otherwise.
/// Pure function of (record order, gold labels, k, seed).
FoldAssignment split_folds(const Dataset& dataset, int k, std::uint64_t seed);

}  // namespace polarity
