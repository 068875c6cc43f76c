#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polarity/core.hpp"
#include "polarity/learner.hpp"
#include "polarity/lexicon.hpp"
#include "polarity/metrics.hpp"

namespace polarity {

struct AgreementResult {
    int count = 0;                        // max label frequency
    Polarity label = Polarity::Neutral;   // arg max (lowest label on a tie)
    bool unique = true;                   // exactly one label attains the max
};

/// Label with a strict plurality; any tie for the maximum resolves to Neutral.
Polarity majority_vote(const std::vector<Polarity>& votes);

AgreementResult agreement(const std::vector<Polarity>& votes);

struct BootstrapConfig {
    int agreement_threshold = 7;
    double confidence_threshold = 0.7;
    bool use_bow = true;
    bool use_emoticons = true;
    std::uint64_t seed = 0;
    MethodEncoding encoding = MethodEncoding::Ordinal;
    int min_df = 2;

    void validate(std::size_t n_methods) const;
};

struct SeedEntry {
    std::string id;
    Polarity label = Polarity::Neutral;
    Provenance provenance = Provenance::AgreementSeed;
};

struct SeedResult {
    std::vector<SeedEntry> seeds;        // matrix row order
    std::vector<std::string> remaining;  // matrix row order
};

/// Alg. step 1: a sentence is seeded iff its agreement count reaches A with a
/// unique maximum; everything else stays in `remaining`.
SeedResult build_seed_training(const PredictionMatrix& matrix, int agreement_threshold);

/// Inserts every record with an unambiguous emoticon label; an emoticon label
/// replaces an agreement label on conflict.
std::vector<SeedEntry> augment_with_emoticons(const std::vector<SeedEntry>& seeds,
                                              const std::vector<SentenceRecord>& records,
                                              const EmoticonMap& map);

/// The learner-module hook used by the bootstrap; only the forest is shipped.
struct ForestLearner {
    HyperParams params;
};

struct BootstrapPrediction {
    std::string id;
    Polarity label = Polarity::Neutral;
    double confidence = 0.0;
};

struct BootstrapResult {
    std::vector<BootstrapPrediction> predictions;  // test-part order
    std::vector<TrainingExample> training;         // final training set
    std::size_t seed_size = 0;
    std::size_t final_size = 0;
};

/// Agreement-seeded self-training: seed, train, gate remaining predictions at
/// the confidence threshold, retrain once if anything was added, classify the
/// test part. Deterministic for a fixed config seed.
BootstrapResult bootstrap(const Dataset& train_part, const Dataset& test_part,
                          const MethodBank& bank, const BootstrapConfig& config,
                          const ForestLearner& learner, const EmoticonMap* emoticons = nullptr,
                          int threads = 1);

/// Same pipeline on precomputed prediction rows (used by the benchmark driver
/// so the matrix is built once per dataset).
BootstrapResult bootstrap_with_matrix(const std::vector<SentenceRecord>& train_records,
                                      const std::vector<SentenceRecord>& test_records,
                                      const PredictionMatrix& train_matrix,
                                      const PredictionMatrix& test_matrix,
                                      const BootstrapConfig& config, const ForestLearner& learner,
                                      const EmoticonMap* emoticons = nullptr, int threads = 1);

struct WeightVector {
    std::vector<double> weights;
};

/// Per-class sums of the voting methods' weights; strict arg max, ties to
/// Neutral. Uniform weights reduce to majority_vote.
Polarity weighted_vote(const std::vector<Polarity>& votes, const WeightVector& weights);

struct WeightSearchResult {
    WeightVector best;
    double best_macro_f1 = 0.0;
};

/// Enumerates every |grid|^|methods| weight vector except all-zero and returns
/// the first one (in lexicographic grid order) attaining the maximal macro-F1
/// on the given rows. No approximation; rows are collapsed to distinct vote
/// patterns and partial per-class sums are reused along the enumeration tree.
WeightSearchResult exhaustive_weight_search(const std::vector<std::vector<Polarity>>& rows,
                                            const std::vector<Polarity>& gold,
                                            const std::vector<double>& grid,
                                            MacroVariant variant = MacroVariant::MeanF1,
                                            int threads = 1);

}  // namespace polarity
