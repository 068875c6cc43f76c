#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polarity/core.hpp"

namespace polarity {

/// TF-IDF vocabulary built from training-part sentences only.
struct Vocabulary {
    std::vector<std::string> terms;                    // lexicographic order
    std::unordered_map<std::string, int> index_of;
    std::vector<int> doc_freq;                         // aligned with terms
    int n_docs = 0;

    std::size_t size() const { return terms.size(); }
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, int min_df = 2);

enum class MethodEncoding { Ordinal, OneHot };

/// method block (one value per method: -1/0/+1, or 3 per method when one-hot)
/// followed by a TF-IDF bag-of-words block. Stored sparse, addressed dense.
struct FeatureVector {
    std::vector<std::pair<int, double>> values;  // sorted by feature index
    int dim = 0;

    double at(int feature) const;
};

FeatureVector build_features(const std::vector<std::string>& tokens,
                             const std::vector<Polarity>& method_outputs,
                             const Vocabulary* vocab,
                             MethodEncoding encoding = MethodEncoding::Ordinal);

enum class Provenance { AgreementSeed, BootstrapAdded, EmoticonTransfer, GoldSupervised };

std::string_view provenance_name(Provenance p);

struct TrainingExample {
    std::string sentence_id;
    FeatureVector features;
    Polarity label = Polarity::Neutral;
    Provenance provenance = Provenance::AgreementSeed;
};

struct HyperParams {
    int n_trees = 100;
    int max_depth = 0;          // 0 = unlimited
    int min_leaf = 1;
    int features_per_split = 0; // 0 = ceil(sqrt(d))
};

struct TreeNode {
    int feature = -1;           // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<int, 3> counts{}; // class histogram at the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int leaf_for(const FeatureVector& x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    HyperParams params;
    std::uint64_t seed = 0;
    int n_features = 0;
};

/// Bagged CART trees, Gini splits over ceil(sqrt(d)) sampled features, leaf
/// class histograms. Tree t draws all randomness from a stream derived from
/// seed and t, so parallel and serial training produce the same forest.
ForestModel train_forest(const std::vector<TrainingExample>& examples, const HyperParams& params,
                         std::uint64_t seed, int threads = 1);

/// Plurality of tree votes; ties resolve to Neutral. Confidence is the top
/// vote count over n_trees.
std::pair<Polarity, double> predict_with_confidence(const ForestModel& model,
                                                    const FeatureVector& features);

/// Picks the grid point with the best mean inner-fold macro-F1 (ties: first).
HyperParams grid_search(const std::vector<TrainingExample>& examples,
                        const std::vector<HyperParams>& grid, int inner_k, std::uint64_t seed,
                        int threads = 1);

/// Versioned JSON dump; reload reproduces predictions bit-exactly.
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace polarity
