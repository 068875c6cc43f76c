#include "polarity/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "polarity/metrics.hpp"
#include "polarity/parallel.hpp"
#include "polarity/rng.hpp"

namespace polarity {

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::AgreementSeed: return "agreement_seed";
        case Provenance::BootstrapAdded: return "bootstrap_added";
        case Provenance::EmoticonTransfer: return "emoticon_transfer";
        case Provenance::GoldSupervised: return "gold_supervised";
    }
    return "agreement_seed";
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, int min_df) {
    if (docs.empty()) throw DataError("cannot build a vocabulary from zero documents");
    std::unordered_map<std::string, int> df;
    for (const auto& doc : docs) {
        std::set<std::string> uniq(doc.begin(), doc.end());
        for (const auto& tok : uniq) ++df[tok];
    }
    Vocabulary vocab;
    vocab.n_docs = static_cast<int>(docs.size());
    for (const auto& [tok, count] : df) {
        if (count >= min_df) vocab.terms.push_back(tok);
    }
    std::sort(vocab.terms.begin(), vocab.terms.end());
    vocab.doc_freq.reserve(vocab.terms.size());
    for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
        vocab.index_of.emplace(vocab.terms[i], static_cast<int>(i));
        vocab.doc_freq.push_back(df[vocab.terms[i]]);
    }
    return vocab;
}

double FeatureVector::at(int feature) const {
    auto it = std::lower_bound(values.begin(), values.end(), feature,
                               [](const std::pair<int, double>& p, int f) { return p.first < f; });
    return (it != values.end() && it->first == feature) ? it->second : 0.0;
}

FeatureVector build_features(const std::vector<std::string>& tokens,
                             const std::vector<Polarity>& method_outputs, const Vocabulary* vocab,
                             MethodEncoding encoding) {
    FeatureVector fv;
    const int m = static_cast<int>(method_outputs.size());
    const int method_width = encoding == MethodEncoding::Ordinal ? m : 3 * m;
    fv.dim = method_width + (vocab ? static_cast<int>(vocab->size()) : 0);
    if (encoding == MethodEncoding::Ordinal) {
        for (int i = 0; i < m; ++i) {
            const double v = label_signed(method_outputs[i]);
            if (v != 0.0) fv.values.emplace_back(i, v);
        }
    } else {
        for (int i = 0; i < m; ++i) {
            fv.values.emplace_back(3 * i + label_index(method_outputs[i]), 1.0);
        }
    }
    if (vocab && vocab->size() > 0) {
        std::unordered_map<int, int> tf;
        for (const auto& tok : tokens) {
            auto it = vocab->index_of.find(tok);
            if (it != vocab->index_of.end()) ++tf[it->second];
        }
        std::vector<std::pair<int, double>> bow;
        bow.reserve(tf.size());
        for (const auto& [term, count] : tf) {
            const double idf =
                std::log(static_cast<double>(vocab->n_docs) / vocab->doc_freq[term]);
            const double w = count * idf;
            if (w != 0.0) bow.emplace_back(method_width + term, w);
        }
        std::sort(bow.begin(), bow.end());
        fv.values.insert(fv.values.end(), bow.begin(), bow.end());
    }
    return fv;
}

// --- forest -----------------------------------------------------------------

int DecisionTree::leaf_for(const FeatureVector& x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        node = x.at(nodes[node].feature) <= nodes[node].threshold ? nodes[node].left
                                                                  : nodes[node].right;
    }
    return node;
}

namespace {

// Column-major training matrix; rows mirror the example order.
struct ColMatrix {
    int n = 0;
    int d = 0;
    std::vector<double> data;  // data[f * n + i]

    double at(int f, int i) const { return data[static_cast<std::size_t>(f) * n + i]; }
};

ColMatrix densify(const std::vector<TrainingExample>& examples) {
    ColMatrix X;
    X.n = static_cast<int>(examples.size());
    X.d = examples.front().features.dim;
    X.data.assign(static_cast<std::size_t>(X.n) * X.d, 0.0);
    for (int i = 0; i < X.n; ++i) {
        if (examples[i].features.dim != X.d) {
            throw ShapeMismatch("inconsistent feature dimensions in training set");
        }
        for (const auto& [f, v] : examples[i].features.values) {
            X.data[static_cast<std::size_t>(f) * X.n + i] = v;
        }
    }
    return X;
}

struct TreeBuilder {
    const ColMatrix& X;
    const std::vector<int>& y;
    const HyperParams& params;
    Rng rng;
    int k;  // features considered per split

    std::vector<int> sample;      // bagged row ids, partitioned in place
    std::vector<int> feat_order;  // partial Fisher-Yates pool
    std::vector<std::pair<double, int>> scratch;
    DecisionTree tree;

    TreeBuilder(const ColMatrix& x, const std::vector<int>& labels, const HyperParams& p,
                std::uint64_t tree_seed)
        : X(x), y(labels), params(p), rng(tree_seed) {
        k = params.features_per_split > 0 ? params.features_per_split
                                          : static_cast<int>(std::ceil(std::sqrt(X.d)));
        k = std::clamp(k, 1, X.d);
        feat_order.resize(X.d);
        for (int f = 0; f < X.d; ++f) feat_order[f] = f;
    }

    DecisionTree build() {
        sample.resize(X.n);
        for (int i = 0; i < X.n; ++i) {
            sample[i] = static_cast<int>(bounded(rng, static_cast<std::size_t>(X.n)));
        }
        tree.nodes.clear();
        grow(0, X.n, 0);
        return std::move(tree);
    }

    int grow(int begin, int end, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::array<int, 3> counts{};
        for (int i = begin; i < end; ++i) ++counts[y[sample[i]]];
        tree.nodes[node_id].counts = counts;

        const int n = end - begin;
        const bool pure = std::count(counts.begin(), counts.end(), 0) == 2;
        const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
        if (pure || depth_capped || n < 2 * params.min_leaf) return node_id;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -1.0;
        for (int j = 0; j < k; ++j) {
            std::swap(feat_order[j],
                      feat_order[j + bounded(rng, static_cast<std::size_t>(X.d - j))]);
            const int f = feat_order[j];
            double lo = X.at(f, sample[begin]);
            double hi = lo;
            for (int i = begin + 1; i < end; ++i) {
                const double v = X.at(f, sample[i]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) continue;

            scratch.clear();
            for (int i = begin; i < end; ++i) {
                scratch.emplace_back(X.at(f, sample[i]), y[sample[i]]);
            }
            std::sort(scratch.begin(), scratch.end());

            // Maximizing sum(c^2)/n on both sides minimizes weighted Gini.
            std::array<int, 3> left{};
            std::array<int, 3> right = counts;
            for (int i = 0; i + 1 < n; ++i) {
                const int cls = scratch[i].second;
                ++left[cls];
                --right[cls];
                if (scratch[i].first == scratch[i + 1].first) continue;
                const int nl = i + 1;
                const int nr = n - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                double score = 0.0;
                for (int c = 0; c < 3; ++c) {
                    score += static_cast<double>(left[c]) * left[c] / nl +
                             static_cast<double>(right[c]) * right[c] / nr;
                }
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = (scratch[i].first + scratch[i + 1].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return node_id;

        const auto mid = std::partition(sample.begin() + begin, sample.begin() + end,
                                        [&](int i) { return X.at(best_feature, i) <= best_threshold; });
        const int split = static_cast<int>(mid - sample.begin());
        if (split == begin || split == end) return node_id;  // numeric edge, keep as leaf

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const int left_id = grow(begin, split, depth + 1);
        tree.nodes[node_id].left = left_id;
        const int right_id = grow(split, end, depth + 1);
        tree.nodes[node_id].right = right_id;
        return node_id;
    }
};

int tree_vote(const DecisionTree& tree, const FeatureVector& x) {
    const auto& counts = tree.nodes[tree.leaf_for(x)].counts;
    int best = 0;
    for (int c = 1; c < 3; ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return best;
}

}  // namespace

ForestModel train_forest(const std::vector<TrainingExample>& examples, const HyperParams& params,
                         std::uint64_t seed, int threads) {
    if (examples.empty()) throw DataError("empty training set");
    if (params.n_trees < 1) throw ConfigError("n_trees must be positive");
    if (params.min_leaf < 1) throw ConfigError("min_leaf must be positive");

    std::array<int, 3> class_counts{};
    std::vector<int> labels;
    labels.reserve(examples.size());
    for (const auto& ex : examples) {
        labels.push_back(label_index(ex.label));
        ++class_counts[labels.back()];
    }
    const int present = 3 - static_cast<int>(std::count(class_counts.begin(), class_counts.end(), 0));
    if (present < 2) {
        const auto only =
            std::max_element(class_counts.begin(), class_counts.end()) - class_counts.begin();
        throw DegenerateTraining(static_cast<int>(only));
    }

    const ColMatrix X = densify(examples);
    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.n_features = X.d;
    model.trees.resize(params.n_trees);
    parallel_for(static_cast<std::size_t>(params.n_trees), threads, [&](std::size_t t) {
        TreeBuilder builder(X, labels, params, derive_seed(seed, t));
        model.trees[t] = builder.build();
    });
    return model;
}

std::pair<Polarity, double> predict_with_confidence(const ForestModel& model,
                                                    const FeatureVector& features) {
    if (model.trees.empty()) throw DataError("model has no trees");
    if (features.dim != model.n_features) {
        throw ShapeMismatch("feature vector has dim " + std::to_string(features.dim) +
                            ", model expects " + std::to_string(model.n_features));
    }
    std::array<int, 3> votes{};
    for (const auto& tree : model.trees) ++votes[tree_vote(tree, features)];
    const int top = *std::max_element(votes.begin(), votes.end());
    const double confidence = static_cast<double>(top) / model.trees.size();
    int winner = -1;
    for (int c = 0; c < 3; ++c) {
        if (votes[c] == top) {
            if (winner >= 0) return {Polarity::Neutral, confidence};  // tied plurality
            winner = c;
        }
    }
    return {label_at(winner), confidence};
}

HyperParams grid_search(const std::vector<TrainingExample>& examples,
                        const std::vector<HyperParams>& grid, int inner_k, std::uint64_t seed,
                        int threads) {
    if (grid.empty()) throw ConfigError("empty hyper-parameter grid");
    if (inner_k < 2) throw ConfigError("inner fold count must be at least 2");
    if (static_cast<std::size_t>(inner_k) > examples.size()) {
        throw TooFewRecords("inner fold count exceeds training size");
    }

    // Stratified inner folds over the example labels.
    std::vector<int> fold_of(examples.size(), 0);
    {
        Rng rng(derive_seed(seed, 0x666f6c64));  // "fold"
        std::size_t pos = 0;
        for (Polarity cls : kAllPolarities) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < examples.size(); ++i) {
                if (examples[i].label == cls) members.push_back(i);
            }
            shuffle_in_place(members, rng);
            for (const auto i : members) {
                fold_of[i] = static_cast<int>(pos++ % static_cast<std::size_t>(inner_k));
            }
        }
    }

    double best_mean = -1.0;
    std::size_t best_index = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total_f1 = 0.0;
        for (int f = 0; f < inner_k; ++f) {
            std::vector<TrainingExample> train_part;
            std::vector<const TrainingExample*> test_part;
            for (std::size_t i = 0; i < examples.size(); ++i) {
                if (fold_of[i] == f) {
                    test_part.push_back(&examples[i]);
                } else {
                    train_part.push_back(examples[i]);
                }
            }
            const ForestModel model = train_forest(train_part, grid[g], derive_seed(seed, f), threads);
            ConfusionMatrix cm;
            for (const auto* ex : test_part) {
                cm.add(ex->label, predict_with_confidence(model, ex->features).first);
            }
            total_f1 += macro_f1(cm);
        }
        const double mean = total_f1 / inner_k;
        if (mean > best_mean) {
            best_mean = mean;
            best_index = g;
        }
    }
    return grid[best_index];
}

// --- serialization ----------------------------------------------------------

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["format"] = "polarity-forest";
    j["version"] = 1;
    j["seed"] = model.seed;
    j["n_features"] = model.n_features;
    j["params"] = {{"n_trees", model.params.n_trees},
                   {"max_depth", model.params.max_depth},
                   {"min_leaf", model.params.min_leaf},
                   {"features_per_split", model.params.features_per_split}};
    auto trees = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees) {
        auto nodes = nlohmann::ordered_json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back({node.feature, node.threshold, node.left, node.right, node.counts[0],
                             node.counts[1], node.counts[2]});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out << j.dump() << '\n';
}

ForestModel load_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad model file: " + std::string(e.what()));
    }
    if (j.value("format", "") != "polarity-forest" || j.value("version", 0) != 1) {
        throw DataError("unsupported model format in " + path.string());
    }
    ForestModel model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.n_features = j.at("n_features").get<int>();
    const auto& p = j.at("params");
    model.params.n_trees = p.at("n_trees").get<int>();
    model.params.max_depth = p.at("max_depth").get<int>();
    model.params.min_leaf = p.at("min_leaf").get<int>();
    model.params.features_per_split = p.at("features_per_split").get<int>();
    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& n : tree_json) {
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.counts = {n.at(4).get<int>(), n.at(5).get<int>(), n.at(6).get<int>()};
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace polarity
