#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "polarity/learner.hpp"
#include "polarity/rng.hpp"

using namespace polarity;
namespace fs = std::filesystem;

namespace {

FeatureVector dense(std::vector<double> values) {
    FeatureVector fv;
    fv.dim = static_cast<int>(values.size());
    for (int i = 0; i < fv.dim; ++i) {
        if (values[i] != 0.0) fv.values.emplace_back(i, values[i]);
    }
    return fv;
}

TrainingExample example(const std::string& id, std::vector<double> features, Polarity label) {
    return {id, dense(std::move(features)), label, Provenance::AgreementSeed};
}

// Three well-separated clusters, `copies` points each.
std::vector<TrainingExample> separable(int copies) {
    std::vector<TrainingExample> out;
    for (int i = 0; i < copies; ++i) {
        out.push_back(example("p" + std::to_string(i), {1.0, 0.0}, Polarity::Positive));
        out.push_back(example("n" + std::to_string(i), {-1.0, 0.0}, Polarity::Negative));
        out.push_back(example("u" + std::to_string(i), {0.0, 1.0}, Polarity::Neutral));
    }
    return out;
}

ForestModel leaf_forest(int positives, int negatives) {
    ForestModel model;
    model.n_features = 1;
    model.params.n_trees = positives + negatives;
    for (int t = 0; t < positives + negatives; ++t) {
        DecisionTree tree;
        TreeNode leaf;
        if (t < positives) {
            leaf.counts = {0, 0, 5};
        } else {
            leaf.counts = {5, 0, 0};
        }
        tree.nodes.push_back(leaf);
        model.trees.push_back(tree);
    }
    return model;
}

}  // namespace

TEST_CASE("build_vocabulary counts and cutoffs") {
    const std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"a"}};
    const Vocabulary v1 = build_vocabulary(docs, 1);
    CHECK(v1.terms == std::vector<std::string>{"a", "b"});
    CHECK(v1.doc_freq == std::vector<int>{2, 1});
    CHECK(v1.n_docs == 2);
    const Vocabulary v2 = build_vocabulary(docs, 2);
    CHECK(v2.terms == std::vector<std::string>{"a"});
}

TEST_CASE("build_vocabulary matches hand counts on a 5-doc corpus") {
    const std::vector<std::vector<std::string>> docs = {{"red", "blue", "red"},
                                                        {"blue"},
                                                        {"green", "red"},
                                                        {"blue", "green"},
                                                        {"red"}};
    const Vocabulary v = build_vocabulary(docs, 1);
    // hand counts: blue in docs 0,1,3; green in 2,3; red in 0,2,4
    CHECK(v.terms == std::vector<std::string>{"blue", "green", "red"});
    CHECK(v.doc_freq == std::vector<int>{3, 2, 3});
    CHECK(v.n_docs == 5);
    CHECK(build_vocabulary(docs, 3).terms == std::vector<std::string>{"blue", "red"});
}

TEST_CASE("build_features method block is the ordinal encoding") {
    const FeatureVector fv = build_features(
        {}, {Polarity::Positive, Polarity::Neutral, Polarity::Negative}, nullptr);
    CHECK(fv.dim == 3);
    CHECK(fv.at(0) == 1.0);
    CHECK(fv.at(1) == 0.0);
    CHECK(fv.at(2) == -1.0);
}

TEST_CASE("build_features one-hot alternative") {
    const FeatureVector fv = build_features(
        {}, {Polarity::Positive, Polarity::Neutral, Polarity::Negative}, nullptr,
        MethodEncoding::OneHot);
    CHECK(fv.dim == 9);
    CHECK(fv.at(2) == 1.0);  // method 0 -> positive slot
    CHECK(fv.at(4) == 1.0);  // method 1 -> neutral slot
    CHECK(fv.at(6) == 1.0);  // method 2 -> negative slot
    CHECK(fv.at(0) == 0.0);
}

TEST_CASE("method block ignores vocabulary state when bow is off") {
    Vocabulary vocab;
    vocab.terms = {"good"};
    vocab.doc_freq = {1};
    vocab.n_docs = 3;
    vocab.index_of = {{"good", 0}};
    const std::vector<Polarity> outputs = {Polarity::Negative, Polarity::Positive};
    const FeatureVector plain = build_features({"good", "day"}, outputs, nullptr);
    CHECK(plain.dim == 2);
    CHECK(plain.at(0) == -1.0);
    CHECK(plain.at(1) == 1.0);
    // with a vocabulary the method block stays bit-identical in front
    const FeatureVector wide = build_features({"good", "day"}, outputs, &vocab);
    CHECK(wide.dim == 3);
    CHECK(wide.at(0) == plain.at(0));
    CHECK(wide.at(1) == plain.at(1));
}

TEST_CASE("build_features tf-idf weights") {
    Vocabulary vocab;
    vocab.terms = {"a", "b"};
    vocab.doc_freq = {1, 2};
    vocab.n_docs = 2;
    vocab.index_of = {{"a", 0}, {"b", 1}};
    const FeatureVector fv = build_features({"a", "a", "b"}, {}, &vocab);
    CHECK(fv.dim == 2);
    CHECK(fv.at(0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(fv.at(1) == 0.0);  // occurs in every doc -> ln 1 = 0
    // out-of-vocabulary tokens contribute nothing
    const FeatureVector oov = build_features({"zzz"}, {}, &vocab);
    CHECK(oov.values.empty());
}

TEST_CASE("tf-idf weights are non-negative") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<std::string>> docs;
        const std::size_t n = 2 + bounded(rng, 6);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> doc;
            const std::size_t len = 1 + bounded(rng, 5);
            for (std::size_t t = 0; t < len; ++t) {
                doc.push_back(std::string(1, static_cast<char>('a' + bounded(rng, 4))));
            }
            docs.push_back(doc);
        }
        const Vocabulary vocab = build_vocabulary(docs, 1);
        for (const auto& doc : docs) {
            const FeatureVector fv = build_features(doc, {}, &vocab);
            for (const auto& [index, value] : fv.values) CHECK(value >= 0.0);
        }
    }
}

TEST_CASE("train_forest fits separable data") {
    const auto examples = separable(10);
    HyperParams params;
    params.n_trees = 10;
    const ForestModel model = train_forest(examples, params, 123);
    for (const auto& ex : examples) {
        CHECK(predict_with_confidence(model, ex.features).first == ex.label);
    }
}

TEST_CASE("train_forest rejects single-class input") {
    std::vector<TrainingExample> examples = {example("a", {1.0}, Polarity::Positive),
                                             example("b", {0.5}, Polarity::Positive)};
    CHECK_THROWS_AS(train_forest(examples, HyperParams{}, 1), DegenerateTraining);
    examples.resize(1);
    CHECK_THROWS_AS(train_forest(examples, HyperParams{}, 1), DegenerateTraining);
    CHECK_THROWS_AS(train_forest({}, HyperParams{}, 1), DataError);
}

TEST_CASE("train_forest is seed-deterministic and thread-invariant") {
    Rng rng(17);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 60; ++i) {
        examples.push_back(example("e" + std::to_string(i),
                                   {unit_real(rng), unit_real(rng), unit_real(rng)},
                                   label_at(static_cast<int>(bounded(rng, 3)))));
    }
    HyperParams params;
    params.n_trees = 25;
    const ForestModel a = train_forest(examples, params, 999, 1);
    const ForestModel b = train_forest(examples, params, 999, 4);
    const ForestModel c = train_forest(examples, params, 1000, 1);
    int differs_from_c = 0;
    for (int i = 0; i < 40; ++i) {
        const FeatureVector probe = dense({unit_real(rng), unit_real(rng), unit_real(rng)});
        const auto pa = predict_with_confidence(a, probe);
        const auto pb = predict_with_confidence(b, probe);
        CHECK(pa.first == pb.first);
        CHECK(pa.second == pb.second);
        if (pa != predict_with_confidence(c, probe)) ++differs_from_c;
    }
    CHECK(differs_from_c > 0);  // a different seed grows a different forest
}

TEST_CASE("a single unlimited tree memorizes noise-free duplicated data") {
    // Every distinct pattern appears 20 times, so each bag almost surely
    // contains all of them and the full tree separates them exactly.
    std::vector<TrainingExample> examples;
    const std::vector<std::pair<std::vector<double>, Polarity>> patterns = {
        {{0.0, 0.0}, Polarity::Negative}, {{0.0, 1.0}, Polarity::Neutral},
        {{1.0, 0.0}, Polarity::Positive}, {{1.0, 1.0}, Polarity::Negative},
        {{2.0, 0.5}, Polarity::Positive}, {{2.0, 2.0}, Polarity::Neutral}};
    for (int copy = 0; copy < 20; ++copy) {
        for (std::size_t p = 0; p < patterns.size(); ++p) {
            examples.push_back(example("m" + std::to_string(copy) + "_" + std::to_string(p),
                                       patterns[p].first, patterns[p].second));
        }
    }
    HyperParams params;
    params.n_trees = 1;
    const ForestModel model = train_forest(examples, params, 4242);
    for (const auto& ex : examples) {
        CHECK(predict_with_confidence(model, ex.features).first == ex.label);
    }
}

TEST_CASE("predict_with_confidence vote arithmetic") {
    const ForestModel seventy = leaf_forest(7, 3);
    const auto p = predict_with_confidence(seventy, dense({0.0}));
    CHECK(p.first == Polarity::Positive);
    CHECK(p.second == doctest::Approx(0.7));

    const ForestModel unanimous = leaf_forest(10, 0);
    CHECK(predict_with_confidence(unanimous, dense({0.0})).second == 1.0);

    const ForestModel split = leaf_forest(5, 5);
    const auto tie = predict_with_confidence(split, dense({0.0}));
    CHECK(tie.first == Polarity::Neutral);
    CHECK(tie.second == doctest::Approx(0.5));
}

TEST_CASE("prediction errors on shape mismatch") {
    const ForestModel model = leaf_forest(2, 1);
    CHECK_THROWS_AS(predict_with_confidence(model, dense({0.0, 1.0})), ShapeMismatch);
}

TEST_CASE("tree vote fractions sum to one and bound confidence") {
    const auto examples = separable(5);
    HyperParams params;
    params.n_trees = 9;  // multiple of 3
    const ForestModel model = train_forest(examples, params, 77);
    Rng rng(78);
    for (int trial = 0; trial < 30; ++trial) {
        const FeatureVector probe =
            dense({2.0 * unit_real(rng) - 1.0, 2.0 * unit_real(rng) - 1.0});
        std::array<int, 3> votes{};
        for (const auto& tree : model.trees) {
            const auto& counts = tree.nodes[tree.leaf_for(probe)].counts;
            int best = 0;
            for (int c = 1; c < 3; ++c) {
                if (counts[c] > counts[best]) best = c;
            }
            ++votes[best];
        }
        CHECK(votes[0] + votes[1] + votes[2] == 9);
        const auto p = predict_with_confidence(model, probe);
        CHECK(p.second >= 1.0 / 3.0);  // pigeonhole
        CHECK(p.second <= 1.0);
    }
}

TEST_CASE("grid_search basics") {
    const auto examples = separable(8);
    HyperParams only;
    only.n_trees = 7;
    CHECK(grid_search(examples, {only}, 3, 5).n_trees == 7);
    CHECK_THROWS_AS(grid_search(examples, {}, 3, 5), ConfigError);
    CHECK_THROWS_AS(grid_search(examples, {only}, 1, 5), ConfigError);
}

TEST_CASE("grid_search prefers the larger forest on noisy data") {
    // Two weakly informative features plus 25% label noise; a lone tree
    // overfits the noise while the forest averages it away.
    Rng rng(2024);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 150; ++i) {
        const Polarity truth = label_at(static_cast<int>(bounded(rng, 3)));
        const double base = label_signed(truth);
        std::vector<double> f = {base + 0.8 * (unit_real(rng) - 0.5),
                                 base + 0.8 * (unit_real(rng) - 0.5)};
        Polarity label = truth;
        if (unit_real(rng) < 0.25) label = label_at(static_cast<int>(bounded(rng, 3)));
        examples.push_back(example("g" + std::to_string(i), std::move(f), label));
    }
    HyperParams lone;
    lone.n_trees = 1;
    HyperParams forest;
    forest.n_trees = 50;
    const HyperParams winner = grid_search(examples, {lone, forest}, 3, 31337);
    CHECK(winner.n_trees == 50);
    // deterministic under a fixed seed
    CHECK(grid_search(examples, {lone, forest}, 3, 31337).n_trees == winner.n_trees);
}

TEST_CASE("forest serialization round-trips predictions bit-exactly") {
    Rng rng(55);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 90; ++i) {
        const Polarity label = label_at(static_cast<int>(bounded(rng, 3)));
        examples.push_back(example("s" + std::to_string(i),
                                   {label_signed(label) + 0.3 * (unit_real(rng) - 0.5),
                                    unit_real(rng)},
                                   label));
    }
    HyperParams params;
    params.n_trees = 15;
    const ForestModel model = train_forest(examples, params, 808);
    const fs::path path = fs::temp_directory_path() / "forest_trip.json";
    save_forest(model, path);
    const ForestModel back = load_forest(path);
    REQUIRE(back.trees.size() == model.trees.size());
    for (int i = 0; i < 60; ++i) {
        const FeatureVector probe = dense({2.0 * unit_real(rng) - 1.0, unit_real(rng)});
        const auto a = predict_with_confidence(model, probe);
        const auto b = predict_with_confidence(back, probe);
        CHECK(a.first == b.first);
        CHECK(a.second == b.second);
    }
    CHECK_THROWS_AS(load_forest("/nonexistent/model.json"), DataError);
}
