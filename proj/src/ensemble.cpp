#include "polarity/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "polarity/parallel.hpp"
#include "polarity/rng.hpp"

namespace polarity {

Polarity majority_vote(const std::vector<Polarity>& votes) {
    const AgreementResult a = agreement(votes);
    return a.unique ? a.label : Polarity::Neutral;
}

AgreementResult agreement(const std::vector<Polarity>& votes) {
    if (votes.empty()) throw EmptyVotes();
    std::array<int, 3> counts{};
    for (const Polarity v : votes) ++counts[label_index(v)];
    AgreementResult result;
    result.count = *std::max_element(counts.begin(), counts.end());
    int winners = 0;
    for (int c = 0; c < 3; ++c) {
        if (counts[c] == result.count) {
            if (winners == 0) result.label = label_at(c);
            ++winners;
        }
    }
    result.unique = winners == 1;
    return result;
}

void BootstrapConfig::validate(std::size_t n_methods) const {
    if (agreement_threshold < 1 ||
        static_cast<std::size_t>(agreement_threshold) > n_methods) {
        throw ConfigError("agreement threshold must be in [1, " + std::to_string(n_methods) +
                          "], got " + std::to_string(agreement_threshold));
    }
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
        throw ConfigError("confidence threshold must be in [0, 1]");
    }
    if (min_df < 1) throw ConfigError("min_df must be at least 1");
}

SeedResult build_seed_training(const PredictionMatrix& matrix, int agreement_threshold) {
    SeedResult result;
    for (std::size_t i = 0; i < matrix.ids.size(); ++i) {
        const AgreementResult a = agreement(matrix.rows[i]);
        if (a.count >= agreement_threshold && a.unique) {
            result.seeds.push_back({matrix.ids[i], a.label, Provenance::AgreementSeed});
        } else {
            result.remaining.push_back(matrix.ids[i]);
        }
    }
    return result;
}

std::vector<SeedEntry> augment_with_emoticons(const std::vector<SeedEntry>& seeds,
                                              const std::vector<SentenceRecord>& records,
                                              const EmoticonMap& map) {
    std::vector<SeedEntry> out = seeds;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.size(); ++i) index.emplace(out[i].id, i);

    const auto preserve = map.token_set();
    for (const auto& rec : records) {
        const auto label = emoticon_label(tokenize(rec.text, preserve), map);
        if (!label) continue;
        if (auto it = index.find(rec.id); it != index.end()) {
            out[it->second].label = *label;  // emoticon label wins on conflict
            out[it->second].provenance = Provenance::EmoticonTransfer;
        } else {
            index.emplace(rec.id, out.size());
            out.push_back({rec.id, *label, Provenance::EmoticonTransfer});
        }
    }
    return out;
}

namespace {

struct FeatureCache {
    std::optional<Vocabulary> vocab;
    const BootstrapConfig& config;

    FeatureVector make(const std::vector<std::string>& tokens,
                       const std::vector<Polarity>& votes) const {
        return build_features(tokens, votes, vocab ? &*vocab : nullptr, config.encoding);
    }
};

}  // namespace

BootstrapResult bootstrap_with_matrix(const std::vector<SentenceRecord>& train_records,
                                      const std::vector<SentenceRecord>& test_records,
                                      const PredictionMatrix& train_matrix,
                                      const PredictionMatrix& test_matrix,
                                      const BootstrapConfig& config, const ForestLearner& learner,
                                      const EmoticonMap* emoticons, int threads) {
    if (train_records.empty()) throw DataError("bootstrap needs a non-empty training part");
    config.validate(train_matrix.method_names.size());

    const std::set<std::string> preserve =
        emoticons ? emoticons->token_set() : std::set<std::string>{};
    std::vector<std::vector<std::string>> train_tokens(train_records.size());
    parallel_for(train_records.size(), threads, [&](std::size_t i) {
        train_tokens[i] = tokenize(train_records[i].text, preserve);
    });

    FeatureCache features{std::nullopt, config};
    if (config.use_bow) features.vocab = build_vocabulary(train_tokens, config.min_df);

    std::unordered_map<std::string, std::size_t> train_index;
    for (std::size_t i = 0; i < train_records.size(); ++i) {
        train_index.emplace(train_records[i].id, i);
    }
    auto train_features = [&](const std::string& id) {
        const std::size_t i = train_index.at(id);
        return features.make(train_tokens[i], train_matrix.row(id));
    };

    // Step 1: agreement seeding, then optional emoticon transfer.
    SeedResult seeded = build_seed_training(train_matrix, config.agreement_threshold);
    if (seeded.seeds.empty()) throw EmptySeedSet(config.agreement_threshold);
    if (config.use_emoticons && emoticons != nullptr && !emoticons->empty()) {
        seeded.seeds = augment_with_emoticons(seeded.seeds, train_records, *emoticons);
        std::set<std::string> in_training;
        for (const auto& s : seeded.seeds) in_training.insert(s.id);
        std::erase_if(seeded.remaining,
                      [&](const std::string& id) { return in_training.count(id) > 0; });
    }

    BootstrapResult result;
    result.training.reserve(seeded.seeds.size());
    for (const auto& seed : seeded.seeds) {
        result.training.push_back(
            {seed.id, train_features(seed.id), seed.label, seed.provenance});
    }
    result.seed_size = result.training.size();

    // Step 2: first model. A single-class seed set degenerates to a constant
    // classifier with confidence 1, per the learner contract.
    ForestModel model;
    bool degenerate = false;
    Polarity degenerate_class = Polarity::Neutral;
    try {
        model = train_forest(result.training, learner.params, derive_seed(config.seed, 1), threads);
    } catch (const DegenerateTraining& e) {
        degenerate = true;
        degenerate_class = label_at(e.single_class);
    }

    // Steps 3-5: gate remaining predictions, retrain only if anything joined.
    if (!degenerate && !seeded.remaining.empty()) {
        std::vector<std::pair<Polarity, double>> gated(seeded.remaining.size());
        std::vector<FeatureVector> remaining_features(seeded.remaining.size());
        parallel_for(seeded.remaining.size(), threads, [&](std::size_t i) {
            remaining_features[i] = train_features(seeded.remaining[i]);
            gated[i] = predict_with_confidence(model, remaining_features[i]);
        });
        bool added = false;
        for (std::size_t i = 0; i < seeded.remaining.size(); ++i) {
            if (gated[i].second >= config.confidence_threshold) {
                result.training.push_back({seeded.remaining[i], std::move(remaining_features[i]),
                                           gated[i].first, Provenance::BootstrapAdded});
                added = true;
            }
        }
        if (added) {
            model =
                train_forest(result.training, learner.params, derive_seed(config.seed, 2), threads);
        }
    }
    result.final_size = result.training.size();

    // Step 6: classify the test part.
    std::unordered_map<std::string, std::size_t> test_index;
    for (std::size_t i = 0; i < test_records.size(); ++i) {
        test_index.emplace(test_records[i].id, i);
    }
    result.predictions.resize(test_records.size());
    parallel_for(test_records.size(), threads, [&](std::size_t i) {
        const auto& rec = test_records[i];
        BootstrapPrediction pred;
        pred.id = rec.id;
        if (degenerate) {
            pred.label = degenerate_class;
            pred.confidence = 1.0;
        } else {
            const auto tokens = tokenize(rec.text, preserve);
            const auto fv = features.make(tokens, test_matrix.row(rec.id));
            std::tie(pred.label, pred.confidence) = predict_with_confidence(model, fv);
        }
        result.predictions[i] = std::move(pred);
    });
    return result;
}

BootstrapResult bootstrap(const Dataset& train_part, const Dataset& test_part,
                          const MethodBank& bank, const BootstrapConfig& config,
                          const ForestLearner& learner, const EmoticonMap* emoticons,
                          int threads) {
    const PredictionMatrix train_matrix = run_base_methods(bank, train_part, threads);
    const PredictionMatrix test_matrix = run_base_methods(bank, test_part, threads);
    return bootstrap_with_matrix(train_part.records, test_part.records, train_matrix, test_matrix,
                                 config, learner, emoticons, threads);
}

// --- weighted voting ----------------------------------------------------------

Polarity weighted_vote(const std::vector<Polarity>& votes, const WeightVector& weights) {
    if (votes.empty()) throw EmptyVotes();
    if (votes.size() != weights.weights.size()) {
        throw LengthMismatch("got " + std::to_string(votes.size()) + " votes and " +
                             std::to_string(weights.weights.size()) + " weights");
    }
    std::array<double, 3> sums{};
    for (std::size_t i = 0; i < votes.size(); ++i) {
        sums[label_index(votes[i])] += weights.weights[i];
    }
    const double top = *std::max_element(sums.begin(), sums.end());
    int winner = -1;
    for (int c = 0; c < 3; ++c) {
        if (sums[c] == top) {
            if (winner >= 0) return Polarity::Neutral;
            winner = c;
        }
    }
    return label_at(winner);
}

namespace {

struct VotePattern {
    std::vector<Polarity> votes;
    std::array<long, 3> gold_counts{};
};

struct WeightSearch {
    const std::vector<VotePattern>& patterns;
    const std::vector<double>& grid;
    int n_methods;
    MacroVariant variant;

    // scores[level] holds per-pattern class sums after the first `level`
    // methods have been assigned a weight.
    std::vector<std::vector<std::array<double, 3>>> scores;
    std::vector<double> current;
    std::vector<double> best;
    double best_macro = -1.0;

    WeightSearch(const std::vector<VotePattern>& p, const std::vector<double>& g, int m,
                 MacroVariant v)
        : patterns(p), grid(g), n_methods(m), variant(v) {
        scores.assign(m + 1, std::vector<std::array<double, 3>>(p.size(), {0.0, 0.0, 0.0}));
        current.assign(m, 0.0);
    }

    void run(int level) {
        if (level == n_methods) {
            evaluate_leaf();
            return;
        }
        for (const double w : grid) {
            current[level] = w;
            auto& next = scores[level + 1];
            const auto& cur = scores[level];
            for (std::size_t p = 0; p < patterns.size(); ++p) {
                next[p] = cur[p];
                next[p][label_index(patterns[p].votes[level])] += w;
            }
            run(level + 1);
        }
    }

    void evaluate_leaf() {
        if (std::all_of(current.begin(), current.end(), [](double w) { return w == 0.0; })) {
            return;  // degenerate all-zero vector
        }
        ConfusionMatrix cm;
        const auto& sums = scores[n_methods];
        for (std::size_t p = 0; p < patterns.size(); ++p) {
            const auto& s = sums[p];
            const double top = std::max({s[0], s[1], s[2]});
            int winner = -1;
            bool tie = false;
            for (int c = 0; c < 3; ++c) {
                if (s[c] == top) {
                    tie = winner >= 0;
                    if (winner < 0) winner = c;
                }
            }
            const int predicted = tie ? label_index(Polarity::Neutral) : winner;
            for (int g = 0; g < 3; ++g) {
                cm.counts[g][predicted] += patterns[p].gold_counts[g];
            }
        }
        const double macro = macro_f1(cm, variant);
        if (macro > best_macro) {
            best_macro = macro;
            best = current;
        }
    }
};

}  // namespace

WeightSearchResult exhaustive_weight_search(const std::vector<std::vector<Polarity>>& rows,
                                            const std::vector<Polarity>& gold,
                                            const std::vector<double>& grid, MacroVariant variant,
                                            int threads) {
    if (rows.empty()) throw DataError("weight search needs at least one row");
    if (rows.size() != gold.size()) {
        throw LengthMismatch("rows and gold labels differ in length");
    }
    const std::size_t n_methods = rows[0].size();
    if (n_methods == 0) throw DataError("weight search needs at least one method");

    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());
    sorted_grid.erase(std::unique(sorted_grid.begin(), sorted_grid.end()), sorted_grid.end());
    if (sorted_grid.empty()) throw ConfigError("empty weight grid");
    if (sorted_grid.size() == 1 && sorted_grid[0] == 0.0) {
        throw ConfigError("weight grid contains only zero");
    }
    const double leaves = std::pow(static_cast<double>(sorted_grid.size()),
                                   static_cast<double>(n_methods));
    if (leaves > 2147483648.0) {
        throw ConfigError("weight grid enumeration would exceed 2^31 vectors");
    }

    // Rows sharing a vote pattern share every weighted outcome; collapse them.
    std::map<std::vector<Polarity>, std::size_t> pattern_index;
    std::vector<VotePattern> patterns;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n_methods) throw RaggedTable("vote rows differ in length");
        auto [it, inserted] = pattern_index.emplace(rows[i], patterns.size());
        if (inserted) patterns.push_back({rows[i], {}});
        ++patterns[it->second].gold_counts[label_index(gold[i])];
    }

    // Parallelize over the first one or two weight positions; merging the
    // branch results in ascending branch order keeps the lexicographic
    // tie-break identical to a sequential scan.
    const std::size_t fan_levels = n_methods >= 2 ? 2 : 1;
    std::size_t branches = sorted_grid.size();
    if (fan_levels == 2) branches *= sorted_grid.size();
    std::vector<WeightSearch> searches;
    searches.reserve(branches);
    for (std::size_t b = 0; b < branches; ++b) {
        searches.emplace_back(patterns, sorted_grid, static_cast<int>(n_methods), variant);
    }
    parallel_for(branches, threads, [&](std::size_t b) {
        WeightSearch& s = searches[b];
        // branch index decodes with the first position most significant
        std::size_t rest = b;
        for (std::size_t level = fan_levels; level-- > 0;) {
            s.current[level] = sorted_grid[rest % sorted_grid.size()];
            rest /= sorted_grid.size();
        }
        for (std::size_t level = 0; level < fan_levels; ++level) {
            const double w = s.current[level];
            auto& next = s.scores[level + 1];
            const auto& cur = s.scores[level];
            for (std::size_t p = 0; p < patterns.size(); ++p) {
                next[p] = cur[p];
                next[p][label_index(patterns[p].votes[level])] += w;
            }
        }
        if (fan_levels == static_cast<std::size_t>(s.n_methods)) {
            s.evaluate_leaf();
        } else {
            s.run(static_cast<int>(fan_levels));
        }
    });

    WeightSearchResult result;
    double best_macro = -1.0;
    for (const auto& s : searches) {
        if (s.best_macro > best_macro) {
            best_macro = s.best_macro;
            result.best.weights = s.best;
        }
    }
    if (best_macro < 0.0) throw ConfigError("no admissible weight vector in the grid");
    result.best_macro_f1 = best_macro;
    return result;
}

}  // namespace polarity
