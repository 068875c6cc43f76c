#include "polarity/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "polarity/parallel.hpp"
#include "polarity/rng.hpp"

namespace polarity {

std::map<std::string, double> mean_rank(
    const std::map<std::string, std::vector<double>>& per_dataset_macro_f1) {
    if (per_dataset_macro_f1.empty()) throw RaggedTable("empty score table");
    const std::size_t n_datasets = per_dataset_macro_f1.begin()->second.size();
    if (n_datasets == 0) throw RaggedTable("score table has no datasets");
    for (const auto& [method, scores] : per_dataset_macro_f1) {
        if (scores.size() != n_datasets) {
            throw RaggedTable("method '" + method + "' is missing dataset scores");
        }
    }

    std::map<std::string, double> rank_sums;
    for (const auto& [method, scores] : per_dataset_macro_f1) {
        (void)scores;
        rank_sums[method] = 0.0;
    }
    for (std::size_t d = 0; d < n_datasets; ++d) {
        std::vector<std::pair<double, std::string>> column;
        column.reserve(per_dataset_macro_f1.size());
        for (const auto& [method, scores] : per_dataset_macro_f1) {
            column.emplace_back(scores[d], method);
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        // Tied values share the average of the positions they occupy.
        std::size_t i = 0;
        while (i < column.size()) {
            std::size_t j = i;
            while (j + 1 < column.size() && column[j + 1].first == column[i].first) ++j;
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t k = i; k <= j; ++k) rank_sums[column[k].second] += shared;
            i = j + 1;
        }
    }
    for (auto& [method, sum] : rank_sums) {
        (void)method;
        sum /= static_cast<double>(n_datasets);
    }
    return rank_sums;
}

namespace {

// Two-sided 0.05 critical values of Student's t for df 1..30; beyond that the
// normal approximation 1.960 is close enough for our fold counts.
constexpr double kCritical05[30] = {
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

double critical_value(int df) { return df <= 30 ? kCritical05[df - 1] : 1.960; }

}  // namespace

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw LengthMismatch("paired samples differ in length");
    if (a.size() < 2) throw DataError("paired t-test needs at least 2 pairs");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : d) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1));
    if (sd == 0.0) return {0.0, false};  // zero-variance convention
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    return {t, std::fabs(t) > critical_value(static_cast<int>(n) - 1)};
}

EmoticonQuality emoticon_quality(const Dataset& dataset, const EmoticonMap& map) {
    if (dataset.records.empty()) throw DataError("empty dataset");
    if (!dataset.fully_labeled()) throw DataError("emoticon quality needs gold labels");
    const auto preserve = map.token_set();
    std::size_t covered = 0;
    std::size_t correct = 0;
    for (const auto& rec : dataset.records) {
        const auto label = emoticon_label(tokenize(rec.text, preserve), map);
        if (!label) continue;
        ++covered;
        if (*label == *rec.gold) ++correct;
    }
    EmoticonQuality q;
    q.coverage = static_cast<double>(covered) / dataset.records.size();
    if (covered > 0) q.accuracy = static_cast<double>(correct) / covered;
    return q;
}

// --- benchmark driver --------------------------------------------------------

const MethodScore& EvaluationReport::score_for(const std::string& method) const {
    for (const auto& s : scores) {
        if (s.method == method) return s;
    }
    throw DataError("no score for method '" + method + "'");
}

namespace {

struct FoldData {
    std::vector<SentenceRecord> train_records;
    std::vector<SentenceRecord> test_records;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<Polarity> train_gold;
    std::vector<Polarity> test_gold;
};

FoldData collect_fold(const Dataset& dataset, const FoldAssignment& folds, int f) {
    FoldData fd;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& rec = dataset.records[i];
        if (folds.fold_of[i] == f) {
            fd.test_records.push_back(rec);
            fd.test_ids.push_back(rec.id);
            fd.test_gold.push_back(*rec.gold);
        } else {
            fd.train_records.push_back(rec);
            fd.train_ids.push_back(rec.id);
            fd.train_gold.push_back(*rec.gold);
        }
    }
    return fd;
}

ConfusionMatrix confusion_for_column(const PredictionMatrix& matrix,
                                     const std::vector<std::string>& ids,
                                     const std::vector<Polarity>& gold, std::size_t method) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        cm.add(gold[i], matrix.row(ids[i])[method]);
    }
    return cm;
}

std::vector<TrainingExample> supervised_examples(const FoldData& fd,
                                                 const PredictionMatrix& matrix,
                                                 const BootstrapConfig& boot,
                                                 const EmoticonMap* emoticons,
                                                 const Vocabulary** vocab_out,
                                                 std::optional<Vocabulary>& vocab_storage) {
    const std::set<std::string> preserve =
        emoticons ? emoticons->token_set() : std::set<std::string>{};
    std::vector<std::vector<std::string>> train_tokens(fd.train_records.size());
    for (std::size_t i = 0; i < fd.train_records.size(); ++i) {
        train_tokens[i] = tokenize(fd.train_records[i].text, preserve);
    }
    const Vocabulary* vocab = nullptr;
    if (boot.use_bow) {
        vocab_storage = build_vocabulary(train_tokens, boot.min_df);
        vocab = &*vocab_storage;
    }
    *vocab_out = vocab;
    std::vector<TrainingExample> examples;
    examples.reserve(fd.train_records.size());
    for (std::size_t i = 0; i < fd.train_records.size(); ++i) {
        examples.push_back({fd.train_ids[i],
                            build_features(train_tokens[i], matrix.row(fd.train_ids[i]), vocab,
                                           boot.encoding),
                            fd.train_gold[i], Provenance::GoldSupervised});
    }
    return examples;
}

}  // namespace

EvaluationReport run_benchmark(const Dataset& dataset, const MethodBank& bank,
                               const BenchmarkConfig& config, const EmoticonMap* emoticons) {
    bank.validate();
    if (!dataset.fully_labeled()) {
        throw DataError("benchmark needs a fully gold-labeled dataset");
    }
    const int threads = config.threads;

    EvaluationReport report;
    report.dataset = dataset.name;
    report.seed = config.boot.seed;
    report.folds = config.folds;

    std::vector<std::string> method_order = bank.method_names();
    method_order.push_back(kMethodMajority);
    method_order.push_back(kMethodSelfTrain);
    if (config.weight_search) method_order.push_back(kMethodWeighted);
    if (config.best_individual) method_order.push_back(kMethodBestIndividual);
    if (config.fully_supervised) method_order.push_back(kMethodSupervised);
    for (const auto& name : method_order) {
        MethodScore ms;
        ms.method = name;
        report.scores.push_back(std::move(ms));
    }
    auto score_slot = [&](const std::string& name) -> MethodScore& {
        for (auto& s : report.scores) {
            if (s.method == name) return s;
        }
        throw DataError("unknown method '" + name + "'");
    };
    auto push_cm = [&](const std::string& name, const ConfusionMatrix& cm) {
        auto& slot = score_slot(name);
        slot.per_fold_macro_f1.push_back(macro_f1(cm, config.macro_variant));
        slot.per_fold_micro_f1.push_back(micro_f1(cm));
    };

    const PredictionMatrix matrix = run_base_methods(bank, dataset, threads);
    const FoldAssignment folds = split_folds(dataset, config.folds, config.boot.seed);

    for (int f = 0; f < config.folds; ++f) {
        const FoldData fd = collect_fold(dataset, folds, f);

        for (std::size_t m = 0; m < bank.methods.size(); ++m) {
            push_cm(bank.methods[m].name, confusion_for_column(matrix, fd.test_ids, fd.test_gold, m));
        }

        ConfusionMatrix mv_cm;
        for (std::size_t i = 0; i < fd.test_ids.size(); ++i) {
            mv_cm.add(fd.test_gold[i], majority_vote(matrix.row(fd.test_ids[i])));
        }
        push_cm(kMethodMajority, mv_cm);

        // Self-training ensemble; gold appears only in the scoring below.
        BootstrapConfig boot = config.boot;
        boot.seed = derive_seed(config.boot.seed, 0x100 + static_cast<std::uint64_t>(f));
        const PredictionMatrix train_matrix = matrix.restricted_to(fd.train_ids);
        const PredictionMatrix test_matrix = matrix.restricted_to(fd.test_ids);
        const BootstrapResult boot_result =
            bootstrap_with_matrix(fd.train_records, fd.test_records, train_matrix, test_matrix,
                                  boot, ForestLearner{config.params}, emoticons, threads);
        ConfusionMatrix st_cm;
        std::unordered_map<std::string, Polarity> gold_of;
        for (std::size_t i = 0; i < fd.train_ids.size(); ++i) {
            gold_of.emplace(fd.train_ids[i], fd.train_gold[i]);
        }
        for (std::size_t i = 0; i < fd.test_ids.size(); ++i) {
            st_cm.add(fd.test_gold[i], boot_result.predictions[i].label);
        }
        push_cm(kMethodSelfTrain, st_cm);

        FoldDiagnostics diag;
        diag.train_seed_size = boot_result.seed_size;
        diag.train_final_size = boot_result.final_size;
        std::size_t seed_correct = 0;
        std::size_t final_correct = 0;
        for (std::size_t i = 0; i < boot_result.training.size(); ++i) {
            const auto& ex = boot_result.training[i];
            const bool correct = gold_of.at(ex.sentence_id) == ex.label;
            if (i < boot_result.seed_size && correct) ++seed_correct;
            if (correct) ++final_correct;
        }
        diag.train_seed_accuracy =
            static_cast<double>(seed_correct) / boot_result.seed_size;
        diag.train_accuracy = static_cast<double>(final_correct) / boot_result.final_size;
        report.self_train_diagnostics.push_back(diag);

        if (config.weight_search) {
            std::vector<std::vector<Polarity>> train_rows;
            train_rows.reserve(fd.train_ids.size());
            for (const auto& id : fd.train_ids) train_rows.push_back(matrix.row(id));
            const WeightSearchResult ws = exhaustive_weight_search(
                train_rows, fd.train_gold, config.weight_grid, config.macro_variant, threads);
            ConfusionMatrix cm;
            for (std::size_t i = 0; i < fd.test_ids.size(); ++i) {
                cm.add(fd.test_gold[i], weighted_vote(matrix.row(fd.test_ids[i]), ws.best));
            }
            push_cm(kMethodWeighted, cm);
        }

        if (config.best_individual) {
            std::size_t best_method = 0;
            double best_train = -1.0;
            for (std::size_t m = 0; m < bank.methods.size(); ++m) {
                const double train_macro = macro_f1(
                    confusion_for_column(matrix, fd.train_ids, fd.train_gold, m),
                    config.macro_variant);
                if (train_macro > best_train) {
                    best_train = train_macro;
                    best_method = m;
                }
            }
            push_cm(kMethodBestIndividual,
                    confusion_for_column(matrix, fd.test_ids, fd.test_gold, best_method));
        }

        if (config.fully_supervised) {
            const Vocabulary* vocab = nullptr;
            std::optional<Vocabulary> vocab_storage;
            const auto examples =
                supervised_examples(fd, matrix, config.boot, emoticons, &vocab, vocab_storage);
            HyperParams params = config.params;
            if (config.param_grid.size() > 1) {
                params = grid_search(examples, config.param_grid, config.inner_folds,
                                     derive_seed(config.boot.seed, 0x200 + f), threads);
            }
            const ForestModel model = train_forest(
                examples, params, derive_seed(config.boot.seed, 0x300 + f), threads);
            const std::set<std::string> preserve =
                emoticons ? emoticons->token_set() : std::set<std::string>{};
            std::vector<Polarity> predicted(fd.test_records.size());
            parallel_for(fd.test_records.size(), threads, [&](std::size_t i) {
                const auto tokens = tokenize(fd.test_records[i].text, preserve);
                const auto fv = build_features(tokens, matrix.row(fd.test_ids[i]), vocab,
                                               config.boot.encoding);
                predicted[i] = predict_with_confidence(model, fv).first;
            });
            ConfusionMatrix cm;
            for (std::size_t i = 0; i < fd.test_ids.size(); ++i) {
                cm.add(fd.test_gold[i], predicted[i]);
            }
            push_cm(kMethodSupervised, cm);
        }
    }

    std::map<std::string, std::vector<double>> rank_table;
    for (auto& score : report.scores) {
        score.mean_macro_f1 =
            std::accumulate(score.per_fold_macro_f1.begin(), score.per_fold_macro_f1.end(), 0.0) /
            score.per_fold_macro_f1.size();
        rank_table[score.method] = {score.mean_macro_f1};
    }
    report.ranks = mean_rank(rank_table);

    for (std::size_t i = 0; i < report.scores.size(); ++i) {
        for (std::size_t j = i + 1; j < report.scores.size(); ++j) {
            const auto& a = report.scores[i];
            const auto& b = report.scores[j];
            const TTestResult tt = paired_t_test(a.per_fold_macro_f1, b.per_fold_macro_f1);
            PairOutcome outcome = PairOutcome::Tie;
            if (tt.significant) outcome = tt.t > 0 ? PairOutcome::AWins : PairOutcome::BWins;
            report.significance.emplace(std::make_pair(a.method, b.method), outcome);
        }
    }

    if (emoticons != nullptr && !emoticons->empty()) {
        report.emoticons = emoticon_quality(dataset, *emoticons);
    }
    return report;
}

// --- report emission ----------------------------------------------------------

namespace {

const char* outcome_name(PairOutcome o) {
    switch (o) {
        case PairOutcome::AWins: return "a_wins";
        case PairOutcome::BWins: return "b_wins";
        case PairOutcome::Tie: return "tie";
    }
    return "tie";
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
    using json = nlohmann::ordered_json;
    json j;
    j["dataset"] = report.dataset;
    j["seed"] = report.seed;
    j["folds"] = report.folds;

    auto rows = json::array();
    for (const auto& score : report.scores) {
        const bool is_self_train = score.method == kMethodSelfTrain;
        for (std::size_t f = 0; f < score.per_fold_macro_f1.size(); ++f) {
            json row;
            row["method"] = score.method;
            row["fold"] = f;
            row["macro_f1"] = score.per_fold_macro_f1[f];
            row["micro_f1"] = score.per_fold_micro_f1[f];
            if (is_self_train && f < report.self_train_diagnostics.size()) {
                const auto& d = report.self_train_diagnostics[f];
                row["train_seed_size"] = d.train_seed_size;
                row["train_final_size"] = d.train_final_size;
                row["train_seed_accuracy"] = d.train_seed_accuracy;
                row["train_accuracy"] = d.train_accuracy;
            } else {
                row["train_seed_size"] = nullptr;
                row["train_final_size"] = nullptr;
                row["train_seed_accuracy"] = nullptr;
                row["train_accuracy"] = nullptr;
            }
            rows.push_back(std::move(row));
        }
    }
    j["rows"] = std::move(rows);

    json means;
    json ranks;
    for (const auto& score : report.scores) {
        means[score.method] = score.mean_macro_f1;
        ranks[score.method] = report.ranks.at(score.method);
    }
    j["mean_macro_f1"] = std::move(means);
    j["ranks"] = std::move(ranks);

    auto sig = json::array();
    for (const auto& [pair, outcome] : report.significance) {
        sig.push_back({{"a", pair.first}, {"b", pair.second}, {"outcome", outcome_name(outcome)}});
    }
    j["significance"] = std::move(sig);

    if (report.emoticons) {
        json e;
        e["coverage"] = report.emoticons->coverage;
        if (report.emoticons->accuracy) {
            e["accuracy"] = *report.emoticons->accuracy;
        } else {
            e["accuracy"] = nullptr;
        }
        j["emoticons"] = std::move(e);
    } else {
        j["emoticons"] = nullptr;
    }
    return j.dump(2) + "\n";
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + path.string());
    out << report_to_json(report);
}

std::string report_to_table(const EvaluationReport& report) {
    std::ostringstream out;
    out << "dataset: " << report.dataset << "  (" << report.folds << "-fold, seed "
        << report.seed << ")\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s %10s %10s %6s\n", "method", "macro_f1", "micro_f1",
                  "rank");
    out << line;
    for (const auto& score : report.scores) {
        const double micro =
            std::accumulate(score.per_fold_micro_f1.begin(), score.per_fold_micro_f1.end(), 0.0) /
            score.per_fold_micro_f1.size();
        std::snprintf(line, sizeof(line), "%-28s %10.4f %10.4f %6.1f\n", score.method.c_str(),
                      score.mean_macro_f1, micro, report.ranks.at(score.method));
        out << line;
    }
    if (!report.self_train_diagnostics.empty()) {
        out << "self_train training sets (per fold):\n";
        for (std::size_t f = 0; f < report.self_train_diagnostics.size(); ++f) {
            const auto& d = report.self_train_diagnostics[f];
            std::snprintf(line, sizeof(line),
                          "  fold %zu: seeds %zu (acc %.3f) -> final %zu (acc %.3f)\n", f,
                          d.train_seed_size, d.train_seed_accuracy, d.train_final_size,
                          d.train_accuracy);
            out << line;
        }
    }
    if (report.emoticons) {
        out << "emoticons: coverage " << report.emoticons->coverage;
        if (report.emoticons->accuracy) {
            out << ", accuracy " << *report.emoticons->accuracy;
        } else {
            out << ", accuracy n/a";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace polarity
