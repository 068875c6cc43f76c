#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polarity/core.hpp"
#include "polarity/ensemble.hpp"
#include "polarity/lexicon.hpp"
#include "polarity/metrics.hpp"

namespace polarity {

/// Per-dataset average rank positions (1 = best macro-F1, ties share the mean
/// of the tied positions). Every method must be scored on every dataset.
std::map<std::string, double> mean_rank(
    const std::map<std::string, std::vector<double>>& per_dataset_macro_f1);

struct TTestResult {
    double t = 0.0;
    bool significant = false;
};

/// Two-sided paired t-test at alpha = 0.05 using an embedded critical-value
/// table for df 1..30. Zero-variance differences return t = 0, not
/// significant, by convention.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct EmoticonQuality {
    double coverage = 0.0;
    std::optional<double> accuracy;  // absent when coverage is zero
};

EmoticonQuality emoticon_quality(const Dataset& dataset, const EmoticonMap& map);

// --- benchmark driver --------------------------------------------------------

struct MethodScore {
    std::string method;
    std::vector<double> per_fold_macro_f1;
    std::vector<double> per_fold_micro_f1;
    double mean_macro_f1 = 0.0;
};

struct FoldDiagnostics {
    std::size_t train_seed_size = 0;
    std::size_t train_final_size = 0;
    double train_seed_accuracy = 0.0;  // pseudo-label accuracy vs gold
    double train_accuracy = 0.0;       // same, after the bootstrap additions
};

enum class PairOutcome { AWins, BWins, Tie };

struct EvaluationReport {
    std::string dataset;
    std::uint64_t seed = 0;
    int folds = 0;
    std::vector<MethodScore> scores;                   // fixed method order
    std::map<std::string, double> ranks;               // from mean_macro_f1
    std::map<std::pair<std::string, std::string>, PairOutcome> significance;
    std::vector<FoldDiagnostics> self_train_diagnostics;  // one per fold
    std::optional<EmoticonQuality> emoticons;

    const MethodScore& score_for(const std::string& method) const;
};

struct BenchmarkConfig {
    BootstrapConfig boot;
    HyperParams params;
    std::vector<HyperParams> param_grid;  // >1 entry enables inner grid search
    int inner_folds = 3;
    int folds = 5;
    int threads = 1;
    MacroVariant macro_variant = MacroVariant::MeanF1;
    bool weight_search = true;
    std::vector<double> weight_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool best_individual = true;
    bool fully_supervised = true;
};

constexpr const char* kMethodMajority = "majority_vote";
constexpr const char* kMethodSelfTrain = "self_train";
constexpr const char* kMethodWeighted = "exhaustive_weighted_vote";
constexpr const char* kMethodBestIndividual = "best_individual";
constexpr const char* kMethodSupervised = "fully_supervised";

/// Cross-validated comparison of every base method, majority voting, the
/// self-training ensemble, and the three gold-assisted upperbounds. Gold
/// labels feed only the scoring and the upperbounds, never the self-training
/// path.
EvaluationReport run_benchmark(const Dataset& dataset, const MethodBank& bank,
                               const BenchmarkConfig& config,
                               const EmoticonMap* emoticons = nullptr);

/// Machine-readable report (stable field order, byte-identical for identical
/// inputs); schema documented in the README.
std::string report_to_json(const EvaluationReport& report);
void write_report(const EvaluationReport& report, const std::filesystem::path& path);

/// Human-readable summary table.
std::string report_to_table(const EvaluationReport& report);

}  // namespace polarity
