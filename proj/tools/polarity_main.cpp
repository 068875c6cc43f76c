#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polarity/core.hpp"
#include "polarity/ensemble.hpp"
#include "polarity/evaluation.hpp"
#include "polarity/learner.hpp"
#include "polarity/lexicon.hpp"
#include "polarity/parallel.hpp"
#include "polarity/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::uint64_t seed = 42;
    int agreement = 7;
    double confidence = 0.7;
    bool no_bow = false;
    bool no_emoticons = false;
    int threads = 0;  // 0 = all cores
    std::string out_dir = "out";
    std::string lexicon_dir;
    std::string emoticon_map;
    int folds = 5;
    int trees = 100;
    int max_depth = 0;
    int min_leaf = 1;
    int min_df = 2;
    std::string macro_variant = "mean_f1";
    std::string encoding = "ordinal";
    bool no_weight_search = false;
    std::vector<double> weight_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<int> grid_trees;  // >1 entries enable inner grid search (supervised)
    int inner_folds = 3;

    // synth
    int synth_datasets = 8;
    int synth_sentences = 2000;
    int synth_methods = 10;
};

polarity::MacroVariant parse_variant(const std::string& name) {
    if (name == "mean_f1") return polarity::MacroVariant::MeanF1;
    if (name == "harmonic_pr") return polarity::MacroVariant::HarmonicPR;
    throw polarity::ConfigError("unknown macro variant: " + name);
}

polarity::MethodEncoding parse_encoding(const std::string& name) {
    if (name == "ordinal") return polarity::MethodEncoding::Ordinal;
    if (name == "one_hot") return polarity::MethodEncoding::OneHot;
    throw polarity::ConfigError("unknown method encoding: " + name);
}

polarity::BootstrapConfig bootstrap_config(const Options& opt) {
    polarity::BootstrapConfig cfg;
    cfg.agreement_threshold = opt.agreement;
    cfg.confidence_threshold = opt.confidence;
    cfg.use_bow = !opt.no_bow;
    cfg.use_emoticons = !opt.no_emoticons;
    cfg.seed = opt.seed;
    cfg.encoding = parse_encoding(opt.encoding);
    cfg.min_df = opt.min_df;
    return cfg;
}

polarity::HyperParams hyper_params(const Options& opt) {
    polarity::HyperParams p;
    p.n_trees = opt.trees;
    p.max_depth = opt.max_depth;
    p.min_leaf = opt.min_leaf;
    return p;
}

polarity::BenchmarkConfig benchmark_config(const Options& opt) {
    polarity::BenchmarkConfig cfg;
    cfg.boot = bootstrap_config(opt);
    cfg.params = hyper_params(opt);
    for (const int t : opt.grid_trees) {
        polarity::HyperParams p = cfg.params;
        p.n_trees = t;
        cfg.param_grid.push_back(p);
    }
    cfg.inner_folds = opt.inner_folds;
    cfg.folds = opt.folds;
    cfg.threads = polarity::resolve_threads(opt.threads);
    cfg.macro_variant = parse_variant(opt.macro_variant);
    cfg.weight_search = !opt.no_weight_search;
    cfg.weight_grid = opt.weight_grid;
    return cfg;
}

polarity::MethodBank load_bank(const Options& opt) {
    if (opt.lexicon_dir.empty()) {
        throw polarity::ConfigError(
            "no lexicon directory (use --lexicons or POLARITY_LEXICON_DIR)");
    }
    return polarity::load_method_bank(opt.lexicon_dir);
}

std::optional<polarity::EmoticonMap> load_map(const Options& opt) {
    if (opt.emoticon_map.empty()) return std::nullopt;
    return polarity::load_emoticon_map(opt.emoticon_map);
}

fs::path prepare_out(const Options& opt) {
    fs::create_directories(opt.out_dir);
    return opt.out_dir;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw polarity::DataError("cannot write " + path.string());
    out << content;
}

// --- subcommands ------------------------------------------------------------

int run_predict(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    for (auto& rec : dataset.records) rec.gold.reset();  // unsupervised path

    const auto bank = load_bank(opt);
    const auto map = load_map(opt);
    const int threads = polarity::resolve_threads(opt.threads);
    const auto result = polarity::bootstrap(dataset, dataset, bank, bootstrap_config(opt),
                                            polarity::ForestLearner{hyper_params(opt)},
                                            map ? &*map : nullptr, threads);
    std::string text = "id\tlabel\tconfidence\n";
    char buf[64];
    for (const auto& pred : result.predictions) {
        std::snprintf(buf, sizeof(buf), "%.6f", pred.confidence);
        text += pred.id;
        text += '\t';
        text += polarity::label_name(pred.label);
        text += '\t';
        text += buf;
        text += '\n';
    }
    write_text(out_dir / "predictions.tsv", text);
    std::cout << "wrote " << (out_dir / "predictions.tsv").string() << " ("
              << result.predictions.size() << " rows, training " << result.seed_size << " -> "
              << result.final_size << ")\n";
    return 0;
}

int run_vote(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    const polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    const auto bank = load_bank(opt);
    const auto matrix =
        polarity::run_base_methods(bank, dataset, polarity::resolve_threads(opt.threads));
    std::string text = "id\tlabel\n";
    for (std::size_t i = 0; i < matrix.ids.size(); ++i) {
        text += matrix.ids[i];
        text += '\t';
        text += polarity::label_name(polarity::majority_vote(matrix.rows[i]));
        text += '\n';
    }
    write_text(out_dir / "votes.tsv", text);
    std::cout << "wrote " << (out_dir / "votes.tsv").string() << "\n";
    return 0;
}

int run_benchmark_cmd(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    const polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    const auto bank = load_bank(opt);
    const auto map = load_map(opt);
    const auto report = polarity::run_benchmark(dataset, bank, benchmark_config(opt),
                                                map ? &*map : nullptr);
    polarity::write_report(report, out_dir / "report.json");
    std::cout << polarity::report_to_table(report);
    std::cout << "wrote " << (out_dir / "report.json").string() << "\n";
    return 0;
}

int run_sweep(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    const polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    const auto bank = load_bank(opt);
    const auto map = load_map(opt);

    polarity::BenchmarkConfig base = benchmark_config(opt);
    base.weight_search = false;
    base.best_individual = false;
    base.fully_supervised = false;

    auto self_train_cell = [&](int agreement, double confidence) -> ordered_json {
        polarity::BenchmarkConfig cfg = base;
        cfg.boot.agreement_threshold = agreement;
        cfg.boot.confidence_threshold = confidence;
        ordered_json cell;
        cell["agreement"] = agreement;
        cell["confidence"] = confidence;
        try {
            const auto report =
                polarity::run_benchmark(dataset, bank, cfg, map ? &*map : nullptr);
            cell["macro_f1"] = report.score_for(polarity::kMethodSelfTrain).mean_macro_f1;
        } catch (const polarity::EmptySeedSet&) {
            cell["macro_f1"] = nullptr;  // no seeds at this agreement level
        }
        return cell;
    };

    ordered_json j;
    j["dataset"] = dataset.name;
    j["seed"] = opt.seed;
    auto agreement_sweep = ordered_json::array();
    const int max_a = std::min<int>(10, static_cast<int>(bank.methods.size()));
    for (int a = 3; a <= max_a; ++a) {
        agreement_sweep.push_back(self_train_cell(a, opt.confidence));
    }
    j["agreement_sweep"] = std::move(agreement_sweep);
    auto confidence_sweep = ordered_json::array();
    for (int c = 3; c <= 10; ++c) {
        confidence_sweep.push_back(self_train_cell(opt.agreement, c / 10.0));
    }
    j["confidence_sweep"] = std::move(confidence_sweep);

    write_text(out_dir / "sweep.json", j.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / "sweep.json").string() << "\n";
    return 0;
}

int run_weights(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    const polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    if (!dataset.fully_labeled()) {
        throw polarity::DataError("weight search needs a fully gold-labeled dataset");
    }
    const auto bank = load_bank(opt);
    const auto matrix =
        polarity::run_base_methods(bank, dataset, polarity::resolve_threads(opt.threads));
    std::vector<polarity::Polarity> gold;
    gold.reserve(dataset.records.size());
    for (const auto& rec : dataset.records) gold.push_back(*rec.gold);
    const auto result = polarity::exhaustive_weight_search(
        matrix.rows, gold, opt.weight_grid, parse_variant(opt.macro_variant),
        polarity::resolve_threads(opt.threads));

    ordered_json j;
    j["dataset"] = dataset.name;
    j["methods"] = matrix.method_names;
    j["weights"] = result.best.weights;
    j["macro_f1"] = result.best_macro_f1;
    write_text(out_dir / "weights.json", j.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / "weights.json").string() << " (macro_f1 "
              << result.best_macro_f1 << ")\n";
    return 0;
}

int run_emoticons(const Options& opt, const std::string& dataset_path) {
    const fs::path out_dir = prepare_out(opt);
    const polarity::Dataset dataset = polarity::load_dataset(dataset_path);
    const auto map = load_map(opt);
    if (!map) throw polarity::ConfigError("emoticons command needs --emoticon-map");
    const auto quality = polarity::emoticon_quality(dataset, *map);

    ordered_json j;
    j["dataset"] = dataset.name;
    j["coverage"] = quality.coverage;
    if (quality.accuracy) {
        j["accuracy"] = *quality.accuracy;
    } else {
        j["accuracy"] = nullptr;
    }
    write_text(out_dir / "emoticon_quality.json", j.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / "emoticon_quality.json").string() << "\n";
    return 0;
}

int run_synth(const Options& opt) {
    const fs::path out_dir = prepare_out(opt);
    polarity::SynthSpec spec;
    spec.n_datasets = opt.synth_datasets;
    spec.n_sentences = opt.synth_sentences;
    spec.n_methods = opt.synth_methods;
    spec.seed = opt.seed;
    const auto out = polarity::generate_synthetic(spec);
    polarity::write_synthetic(out, out_dir);
    std::cout << "wrote " << out.datasets.size() << " datasets and "
              << out.bank.methods.size() << " lexicons under " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lexicon-ensemble sentence polarity classifier and experiment runner"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Key-value config file; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Options opt;
    app.add_option("--seed", opt.seed, "Master random seed")->capture_default_str();
    app.add_option("--agreement", opt.agreement, "Minimum agreement A for seeding")
        ->capture_default_str();
    app.add_option("--confidence", opt.confidence, "Minimum confidence C for self-training")
        ->capture_default_str();
    app.add_flag("--no-bow", opt.no_bow, "Drop the bag-of-words feature block");
    app.add_flag("--no-emoticons", opt.no_emoticons, "Disable emoticon transfer labels");
    app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    app.add_option("--lexicons", opt.lexicon_dir, "Directory of lexicon .txt files")
        ->envname("POLARITY_LEXICON_DIR");
    app.add_option("--emoticon-map", opt.emoticon_map, "Emoticon polarity map file");
    app.add_option("--folds", opt.folds, "Cross-validation folds")->capture_default_str();
    app.add_option("--trees", opt.trees, "Forest size")->capture_default_str();
    app.add_option("--max-depth", opt.max_depth, "Tree depth cap (0 = unlimited)")
        ->capture_default_str();
    app.add_option("--min-leaf", opt.min_leaf, "Minimum samples per leaf")->capture_default_str();
    app.add_option("--min-df", opt.min_df, "Vocabulary document-frequency cutoff")
        ->capture_default_str();
    app.add_option("--macro-variant", opt.macro_variant, "mean_f1 or harmonic_pr")
        ->check(CLI::IsMember({"mean_f1", "harmonic_pr"}))
        ->capture_default_str();
    app.add_option("--encoding", opt.encoding, "Method feature encoding: ordinal or one_hot")
        ->check(CLI::IsMember({"ordinal", "one_hot"}))
        ->capture_default_str();
    app.add_flag("--no-weight-search", opt.no_weight_search,
                 "Skip the exhaustive weighted-voting upperbound in benchmarks");
    app.add_option("--weight-grid", opt.weight_grid, "Weight grid values")->expected(-1);
    app.add_option("--grid-trees", opt.grid_trees,
                   "Forest sizes for the supervised inner grid search")
        ->expected(-1);
    app.add_option("--inner-folds", opt.inner_folds, "Inner folds for the grid search")
        ->capture_default_str();

    std::string dataset_path;
    auto* predict = app.add_subcommand("predict", "Classify an unlabeled dataset");
    predict->add_option("dataset", dataset_path, "Dataset .tsv")->required();
    auto* vote = app.add_subcommand("vote", "Majority voting only");
    vote->add_option("dataset", dataset_path, "Dataset .tsv")->required();
    auto* benchmark = app.add_subcommand("benchmark", "Cross-validated method comparison");
    benchmark->add_option("dataset", dataset_path, "Gold-labeled dataset .tsv")->required();
    auto* sweep = app.add_subcommand("sweep", "Agreement and confidence parameter sweeps");
    sweep->add_option("dataset", dataset_path, "Gold-labeled dataset .tsv")->required();
    auto* weights = app.add_subcommand("weights", "Exhaustive weighted-voting search");
    weights->add_option("dataset", dataset_path, "Gold-labeled dataset .tsv")->required();
    auto* emoticons = app.add_subcommand("emoticons", "Emoticon accuracy/coverage report");
    emoticons->add_option("dataset", dataset_path, "Gold-labeled dataset .tsv")->required();
    auto* synth = app.add_subcommand("synth", "Generate the synthetic fixture family");
    synth->add_option("--synth-datasets", opt.synth_datasets, "Dataset count")
        ->capture_default_str();
    synth->add_option("--synth-sentences", opt.synth_sentences, "Sentences per dataset")
        ->capture_default_str();
    synth->add_option("--synth-methods", opt.synth_methods, "Lexicon methods")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (predict->parsed()) return run_predict(opt, dataset_path);
        if (vote->parsed()) return run_vote(opt, dataset_path);
        if (benchmark->parsed()) return run_benchmark_cmd(opt, dataset_path);
        if (sweep->parsed()) return run_sweep(opt, dataset_path);
        if (weights->parsed()) return run_weights(opt, dataset_path);
        if (emoticons->parsed()) return run_emoticons(opt, dataset_path);
        if (synth->parsed()) return run_synth(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
