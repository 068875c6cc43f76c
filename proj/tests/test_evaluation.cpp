#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "polarity/evaluation.hpp"
#include "polarity/rng.hpp"

using namespace polarity;

namespace {

constexpr Polarity P = Polarity::Positive;
constexpr Polarity N = Polarity::Negative;
constexpr Polarity U = Polarity::Neutral;

ConfusionMatrix make_cm(const std::array<std::array<long, 3>, 3>& counts) {
    ConfusionMatrix cm;
    cm.counts = counts;
    return cm;
}

// Independent per-class oracle used to double-check the implementation.
double macro_oracle(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        double tp = cm.counts[c][c];
        double fp = 0.0;
        double fn = 0.0;
        for (int o = 0; o < 3; ++o) {
            if (o == c) continue;
            fp += cm.counts[o][c];
            fn += cm.counts[c][o];
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    return sum / 3.0;
}

ConfusionMatrix random_cm(Rng& rng) {
    ConfusionMatrix cm;
    for (auto& row : cm.counts) {
        for (auto& cell : row) cell = static_cast<long>(bounded(rng, 20));
    }
    if (cm.total() == 0) cm.counts[1][1] = 1;
    return cm;
}

}  // namespace

TEST_CASE("macro_f1 reference values") {
    CHECK(macro_f1(make_cm({{{5, 0, 0}, {0, 7, 0}, {0, 0, 2}}})) == 1.0);
    // derived fixture: per-class F1 = 2/3, 6/7, 6/7 -> mean = 50/63
    const ConfusionMatrix cm = make_cm({{{2, 1, 0}, {0, 3, 0}, {1, 0, 3}}});
    CHECK(macro_f1(cm) == doctest::Approx(50.0 / 63.0).epsilon(1e-13));
    CHECK(micro_f1(cm) == doctest::Approx(0.8).epsilon(1e-13));
    // a never-predicted class contributes a hard zero
    const ConfusionMatrix missing = make_cm({{{4, 0, 0}, {0, 4, 0}, {4, 0, 0}}});
    CHECK(macro_f1(missing) == doctest::Approx((2.0 / 3.0 + 1.0 + 0.0) / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(macro_f1(make_cm({{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}})), EmptyMatrix);
}

TEST_CASE("macro_f1 harmonic variant differs on skew") {
    const ConfusionMatrix cm = make_cm({{{90, 10, 0}, {5, 5, 0}, {0, 10, 0}}});
    const double mean_variant = macro_f1(cm, MacroVariant::MeanF1);
    const double harmonic_variant = macro_f1(cm, MacroVariant::HarmonicPR);
    // hand computation: p = (90/95, 5/25, 0), r = (0.9, 0.5, 0)
    const double p_macro = (90.0 / 95.0 + 5.0 / 25.0 + 0.0) / 3.0;
    const double r_macro = (0.9 + 0.5 + 0.0) / 3.0;
    CHECK(harmonic_variant ==
          doctest::Approx(2 * p_macro * r_macro / (p_macro + r_macro)).epsilon(1e-12));
    CHECK(mean_variant != doctest::Approx(harmonic_variant).epsilon(1e-6));
}

TEST_CASE("macro_f1 agrees with the oracle on random matrices") {
    Rng rng(404);
    for (int trial = 0; trial < 300; ++trial) {
        const ConfusionMatrix cm = random_cm(rng);
        CHECK(macro_f1(cm) == doctest::Approx(macro_oracle(cm)).epsilon(1e-12));
    }
}

TEST_CASE("macro_f1 is invariant under class relabeling") {
    Rng rng(405);
    const std::array<std::array<int, 3>, 6> perms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int trial = 0; trial < 100; ++trial) {
        const ConfusionMatrix cm = random_cm(rng);
        const double base = macro_f1(cm);
        for (const auto& perm : perms) {
            ConfusionMatrix relabeled;
            for (int g = 0; g < 3; ++g) {
                for (int p = 0; p < 3; ++p) {
                    relabeled.counts[perm[g]][perm[p]] = cm.counts[g][p];
                }
            }
            CHECK(macro_f1(relabeled) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("micro equals macro on balanced symmetric confusion") {
    // equal class mass, identical off-diagonal error everywhere: per-class
    // precision = recall = 10/14, so macro collapses to the accuracy
    const ConfusionMatrix cm = make_cm({{{10, 2, 2}, {2, 10, 2}, {2, 2, 10}}});
    CHECK(macro_f1(cm) == doctest::Approx(micro_f1(cm)).epsilon(1e-12));
    CHECK(micro_f1(cm) == doctest::Approx(30.0 / 42.0).epsilon(1e-12));
}

TEST_CASE("micro_f1 equals accuracy") {
    CHECK(micro_f1(make_cm({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}})) == 1.0);
    CHECK(micro_f1(make_cm({{{2, 1, 1}, {1, 2, 0}, {0, 1, 2}}})) ==
          doctest::Approx(0.6).epsilon(1e-13));
    Rng rng(406);
    for (int trial = 0; trial < 200; ++trial) {
        const ConfusionMatrix cm = random_cm(rng);
        long trace = 0;
        for (int c = 0; c < 3; ++c) trace += cm.counts[c][c];
        CHECK(micro_f1(cm) == static_cast<double>(trace) / cm.total());
    }
}

TEST_CASE("mean_rank arithmetic and ties") {
    // method a best on all three datasets, b second, c third
    std::map<std::string, std::vector<double>> table = {
        {"a", {0.9, 0.8, 0.7}}, {"b", {0.8, 0.7, 0.6}}, {"c", {0.1, 0.2, 0.3}}};
    auto ranks = mean_rank(table);
    CHECK(ranks["a"] == 1.0);
    CHECK(ranks["b"] == 2.0);
    CHECK(ranks["c"] == 3.0);

    // ranks 1,2,3 across datasets average to 2
    table = {{"a", {0.9, 0.5, 0.1}}, {"b", {0.8, 0.9, 0.2}}, {"c", {0.7, 0.4, 0.9}}};
    ranks = mean_rank(table);
    CHECK(ranks["a"] == doctest::Approx(2.0));

    // a two-way tie for best shares rank 1.5
    table = {{"a", {0.9}}, {"b", {0.9}}, {"c", {0.1}}};
    ranks = mean_rank(table);
    CHECK(ranks["a"] == 1.5);
    CHECK(ranks["b"] == 1.5);
    CHECK(ranks["c"] == 3.0);

    CHECK_THROWS_AS(mean_rank({{"a", {0.9}}, {"b", {0.9, 0.8}}}), RaggedTable);
    CHECK_THROWS_AS(mean_rank({}), RaggedTable);
}

TEST_CASE("paired_t_test reference cases") {
    const std::vector<double> base = {1.0, 2.0, 3.0, 4.0, 5.0};
    const TTestResult same = paired_t_test(base, base);
    CHECK(same.t == 0.0);
    CHECK_FALSE(same.significant);

    // constant nonzero difference -> zero variance convention
    std::vector<double> shifted = base;
    for (double& x : shifted) x += 1.0;
    const TTestResult constant = paired_t_test(shifted, base);
    CHECK(constant.t == 0.0);
    CHECK_FALSE(constant.significant);

    // d = [2,1,3,2,2]: mean 2, sd sqrt(0.5), t = 2 / (sqrt(0.5)/sqrt(5))
    const std::vector<double> a = {3.0, 2.0, 4.0, 3.0, 3.0};
    const std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0};
    const TTestResult r = paired_t_test(a, b);
    CHECK(r.t == doctest::Approx(6.324555320336759).epsilon(1e-12));
    CHECK(r.significant);  // exceeds 2.776 at df = 4

    CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}), DataError);
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), LengthMismatch);
}

TEST_CASE("paired_t_test is antisymmetric") {
    Rng rng(505);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + bounded(rng, 10);
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = unit_real(rng);
            b[i] = unit_real(rng);
        }
        const TTestResult ab = paired_t_test(a, b);
        const TTestResult ba = paired_t_test(b, a);
        CHECK(ab.t == -ba.t);
        CHECK(ab.significant == ba.significant);
    }
}

TEST_CASE("emoticon_quality counting") {
    EmoticonMap map;
    map.mapping = {{":)", P}, {":(", N}};

    Dataset none;
    none.name = "none";
    none.records.push_back({"a", "no faces here", P, std::nullopt});
    const EmoticonQuality empty = emoticon_quality(none, map);
    CHECK(empty.coverage == 0.0);
    CHECK_FALSE(empty.accuracy.has_value());

    Dataset perfect;
    perfect.name = "perfect";
    perfect.records.push_back({"a", "yay :)", P, std::nullopt});
    perfect.records.push_back({"b", "boo :(", N, std::nullopt});
    const EmoticonQuality full = emoticon_quality(perfect, map);
    CHECK(full.coverage == 1.0);
    CHECK(full.accuracy == 1.0);

    // 10 records, 4 with emoticons, 3 of them correct -> accuracy .75, coverage .4
    Dataset mixed;
    mixed.name = "mixed";
    for (int i = 0; i < 6; ++i) {
        mixed.records.push_back({"p" + std::to_string(i), "plain", U, std::nullopt});
    }
    mixed.records.push_back({"e1", "good :)", P, std::nullopt});
    mixed.records.push_back({"e2", "bad :(", N, std::nullopt});
    mixed.records.push_back({"e3", "sad :(", N, std::nullopt});
    mixed.records.push_back({"e4", "odd :)", N, std::nullopt});  // the wrong one
    const EmoticonQuality q = emoticon_quality(mixed, map);
    CHECK(q.accuracy == 0.75);
    CHECK(q.coverage == 0.4);

    Dataset unlabeled;
    unlabeled.name = "u";
    unlabeled.records.push_back({"a", "text", std::nullopt, std::nullopt});
    CHECK_THROWS_AS(emoticon_quality(unlabeled, map), DataError);
}

namespace {

// Small scripted world for benchmark-shape tests: 4 methods keyed by tokens.
MethodBank bench_bank() {
    MethodBank bank;
    for (int m = 0; m < 4; ++m) {
        Lexicon lex;
        lex.name = "m" + std::to_string(m);
        lex.entries = {{"p" + std::to_string(m), 1.0}, {"n" + std::to_string(m), -1.0}};
        bank.methods.push_back(std::move(lex));
    }
    return bank;
}

Dataset bench_dataset() {
    Dataset ds;
    ds.name = "bench";
    Rng rng(912);
    for (int i = 0; i < 60; ++i) {
        const Polarity gold = label_at(i % 3);
        SentenceRecord rec;
        rec.id = "b" + std::to_string(i);
        rec.gold = gold;
        // most methods agree with gold, some noise
        for (int m = 0; m < 4; ++m) {
            Polarity vote = gold;
            if (bounded(rng, 5) == 0) vote = label_at(static_cast<int>(bounded(rng, 3)));
            if (vote == P) rec.text += "p" + std::to_string(m) + " ";
            if (vote == N) rec.text += "n" + std::to_string(m) + " ";
        }
        rec.text += "w" + std::to_string(bounded(rng, 12));
        ds.records.push_back(rec);
    }
    return ds;
}

BenchmarkConfig bench_config() {
    BenchmarkConfig cfg;
    cfg.boot.agreement_threshold = 3;
    cfg.boot.seed = 2025;
    cfg.params.n_trees = 15;
    cfg.folds = 3;
    cfg.weight_grid = {0.0, 0.5, 1.0};
    return cfg;
}

}  // namespace

TEST_CASE("run_benchmark emits one row per method and fold") {
    const EvaluationReport report = run_benchmark(bench_dataset(), bench_bank(), bench_config());
    CHECK(report.scores.size() == 4 + 5);  // bank + majority/self_train/weighted/best/supervised
    for (const auto& score : report.scores) {
        CHECK(score.per_fold_macro_f1.size() == 3);
        CHECK(score.per_fold_micro_f1.size() == 3);
    }
    REQUIRE(report.self_train_diagnostics.size() == 3);
    for (const auto& diag : report.self_train_diagnostics) {
        CHECK(diag.train_final_size >= diag.train_seed_size);  // the bootstrap only adds
        CHECK(diag.train_seed_size > 0);
    }
    CHECK(report.ranks.size() == report.scores.size());
    CHECK(report.significance.size() == report.scores.size() * (report.scores.size() - 1) / 2);
}

TEST_CASE("run_benchmark honors the upperbound toggles") {
    BenchmarkConfig cfg = bench_config();
    cfg.weight_search = false;
    cfg.best_individual = false;
    cfg.fully_supervised = false;
    const EvaluationReport report = run_benchmark(bench_dataset(), bench_bank(), cfg);
    CHECK(report.scores.size() == 4 + 2);
}

TEST_CASE("run_benchmark can grid-search the supervised learner") {
    BenchmarkConfig cfg = bench_config();
    cfg.weight_search = false;
    cfg.best_individual = false;
    HyperParams small = cfg.params;
    small.n_trees = 3;
    HyperParams large = cfg.params;
    large.n_trees = 12;
    cfg.param_grid = {small, large};
    cfg.inner_folds = 2;
    const EvaluationReport report = run_benchmark(bench_dataset(), bench_bank(), cfg);
    CHECK(report.score_for(kMethodSupervised).per_fold_macro_f1.size() == 3);
}

TEST_CASE("run_benchmark requires gold labels") {
    Dataset ds = bench_dataset();
    ds.records[0].gold.reset();
    CHECK_THROWS_AS(run_benchmark(ds, bench_bank(), bench_config()), DataError);
}

TEST_CASE("run_benchmark reports are byte-stable") {
    const Dataset ds = bench_dataset();
    const MethodBank bank = bench_bank();
    const BenchmarkConfig cfg = bench_config();
    const std::string a = report_to_json(run_benchmark(ds, bank, cfg));
    const std::string b = report_to_json(run_benchmark(ds, bank, cfg));
    CHECK(a == b);
    BenchmarkConfig threaded = cfg;
    threaded.threads = 4;
    const std::string c = report_to_json(run_benchmark(ds, bank, threaded));
    CHECK(a == c);
    // the table renderer should at least mention every method
    const std::string table = report_to_table(run_benchmark(ds, bank, cfg));
    CHECK(table.find(kMethodSelfTrain) != std::string::npos);
    CHECK(table.find(kMethodSupervised) != std::string::npos);
}

TEST_CASE("benchmark with emoticon map reports quality") {
    EmoticonMap map;
    map.mapping = {{":)", P}, {":(", N}};
    Dataset ds = bench_dataset();
    // plant a couple of correct emoticons
    ds.records[0].text += " :(";   // gold negative? record 0 gold = Negative
    ds.records[2].text += " :)";   // record 2 gold = Positive
    const EvaluationReport report =
        run_benchmark(ds, bench_bank(), bench_config(), &map);
    REQUIRE(report.emoticons.has_value());
    CHECK(report.emoticons->coverage > 0.0);
    CHECK(report.emoticons->accuracy.has_value());
}
