#include "polarity/synth.hpp"

#include <algorithm>
#include <array>

#include "polarity/rng.hpp"

namespace polarity {

namespace {

constexpr int kGroups = 8;
constexpr int kWindow = 4;        // groups each method knows well
constexpr int kTokensPerGroup = 30;
constexpr int kFillerTokens = 120;

// (negative, neutral, positive) priors rotated across datasets
constexpr std::array<std::array<double, 3>, 8> kPriors = {{{0.40, 0.25, 0.35},
                                                           {0.30, 0.30, 0.40},
                                                           {0.35, 0.40, 0.25},
                                                           {0.25, 0.35, 0.40},
                                                           {0.40, 0.30, 0.30},
                                                           {0.30, 0.40, 0.30},
                                                           {0.35, 0.30, 0.35},
                                                           {0.25, 0.45, 0.30}}};

std::string group_token(bool positive, int group, int i) {
    return (positive ? "pos" : "neg") + std::to_string(group) + "w" + std::to_string(i);
}

std::string filler_token(int i) { return "fill" + std::to_string(i); }

int weighted_group(Rng& rng, const std::array<double, kGroups>& weights) {
    double r = unit_real(rng);
    for (int g = 0; g < kGroups; ++g) {
        r -= weights[g];
        if (r < 0.0) return g;
    }
    return kGroups - 1;
}

}  // namespace

SynthOutput generate_synthetic(const SynthSpec& spec) {
    if (spec.n_datasets < 1 || spec.n_methods < 3 || spec.n_sentences < 10) {
        throw ConfigError("synthetic spec out of range");
    }
    SynthOutput out;

    out.emoticons.mapping = {{":(", Polarity::Negative},
                             {":|", Polarity::Neutral},
                             {":)", Polarity::Positive}};

    // Lexicons: correct-sign entries inside the method's group window with
    // high coverage, sparser and frequently sign-flipped entries outside it.
    Rng lex_rng(derive_seed(spec.seed, 0xA0));
    for (int m = 0; m < spec.n_methods; ++m) {
        Lexicon lex;
        lex.name = "synlex" + std::to_string(m);
        for (int g = 0; g < kGroups; ++g) {
            int offset = (g - m) % kGroups;
            if (offset < 0) offset += kGroups;
            const bool in_window = offset < kWindow;
            const double cover = in_window ? 0.92 : 0.60;
            const double err = in_window ? 0.08 : 0.40 + 0.25 * unit_real(lex_rng);
            for (int i = 0; i < kTokensPerGroup; ++i) {
                if (unit_real(lex_rng) < cover) {
                    const double sign = unit_real(lex_rng) < err ? -1.0 : 1.0;
                    lex.entries.emplace(group_token(true, g, i), sign);
                }
                if (unit_real(lex_rng) < cover) {
                    const double sign = unit_real(lex_rng) < err ? -1.0 : 1.0;
                    lex.entries.emplace(group_token(false, g, i), -sign);
                }
            }
        }
        out.bank.methods.push_back(std::move(lex));
    }
    out.bank.validate();

    for (int d = 0; d < spec.n_datasets; ++d) {
        Rng rng(derive_seed(spec.seed, 0xB0 + static_cast<std::uint64_t>(d)));
        std::array<double, kGroups> weights{};
        weights.fill(0.2 / (kGroups - 2));
        weights[d % kGroups] = 0.5;
        weights[(d + 3) % kGroups] = 0.3;
        double total = 0.0;
        for (const double w : weights) total += w;
        for (double& w : weights) w /= total;
        const auto& priors = kPriors[d % kPriors.size()];

        Dataset ds;
        ds.name = "synth" + std::to_string(d);
        for (int i = 0; i < spec.n_sentences; ++i) {
            const double r = unit_real(rng);
            Polarity gold = Polarity::Positive;
            if (r < priors[0]) {
                gold = Polarity::Negative;
            } else if (r < priors[0] + priors[1]) {
                gold = Polarity::Neutral;
            }

            std::vector<std::string> tokens;
            const int n_filler = 3 + static_cast<int>(bounded(rng, 6));
            for (int t = 0; t < n_filler; ++t) {
                tokens.push_back(filler_token(static_cast<int>(bounded(rng, kFillerTokens))));
            }
            if (gold != Polarity::Neutral) {
                const bool positive = gold == Polarity::Positive;
                const int n_sentiment = 1 + static_cast<int>(bounded(rng, 3));
                for (int t = 0; t < n_sentiment; ++t) {
                    const int g = weighted_group(rng, weights);
                    tokens.push_back(
                        group_token(positive, g, static_cast<int>(bounded(rng, kTokensPerGroup))));
                }
                if (unit_real(rng) < 0.15) {  // mixed-sentiment noise
                    const int g = weighted_group(rng, weights);
                    tokens.push_back(
                        group_token(!positive, g, static_cast<int>(bounded(rng, kTokensPerGroup))));
                }
            } else if (unit_real(rng) < 0.20) {  // balanced contrast pair
                const int g = weighted_group(rng, weights);
                tokens.push_back(
                    group_token(true, g, static_cast<int>(bounded(rng, kTokensPerGroup))));
                tokens.push_back(
                    group_token(false, g, static_cast<int>(bounded(rng, kTokensPerGroup))));
            }
            shuffle_in_place(tokens, rng);
            if (unit_real(rng) < spec.emoticon_rate) {
                tokens.push_back(gold == Polarity::Positive  ? ":)"
                                 : gold == Polarity::Negative ? ":("
                                                              : ":|");
            }

            SentenceRecord rec;
            rec.id = ds.name + "_s" + std::to_string(i);
            rec.gold = gold;
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                if (t > 0) rec.text += ' ';
                rec.text += tokens[t];
            }
            ds.records.push_back(std::move(rec));
        }
        out.datasets.push_back(std::move(ds));
    }
    return out;
}

void write_synthetic(const SynthOutput& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "lexicons");
    for (const auto& ds : out.datasets) {
        save_dataset(ds, dir / (ds.name + ".tsv"));
    }
    for (const auto& lex : out.bank.methods) {
        save_lexicon(lex, dir / "lexicons" / (lex.name + ".txt"));
    }
    save_emoticon_map(out.emoticons, dir / "emoticons.tsv");
}

}  // namespace polarity
