#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "polarity/core.hpp"
#include "polarity/lexicon.hpp"

namespace polarity {

/// Family of labeled datasets plus a method bank whose per-dataset accuracy
/// varies by construction: each lexicon knows a window of topic groups well
/// and the rest poorly, and each dataset draws its sentiment vocabulary from
/// a different dominant group. A fixed fraction of sentences carries an
/// emoticon that matches the gold label.
struct SynthSpec {
    int n_datasets = 8;
    int n_sentences = 2000;
    int n_methods = 10;
    std::uint64_t seed = 42;
    double emoticon_rate = 0.10;
};

struct SynthOutput {
    std::vector<Dataset> datasets;
    MethodBank bank;
    EmoticonMap emoticons;
};

SynthOutput generate_synthetic(const SynthSpec& spec);

/// Writes `synth0.tsv` .. , `lexicons/synlex0.txt` .. and `emoticons.tsv`.
void write_synthetic(const SynthOutput& out, const std::filesystem::path& dir);

}  // namespace polarity
