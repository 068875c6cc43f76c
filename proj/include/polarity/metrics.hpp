#pragma once

#include <array>
#include <cstdint>

#include "polarity/core.hpp"

namespace polarity {

/// 3x3 counts indexed (gold, predicted).
struct ConfusionMatrix {
    std::array<std::array<long, 3>, 3> counts{};

    void add(Polarity gold, Polarity predicted) {
        ++counts[label_index(gold)][label_index(predicted)];
    }
    long total() const;
};

/// MeanF1 is the unweighted mean of per-class F1 scores. HarmonicPR instead
/// harmonically combines macro-averaged precision and recall; the two differ
/// on skewed data.
enum class MacroVariant { MeanF1, HarmonicPR };

/// Per-class precision/recall with the 0/0 -> 0 convention, so a class the
/// predictor never emits drags the mean down.
double macro_f1(const ConfusionMatrix& cm, MacroVariant variant = MacroVariant::MeanF1);

/// Single-label multi-class micro-F1, which reduces to accuracy.
double micro_f1(const ConfusionMatrix& cm);

}  // namespace polarity
