#include "polarity/metrics.hpp"

#include "polarity/errors.hpp"

namespace polarity {

long ConfusionMatrix::total() const {
    long sum = 0;
    for (const auto& row : counts) {
        for (const long c : row) sum += c;
    }
    return sum;
}

double macro_f1(const ConfusionMatrix& cm, MacroVariant variant) {
    if (cm.total() == 0) throw EmptyMatrix();
    double f1_sum = 0.0;
    double p_sum = 0.0;
    double r_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const long tp = cm.counts[c][c];
        long fp = 0;
        long fn = 0;
        for (int other = 0; other < 3; ++other) {
            if (other == c) continue;
            fp += cm.counts[other][c];
            fn += cm.counts[c][other];
        }
        const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        f1_sum += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        p_sum += p;
        r_sum += r;
    }
    if (variant == MacroVariant::HarmonicPR) {
        const double p_macro = p_sum / 3.0;
        const double r_macro = r_sum / 3.0;
        return p_macro + r_macro > 0.0 ? 2.0 * p_macro * r_macro / (p_macro + r_macro) : 0.0;
    }
    return f1_sum / 3.0;
}

double micro_f1(const ConfusionMatrix& cm) {
    const long total = cm.total();
    if (total == 0) throw EmptyMatrix();
    long trace = 0;
    for (int c = 0; c < 3; ++c) trace += cm.counts[c][c];
    return static_cast<double>(trace) / total;
}

}  // namespace polarity
