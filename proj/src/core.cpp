#include "polarity/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "polarity/rng.hpp"

namespace polarity {

std::string_view label_name(Polarity p) {
    switch (p) {
        case Polarity::Negative: return "negative";
        case Polarity::Neutral: return "neutral";
        case Polarity::Positive: return "positive";
    }
    return "neutral";
}

static std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::optional<Polarity> parse_label(std::string_view text) {
    const std::string lower = ascii_lower(text);
    if (lower == "positive") return Polarity::Positive;
    if (lower == "negative") return Polarity::Negative;
    if (lower == "neutral") return Polarity::Neutral;
    return std::nullopt;
}

bool Dataset::fully_labeled() const {
    return std::all_of(records.begin(), records.end(),
                       [](const SentenceRecord& r) { return r.gold.has_value(); });
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
}

// --- tokenizer ------------------------------------------------------------

namespace {

struct Decoded {
    char32_t cp;
    int len;
};

// Minimal UTF-8 decode; malformed bytes fall through as single word chars.
Decoded decode_utf8(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t j) {
        return j < s.size() && (static_cast<unsigned char>(s[j]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        return {static_cast<char32_t>(((b0 & 0x1F) << 6) |
                                      (static_cast<unsigned char>(s[i + 1]) & 0x3F)),
                2};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        return {static_cast<char32_t>(((b0 & 0x0F) << 12) |
                                      ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                                      (static_cast<unsigned char>(s[i + 2]) & 0x3F)),
                3};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        return {static_cast<char32_t>(((b0 & 0x07) << 18) |
                                      ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                                      ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                                      (static_cast<unsigned char>(s[i + 3]) & 0x3F)),
                4};
    }
    return {b0, 1};
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x0085: case 0x00A0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_ascii_punct(char32_t cp) {
    return cp < 0x80 && std::ispunct(static_cast<int>(cp)) != 0;
}

// Longest entry of `preserve` starting at position i, 0 if none.
std::size_t preserved_match(std::string_view s, std::size_t i,
                            const std::set<std::string>& preserve, std::size_t max_len) {
    const std::size_t cap = std::min(max_len, s.size() - i);
    for (std::size_t len = cap; len >= 1; --len) {
        if (preserve.count(std::string(s.substr(i, len))) > 0) return len;
    }
    return 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const std::set<std::string>& preserve) {
    std::vector<std::string> tokens;
    std::size_t max_len = 0;
    for (const auto& p : preserve) max_len = std::max(max_len, p.size());

    std::size_t i = 0;
    while (i < text.size()) {
        const Decoded d = decode_utf8(text, i);
        if (is_unicode_space(d.cp)) {
            i += d.len;
            continue;
        }
        if (max_len > 0) {
            if (const std::size_t len = preserved_match(text, i, preserve, max_len); len > 0) {
                tokens.emplace_back(text.substr(i, len));
                i += len;
                continue;
            }
        }
        if (is_ascii_punct(d.cp)) {
            const std::size_t start = i;
            while (i < text.size()) {
                const Decoded p = decode_utf8(text, i);
                if (!is_ascii_punct(p.cp)) break;
                if (max_len > 0 && preserved_match(text, i, preserve, max_len) > 0) break;
                i += p.len;
            }
            tokens.emplace_back(text.substr(start, i - start));
            continue;
        }
        const std::size_t start = i;
        while (i < text.size()) {
            const Decoded w = decode_utf8(text, i);
            if (is_unicode_space(w.cp) || is_ascii_punct(w.cp)) break;
            i += w.len;
        }
        tokens.push_back(ascii_lower(text.substr(start, i - start)));
    }
    return tokens;
}

// --- dataset IO ------------------------------------------------------------

namespace {

constexpr std::string_view kHeader = "id\tlabel\ttext";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return fields;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());

    Dataset ds;
    ds.name = path.stem().string();

    std::string line;
    std::size_t line_no = 0;
    std::unordered_map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kHeader) throw MalformedRow(1, "expected header '" + std::string(kHeader) + "'");
            continue;
        }
        if (line.empty()) {
            if (in.eof()) break;
            throw MalformedRow(line_no, "empty line");
        }
        auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw MalformedRow(line_no, "expected 3 tab-separated fields, got " +
                                            std::to_string(fields.size()));
        }
        SentenceRecord rec;
        rec.id = fields[0];
        if (rec.id.empty()) throw MalformedRow(line_no, "empty id");
        if (auto [it, inserted] = seen.emplace(rec.id, line_no); !inserted) {
            (void)it;
            throw DuplicateId(rec.id);
        }
        const std::string label_lower = ascii_lower(fields[1]);
        if (label_lower != "unlabeled") {
            auto parsed = parse_label(fields[1]);
            if (!parsed) throw UnknownLabel(line_no, fields[1]);
            rec.gold = *parsed;
        }
        rec.text = fields[2];
        if (blank(rec.text)) throw MalformedRow(line_no, "empty text");
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path.string());
    out << kHeader << '\n';
    for (const auto& rec : dataset.records) {
        out << rec.id << '\t' << (rec.gold ? label_name(*rec.gold) : "unlabeled") << '\t'
            << rec.text << '\n';
    }
}

// --- fold splitting ---------------------------------------------------------

FoldAssignment split_folds(const Dataset& dataset, int k, std::uint64_t seed) {
    const std::size_t n = dataset.records.size();
    if (k < 2) throw ConfigError("fold count must be at least 2");
    if (static_cast<std::size_t>(k) > n) {
        throw TooFewRecords("fold count " + std::to_string(k) + " exceeds " +
                            std::to_string(n) + " records");
    }

    Rng rng(seed);
    // Deal shuffled indices round-robin; stratified dealing keeps per-class
    // counts within one of each other because each class occupies a
    // contiguous run of deal positions.
    std::vector<std::size_t> order;
    order.reserve(n);
    if (dataset.fully_labeled()) {
        for (Polarity cls : kAllPolarities) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i) {
                if (dataset.records[i].gold == cls) members.push_back(i);
            }
            shuffle_in_place(members, rng);
            order.insert(order.end(), members.begin(), members.end());
        }
    } else {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        shuffle_in_place(order, rng);
    }

    FoldAssignment fa;
    fa.k = k;
    fa.fold_of.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        fa.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    for (std::size_t i = 0; i < n; ++i) {
        fa.by_id.emplace(dataset.records[i].id, fa.fold_of[i]);
    }
    return fa;
}

}  // namespace polarity
