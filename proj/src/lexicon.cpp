#include "polarity/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "polarity/parallel.hpp"

namespace polarity {

std::vector<std::string> MethodBank::method_names() const {
    std::vector<std::string> names;
    names.reserve(methods.size());
    for (const auto& m : methods) names.push_back(m.name);
    return names;
}

void MethodBank::validate() const {
    if (methods.size() < 3) {
        throw ConfigError("a method bank needs at least 3 methods, got " +
                          std::to_string(methods.size()));
    }
    std::set<std::string> names;
    for (const auto& m : methods) {
        if (m.name.empty()) throw ConfigError("lexicon with empty name");
        if (!names.insert(m.name).second) throw ConfigError("duplicate lexicon name: " + m.name);
        if (m.entries.empty()) throw ConfigError("lexicon '" + m.name + "' has no entries");
        if (m.negation_window < 0) throw ConfigError("lexicon '" + m.name + "': negative window");
        for (const auto& [token, score] : m.entries) {
            if (!std::isfinite(score)) {
                throw ConfigError("lexicon '" + m.name + "': non-finite score for '" + token + "'");
            }
        }
    }
}

std::set<std::string> EmoticonMap::token_set() const {
    std::set<std::string> out;
    for (const auto& [tok, label] : mapping) {
        (void)label;
        out.insert(tok);
    }
    return out;
}

const std::vector<Polarity>& PredictionMatrix::row(const std::string& id) const {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw DataError("no prediction row for id '" + id + "'");
    return rows[it->second];
}

PredictionMatrix PredictionMatrix::restricted_to(const std::vector<std::string>& subset) const {
    PredictionMatrix out;
    out.method_names = method_names;
    out.ids.reserve(subset.size());
    out.rows.reserve(subset.size());
    for (const auto& id : subset) {
        out.row_of.emplace(id, out.ids.size());
        out.ids.push_back(id);
        out.rows.push_back(row(id));
    }
    return out;
}

Polarity score_sentence(const Lexicon& lexicon, const std::vector<std::string>& tokens) {
    const auto window = static_cast<std::size_t>(std::max(lexicon.negation_window, 0));
    double raw = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = lexicon.entries.find(tokens[i]);
        if (it == lexicon.entries.end()) continue;
        bool negated = false;
        for (std::size_t back = 1; back <= window && back <= i; ++back) {
            if (lexicon.negation_tokens.count(tokens[i - back]) > 0) {
                negated = true;
                break;
            }
        }
        raw += negated ? -it->second : it->second;
    }
    if (raw > 0.0) return Polarity::Positive;
    if (raw < 0.0) return Polarity::Negative;
    return Polarity::Neutral;
}

std::optional<Polarity> emoticon_label(const std::vector<std::string>& tokens,
                                       const EmoticonMap& map) {
    std::optional<Polarity> found;
    for (const auto& tok : tokens) {
        auto it = map.mapping.find(tok);
        if (it == map.mapping.end()) continue;
        if (found && *found != it->second) return std::nullopt;  // conflicting emoticons
        found = it->second;
    }
    return found;
}

Dataset annotate_emoticons(const Dataset& dataset, const EmoticonMap& map) {
    Dataset out = dataset;
    const auto preserve = map.token_set();
    for (auto& rec : out.records) {
        rec.emoticon_label = emoticon_label(tokenize(rec.text, preserve), map);
    }
    return out;
}

PredictionMatrix run_base_methods(const MethodBank& bank, const Dataset& dataset, int threads) {
    bank.validate();
    PredictionMatrix matrix;
    matrix.method_names = bank.method_names();
    matrix.ids.reserve(dataset.records.size());
    for (const auto& rec : dataset.records) {
        matrix.row_of.emplace(rec.id, matrix.ids.size());
        matrix.ids.push_back(rec.id);
    }
    matrix.rows.assign(dataset.records.size(), {});
    parallel_for(dataset.records.size(), threads, [&](std::size_t i) {
        const auto tokens = tokenize(dataset.records[i].text);
        std::vector<Polarity> row;
        row.reserve(bank.methods.size());
        for (const auto& lex : bank.methods) {
            row.push_back(score_sentence(lex, tokens));
        }
        matrix.rows[i] = std::move(row);
    });
    return matrix;
}

// --- file formats -----------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon file: " + path.string());
    Lexicon lex;
    lex.name = path.stem().string();

    std::string line;
    std::size_t line_no = 0;
    bool negation_section = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string body = strip(line);
        if (body.empty() || body[0] == '#') continue;
        if (body == "!negation") {
            negation_section = true;
            continue;
        }
        if (negation_section) {
            lex.negation_tokens.insert(body);
            continue;
        }
        const std::size_t tab = body.find('\t');
        if (tab == std::string::npos) throw MalformedRow(line_no, "expected token<TAB>score");
        const std::string token = body.substr(0, tab);
        double score = 0.0;
        try {
            std::size_t consumed = 0;
            score = std::stod(body.substr(tab + 1), &consumed);
            if (consumed != body.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw MalformedRow(line_no, "bad score for token '" + token + "'");
        }
        if (token.empty()) throw MalformedRow(line_no, "empty token");
        if (!lex.entries.emplace(token, score).second) {
            throw MalformedRow(line_no, "duplicate token '" + token + "'");
        }
    }
    if (lex.entries.empty()) throw DataError("lexicon file has no entries: " + path.string());
    return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write lexicon file: " + path.string());
    std::vector<std::string> tokens;
    tokens.reserve(lexicon.entries.size());
    for (const auto& [tok, score] : lexicon.entries) {
        (void)score;
        tokens.push_back(tok);
    }
    std::sort(tokens.begin(), tokens.end());
    for (const auto& tok : tokens) {
        std::ostringstream val;
        val << lexicon.entries.at(tok);
        out << tok << '\t' << val.str() << '\n';
    }
    if (!lexicon.negation_tokens.empty()) {
        out << "!negation\n";
        std::vector<std::string> negs(lexicon.negation_tokens.begin(),
                                      lexicon.negation_tokens.end());
        std::sort(negs.begin(), negs.end());
        for (const auto& t : negs) out << t << '\n';
    }
}

MethodBank load_method_bank(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("lexicon directory does not exist: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    MethodBank bank;
    for (const auto& f : files) bank.methods.push_back(load_lexicon(f));
    bank.validate();
    return bank;
}

EmoticonMap load_emoticon_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open emoticon map: " + path.string());
    EmoticonMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw MalformedRow(line_no, "expected emoticon<TAB>label");
        const std::string emoticon = line.substr(0, tab);
        const auto label = parse_label(line.substr(tab + 1));
        if (!label) throw UnknownLabel(line_no, line.substr(tab + 1));
        if (emoticon.empty()) throw MalformedRow(line_no, "empty emoticon");
        if (emoticon.find_first_of(" \t") != std::string::npos) {
            throw ConfigError("emoticon '" + emoticon + "' contains whitespace");
        }
        if (!map.mapping.emplace(emoticon, *label).second) {
            throw MalformedRow(line_no, "duplicate emoticon '" + emoticon + "'");
        }
    }
    // Every key must come back out of the tokenizer as a single verbatim token.
    const auto keys = map.token_set();
    for (const auto& [tok, label] : map.mapping) {
        (void)label;
        const auto round_trip = tokenize(tok, keys);
        if (round_trip.size() != 1 || round_trip[0] != tok) {
            throw ConfigError("emoticon '" + tok + "' is not tokenizable as a single token");
        }
    }
    return map;
}

void save_emoticon_map(const EmoticonMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write emoticon map: " + path.string());
    for (const auto& [tok, label] : map.mapping) {
        out << tok << '\t' << label_name(label) << '\n';
    }
}

}  // namespace polarity
