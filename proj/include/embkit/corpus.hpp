#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "embkit/errors.hpp"
#include "embkit/pairs.hpp"
#include "embkit/rng.hpp"
#include "embkit/text.hpp"

namespace embkit::corpus {

// Line-segmented token stream. Lines (sentences) are the sampling unit and
// the boundary for window pairs.
struct Corpus {
    std::vector<std::vector<std::string>> lines;
    std::size_t token_count = 0;
    std::unordered_map<std::string, std::size_t> vocab_freq;
};

inline Corpus make_corpus(std::vector<std::vector<std::string>> lines) {
    Corpus c;
    c.lines = std::move(lines);
    for (const auto& line : c.lines) {
        c.token_count += line.size();
        for (const auto& tok : line) ++c.vocab_freq[tok];
    }
    return c;
}

// UTF-8 plain text, one sentence per line, whitespace tokenization. Tokens
// are lowercased; empty lines are skipped.
inline Corpus read_corpus(std::istream& in) {
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) {
        auto toks = split_whitespace(to_lower(line));
        if (!toks.empty()) lines.push_back(std::move(toks));
    }
    return make_corpus(std::move(lines));
}

inline Corpus read_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const Corpus& c) {
    for (const auto& line : c.lines) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i) out << ' ';
            out << line[i];
        }
        out << '\n';
    }
}

inline void write_corpus_file(const std::filesystem::path& path, const Corpus& c) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    write_corpus(out, c);
}

// Sliding-window skip-gram pairs: for the token at position i emit
// (token_i, token_j) for all j != i with |i-j| <= window, within one line.
inline PairStream window_pairs(const Corpus& c, int window) {
    if (window < 1) throw ArgumentError("window_pairs: window must be >= 1");
    PairStream pairs;
    for (const auto& line : c.lines) {
        const int n = static_cast<int>(line.size());
        for (int i = 0; i < n; ++i) {
            const int lo = std::max(0, i - window);
            const int hi = std::min(n - 1, i + window);
            for (int j = lo; j <= hi; ++j) {
                if (j == i) continue;
                pairs.push_back({line[static_cast<std::size_t>(i)],
                                 line[static_cast<std::size_t>(j)]});
            }
        }
    }
    return pairs;
}

// Samples whole lines uniformly without replacement until the cumulative
// token count first reaches target_tokens. Result order is the sampled order.
inline Corpus subsample_tokens(const Corpus& c, std::size_t target_tokens, std::uint64_t seed) {
    if (target_tokens == 0) throw ArgumentError("subsample_tokens: target_tokens must be > 0");
    if (target_tokens > c.token_count)
        throw ArgumentError("subsample_tokens: target_tokens exceeds corpus size (" +
                            std::to_string(c.token_count) + ")");
    std::vector<std::size_t> order(c.lines.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::vector<std::string>> sampled;
    std::size_t got = 0;
    for (std::size_t idx : order) {
        if (got >= target_tokens) break;
        sampled.push_back(c.lines[idx]);
        got += c.lines[idx].size();
    }
    return make_corpus(std::move(sampled));
}

enum class FreqRange { high, medium, low };

inline std::string_view to_string(FreqRange r) {
    switch (r) {
        case FreqRange::high: return "HIGH";
        case FreqRange::medium: return "MEDIUM";
        default: return "LOW";
    }
}

// Tri-partition of the vocabulary by descending frequency. ranges[0..2] hold
// (word, count) in assignment order for HIGH, MEDIUM, LOW.
struct FrequencySplit {
    std::array<std::vector<std::pair<std::string, std::size_t>>, 3> ranges;
    std::array<std::size_t, 3> masses{0, 0, 0};
};

// Greedy split into three roughly equal token masses: words sorted by
// descending frequency (ties lexicographic) fill HIGH until its mass reaches
// token_count/3, then MEDIUM likewise, remainder LOW. Each range's mass
// deviates from token_count/3 by at most one word's mass.
inline FrequencySplit split_by_frequency(const Corpus& c) {
    if (c.vocab_freq.empty()) throw ArgumentError("split_by_frequency: empty vocabulary");
    std::vector<std::pair<std::string, std::size_t>> sorted(c.vocab_freq.begin(),
                                                            c.vocab_freq.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    FrequencySplit split;
    const double third = static_cast<double>(c.token_count) / 3.0;
    std::size_t range = 0;
    for (auto& wc : sorted) {
        if (range < 2 && static_cast<double>(split.masses[range]) >= third) ++range;
        split.masses[range] += wc.second;
        split.ranges[range].push_back(std::move(wc));
    }
    return split;
}

// TSV export: word<TAB>range<TAB>count.
inline void write_frequency_split(std::ostream& out, const FrequencySplit& split) {
    for (std::size_t r = 0; r < 3; ++r) {
        for (const auto& [word, count] : split.ranges[r])
            out << word << '\t' << to_string(static_cast<FreqRange>(r)) << '\t' << count << '\n';
    }
}

}  // namespace embkit::corpus
