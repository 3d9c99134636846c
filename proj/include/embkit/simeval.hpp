#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"
#include "embkit/text.hpp"

namespace embkit::eval {

// Word pairs with human similarity/relatedness judgements (MEN / SimLex
// style), as lines of "word1<TAB>word2<TAB>score".
struct SimilarityDataset {
    struct Pair {
        std::string word1;
        std::string word2;
        double score;
    };
    std::string name;
    std::vector<Pair> pairs;
};

inline SimilarityDataset load_dataset(std::istream& in, std::string name) {
    SimilarityDataset d;
    d.name = std::move(name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(d.name + ": malformed line " + std::to_string(lineno) +
                             " (expected word1<TAB>word2<TAB>score)");
        char* end = nullptr;
        const std::string score_field = line.substr(t2 + 1);
        const double score = std::strtod(score_field.c_str(), &end);
        if (end != score_field.c_str() + score_field.size() || !std::isfinite(score))
            throw ParseError(d.name + ": non-numeric score on line " + std::to_string(lineno));
        d.pairs.push_back({to_lower(line.substr(0, t1)),
                           to_lower(line.substr(t1 + 1, t2 - t1 - 1)), score});
    }
    if (d.pairs.empty()) throw ParseError(d.name + ": no pairs");
    return d;
}

inline SimilarityDataset load_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    return load_dataset(in, path.stem().string());
}

// Average ranks (1-based): tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

struct SpearmanResult {
    double rho;
    double p_value;
};

// Spearman rank correlation with average-tie ranks. The p-value is the
// two-sided t approximation with df = n - 2; rho = +-1 maps to p = 0.
inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("spearman: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw ArgumentError("spearman: need at least 3 observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("spearman: undefined correlation (zero rank variance)");
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);

    double p = 0.0;
    if (std::abs(rho) < 1.0) {
        const double df = static_cast<double>(n) - 2.0;
        const double t = rho * std::sqrt(df / (1.0 - rho * rho));
        const boost::math::students_t dist(df);
        p = 2.0 * boost::math::cdf(dist, -std::abs(t));
    }
    return {rho, p};
}

struct EvalResult {
    double spearman = 0.0;
    double p_value = 0.0;
    std::size_t covered_pairs = 0;
    std::size_t total_pairs = 0;
};

// Cosine-similarity evaluation over the covered pairs (both words in vocab);
// uncovered pairs are skipped, not zero-filled.
inline EvalResult evaluate(const emb::EmbeddingSpace& e, const SimilarityDataset& d) {
    std::vector<double> human, model;
    for (const auto& p : d.pairs) {
        const auto r1 = e.find(p.word1);
        const auto r2 = e.find(p.word2);
        if (!r1 || !r2) continue;
        human.push_back(p.score);
        model.push_back(emb::cosine(e.row(*r1), e.row(*r2)));
    }
    if (human.size() < 3)
        throw CoverageError(d.name + ": only " + std::to_string(human.size()) +
                            " of " + std::to_string(d.pairs.size()) +
                            " pairs covered; need at least 3");
    const auto s = spearman(human, model);
    return {s.rho, s.p_value, human.size(), d.pairs.size()};
}

struct CommonSubsetResult {
    double subset_fraction = 0.0;  // covered-by-all pairs / total pairs
    std::vector<EvalResult> per_space;
};

// Restricts the dataset to pairs covered by every space, then evaluates each
// space on that shared subset.
inline CommonSubsetResult evaluate_common_subset(
    const std::vector<const emb::EmbeddingSpace*>& spaces, const SimilarityDataset& d) {
    if (spaces.size() < 2) throw ArgumentError("evaluate_common_subset: need at least 2 spaces");
    SimilarityDataset subset;
    subset.name = d.name + " (common subset)";
    for (const auto& p : d.pairs) {
        const bool covered = std::all_of(spaces.begin(), spaces.end(), [&p](const auto* e) {
            return e->find(p.word1) && e->find(p.word2);
        });
        if (covered) subset.pairs.push_back(p);
    }
    if (subset.pairs.size() < 3)
        throw CoverageError(d.name + ": only " + std::to_string(subset.pairs.size()) +
                            " pairs covered by all spaces; need at least 3");
    CommonSubsetResult out;
    out.subset_fraction =
        static_cast<double>(subset.pairs.size()) / static_cast<double>(d.pairs.size());
    for (const auto* e : spaces) {
        auto r = evaluate(*e, subset);
        r.total_pairs = d.pairs.size();  // coverage reported against the full dataset
        out.per_space.push_back(r);
    }
    return out;
}

}  // namespace embkit::eval
