#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embkit/errors.hpp"
#include "embkit/linalg.hpp"
#include "embkit/rng.hpp"
#include "embkit/sgns.hpp"

namespace embkit::emb {

enum class Modality { linguistic, structured, visual, fused };

inline std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::linguistic: return "linguistic";
        case Modality::structured: return "structured";
        case Modality::visual: return "visual";
        default: return "fused";
    }
}

inline Modality modality_from_string(std::string_view s) {
    if (s == "linguistic") return Modality::linguistic;
    if (s == "structured") return Modality::structured;
    if (s == "visual") return Modality::visual;
    if (s == "fused") return Modality::fused;
    throw ArgumentError("unknown modality: " + std::string(s));
}

// Immutable after construction: a vocabulary bijective with the rows of a
// dense matrix, plus a modality tag.
struct EmbeddingSpace {
    std::vector<std::string> words;  // row order
    std::unordered_map<std::string, int> index;
    Matrix matrix;
    Modality modality = Modality::linguistic;

    int dim() const { return static_cast<int>(matrix.cols()); }
    std::size_t size() const { return words.size(); }

    std::optional<int> find(const std::string& w) const {
        const auto it = index.find(w);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    std::span<const double> row(int r) const {
        return {matrix.data() + static_cast<std::ptrdiff_t>(r) * matrix.cols(),
                static_cast<std::size_t>(matrix.cols())};
    }
};

inline EmbeddingSpace make_space(std::vector<std::string> words, Matrix m, Modality modality) {
    if (m.rows() != static_cast<Eigen::Index>(words.size()))
        throw ArgumentError("embedding: row count does not match vocabulary size");
    if (m.cols() < 1) throw ArgumentError("embedding: dimension must be >= 1");
    if (!m.allFinite()) throw ArgumentError("embedding: matrix contains NaN/Inf");
    EmbeddingSpace e;
    e.words = std::move(words);
    for (std::size_t i = 0; i < e.words.size(); ++i) {
        if (!e.index.emplace(e.words[i], static_cast<int>(i)).second)
            throw ArgumentError("embedding: duplicate word '" + e.words[i] + "'");
    }
    e.matrix = std::move(m);
    e.modality = modality;
    return e;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;  // zero-vector convention
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// --- word2vec text format: "<vocab> <dim>" header, then "<word> <v1> ...". ---

inline EmbeddingSpace load_word2vec(std::istream& in, Modality modality) {
    std::size_t vocab_size = 0;
    int dim = 0;
    if (!(in >> vocab_size >> dim) || dim < 1)
        throw ParseError("embedding file: malformed header (expected '<vocab_size> <dim>')");

    std::vector<std::string> words;
    words.reserve(vocab_size);
    Matrix m(static_cast<Eigen::Index>(vocab_size), dim);
    std::set<std::string> seen;
    std::string word, field;
    for (std::size_t r = 0; r < vocab_size; ++r) {
        if (!(in >> word))
            throw ParseError("embedding file: header declares " + std::to_string(vocab_size) +
                             " rows but only " + std::to_string(r) + " present");
        if (!seen.insert(word).second)
            throw ParseError("embedding file: duplicate word '" + word + "'");
        for (int c = 0; c < dim; ++c) {
            if (!(in >> field))
                throw ParseError("embedding file: row for '" + word + "' has fewer than " +
                                 std::to_string(dim) + " values");
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end != field.c_str() + field.size() || !std::isfinite(v))
                throw ParseError("embedding file: non-numeric field '" + field + "' in row for '" +
                                 word + "'");
            m(static_cast<Eigen::Index>(r), c) = v;
        }
        words.push_back(word);
    }
    if (in >> field)
        throw ParseError("embedding file: trailing content after " + std::to_string(vocab_size) +
                         " declared rows");
    return make_space(std::move(words), std::move(m), modality);
}

inline void save_word2vec(std::ostream& out, const EmbeddingSpace& e) {
    out << e.size() << ' ' << e.dim() << '\n';
    char buf[64];
    for (std::size_t r = 0; r < e.size(); ++r) {
        out << e.words[r];
        for (int c = 0; c < e.dim(); ++c) {
            std::snprintf(buf, sizeof buf, "%.9g", e.matrix(static_cast<Eigen::Index>(r), c));
            out << ' ' << buf;
        }
        out << '\n';
    }
}

// --- binary cache: magic "EMBK", version byte, modality byte, u32 vocab,
// u32 dim, then length-prefixed words and little-endian double rows. ---

inline constexpr char kBinaryMagic[4] = {'E', 'M', 'B', 'K'};
inline constexpr std::uint8_t kBinaryVersion = 1;

inline void save_binary(const std::filesystem::path& path, const EmbeddingSpace& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    out.write(kBinaryMagic, 4);
    const std::uint8_t ver = kBinaryVersion;
    const std::uint8_t mod = static_cast<std::uint8_t>(e.modality);
    out.write(reinterpret_cast<const char*>(&ver), 1);
    out.write(reinterpret_cast<const char*>(&mod), 1);
    const std::uint32_t n = static_cast<std::uint32_t>(e.size());
    const std::uint32_t d = static_cast<std::uint32_t>(e.dim());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    for (const auto& w : e.words) {
        const std::uint32_t len = static_cast<std::uint32_t>(w.size());
        out.write(reinterpret_cast<const char*>(&len), 4);
        out.write(w.data(), static_cast<std::streamsize>(len));
    }
    out.write(reinterpret_cast<const char*>(e.matrix.data()),
              static_cast<std::streamsize>(sizeof(double) * e.size() *
                                           static_cast<std::size_t>(e.dim())));
}

inline EmbeddingSpace load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path.string());
    char magic[4];
    std::uint8_t ver = 0, mod = 0;
    std::uint32_t n = 0, d = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&ver), 1);
    in.read(reinterpret_cast<char*>(&mod), 1);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
        throw ParseError("embedding cache: bad magic in " + path.string());
    if (ver != kBinaryVersion)
        throw ParseError("embedding cache: unsupported version " + std::to_string(ver));
    std::vector<std::string> words(n);
    for (auto& w : words) {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 4);
        w.resize(len);
        in.read(w.data(), static_cast<std::streamsize>(len));
    }
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * n * d));
    if (!in) throw ParseError("embedding cache: truncated file " + path.string());
    return make_space(std::move(words), std::move(m), static_cast<Modality>(mod));
}

inline EmbeddingSpace load_file(const std::filesystem::path& path, Modality modality) {
    if (path.extension() == ".bin") return load_binary(path);
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    return load_word2vec(in, modality);
}

inline void save_file(const std::filesystem::path& path, const EmbeddingSpace& e) {
    if (path.extension() == ".bin") {
        save_binary(path, e);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    save_word2vec(out, e);
}

// Scales every nonzero row to unit Euclidean norm. Zero rows pass through
// unchanged and are reported via zero_words when given.
inline EmbeddingSpace l2_normalize(const EmbeddingSpace& e,
                                   std::vector<std::string>* zero_words = nullptr) {
    EmbeddingSpace out = e;
    for (Eigen::Index r = 0; r < out.matrix.rows(); ++r) {
        const double norm = out.matrix.row(r).norm();
        if (norm > 0.0) {
            out.matrix.row(r) /= norm;
        } else if (zero_words) {
            zero_words->push_back(out.words[static_cast<std::size_t>(r)]);
        }
    }
    return out;
}

// Sorted intersection of the vocabularies.
inline std::vector<std::string> common_vocab(const std::vector<const EmbeddingSpace*>& spaces) {
    if (spaces.empty()) throw ArgumentError("common_vocab: no spaces given");
    std::vector<std::string> common = spaces.front()->words;
    std::sort(common.begin(), common.end());
    for (std::size_t i = 1; i < spaces.size(); ++i) {
        std::vector<std::string> next;
        for (const auto& w : common) {
            if (spaces[i]->index.count(w)) next.push_back(w);
        }
        common = std::move(next);
    }
    return common;
}

// Rows of e for the given words, in the given order.
inline EmbeddingSpace restrict_to(const EmbeddingSpace& e, const std::vector<std::string>& words) {
    Matrix m(static_cast<Eigen::Index>(words.size()), e.matrix.cols());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto r = e.find(words[i]);
        if (!r) throw ArgumentError("restrict_to: word '" + words[i] + "' not in vocabulary");
        m.row(static_cast<Eigen::Index>(i)) = e.matrix.row(*r);
    }
    return make_space(words, std::move(m), e.modality);
}

// Mid-level fusion: concatenates the L2-normalized rows of both spaces over
// their common vocabulary. Rows from unit-norm parts have norm sqrt(2); the
// concatenation is not re-normalized.
inline EmbeddingSpace fuse(const EmbeddingSpace& a, const EmbeddingSpace& b) {
    const auto common = common_vocab({&a, &b});
    if (common.empty()) throw CoverageError("fuse: vocabularies have empty intersection");
    const EmbeddingSpace na = l2_normalize(restrict_to(a, common));
    const EmbeddingSpace nb = l2_normalize(restrict_to(b, common));
    Matrix m(static_cast<Eigen::Index>(common.size()), na.matrix.cols() + nb.matrix.cols());
    m << na.matrix, nb.matrix;
    return make_space(common, std::move(m), Modality::fused);
}

// Seeded uniform [-1, 1] matrix over the same vocabulary/dimension; the
// random baseline for clustering comparisons.
inline EmbeddingSpace random_like(const EmbeddingSpace& e, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(e.matrix.rows(), e.matrix.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    return make_space(e.words, std::move(m), e.modality);
}

// The trained input matrix becomes the exported embedding.
inline EmbeddingSpace from_sgns(const sgns::Model& model, Modality modality) {
    return make_space(model.vocab.words, model.input, modality);
}

}  // namespace embkit::emb
