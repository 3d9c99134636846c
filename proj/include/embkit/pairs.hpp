#pragma once

#include <compare>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "embkit/errors.hpp"

namespace embkit {

// One (target, context) training pair. Streams of these are the common
// currency between the scene-graph and text-window pipelines.
struct WordPair {
    std::string target;
    std::string context;

    friend bool operator==(const WordPair&, const WordPair&) = default;
    friend auto operator<=>(const WordPair&, const WordPair&) = default;
};

using PairStream = std::vector<WordPair>;

// One "target<TAB>context" pair per line, UTF-8.
inline void write_pairs(std::ostream& out, const PairStream& pairs) {
    for (const auto& p : pairs) out << p.target << '\t' << p.context << '\n';
}

inline PairStream read_pairs(std::istream& in) {
    PairStream pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size() ||
            line.find('\t', tab + 1) != std::string::npos) {
            throw ParseError("pair file: malformed line " + std::to_string(lineno) +
                             " (expected target<TAB>context)");
        }
        pairs.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return pairs;
}

inline void write_pairs_file(const std::filesystem::path& path, const PairStream& pairs) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    write_pairs(out, pairs);
}

inline PairStream read_pairs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    return read_pairs(in);
}

}  // namespace embkit
