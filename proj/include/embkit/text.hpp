#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace embkit {

// ASCII lowercasing; non-ASCII bytes pass through untouched.
inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// Strips ASCII punctuation from both ends of a token; interior punctuation
// (hyphens, apostrophes) is kept.
inline std::string strip_edge_punct(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Lowercase, whitespace-split, strip edge punctuation, drop empties.
inline std::vector<std::string> normalize_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& raw : split_whitespace(to_lower(s))) {
        std::string tok = strip_edge_punct(raw);
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

}  // namespace embkit
