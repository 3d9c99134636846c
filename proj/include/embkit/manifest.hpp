#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "embkit/errors.hpp"

namespace embkit::cli {

inline constexpr std::string_view kToolName = "embkit";
inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::uint64_t fnv1a_bytes(const char* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open for digest: " + path.string());
    char buf[1 << 16];
    std::uint64_t h = 0xcbf29ce484222325ULL;
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Every CLI run records what it consumed and produced: effective config,
// seeds, and FNV-1a digests of inputs and outputs.
struct Manifest {
    std::string subcommand;
    std::uint64_t root_seed = 0;
    std::uint64_t stage_seed = 0;
    std::map<std::string, std::string> config;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
};

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    nlohmann::json j;
    j["tool"] = std::string(kToolName) + " " + std::string(kToolVersion);
    j["subcommand"] = m.subcommand;
    j["root_seed"] = m.root_seed;
    j["stage_seed"] = m.stage_seed;
    j["config"] = m.config;
    auto digest_list = [](const std::vector<std::filesystem::path>& files) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& f : files)
            arr.push_back({{"path", f.string()}, {"fnv1a", hex64(fnv1a_file(f))}});
        return arr;
    };
    j["inputs"] = digest_list(m.inputs);
    j["outputs"] = digest_list(m.outputs);
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace embkit::cli
