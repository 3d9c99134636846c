#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "embkit/errors.hpp"
#include "embkit/pairs.hpp"
#include "embkit/text.hpp"

namespace embkit::sg {

enum class NodeKind { object, attribute, predicate };

struct Node {
    int id = 0;  // unique within one SceneGraph
    NodeKind kind = NodeKind::object;
    std::vector<std::string> tokens;  // lowercased, whitespace-split, non-empty
};

// Per-image annotation graph: objects, their attributes, and pairwise
// relationships. Edges are undirected; an attribute connects to its object,
// a predicate node connects to its subject and its object.
struct SceneGraph {
    std::string image_id;
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> edges;
};

// Word-level view of a scene graph: one vertex per token occurrence. Tokens
// of one node are mutually adjacent and inherit the node's edges.
struct WordGraph {
    std::vector<std::string> words;     // vertex -> word
    std::vector<std::vector<int>> adj;  // sorted, deduplicated, no self loops
};

namespace detail {

inline std::string record_name(const nlohmann::json& rec, std::size_t index) {
    if (rec.is_object() && rec.contains("image_id")) {
        const auto& id = rec.at("image_id");
        if (id.is_string()) return "image_id=" + id.get<std::string>();
        if (id.is_number_integer()) return "image_id=" + std::to_string(id.get<std::int64_t>());
    }
    return "record #" + std::to_string(index);
}

}  // namespace detail

// Parses a JSON array of Visual Genome style image records:
//   {"image_id": str, "objects": [{"id": int, "names": [str], "attributes": [str]}],
//    "relationships": [{"subject_id": int, "predicate": str, "object_id": int}]}
// Multi-word names are lowercased and whitespace-split into the node's token
// list; tokens that normalize to nothing are dropped, and a node whose token
// list comes out empty is dropped along with its edges. A relationship whose
// subject/object id does not exist in the record is a structural error.
inline std::vector<SceneGraph> parse_scene_graphs(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scene-graph JSON: syntax error at byte " + std::to_string(e.byte) +
                         ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError("scene-graph JSON: top level must be an array of image records");

    std::vector<SceneGraph> graphs;
    graphs.reserve(doc.size());
    for (std::size_t idx = 0; idx < doc.size(); ++idx) {
        const auto& rec = doc[idx];
        const std::string where = detail::record_name(rec, idx);
        if (!rec.is_object()) throw ParseError("scene-graph JSON: " + where + " is not an object");

        SceneGraph g;
        if (rec.contains("image_id")) {
            const auto& id = rec.at("image_id");
            if (id.is_string()) {
                g.image_id = id.get<std::string>();
            } else if (id.is_number_integer()) {
                g.image_id = std::to_string(id.get<std::int64_t>());
            } else {
                throw ParseError("scene-graph JSON: " + where + ": image_id must be a string");
            }
        } else {
            throw ParseError("scene-graph JSON: " + where + ": missing image_id");
        }

        std::map<std::int64_t, int> object_node;  // external object id -> node id, -1 if dropped
        std::set<std::pair<int, int>> edges;

        auto add_node = [&g](NodeKind kind, std::vector<std::string> tokens) -> int {
            Node n;
            n.id = static_cast<int>(g.nodes.size());
            n.kind = kind;
            n.tokens = std::move(tokens);
            g.nodes.push_back(std::move(n));
            return g.nodes.back().id;
        };
        auto add_edge = [&edges](int a, int b) {
            if (a == b) return;
            edges.emplace(std::min(a, b), std::max(a, b));
        };

        if (rec.contains("objects")) {
            if (!rec.at("objects").is_array())
                throw ParseError("scene-graph JSON: " + where + ": objects must be an array");
            for (const auto& obj : rec.at("objects")) {
                if (!obj.is_object() || !obj.contains("id") || !obj.at("id").is_number_integer())
                    throw ParseError("scene-graph JSON: " + where + ": object without integer id");
                const std::int64_t ext_id = obj.at("id").get<std::int64_t>();
                if (object_node.count(ext_id))
                    throw ParseError("scene-graph JSON: " + where + ": duplicate object id " +
                                     std::to_string(ext_id));

                std::vector<std::string> tokens;
                if (obj.contains("names")) {
                    if (!obj.at("names").is_array())
                        throw ParseError("scene-graph JSON: " + where + ": object names must be an array");
                    for (const auto& name : obj.at("names")) {
                        if (!name.is_string())
                            throw ParseError("scene-graph JSON: " + where + ": object name must be a string");
                        for (auto& t : normalize_tokens(name.get<std::string>()))
                            tokens.push_back(std::move(t));
                    }
                }
                if (tokens.empty()) {
                    object_node[ext_id] = -1;  // normalized away; references to it are skipped
                    continue;
                }
                const int node_id = add_node(NodeKind::object, std::move(tokens));
                object_node[ext_id] = node_id;

                if (obj.contains("attributes")) {
                    if (!obj.at("attributes").is_array())
                        throw ParseError("scene-graph JSON: " + where + ": attributes must be an array");
                    std::set<std::vector<std::string>> seen;  // duplicates collapse per object
                    for (const auto& attr : obj.at("attributes")) {
                        if (!attr.is_string())
                            throw ParseError("scene-graph JSON: " + where + ": attribute must be a string");
                        auto atoks = normalize_tokens(attr.get<std::string>());
                        if (atoks.empty() || !seen.insert(atoks).second) continue;
                        const int attr_id = add_node(NodeKind::attribute, std::move(atoks));
                        add_edge(node_id, attr_id);
                    }
                }
            }
        }

        if (rec.contains("relationships")) {
            if (!rec.at("relationships").is_array())
                throw ParseError("scene-graph JSON: " + where + ": relationships must be an array");
            for (const auto& rel : rec.at("relationships")) {
                if (!rel.is_object() || !rel.contains("subject_id") || !rel.contains("object_id") ||
                    !rel.contains("predicate") || !rel.at("subject_id").is_number_integer() ||
                    !rel.at("object_id").is_number_integer() || !rel.at("predicate").is_string())
                    throw ParseError("scene-graph JSON: " + where + ": malformed relationship");
                const std::int64_t s = rel.at("subject_id").get<std::int64_t>();
                const std::int64_t o = rel.at("object_id").get<std::int64_t>();
                auto si = object_node.find(s);
                auto oi = object_node.find(o);
                if (si == object_node.end() || oi == object_node.end())
                    throw ParseError("scene-graph JSON: " + where +
                                     ": relationship references unknown object id " +
                                     std::to_string(si == object_node.end() ? s : o));
                auto ptoks = normalize_tokens(rel.at("predicate").get<std::string>());
                if (ptoks.empty() || si->second < 0 || oi->second < 0) continue;
                const int pred_id = add_node(NodeKind::predicate, std::move(ptoks));
                add_edge(si->second, pred_id);
                add_edge(pred_id, oi->second);
            }
        }

        g.edges.assign(edges.begin(), edges.end());
        graphs.push_back(std::move(g));
    }
    return graphs;
}

inline std::vector<SceneGraph> parse_scene_graphs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path.string());
    return parse_scene_graphs(in);
}

inline WordGraph build_word_graph(const SceneGraph& g) {
    WordGraph w;
    std::vector<std::vector<int>> node_vertices(g.nodes.size());
    for (const auto& n : g.nodes) {
        for (const auto& tok : n.tokens) {
            node_vertices[static_cast<std::size_t>(n.id)].push_back(static_cast<int>(w.words.size()));
            w.words.push_back(tok);
        }
    }
    std::vector<std::set<int>> adj(w.words.size());
    auto connect = [&adj](int a, int b) {
        if (a == b) return;
        adj[static_cast<std::size_t>(a)].insert(b);
        adj[static_cast<std::size_t>(b)].insert(a);
    };
    // co-located tokens of one node are mutually adjacent
    for (const auto& vs : node_vertices) {
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) connect(vs[i], vs[j]);
    }
    // tokens inherit their node's edges
    for (const auto& [a, b] : g.edges) {
        for (int va : node_vertices[static_cast<std::size_t>(a)])
            for (int vb : node_vertices[static_cast<std::size_t>(b)]) connect(va, vb);
    }
    w.adj.resize(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) w.adj[i].assign(adj[i].begin(), adj[i].end());
    return w;
}

// Emits (target, context) for every vertex pair with graph distance in
// [1, radius], visiting each vertex once per BFS (multiple paths to the same
// vertex do not duplicate pairs). Targets are iterated in vertex order and
// contexts emitted in BFS order, so the stream is deterministic.
inline PairStream extract_contexts(const WordGraph& g, int radius) {
    if (radius < 1) throw ArgumentError("extract_contexts: radius must be >= 1");
    PairStream pairs;
    const int n = static_cast<int>(g.words.size());
    std::vector<int> dist(static_cast<std::size_t>(n));
    std::deque<int> queue;
    for (int t = 0; t < n; ++t) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<std::size_t>(t)] = 0;
        queue.assign(1, t);
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            const int dv = dist[static_cast<std::size_t>(v)];
            if (dv >= radius) continue;
            for (int u : g.adj[static_cast<std::size_t>(v)]) {
                if (dist[static_cast<std::size_t>(u)] >= 0) continue;
                dist[static_cast<std::size_t>(u)] = dv + 1;
                pairs.push_back({g.words[static_cast<std::size_t>(t)],
                                 g.words[static_cast<std::size_t>(u)]});
                queue.push_back(u);
            }
        }
    }
    return pairs;
}

// Per-image extraction is independent; results are concatenated in input
// order, so the merged stream does not depend on the thread count.
inline PairStream extract_contexts(const std::vector<SceneGraph>& graphs, int radius,
                                   int threads = 1) {
    if (radius < 1) throw ArgumentError("extract_contexts: radius must be >= 1");
    std::vector<PairStream> per_image(graphs.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            per_image[i] = extract_contexts(build_word_graph(graphs[i]), radius);
    };
    if (threads <= 1 || graphs.size() < 2) {
        work(0, graphs.size());
    } else {
        const std::size_t nthreads =
            std::min<std::size_t>(static_cast<std::size_t>(threads), graphs.size());
        std::vector<std::thread> pool;
        const std::size_t chunk = (graphs.size() + nthreads - 1) / nthreads;
        for (std::size_t t = 0; t < nthreads; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(graphs.size(), b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    PairStream merged;
    std::size_t total = 0;
    for (const auto& p : per_image) total += p.size();
    merged.reserve(total);
    for (auto& p : per_image)
        merged.insert(merged.end(), std::make_move_iterator(p.begin()),
                      std::make_move_iterator(p.end()));
    return merged;
}

}  // namespace embkit::sg
