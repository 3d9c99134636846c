#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "embkit/cluster.hpp"
#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"
#include "embkit/infogain.hpp"
#include "embkit/manifest.hpp"
#include "embkit/pairs.hpp"
#include "embkit/rng.hpp"
#include "embkit/scenegraph.hpp"
#include "embkit/sgns.hpp"
#include "embkit/simeval.hpp"

namespace embkit::cli {

namespace detail {

using nlohmann::json;

inline json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    out << content;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ArgumentError(what + ": '" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw ArgumentError(what + ": empty list");
    return out;
}

inline std::string path_label(const std::filesystem::path& p) { return p.stem().string(); }

// flattens a JSON document into (dotted.path, scalar) rows
inline void flatten_json(const json& j, const std::string& prefix,
                         std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            flatten_json(value, prefix.empty() ? key : prefix + "." + key, rows);
    } else if (j.is_array()) {
        std::size_t i = 0;
        for (const auto& value : j)
            flatten_json(value, prefix + "[" + std::to_string(i++) + "]", rows);
    } else if (j.is_string()) {
        rows.emplace_back(prefix, j.get<std::string>());
    } else {
        rows.emplace_back(prefix, j.dump());
    }
}

struct EvalResultJson {
    static json to_json(const std::string& name, const eval::EvalResult& r) {
        return {{"embedding", name},
                {"spearman", r.spearman},
                {"p_value", r.p_value},
                {"covered_pairs", r.covered_pairs},
                {"total_pairs", r.total_pairs}};
    }
};

inline json estimate_to_json(const mi::Estimate& e, const std::string& pair) {
    json j{{"method", e.method}, {"pair", pair},     {"value", e.value},
           {"n", e.n},           {"d", e.d},         {"proj_dim", e.proj_dim},
           {"seed", e.seed}};
    if (e.method == "hsic") {
        j["sigma_policy"] = e.sigma_policy;
        j["sigma_x"] = e.sigma_x;
        j["sigma_y"] = e.sigma_y;
    } else {
        j["k"] = e.k;
    }
    return j;
}

}  // namespace detail

// Command-line front end. `args` is the argv tail (no program name); returns
// the process exit code: 0 success, 1 module error, 2 usage error.
inline int run(std::vector<std::string> args) {
    using detail::json;
    namespace fs = std::filesystem;

    CLI::App app{"multimodal embedding workbench: scene-graph contexts, SGNS training,\n"
                 "fusion, similarity evaluation, dependence estimates and clustering"};
    app.name("embkit");
    app.require_subcommand(0, 1);
    app.failure_message(CLI::FailureMessage::help);

    std::uint64_t root_seed = 1;
    int threads = 1;
    bool force_deterministic = false;
    app.add_option("--seed", root_seed, "root seed; every stage derives its own sub-seed")
        ->capture_default_str();
    app.add_option("--threads", threads, "worker threads (>1 selects parallel mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", force_deterministic,
                 "force single-worker, bit-reproducible execution");
    app.set_config("--config", "",
                   "key = value config file; subcommand options as dotted keys\n"
                   "(contexts.radius = 2) or [subcommand] sections, flags take precedence");

    const auto effective_threads = [&]() { return force_deterministic ? 1 : threads; };

    // ---- contexts ----
    auto* ctx_cmd = app.add_subcommand("contexts", "scene-graph JSON -> BFS context pairs");
    std::string ctx_in, ctx_out;
    int ctx_radius = 3;
    ctx_cmd->add_option("--in", ctx_in, "scene-graph JSON file")->required();
    ctx_cmd->add_option("--out", ctx_out, "output pair TSV")->required();
    ctx_cmd->add_option("--radius", ctx_radius, "BFS radius r")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    ctx_cmd->callback([&] {
        const auto graphs = sg::parse_scene_graphs_file(ctx_in);
        write_pairs_file(ctx_out, sg::extract_contexts(graphs, ctx_radius, effective_threads()));
        Manifest m{"contexts", root_seed, 0,
                   {{"in", ctx_in}, {"out", ctx_out}, {"radius", std::to_string(ctx_radius)}},
                   {ctx_in},
                   {ctx_out}};
        write_manifest(ctx_out + ".manifest.json", m);
    });

    // ---- window ----
    auto* win_cmd = app.add_subcommand("window", "text corpus -> sliding-window pairs");
    std::string win_in, win_out;
    int win_size = 5;
    win_cmd->add_option("--in", win_in, "corpus file, one sentence per line")->required();
    win_cmd->add_option("--out", win_out, "output pair TSV")->required();
    win_cmd->add_option("--window", win_size, "window half-width")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    win_cmd->callback([&] {
        const auto c = corpus::read_corpus_file(win_in);
        write_pairs_file(win_out, corpus::window_pairs(c, win_size));
        Manifest m{"window", root_seed, 0,
                   {{"in", win_in}, {"out", win_out}, {"window", std::to_string(win_size)}},
                   {win_in},
                   {win_out}};
        write_manifest(win_out + ".manifest.json", m);
    });

    // ---- subsample ----
    auto* sub_cmd = app.add_subcommand("subsample", "random line-level corpus subsample");
    std::string sub_in, sub_out;
    std::size_t sub_target = 0;
    sub_cmd->add_option("--in", sub_in, "corpus file")->required();
    sub_cmd->add_option("--out", sub_out, "output corpus file")->required();
    sub_cmd->add_option("--target-tokens", sub_target, "token budget")->required();
    sub_cmd->callback([&] {
        const auto seed = derive_seed(root_seed, "subsample");
        const auto c = corpus::read_corpus_file(sub_in);
        corpus::write_corpus_file(sub_out, corpus::subsample_tokens(c, sub_target, seed));
        Manifest m{"subsample", root_seed, seed,
                   {{"in", sub_in},
                    {"out", sub_out},
                    {"target-tokens", std::to_string(sub_target)}},
                   {sub_in},
                   {sub_out}};
        write_manifest(sub_out + ".manifest.json", m);
    });

    // ---- freqsplit ----
    auto* freq_cmd = app.add_subcommand("freqsplit", "HIGH/MEDIUM/LOW frequency ranges");
    std::string freq_in, freq_out;
    freq_cmd->add_option("--in", freq_in, "corpus file")->required();
    freq_cmd->add_option("--out", freq_out, "output TSV: word<TAB>range<TAB>count")->required();
    freq_cmd->callback([&] {
        const auto c = corpus::read_corpus_file(freq_in);
        const auto split = corpus::split_by_frequency(c);
        std::ostringstream out;
        corpus::write_frequency_split(out, split);
        detail::write_text_file(freq_out, out.str());
        Manifest m{"freqsplit", root_seed, 0, {{"in", freq_in}, {"out", freq_out}},
                   {freq_in}, {freq_out}};
        write_manifest(freq_out + ".manifest.json", m);
    });

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "SGNS training on a pair stream");
    std::string train_pairs, train_out, train_modality = "linguistic";
    sgns::Config train_cfg;
    train_cmd->add_option("--pairs", train_pairs, "pair TSV (from contexts or window)")->required();
    train_cmd->add_option("--out", train_out, "model output (.vec text or .bin cache)")->required();
    train_cmd->add_option("--dim", train_cfg.dim, "embedding dimension")->capture_default_str();
    train_cmd->add_option("--negatives", train_cfg.negatives, "negative samples per pair")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_cfg.epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--lr", train_cfg.learning_rate, "initial learning rate")
        ->capture_default_str();
    train_cmd->add_option("--lr-floor", train_cfg.lr_floor, "learning-rate floor")
        ->capture_default_str();
    train_cmd->add_option("--noise-exponent", train_cfg.noise_exponent,
                          "unigram noise distribution exponent")
        ->capture_default_str();
    train_cmd->add_option("--min-count", train_cfg.min_count, "minimum target count")
        ->capture_default_str();
    train_cmd->add_option("--modality", train_modality, "modality tag for the trained space")
        ->capture_default_str()
        ->check(CLI::IsMember({"linguistic", "structured", "visual"}));
    train_cmd->callback([&] {
        train_cfg.seed = derive_seed(root_seed, "train");
        train_cfg.threads = effective_threads();
        train_cfg.deterministic = train_cfg.threads == 1;
        const auto stream = read_pairs_file(train_pairs);
        const auto model = sgns::train(stream, train_cfg);
        const auto space = emb::from_sgns(model, emb::modality_from_string(train_modality));
        emb::save_file(train_out, space);
        Manifest m{"train",
                   root_seed,
                   train_cfg.seed,
                   {{"pairs", train_pairs},
                    {"out", train_out},
                    {"dim", std::to_string(train_cfg.dim)},
                    {"negatives", std::to_string(train_cfg.negatives)},
                    {"epochs", std::to_string(train_cfg.epochs)},
                    {"lr", std::to_string(train_cfg.learning_rate)},
                    {"lr-floor", std::to_string(train_cfg.lr_floor)},
                    {"noise-exponent", std::to_string(train_cfg.noise_exponent)},
                    {"min-count", std::to_string(train_cfg.min_count)},
                    {"modality", train_modality},
                    {"deterministic", train_cfg.deterministic ? "true" : "false"},
                    {"threads", std::to_string(train_cfg.threads)}},
                   {train_pairs},
                   {train_out}};
        write_manifest(train_out + ".manifest.json", m);
    });

    // ---- fuse ----
    auto* fuse_cmd = app.add_subcommand("fuse", "mid-level fusion of two embedding files");
    std::string fuse_a, fuse_b, fuse_out;
    fuse_cmd->add_option("--a", fuse_a, "first embedding file")->required();
    fuse_cmd->add_option("--b", fuse_b, "second embedding file")->required();
    fuse_cmd->add_option("--out", fuse_out, "fused embedding output")->required();
    fuse_cmd->callback([&] {
        const auto a = emb::load_file(fuse_a, emb::Modality::linguistic);
        const auto b = emb::load_file(fuse_b, emb::Modality::visual);
        emb::save_file(fuse_out, emb::fuse(a, b));
        Manifest m{"fuse", root_seed, 0,
                   {{"a", fuse_a}, {"b", fuse_b}, {"out", fuse_out}},
                   {fuse_a, fuse_b},
                   {fuse_out}};
        write_manifest(fuse_out + ".manifest.json", m);
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Spearman evaluation on a similarity dataset");
    std::vector<std::string> eval_embs;
    std::string eval_dataset, eval_out;
    bool eval_common = false;
    eval_cmd->add_option("--emb", eval_embs, "embedding file(s)")->required()->expected(1, -1);
    eval_cmd->add_option("--dataset", eval_dataset, "word1<TAB>word2<TAB>score file")->required();
    eval_cmd->add_option("--out", eval_out, "JSON report (stdout when omitted)");
    eval_cmd->add_flag("--common-subset", eval_common,
                       "restrict to pairs covered by every embedding");
    eval_cmd->callback([&] {
        const auto dataset = eval::load_dataset_file(eval_dataset);
        std::vector<emb::EmbeddingSpace> spaces;
        for (const auto& p : eval_embs) spaces.push_back(emb::load_file(p, emb::Modality::linguistic));

        json report;
        report["dataset"] = dataset.name;
        report["common_subset"] = eval_common;
        json results = json::array();
        if (eval_common) {
            if (spaces.size() < 2)
                throw ArgumentError("eval: --common-subset needs at least two --emb files");
            std::vector<const emb::EmbeddingSpace*> ptrs;
            for (const auto& s : spaces) ptrs.push_back(&s);
            const auto res = eval::evaluate_common_subset(ptrs, dataset);
            report["subset_fraction"] = res.subset_fraction;
            for (std::size_t i = 0; i < spaces.size(); ++i)
                results.push_back(detail::EvalResultJson::to_json(
                    detail::path_label(eval_embs[i]), res.per_space[i]));
        } else {
            for (std::size_t i = 0; i < spaces.size(); ++i)
                results.push_back(detail::EvalResultJson::to_json(
                    detail::path_label(eval_embs[i]), eval::evaluate(spaces[i], dataset)));
        }
        report["results"] = results;
        if (eval_out.empty()) {
            std::cout << report.dump(2) << '\n';
            return;
        }
        detail::write_json_file(eval_out, report);

        Manifest m{"eval", root_seed, 0,
                   {{"dataset", eval_dataset},
                    {"out", eval_out},
                    {"common-subset", eval_common ? "true" : "false"}},
                   {},
                   {eval_out}};
        for (const auto& p : eval_embs) m.inputs.emplace_back(p);
        m.inputs.emplace_back(eval_dataset);
        write_manifest(eval_out + ".manifest.json", m);
    });

    // ---- mi ----
    auto* mi_cmd = app.add_subcommand("mi", "dependence estimates between modalities");
    std::string mi_el, mi_es, mi_ev, mi_out;
    std::string mi_method = "hsic";
    std::string mi_sigma = "median";
    std::string mi_dims = "max";
    int mi_k = 3;
    mi_cmd->add_option("--el", mi_el, "linguistic embedding file")->required();
    mi_cmd->add_option("--es", mi_es, "structured embedding file")->required();
    mi_cmd->add_option("--ev", mi_ev, "visual embedding file")->required();
    mi_cmd->add_option("--out", mi_out, "JSON report")->required();
    mi_cmd->add_option("--method", mi_method, "hsic, knn, or both")
        ->capture_default_str()
        ->check(CLI::IsMember({"hsic", "knn", "both"}));
    mi_cmd->add_option("--sigma", mi_sigma,
                       "comma list of bandwidths for hsic: 'median' and/or numbers")
        ->capture_default_str();
    mi_cmd->add_option("--proj-dim", mi_dims,
                       "comma list of PCA dimensions; 'max' = no projection")
        ->capture_default_str();
    mi_cmd->add_option("--k", mi_k, "neighbor count for the knn estimator")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    mi_cmd->callback([&] {
        const auto seed = derive_seed(root_seed, "mi");
        const auto el = emb::load_file(mi_el, emb::Modality::linguistic);
        const auto es = emb::load_file(mi_es, emb::Modality::structured);
        const auto ev = emb::load_file(mi_ev, emb::Modality::visual);

        std::vector<std::string> methods =
            mi_method == "both" ? std::vector<std::string>{"hsic", "knn"}
                                : std::vector<std::string>{mi_method};
        std::vector<std::optional<int>> dims;
        for (const auto& tok : detail::split_list(mi_dims)) {
            if (tok == "max") {
                dims.push_back(std::nullopt);
            } else {
                dims.push_back(detail::parse_int_list(tok, "mi --proj-dim").front());
            }
        }
        if (dims.empty()) dims.push_back(std::nullopt);

        json records = json::array();
        for (const auto& method : methods) {
            std::vector<std::string> sigma_tokens{"-"};
            if (method == "hsic") sigma_tokens = detail::split_list(mi_sigma);
            for (const auto& sigma_tok : sigma_tokens) {
                for (const auto& dim : dims) {
                    mi::CompareOptions opt;
                    opt.method = method;
                    opt.k = mi_k;
                    opt.seed = seed;
                    opt.proj_dim = dim;
                    opt.threads = effective_threads();
                    opt.hsic.threads = opt.threads;
                    if (method == "hsic" && sigma_tok != "median" && sigma_tok != "-") {
                        opt.hsic.policy = mi::SigmaPolicy::fixed;
                        try {
                            opt.hsic.sigma = std::stod(sigma_tok);
                        } catch (const std::exception&) {
                            throw ArgumentError("mi --sigma: '" + sigma_tok +
                                                "' is neither 'median' nor a number");
                        }
                    }
                    const auto rep = mi::compare_modalities(el, es, ev, opt);
                    records.push_back(detail::estimate_to_json(rep.el_es, "EL-ES"));
                    records.push_back(detail::estimate_to_json(rep.el_ev, "EL-EV"));
                }
            }
        }
        detail::write_json_file(mi_out, records);

        Manifest m{"mi", root_seed, seed,
                   {{"el", mi_el},
                    {"es", mi_es},
                    {"ev", mi_ev},
                    {"out", mi_out},
                    {"method", mi_method},
                    {"sigma", mi_sigma},
                    {"proj-dim", mi_dims},
                    {"k", std::to_string(mi_k)}},
                   {mi_el, mi_es, mi_ev},
                   {mi_out}};
        write_manifest(mi_out + ".manifest.json", m);
    });

    // ---- cluster ----
    auto* cl_cmd = app.add_subcommand("cluster", "clustering, validity scores, Jaccard tables");
    std::vector<std::string> cl_embs;
    std::string cl_out, cl_coords, cl_jaccard_out;
    std::string cl_ks = "20";
    std::string cl_algorithm = "both";
    std::string cl_thresholds = "0.2,0.3,0.4,0.5,0.6,0.7";
    bool cl_normalize = false, cl_baseline = false;
    int cl_max_iter = 100;
    double cl_tol = 1e-6;
    cl_cmd->add_option("--emb", cl_embs, "one or two embedding files")->required()->expected(1, 2);
    cl_cmd->add_option("--out", cl_out, "JSON report")->required();
    cl_cmd->add_option("--k", cl_ks, "comma list of cluster counts")->capture_default_str();
    cl_cmd->add_option("--algorithm", cl_algorithm, "kmeans, ward, or both")
        ->capture_default_str()
        ->check(CLI::IsMember({"kmeans", "ward", "both"}));
    cl_cmd->add_option("--thresholds", cl_thresholds, "Jaccard thresholds")->capture_default_str();
    cl_cmd->add_flag("--normalize", cl_normalize, "L2-normalize rows before clustering");
    cl_cmd->add_flag("--baseline", cl_baseline, "also score a seeded random baseline space");
    cl_cmd->add_option("--coords", cl_coords, "2D PCA coordinate TSV (first run)");
    cl_cmd->add_option("--jaccard-out", cl_jaccard_out, "Jaccard table TSV");
    cl_cmd->add_option("--max-iter", cl_max_iter, "k-means iteration cap")->capture_default_str();
    cl_cmd->add_option("--tol", cl_tol, "k-means centroid-shift tolerance")->capture_default_str();
    cl_cmd->callback([&] {
        const auto seed = derive_seed(root_seed, "cluster");
        std::vector<emb::EmbeddingSpace> spaces;
        for (const auto& p : cl_embs) spaces.push_back(emb::load_file(p, emb::Modality::linguistic));
        std::vector<std::string> names;
        for (const auto& p : cl_embs) names.push_back(detail::path_label(p));
        for (std::size_t i = 1; i < names.size(); ++i) {  // labels must stay distinct
            if (names[i] == names[0]) names[i] += "#" + std::to_string(i + 1);
        }

        if (spaces.size() == 2) {  // clusterings must cover the same word set
            std::vector<const emb::EmbeddingSpace*> ptrs{&spaces[0], &spaces[1]};
            const auto common = emb::common_vocab(ptrs);
            if (common.empty()) throw CoverageError("cluster: empty common vocabulary");
            spaces[0] = emb::restrict_to(spaces[0], common);
            spaces[1] = emb::restrict_to(spaces[1], common);
        }
        if (cl_normalize) {
            for (auto& s : spaces) s = emb::l2_normalize(s);
        }

        const auto ks = detail::parse_int_list(cl_ks, "cluster --k");
        std::vector<std::string> algorithms =
            cl_algorithm == "both" ? std::vector<std::string>{"kmeans", "ward"}
                                   : std::vector<std::string>{cl_algorithm};
        std::vector<double> thresholds;
        for (const auto& t : detail::split_list(cl_thresholds)) thresholds.push_back(std::stod(t));

        struct Run {
            std::string name;
            std::string algorithm;
            int k;
            cluster::Clustering clustering;
        };
        std::vector<Run> runs;
        json jruns = json::array();

        const auto run_one = [&](const std::string& name, const emb::EmbeddingSpace& space,
                                 const std::string& algorithm, int k) {
            cluster::Clustering c = algorithm == "kmeans"
                                        ? cluster::kmeans(space, k, seed, cl_max_iter, cl_tol)
                                        : cluster::agglomerative_ward(space, k);
            json entry{{"embedding", name}, {"algorithm", algorithm}, {"k", c.k}};
            if (c.k >= 2 && static_cast<std::size_t>(c.k) < space.size()) {
                const auto s = cluster::score(space, c);
                entry["scores"] = {{"dbi", detail::finite_or_string(s.dbi)},
                                   {"chi", detail::finite_or_string(s.chi)},
                                   {"silhouette", detail::finite_or_string(s.silhouette)}};
            }
            json members = json::object();
            for (int cid = 0; cid < c.k; ++cid) {
                json list = json::array();
                for (std::size_t i = 0; i < c.words.size(); ++i)
                    if (c.assignment[i] == cid) list.push_back(c.words[i]);
                members[std::to_string(cid)] = list;
            }
            entry["clusters"] = members;
            jruns.push_back(entry);
            runs.push_back({name, algorithm, k, std::move(c)});
        };

        for (const int k : ks) {
            for (std::size_t si = 0; si < spaces.size(); ++si) {
                for (const auto& algorithm : algorithms) run_one(names[si], spaces[si], algorithm, k);
                if (cl_baseline) {
                    const auto baseline = emb::random_like(
                        spaces[si], derive_seed(seed, "baseline-" + names[si]));
                    for (const auto& algorithm : algorithms)
                        run_one(names[si] + "-random-baseline", baseline, algorithm, k);
                }
            }
        }

        // Jaccard tables: same embedding across algorithms, and same algorithm
        // across embeddings.
        json jtables = json::array();
        std::ostringstream jtsv;
        jtsv << "pair\tk";
        for (const double t : thresholds) jtsv << "\t>" << t;
        jtsv << "\tmax\n";
        const auto emit_table = [&](const Run& a, const Run& b) {
            const auto table = cluster::jaccard_table(a.clustering, b.clustering, thresholds);
            json entry{{"a", a.name + "/" + a.algorithm},
                       {"b", b.name + "/" + b.algorithm},
                       {"k", a.k},
                       {"thresholds", thresholds},
                       {"counts", table.counts},
                       {"max", table.max_similarity}};
            jtables.push_back(entry);
            jtsv << a.name << "/" << a.algorithm << "-vs-" << b.name << "/" << b.algorithm
                 << "\t" << a.k;
            for (const int c : table.counts) jtsv << "\t" << c;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", table.max_similarity);
            jtsv << "\t" << buf << "\n";
        };
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (std::size_t j = i + 1; j < runs.size(); ++j) {
                if (runs[i].k != runs[j].k) continue;
                const bool same_space = runs[i].name == runs[j].name;
                const bool same_algo = runs[i].algorithm == runs[j].algorithm;
                if (same_space == same_algo) continue;  // need exactly one axis to differ
                emit_table(runs[i], runs[j]);
            }
        }

        json report{{"embeddings", names},
                    {"normalized", cl_normalize},
                    {"runs", jruns},
                    {"jaccard", jtables}};
        detail::write_json_file(cl_out, report);

        Manifest m{"cluster", root_seed, seed,
                   {{"out", cl_out},
                    {"k", cl_ks},
                    {"algorithm", cl_algorithm},
                    {"thresholds", cl_thresholds},
                    {"normalize", cl_normalize ? "true" : "false"},
                    {"baseline", cl_baseline ? "true" : "false"}},
                   {},
                   {cl_out}};
        for (const auto& p : cl_embs) m.inputs.emplace_back(p);

        if (!cl_jaccard_out.empty()) {
            detail::write_text_file(cl_jaccard_out, jtsv.str());
            m.outputs.emplace_back(cl_jaccard_out);
        }
        if (!cl_coords.empty()) {
            std::ostringstream coords;
            cluster::write_projection(coords,
                                      cluster::export_2d(spaces[0], runs.front().clustering));
            detail::write_text_file(cl_coords, coords.str());
            m.outputs.emplace_back(cl_coords);
        }
        write_manifest(cl_out + ".manifest.json", m);
    });

    // ---- report ----
    auto* rep_cmd = app.add_subcommand("report", "merge JSON reports into one TSV table");
    std::vector<std::string> rep_in;
    std::string rep_out;
    rep_cmd->add_option("--in", rep_in, "JSON report files")->required()->expected(1, -1);
    rep_cmd->add_option("--out", rep_out, "merged TSV")->required();
    rep_cmd->callback([&] {
        std::ostringstream out;
        out << "file\tkey\tvalue\n";
        for (const auto& p : rep_in) {
            std::ifstream in(p);
            if (!in) throw ParseError("cannot open: " + p);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ParseError(p + ": not valid JSON: " + e.what());
            }
            std::vector<std::pair<std::string, std::string>> rows;
            detail::flatten_json(j, "", rows);
            for (const auto& [key, value] : rows)
                out << detail::path_label(p) << '\t' << key << '\t' << value << '\n';
        }
        detail::write_text_file(rep_out, out.str());
        Manifest m{"report", root_seed, 0, {{"out", rep_out}}, {}, {rep_out}};
        for (const auto& p : rep_in) m.inputs.emplace_back(p);
        write_manifest(rep_out + ".manifest.json", m);
    });

    // global options (--seed, --threads, ...) are accepted after the
    // subcommand name as well
    for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; })) sc->fallthrough();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
        if (app.get_subcommands().empty()) {
            std::cout << app.help();
            return 2;
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "embkit: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "embkit: unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace embkit::cli
