#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embkit/cli.hpp"

using namespace embkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = EMBKIT_TEST_FIXTURES;

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("embkit_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& name) const { return path / name; }
};

int run_cli(std::vector<std::string> args) { return cli::run(std::move(args)); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("cli: no arguments prints usage and exits 2", "[cli]") {
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"no-such-subcommand"}) == 2);
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("cli: contexts output equals the library pipeline", "[cli]") {
    TempDir tmp;
    const auto out = tmp / "pairs.tsv";
    REQUIRE(run_cli({"contexts", "--in", (kFixtures / "vg_toy.json").string(), "--out",
                     out.string(), "--radius", "3"}) == 0);

    const auto graphs = sg::parse_scene_graphs_file(kFixtures / "vg_toy.json");
    std::ostringstream expected;
    write_pairs(expected, sg::extract_contexts(graphs, 3));
    CHECK(read_file(out) == expected.str());

    // manifest records the input digest
    const auto manifest = read_json(tmp / "pairs.tsv.manifest.json");
    CHECK(manifest["subcommand"] == "contexts");
    CHECK(manifest["inputs"][0]["fnv1a"] ==
          cli::hex64(cli::fnv1a_file(kFixtures / "vg_toy.json")));
    CHECK(manifest["outputs"][0]["fnv1a"] == cli::hex64(cli::fnv1a_file(out)));
}

TEST_CASE("cli: contexts is byte-deterministic across runs and thread counts", "[cli]") {
    TempDir tmp;
    const auto a = tmp / "a.tsv";
    const auto b = tmp / "b.tsv";
    REQUIRE(run_cli({"contexts", "--in", (kFixtures / "vg_toy.json").string(), "--out",
                     a.string()}) == 0);
    REQUIRE(run_cli({"--threads", "4", "contexts", "--in", (kFixtures / "vg_toy.json").string(),
                     "--out", b.string()}) == 0);
    CHECK(read_file(a) == read_file(b));
}

TEST_CASE("cli: config file provides defaults, flags override", "[cli]") {
    TempDir tmp;
    const auto cfg = tmp / "ctx.cfg";
    {
        std::ofstream out(cfg);
        out << "contexts.radius = 2\n";
    }
    const auto from_cfg = tmp / "cfg.tsv";
    const auto explicit2 = tmp / "explicit.tsv";
    const auto overridden = tmp / "override.tsv";
    REQUIRE(run_cli({"--config", cfg.string(), "contexts", "--in",
                     (kFixtures / "vg_toy.json").string(), "--out", from_cfg.string()}) == 0);
    REQUIRE(run_cli({"contexts", "--in", (kFixtures / "vg_toy.json").string(), "--out",
                     explicit2.string(), "--radius", "2"}) == 0);
    REQUIRE(run_cli({"--config", cfg.string(), "contexts", "--in",
                     (kFixtures / "vg_toy.json").string(), "--out", overridden.string(),
                     "--radius", "1"}) == 0);
    CHECK(read_file(from_cfg) == read_file(explicit2));
    CHECK(read_file(overridden) != read_file(explicit2));
}

TEST_CASE("cli: window, train, fuse, eval chain on the toy corpus", "[cli]") {
    TempDir tmp;
    const auto pairs = tmp / "win.tsv";
    REQUIRE(run_cli({"window", "--in", (kFixtures / "corpus_toy.txt").string(), "--out",
                     pairs.string(), "--window", "3"}) == 0);
    const auto c = corpus::read_corpus_file(kFixtures / "corpus_toy.txt");
    CHECK(read_pairs_file(pairs).size() == corpus::window_pairs(c, 3).size());

    const auto model = tmp / "el.vec";
    REQUIRE(run_cli({"--seed", "11", "train", "--pairs", pairs.string(), "--out", model.string(),
                     "--dim", "8", "--epochs", "2", "--negatives", "3", "--min-count", "2"}) == 0);
    const auto el = emb::load_file(model, emb::Modality::linguistic);
    CHECK(el.dim() == 8);
    CHECK(el.find("dog").has_value());

    const auto fused = tmp / "fused.vec";
    REQUIRE(run_cli({"fuse", "--a", model.string(), "--b",
                     (kFixtures / "visual_toy.vec").string(), "--out", fused.string()}) == 0);
    const auto f = emb::load_file(fused, emb::Modality::fused);
    CHECK(f.dim() == 8 + 4);

    const auto report = tmp / "eval.json";
    REQUIRE(run_cli({"eval", "--emb", model.string(), "--dataset",
                     (kFixtures / "sim_toy.tsv").string(), "--out", report.string()}) == 0);
    const auto j = read_json(report);
    CHECK(j["dataset"] == "sim_toy");
    REQUIRE(j["results"].size() == 1);
    CHECK(j["results"][0].contains("spearman"));
    CHECK(j["results"][0].contains("p_value"));
    CHECK(j["results"][0].contains("covered_pairs"));
    const double rho = j["results"][0]["spearman"].get<double>();
    CHECK(rho >= -1.0);
    CHECK(rho <= 1.0);

    // common-subset mode over two spaces
    const auto common = tmp / "common.json";
    REQUIRE(run_cli({"eval", "--emb", model.string(), "--emb",
                     (kFixtures / "visual_toy.vec").string(), "--dataset",
                     (kFixtures / "sim_toy.tsv").string(), "--out", common.string(),
                     "--common-subset"}) == 0);
    const auto cj = read_json(common);
    CHECK(cj["subset_fraction"].get<double>() > 0.0);
    CHECK(cj["results"].size() == 2);
}

TEST_CASE("cli: subsample and freqsplit", "[cli]") {
    TempDir tmp;
    const auto sub = tmp / "sub.txt";
    REQUIRE(run_cli({"--seed", "3", "subsample", "--in",
                     (kFixtures / "corpus_toy.txt").string(), "--out", sub.string(),
                     "--target-tokens", "40"}) == 0);
    const auto sc = corpus::read_corpus_file(sub);
    CHECK(sc.token_count >= 40);

    const auto split = tmp / "split.tsv";
    REQUIRE(run_cli({"freqsplit", "--in", (kFixtures / "corpus_toy.txt").string(), "--out",
                     split.string()}) == 0);
    const auto text = read_file(split);
    CHECK(text.find("\tHIGH\t") != std::string::npos);
    CHECK(text.find("\tLOW\t") != std::string::npos);
    CHECK(text.find("the\tHIGH\t") == 0);  // most frequent token leads
}

TEST_CASE("cli: mi sweep emits records per method, sigma and dimension", "[cli]") {
    TempDir tmp;
    // build three small embedding files over a shared vocabulary
    Rng rng(1234);
    std::vector<std::string> words;
    for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
    const auto make = [&](const fs::path& p, emb::Modality mod) {
        Matrix m(40, 6);
        for (Eigen::Index r = 0; r < 40; ++r)
            for (int c2 = 0; c2 < 6; ++c2) m(r, c2) = rng.normal();
        emb::save_file(p, emb::make_space(words, std::move(m), mod));
    };
    const auto el = tmp / "el.vec";
    const auto es = tmp / "es.vec";
    const auto ev = tmp / "ev.vec";
    make(el, emb::Modality::linguistic);
    make(es, emb::Modality::structured);
    make(ev, emb::Modality::visual);

    const auto out = tmp / "mi.json";
    REQUIRE(run_cli({"mi", "--el", el.string(), "--es", es.string(), "--ev", ev.string(),
                     "--out", out.string(), "--method", "both", "--sigma", "median,1.0",
                     "--proj-dim", "3,max", "--k", "3"}) == 0);
    const auto j = read_json(out);
    // hsic: 2 sigmas x 2 dims x 2 pairs = 8; knn: 2 dims x 2 pairs = 4
    CHECK(j.size() == 12);
    int hsic_count = 0, knn_count = 0;
    for (const auto& rec : j) {
        CHECK((rec["pair"] == "EL-ES" || rec["pair"] == "EL-EV"));
        CHECK(rec["n"] == 40);
        if (rec["method"] == "hsic") {
            ++hsic_count;
            CHECK(rec.contains("sigma_x"));
        } else {
            ++knn_count;
            CHECK(rec["k"] == 3);
        }
    }
    CHECK(hsic_count == 8);
    CHECK(knn_count == 4);

    // bad projection dimension propagates as a module error
    CHECK(run_cli({"mi", "--el", el.string(), "--es", es.string(), "--ev", ev.string(),
                   "--out", (tmp / "bad.json").string(), "--proj-dim", "99"}) == 1);
}

TEST_CASE("cli: cluster report with scores, members, jaccard and coords", "[cli]") {
    TempDir tmp;
    Rng rng(4321);
    std::vector<std::string> words;
    for (int i = 0; i < 30; ++i) words.push_back("w" + std::to_string(i));
    Matrix m(30, 4);
    for (Eigen::Index r = 0; r < 30; ++r)
        for (int c2 = 0; c2 < 4; ++c2) m(r, c2) = rng.normal() + (r < 15 ? 0.0 : 8.0);
    const auto embf = tmp / "e.vec";
    emb::save_file(embf, emb::make_space(words, std::move(m), emb::Modality::linguistic));

    const auto out = tmp / "cluster.json";
    const auto coords = tmp / "coords.tsv";
    const auto jtsv = tmp / "jaccard.tsv";
    REQUIRE(run_cli({"--seed", "5", "cluster", "--emb", embf.string(), "--out", out.string(),
                     "--k", "2,3", "--algorithm", "both", "--coords", coords.string(),
                     "--jaccard-out", jtsv.string(), "--baseline"}) == 0);
    const auto j = read_json(out);
    // 2 ks x 2 algorithms x (real + baseline) = 8 runs
    CHECK(j["runs"].size() == 8);
    for (const auto& run : j["runs"]) {
        CHECK(run.contains("scores"));
        CHECK(run["clusters"].size() == run["k"].get<std::size_t>());
    }
    CHECK(!j["jaccard"].empty());

    const auto coord_text = read_file(coords);
    CHECK(coord_text.rfind("word\tx\ty\tcluster\n", 0) == 0);
    CHECK(std::count(coord_text.begin(), coord_text.end(), '\n') == 31);  // header + 30 rows

    const auto jtext = read_file(jtsv);
    CHECK(jtext.rfind("pair\tk", 0) == 0);

    // two-embedding mode restricts to the common vocabulary
    const auto out2 = tmp / "cluster2.json";
    REQUIRE(run_cli({"cluster", "--emb", embf.string(), "--emb", embf.string(), "--out",
                     out2.string(), "--k", "2", "--algorithm", "kmeans"}) == 0);
    const auto j2 = read_json(out2);
    CHECK(j2["runs"].size() == 2);
    CHECK(!j2["jaccard"].empty());
}

TEST_CASE("cli: report merges JSON files into one TSV", "[cli]") {
    TempDir tmp;
    const auto r1 = tmp / "r1.json";
    const auto r2 = tmp / "r2.json";
    {
        std::ofstream o1(r1);
        o1 << R"({"alpha": 1.5, "nested": {"b": "x"}})";
        std::ofstream o2(r2);
        o2 << R"([{"v": 2}, {"v": 3}])";
    }
    const auto out = tmp / "merged.tsv";
    REQUIRE(run_cli({"report", "--in", r1.string(), "--in", r2.string(), "--out",
                     out.string()}) == 0);
    const auto text = read_file(out);
    CHECK(text.rfind("file\tkey\tvalue\n", 0) == 0);
    CHECK(text.find("r1\talpha\t1.5") != std::string::npos);
    CHECK(text.find("r1\tnested.b\tx") != std::string::npos);
    CHECK(text.find("r2\t[0].v\t2") != std::string::npos);
    CHECK(text.find("r2\t[1].v\t3") != std::string::npos);

    CHECK(run_cli({"report", "--in", (tmp / "missing.json").string(), "--out",
                   out.string()}) == 1);
}

TEST_CASE("cli: module failures exit 1 with a diagnostic", "[cli]") {
    TempDir tmp;
    const auto bad = tmp / "bad.json";
    {
        std::ofstream out(bad);
        out << "{not json";
    }
    CHECK(run_cli({"contexts", "--in", bad.string(), "--out", (tmp / "x.tsv").string()}) == 1);
    CHECK(run_cli({"train", "--pairs", (tmp / "nope.tsv").string(), "--out",
                   (tmp / "m.vec").string()}) == 1);
}
