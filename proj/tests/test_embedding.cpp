#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "embkit/embedding.hpp"
#include "embkit/rng.hpp"

using namespace embkit;
using emb::EmbeddingSpace;
using emb::Modality;

namespace {

EmbeddingSpace space_from(const std::vector<std::string>& words,
                          const std::vector<std::vector<double>>& rows,
                          Modality m = Modality::linguistic) {
    Matrix mat(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return emb::make_space(words, std::move(mat), m);
}

EmbeddingSpace random_space(Rng& rng, const std::vector<std::string>& words, int dim) {
    Matrix m(static_cast<Eigen::Index>(words.size()), dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = rng.normal();
    return emb::make_space(words, std::move(m), Modality::linguistic);
}

}  // namespace

TEST_CASE("load_word2vec: exact values from a fixture", "[embedding]") {
    std::istringstream in("2 3\ncat 1 2 3\ndog 0.5 -1.5 2.25\n");
    const auto e = emb::load_word2vec(in, Modality::visual);
    CHECK(e.modality == Modality::visual);
    REQUIRE(e.size() == 2);
    CHECK(e.dim() == 3);
    CHECK(e.matrix(0, 0) == 1.0);
    CHECK(e.matrix(0, 2) == 3.0);
    CHECK(e.matrix(1, 1) == -1.5);
    CHECK(*e.find("dog") == 1);
    CHECK(!e.find("bird"));
}

TEST_CASE("load_word2vec: format errors", "[embedding]") {
    std::istringstream dup("2 2\ncat 1 2\ncat 3 4\n");
    CHECK_THROWS_MATCHES(emb::load_word2vec(dup, Modality::linguistic), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("cat")));

    std::istringstream short_file("5 2\na 1 2\nb 3 4\nc 5 6\nd 7 8\n");
    CHECK_THROWS_AS(emb::load_word2vec(short_file, Modality::linguistic), ParseError);

    std::istringstream long_file("1 2\na 1 2\nb 3 4\n");
    CHECK_THROWS_AS(emb::load_word2vec(long_file, Modality::linguistic), ParseError);

    std::istringstream bad_field("1 2\na 1 x\n");
    CHECK_THROWS_MATCHES(emb::load_word2vec(bad_field, Modality::linguistic), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("non-numeric")));

    std::istringstream nan_field("1 2\na 1 nan\n");
    CHECK_THROWS_AS(emb::load_word2vec(nan_field, Modality::linguistic), ParseError);

    std::istringstream bad_header("x 2\n");
    CHECK_THROWS_AS(emb::load_word2vec(bad_header, Modality::linguistic), ParseError);
}

TEST_CASE("save/load round trip within text precision", "[embedding]") {
    Rng rng(808);
    const auto e = random_space(rng, {"alpha", "beta", "gamma"}, 5);
    std::ostringstream out;
    emb::save_word2vec(out, e);
    std::istringstream back(out.str());
    const auto e2 = emb::load_word2vec(back, e.modality);
    REQUIRE(e2.words == e.words);
    for (Eigen::Index r = 0; r < e.matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < e.matrix.cols(); ++c)
            CHECK(e2.matrix(r, c) ==
                  Catch::Approx(e.matrix(r, c)).epsilon(1e-8));  // 9 significant digits
}

TEST_CASE("binary cache round trip is exact", "[embedding]") {
    Rng rng(809);
    const auto e = random_space(rng, {"alpha", "beta"}, 4);
    const auto path = std::filesystem::temp_directory_path() / "embkit_test_cache.bin";
    emb::save_binary(path, e);
    const auto e2 = emb::load_binary(path);
    CHECK(e2.words == e.words);
    CHECK(e2.modality == e.modality);
    CHECK(e2.matrix == e.matrix);
    std::filesystem::remove(path);
}

TEST_CASE("l2_normalize: unit rows, zero rows reported", "[embedding]") {
    const auto e = space_from({"a", "b", "c"}, {{3.0, 4.0}, {1.0, 0.0}, {0.0, 0.0}});
    std::vector<std::string> zeros;
    const auto n = emb::l2_normalize(e, &zeros);
    CHECK(n.matrix(0, 0) == Catch::Approx(0.6).margin(1e-12));
    CHECK(n.matrix(0, 1) == Catch::Approx(0.8).margin(1e-12));
    CHECK(n.matrix(1, 0) == 1.0);
    CHECK(n.matrix(1, 1) == 0.0);
    CHECK(n.matrix(2, 0) == 0.0);
    CHECK(zeros == std::vector<std::string>{"c"});

    for (Eigen::Index r = 0; r < 2; ++r)
        CHECK(n.matrix.row(r).norm() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("fuse: concatenated normalized rows over the intersection", "[embedding]") {
    const auto a = space_from({"w", "only_a"}, {{2.0, 0.0}, {1.0, 1.0}});
    const auto b = space_from({"w", "only_b"}, {{0.0, 5.0}, {1.0, 2.0}}, Modality::visual);
    const auto f = emb::fuse(a, b);
    CHECK(f.modality == Modality::fused);
    REQUIRE(f.words == std::vector<std::string>{"w"});
    CHECK(f.dim() == 4);
    CHECK(f.matrix(0, 0) == Catch::Approx(1.0));
    CHECK(f.matrix(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.matrix(0, 2) == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.matrix(0, 3) == Catch::Approx(1.0));
    CHECK(f.matrix.row(0).norm() == Catch::Approx(std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("fuse: disjoint vocabularies fail", "[embedding]") {
    const auto a = space_from({"x"}, {{1.0, 2.0}});
    const auto b = space_from({"y"}, {{3.0, 4.0}});
    CHECK_THROWS_AS(emb::fuse(a, b), CoverageError);
}

TEST_CASE("fuse(e, e) preserves the cosine structure of normalized e", "[embedding]") {
    Rng rng(4242);
    const auto e = random_space(rng, {"a", "b", "c", "d", "e"}, 4);
    const auto f = emb::fuse(e, e);
    const auto n = emb::l2_normalize(e);
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = 0; j < e.size(); ++j) {
            const auto& wi = f.words[i];
            const auto& wj = f.words[j];
            const double cf = emb::cosine(f.row(static_cast<int>(i)), f.row(static_cast<int>(j)));
            const double cn = emb::cosine(n.row(*n.find(wi)), n.row(*n.find(wj)));
            CHECK(cf == Catch::Approx(cn).margin(1e-12));
        }
    }
}

TEST_CASE("fused row norms are sqrt(2) and fused cosine averages part cosines",
          "[embedding]") {
    Rng rng(31337);
    const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
    const auto a = random_space(rng, words, 3);
    const auto b = random_space(rng, words, 5);
    const auto f = emb::fuse(a, b);
    const auto na = emb::l2_normalize(a);
    const auto nb = emb::l2_normalize(b);

    for (Eigen::Index r = 0; r < f.matrix.rows(); ++r)
        CHECK(f.matrix.row(r).norm() == Catch::Approx(std::sqrt(2.0)).margin(1e-9));

    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = i + 1; j < words.size(); ++j) {
            const auto& wi = f.words[i];
            const auto& wj = f.words[j];
            const double cf = emb::cosine(f.row(static_cast<int>(i)), f.row(static_cast<int>(j)));
            const double ca = emb::cosine(na.row(*na.find(wi)), na.row(*na.find(wj)));
            const double cb = emb::cosine(nb.row(*nb.find(wi)), nb.row(*nb.find(wj)));
            CHECK(cf == Catch::Approx(0.5 * (ca + cb)).margin(1e-9));
        }
    }
}

TEST_CASE("common_vocab", "[embedding]") {
    const auto a = space_from({"a", "b", "c"}, {{1}, {2}, {3}});
    const auto b = space_from({"b", "c", "d"}, {{1}, {2}, {3}});
    const auto c = space_from({"c", "b", "x"}, {{1}, {2}, {3}});
    CHECK(emb::common_vocab({&a, &b}) == std::vector<std::string>{"b", "c"});
    CHECK(emb::common_vocab({&a}) == std::vector<std::string>{"a", "b", "c"});
    CHECK(emb::common_vocab({&a, &b, &c}) == std::vector<std::string>{"b", "c"});
    CHECK_THROWS_AS(emb::common_vocab({}), ArgumentError);
}

TEST_CASE("make_space rejects invariant violations", "[embedding]") {
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    CHECK_THROWS_AS(emb::make_space({"a"}, m, Modality::linguistic), ArgumentError);
    CHECK_THROWS_MATCHES(emb::make_space({"a", "a"}, m, Modality::linguistic), ArgumentError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate")));
    Matrix bad(1, 2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(emb::make_space({"a"}, bad, Modality::linguistic), ArgumentError);
}

TEST_CASE("random_like: seeded uniform baseline", "[embedding]") {
    Rng rng(5150);
    const auto e = random_space(rng, {"a", "b", "c"}, 6);
    const auto r1 = emb::random_like(e, 11);
    const auto r2 = emb::random_like(e, 11);
    CHECK(r1.matrix == r2.matrix);
    CHECK(r1.words == e.words);
    CHECK(r1.matrix.minCoeff() >= -1.0);
    CHECK(r1.matrix.maxCoeff() <= 1.0);
    CHECK(emb::random_like(e, 12).matrix != r1.matrix);
}
