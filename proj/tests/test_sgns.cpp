#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "embkit/rng.hpp"
#include "embkit/sgns.hpp"

using namespace embkit;

namespace {

std::vector<std::span<const double>> spans(const std::vector<std::vector<double>>& vs) {
    std::vector<std::span<const double>> out;
    for (const auto& v : vs) out.emplace_back(v.data(), v.size());
    return out;
}

// central finite differences of pair_loss over one flattened parameter vector
double numeric_partial(std::vector<double> u, std::vector<double> pos,
                       std::vector<std::vector<double>> negs, int which_vec, std::size_t idx,
                       double h) {
    auto eval = [&]() { return sgns::pair_loss(u, pos, spans(negs)); };
    double* slot = nullptr;
    if (which_vec == 0)
        slot = &u[idx];
    else if (which_vec == 1)
        slot = &pos[idx];
    else
        slot = &negs[static_cast<std::size_t>(which_vec - 2)][idx];
    const double orig = *slot;
    *slot = orig + h;
    const double up = eval();
    *slot = orig - h;
    const double down = eval();
    return (up - down) / (2.0 * h);
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

// two-topic corpus: words within a topic co-occur, topics never mix
PairStream two_topic_pairs(int pairs_per_topic, std::uint64_t seed) {
    const std::vector<std::string> a{"a1", "a2", "a3", "a4", "a5"};
    const std::vector<std::string> b{"b1", "b2", "b3", "b4", "b5"};
    Rng rng(seed);
    PairStream out;
    for (int i = 0; i < pairs_per_topic; ++i) {
        for (const auto& topic : {a, b}) {
            const auto t = rng.uniform_int(topic.size());
            auto c = rng.uniform_int(topic.size() - 1);
            if (c >= t) ++c;
            out.push_back({topic[t], topic[c]});
        }
    }
    return out;
}

double mean_cosine(const sgns::Model& m, const std::vector<std::string>& xs,
                   const std::vector<std::string>& ys) {
    double sum = 0.0;
    int count = 0;
    for (const auto& x : xs)
        for (const auto& y : ys) {
            if (x == y) continue;
            const auto xi = m.vocab.index.at(x);
            const auto yi = m.vocab.index.at(y);
            const auto u = m.input.row(xi);
            const auto v = m.input.row(yi);
            sum += u.dot(v) / (u.norm() * v.norm());
            ++count;
        }
    return sum / count;
}

}  // namespace

TEST_CASE("build_vocab: noise distribution from target counts", "[sgns]") {
    // counts {a:4, b:1}, exponent 1 -> probs {0.8, 0.2}
    PairStream pairs;
    for (int i = 0; i < 4; ++i) pairs.push_back({"a", "b"});
    pairs.push_back({"b", "a"});
    const auto v1 = sgns::build_vocab(pairs, 1, 1.0);
    REQUIRE(v1.words == std::vector<std::string>{"a", "b"});
    CHECK(v1.noise_probs[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(v1.noise_probs[1] == Catch::Approx(0.2).margin(1e-12));

    // counts {a:16, b:1}, exponent 0.75 -> 16^0.75 = 8 -> probs {8/9, 1/9}
    PairStream pairs2;
    for (int i = 0; i < 16; ++i) pairs2.push_back({"a", "b"});
    pairs2.push_back({"b", "a"});
    const auto v2 = sgns::build_vocab(pairs2, 1, 0.75);
    CHECK(v2.noise_probs[0] == Catch::Approx(8.0 / 9.0).margin(1e-12));
    CHECK(v2.noise_probs[1] == Catch::Approx(1.0 / 9.0).margin(1e-12));
}

TEST_CASE("build_vocab: min_count filtering", "[sgns]") {
    PairStream pairs;
    for (int i = 0; i < 4; ++i) pairs.push_back({"a", "b"});
    pairs.push_back({"b", "a"});
    const auto v = sgns::build_vocab(pairs, 2);
    CHECK(v.words == std::vector<std::string>{"a"});

    CHECK_THROWS_AS(sgns::build_vocab(pairs, 100), ConfigError);
    CHECK_THROWS_AS(sgns::build_vocab({}, 1), ConfigError);
}

TEST_CASE("pair_loss: logistic reference points", "[sgns]") {
    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> e1{1.0, 0.0};
    const std::vector<double> neg_e1{-1.0, 0.0};

    // u.w_pos = 0, no negatives -> -log(1/2)
    CHECK(sgns::pair_loss(zero, e1, {}) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    // one negative at dot 0 doubles it
    CHECK(sgns::pair_loss(zero, e1, spans({{0.0, 1.0}})) ==
          Catch::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    // u=(1,0), w_pos=(1,0), w_neg=(-1,0) -> -2 log sigmoid(1)
    const double expected = -2.0 * std::log(1.0 / (1.0 + std::exp(-1.0)));
    CHECK(sgns::pair_loss(e1, e1, spans({{-1.0, 0.0}})) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(expected == Catch::Approx(0.626523375036446).epsilon(1e-10));

    const std::vector<double> three{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(sgns::pair_loss(zero, three, {}), ArgumentError);
}

TEST_CASE("pair_loss gradient matches central finite differences", "[sgns]") {
    Rng rng(314159);
    const double h = 1e-5;
    for (int draw = 0; draw < 30; ++draw) {
        const std::size_t dim = 2 + rng.uniform_int(6);
        const int n_negs = static_cast<int>(rng.uniform_int(5));
        auto sample = [&] {
            std::vector<double> v(dim);
            for (auto& x : v) x = rng.normal();
            return v;
        };
        const auto u = sample();
        const auto pos = sample();
        std::vector<std::vector<double>> negs;
        for (int k = 0; k < n_negs; ++k) negs.push_back(sample());

        const auto g = sgns::pair_loss_gradient(u, pos, spans(negs));

        std::vector<double> num_u(dim), num_pos(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            num_u[i] = numeric_partial(u, pos, negs, 0, i, h);
            num_pos[i] = numeric_partial(u, pos, negs, 1, i, h);
        }
        CHECK(rel_err(g.u, num_u) < 1e-4);
        CHECK(rel_err(g.w_pos, num_pos) < 1e-4);
        for (int k = 0; k < n_negs; ++k) {
            std::vector<double> num_neg(dim);
            for (std::size_t i = 0; i < dim; ++i)
                num_neg[i] = numeric_partial(u, pos, negs, 2 + k, i, h);
            CHECK(rel_err(g.w_negs[static_cast<std::size_t>(k)], num_neg) < 1e-4);
        }
    }
}

TEST_CASE("train: zero epochs returns the documented initialization", "[sgns]") {
    const auto pairs = two_topic_pairs(50, 1);
    sgns::Config cfg;
    cfg.dim = 8;
    cfg.epochs = 0;
    cfg.seed = 99;
    const auto model = sgns::train(pairs, cfg);

    CHECK(model.output.isZero(0.0));
    // input rows are uniform in [-0.5/dim, 0.5/dim] drawn from the derived stream
    Rng init(derive_seed(cfg.seed, "sgns-init"));
    for (Eigen::Index r = 0; r < model.input.rows(); ++r)
        for (int c = 0; c < cfg.dim; ++c)
            CHECK(model.input(r, c) == init.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim));
    CHECK(model.epoch_mean_loss.empty());
}

TEST_CASE("train: deterministic mode is bit-reproducible", "[sgns]") {
    const auto pairs = two_topic_pairs(200, 2);
    sgns::Config cfg;
    cfg.dim = 12;
    cfg.epochs = 2;
    cfg.seed = 7;
    const auto m1 = sgns::train(pairs, cfg);
    const auto m2 = sgns::train(pairs, cfg);
    CHECK(std::memcmp(m1.input.data(), m2.input.data(),
                      sizeof(double) * static_cast<std::size_t>(m1.input.size())) == 0);
    CHECK(std::memcmp(m1.output.data(), m2.output.data(),
                      sizeof(double) * static_cast<std::size_t>(m1.output.size())) == 0);
    CHECK(m1.epoch_mean_loss == m2.epoch_mean_loss);

    // a shuffled stream is a different but equally deterministic input
    auto shuffled = pairs;
    Rng rng(11);
    rng.shuffle(shuffled);
    const auto s1 = sgns::train(shuffled, cfg);
    const auto s2 = sgns::train(shuffled, cfg);
    CHECK(std::memcmp(s1.input.data(), s2.input.data(),
                      sizeof(double) * static_cast<std::size_t>(s1.input.size())) == 0);
}

TEST_CASE("train: epoch loss decreases and topics separate", "[sgns]") {
    const auto pairs = two_topic_pairs(2500, 3);
    sgns::Config cfg;
    cfg.dim = 16;
    cfg.epochs = 5;
    cfg.negatives = 5;
    cfg.seed = 5;
    const auto model = sgns::train(pairs, cfg);

    REQUIRE(model.epoch_mean_loss.size() == 5);
    CHECK(model.epoch_mean_loss.back() <= model.epoch_mean_loss.front());

    const std::vector<std::string> ta{"a1", "a2", "a3", "a4", "a5"};
    const std::vector<std::string> tb{"b1", "b2", "b3", "b4", "b5"};
    const double intra = 0.5 * (mean_cosine(model, ta, ta) + mean_cosine(model, tb, tb));
    const double inter = mean_cosine(model, ta, tb);
    CHECK(intra - inter > 0.05);
}

TEST_CASE("train: parallel mode produces finite embeddings", "[sgns]") {
    const auto pairs = two_topic_pairs(1000, 8);
    sgns::Config cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.deterministic = false;
    cfg.threads = 4;
    const auto model = sgns::train(pairs, cfg);
    CHECK(model.input.allFinite());
    CHECK(model.output.allFinite());
    CHECK(model.epoch_mean_loss.size() == 2);
}

TEST_CASE("train: runaway learning rate reports divergence", "[sgns]") {
    PairStream pairs;
    for (int i = 0; i < 20; ++i) {
        pairs.push_back({"a", "b"});
        pairs.push_back({"b", "a"});
        pairs.push_back({"a", "c"});
        pairs.push_back({"c", "a"});
    }
    sgns::Config cfg;
    cfg.dim = 4;
    cfg.epochs = 5;
    cfg.learning_rate = 1e200;
    cfg.lr_floor = 1e199;
    CHECK_THROWS_MATCHES(sgns::train(pairs, cfg), NumericError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("epoch")));
}

TEST_CASE("config validation", "[sgns]") {
    const auto pairs = two_topic_pairs(5, 1);
    sgns::Config cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(sgns::train(pairs, cfg), ConfigError);
    cfg = {};
    cfg.noise_exponent = 1.5;
    CHECK_THROWS_AS(sgns::train(pairs, cfg), ConfigError);
    cfg = {};
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(sgns::train(pairs, cfg), ConfigError);
}
