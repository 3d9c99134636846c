#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "embkit/errors.hpp"
#include "embkit/linalg.hpp"
#include "embkit/pairs.hpp"
#include "embkit/rng.hpp"

namespace embkit::sgns {

struct Config {
    int dim = 300;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;  // decays linearly to lr_floor over all updates
    double lr_floor = 1e-4;
    double noise_exponent = 0.75;
    int min_count = 1;
    std::uint64_t seed = 1;
    // Deterministic mode trains with a single worker and is bit-reproducible
    // for a fixed seed. With deterministic=false and threads>1, rows are
    // updated concurrently without locks (word2vec-style) and results may
    // vary across runs.
    bool deterministic = true;
    int threads = 1;
};

inline void validate(const Config& cfg) {
    if (cfg.dim < 1) throw ConfigError("sgns: dim must be >= 1");
    if (cfg.negatives < 1) throw ConfigError("sgns: negatives must be >= 1");
    if (cfg.epochs < 0) throw ConfigError("sgns: epochs must be >= 0");
    if (!(cfg.learning_rate > 0)) throw ConfigError("sgns: learning_rate must be > 0");
    if (!(cfg.lr_floor > 0) || cfg.lr_floor > cfg.learning_rate)
        throw ConfigError("sgns: lr_floor must be in (0, learning_rate]");
    if (cfg.noise_exponent < 0 || cfg.noise_exponent > 1)
        throw ConfigError("sgns: noise_exponent must be in [0, 1]");
    if (cfg.min_count < 1) throw ConfigError("sgns: min_count must be >= 1");
    if (cfg.threads < 1) throw ConfigError("sgns: threads must be >= 1");
}

struct Vocab {
    std::vector<std::string> words;  // sorted by count desc, ties lexicographic
    std::vector<std::int64_t> counts;
    std::unordered_map<std::string, int> index;
    std::vector<double> noise_probs;  // ∝ count^noise_exponent, normalized
    std::vector<double> noise_cdf;    // cumulative, for inverse-cdf sampling
};

// Counts target occurrences, drops words below min_count, and builds the
// noise distribution ∝ count^noise_exponent.
inline Vocab build_vocab(const PairStream& pairs, int min_count, double noise_exponent = 0.75) {
    if (pairs.empty()) throw ConfigError("sgns: empty pair stream");
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& p : pairs) ++counts[p.target];

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (auto& [w, c] : counts) {
        if (c >= min_count) kept.emplace_back(w, c);
    }
    if (kept.empty())
        throw ConfigError("sgns: vocabulary is empty after min_count=" +
                          std::to_string(min_count) + " filtering");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    v.words.reserve(kept.size());
    v.counts.reserve(kept.size());
    double total = 0.0;
    for (auto& [w, c] : kept) {
        v.index.emplace(w, static_cast<int>(v.words.size()));
        v.words.push_back(std::move(w));
        v.counts.push_back(c);
        total += std::pow(static_cast<double>(c), noise_exponent);
    }
    v.noise_probs.reserve(kept.size());
    v.noise_cdf.reserve(kept.size());
    double cum = 0.0;
    for (std::int64_t c : v.counts) {
        const double p = std::pow(static_cast<double>(c), noise_exponent) / total;
        v.noise_probs.push_back(p);
        cum += p;
        v.noise_cdf.push_back(cum);
    }
    v.noise_cdf.back() = 1.0;
    return v;
}

inline int sample_noise(const Vocab& v, Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::lower_bound(v.noise_cdf.begin(), v.noise_cdf.end(), u);
    return static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(it - v.noise_cdf.begin()), v.noise_cdf.size() - 1));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace detail

// L = -log σ(u·w_pos) - Σ log σ(-u·w_neg)
inline double pair_loss(std::span<const double> u, std::span<const double> w_pos,
                        const std::vector<std::span<const double>>& w_negs) {
    if (u.size() != w_pos.size()) throw ArgumentError("pair_loss: dimension mismatch");
    double loss = softplus(-detail::dot(u, w_pos));
    for (const auto& w : w_negs) {
        if (w.size() != u.size()) throw ArgumentError("pair_loss: dimension mismatch");
        loss += softplus(detail::dot(u, w));
    }
    return loss;
}

struct PairGradient {
    std::vector<double> u;
    std::vector<double> w_pos;
    std::vector<std::vector<double>> w_negs;
};

// Analytic gradient of pair_loss. The same coefficients drive the training
// updates, so the finite-difference check covers the optimizer path.
inline PairGradient pair_loss_gradient(std::span<const double> u, std::span<const double> w_pos,
                                       const std::vector<std::span<const double>>& w_negs) {
    if (u.size() != w_pos.size()) throw ArgumentError("pair_loss_gradient: dimension mismatch");
    const std::size_t d = u.size();
    PairGradient g;
    g.u.assign(d, 0.0);
    g.w_pos.assign(d, 0.0);
    g.w_negs.assign(w_negs.size(), std::vector<double>(d, 0.0));

    const double coeff_pos = sigmoid(detail::dot(u, w_pos)) - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        g.u[i] += coeff_pos * w_pos[i];
        g.w_pos[i] = coeff_pos * u[i];
    }
    for (std::size_t k = 0; k < w_negs.size(); ++k) {
        if (w_negs[k].size() != d) throw ArgumentError("pair_loss_gradient: dimension mismatch");
        const double coeff = sigmoid(detail::dot(u, w_negs[k]));
        for (std::size_t i = 0; i < d; ++i) {
            g.u[i] += coeff * w_negs[k][i];
            g.w_negs[k][i] = coeff * u[i];
        }
    }
    return g;
}

struct Model {
    Vocab vocab;
    Matrix input;   // |V| x dim; the exported embedding
    Matrix output;  // |V| x dim; context matrix
    std::vector<double> epoch_mean_loss;
};

namespace detail {

struct EncodedPair {
    int target;
    int context;
};

// One SGD step on raw rows. Gradients use the pre-update value of u.
// Returns the pair loss. Throws on non-finite activations.
inline double sgd_step(double* u, double* w_pos, double** w_negs, int n_neg, int dim, double lr,
                       std::vector<double>& u_accum, int epoch, std::size_t pair_idx) {
    const auto check = [&](double x) {
        if (!std::isfinite(x))
            throw NumericError("sgns: training diverged (non-finite activation) at epoch " +
                               std::to_string(epoch + 1) + ", pair " + std::to_string(pair_idx));
        return x;
    };
    std::fill(u_accum.begin(), u_accum.end(), 0.0);
    double loss = 0.0;

    const double dp = check(dot({u, static_cast<std::size_t>(dim)},
                                {w_pos, static_cast<std::size_t>(dim)}));
    loss += softplus(-dp);
    const double cp = sigmoid(dp) - 1.0;
    for (int i = 0; i < dim; ++i) {
        u_accum[static_cast<std::size_t>(i)] += cp * w_pos[i];
        w_pos[i] -= lr * cp * u[i];
    }
    for (int k = 0; k < n_neg; ++k) {
        double* w = w_negs[k];
        const double dn = check(dot({u, static_cast<std::size_t>(dim)},
                                    {w, static_cast<std::size_t>(dim)}));
        loss += softplus(dn);
        const double cn = sigmoid(dn);
        for (int i = 0; i < dim; ++i) {
            u_accum[static_cast<std::size_t>(i)] += cn * w[i];
            w[i] -= lr * cn * u[i];
        }
    }
    for (int i = 0; i < dim; ++i) u[i] -= lr * u_accum[static_cast<std::size_t>(i)];
    return loss;
}

}  // namespace detail

// SGD over the pair stream for cfg.epochs. Pairs whose target or context fell
// below min_count are skipped. Negatives are drawn from the noise
// distribution, resampling on collision with the positive context.
inline Model train(const PairStream& pairs, const Config& cfg) {
    validate(cfg);
    Model model;
    model.vocab = build_vocab(pairs, cfg.min_count, cfg.noise_exponent);
    const Vocab& vocab = model.vocab;
    const int dim = cfg.dim;
    const auto vsize = static_cast<Eigen::Index>(vocab.words.size());

    std::vector<detail::EncodedPair> encoded;
    encoded.reserve(pairs.size());
    for (const auto& p : pairs) {
        const auto t = vocab.index.find(p.target);
        const auto c = vocab.index.find(p.context);
        if (t != vocab.index.end() && c != vocab.index.end())
            encoded.push_back({t->second, c->second});
    }

    // word2vec-style initialization: input rows uniform in [-0.5/dim, 0.5/dim],
    // output rows zero.
    model.input.resize(vsize, dim);
    model.output = Matrix::Zero(vsize, dim);
    Rng init_rng(derive_seed(cfg.seed, "sgns-init"));
    for (Eigen::Index r = 0; r < vsize; ++r)
        for (int i = 0; i < dim; ++i)
            model.input(r, i) = init_rng.uniform(-0.5 / dim, 0.5 / dim);

    if (cfg.epochs == 0 || encoded.empty()) return model;

    double* const U = model.input.data();
    double* const W = model.output.data();
    const std::size_t total_updates =
        static_cast<std::size_t>(cfg.epochs) * encoded.size();

    const auto run_span = [&](std::size_t begin, std::size_t end, int epoch, Rng& rng,
                              std::atomic<std::size_t>& done) -> double {
        std::vector<double> u_accum(static_cast<std::size_t>(dim));
        std::vector<double*> negs(static_cast<std::size_t>(cfg.negatives));
        double loss_sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto [t, c] = encoded[i];
            for (int k = 0; k < cfg.negatives; ++k) {
                int neg = sample_noise(vocab, rng);
                for (int attempt = 0; neg == c && attempt < 1000; ++attempt)
                    neg = sample_noise(vocab, rng);
                if (neg == c) neg = (c + 1) % static_cast<int>(vocab.words.size());
                negs[static_cast<std::size_t>(k)] = W + static_cast<std::ptrdiff_t>(neg) * dim;
            }
            const std::size_t step = done.fetch_add(1, std::memory_order_relaxed);
            const double lr =
                std::max(cfg.lr_floor,
                         cfg.learning_rate *
                             (1.0 - static_cast<double>(step) / static_cast<double>(total_updates)));
            loss_sum += detail::sgd_step(U + static_cast<std::ptrdiff_t>(t) * dim,
                                         W + static_cast<std::ptrdiff_t>(c) * dim, negs.data(),
                                         cfg.negatives, dim, lr, u_accum, epoch, i);
        }
        return loss_sum;
    };

    std::atomic<std::size_t> done{0};
    const int workers = cfg.deterministic ? 1 : std::max(1, cfg.threads);
    if (workers == 1) {
        Rng rng(derive_seed(cfg.seed, "sgns-train"));
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            const double sum = run_span(0, encoded.size(), epoch, rng, done);
            model.epoch_mean_loss.push_back(sum / static_cast<double>(encoded.size()));
        }
    } else {
        // Lock-free concurrent row updates: shards write to shared matrices
        // without synchronization, as in the reference word2vec trainer.
        const std::size_t chunk = (encoded.size() + static_cast<std::size_t>(workers) - 1) /
                                  static_cast<std::size_t>(workers);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::vector<double> sums(static_cast<std::size_t>(workers), 0.0);
            std::vector<std::thread> pool;
            std::exception_ptr err;
            std::mutex err_mu;
            for (int w = 0; w < workers; ++w) {
                const std::size_t b = static_cast<std::size_t>(w) * chunk;
                const std::size_t e = std::min(encoded.size(), b + chunk);
                if (b >= e) continue;
                pool.emplace_back([&, w, b, e, epoch]() {
                    Rng rng(derive_seed(cfg.seed, "sgns-thread-" + std::to_string(w) + "-" +
                                                      std::to_string(epoch)));
                    try {
                        sums[static_cast<std::size_t>(w)] = run_span(b, e, epoch, rng, done);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(err_mu);
                        if (!err) err = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            if (err) std::rethrow_exception(err);
            double sum = 0.0;
            for (double s : sums) sum += s;
            model.epoch_mean_loss.push_back(sum / static_cast<double>(encoded.size()));
        }
    }
    return model;
}

}  // namespace embkit::sgns
