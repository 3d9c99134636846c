#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"
#include "embkit/linalg.hpp"
#include "embkit/rng.hpp"

namespace embkit::mi {

// Two matrices whose rows are paired observations (row i of X and Y describe
// the same word when built via align()).
struct PairedSample {
    Matrix x;
    Matrix y;
};

inline PairedSample make_paired(Matrix x, Matrix y) {
    if (x.rows() != y.rows()) throw ArgumentError("paired sample: row counts differ");
    if (x.rows() == 0) throw ArgumentError("paired sample: empty");
    return {std::move(x), std::move(y)};
}

// Rows aligned over the common vocabulary in lexicographic order.
inline PairedSample align(const emb::EmbeddingSpace& a, const emb::EmbeddingSpace& b) {
    const auto common = emb::common_vocab({&a, &b});
    if (common.empty()) throw CoverageError("align: empty common vocabulary");
    return make_paired(emb::restrict_to(a, common).matrix, emb::restrict_to(b, common).matrix);
}

// Projection onto the top principal components of the column-centered data,
// ordered by descending eigenvalue. Sign convention: the largest-magnitude
// loading of each component is positive.
inline Matrix pca_project(const Matrix& m, int d_out) {
    const Eigen::Index n = m.rows();
    const Eigen::Index d = m.cols();
    if (d_out < 1 || d_out > std::min<Eigen::Index>(n, d))
        throw ArgumentError("pca_project: d_out must be in [1, min(n, d)]");

    Matrix centered = m;
    centered.rowwise() -= m.colwise().mean();

    // Eigenvectors of the scatter matrix equal those of the covariance.
    const Eigen::MatrixXd scatter = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
    if (solver.info() != Eigen::Success) throw NumericError("pca_project: eigendecomposition failed");

    Eigen::MatrixXd components(d, d_out);
    for (int c = 0; c < d_out; ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);  // ascending order in Eigen
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(v[i]) > std::abs(v[best])) best = i;
        }
        if (v[best] < 0) v = -v;
        components.col(c) = v;
    }
    return centered * components;
}

enum class SigmaPolicy { median, fixed };

struct HsicOptions {
    SigmaPolicy policy = SigmaPolicy::median;
    double sigma = 1.0;  // used when policy == fixed
    int threads = 1;
};

struct Estimate {
    double value = 0.0;
    std::string method;  // "hsic" | "knn"
    int k = 0;           // knn
    std::string sigma_policy;
    double sigma_x = 0.0;  // hsic
    double sigma_y = 0.0;
    int proj_dim = 0;  // 0 = no projection
    std::uint64_t seed = 0;
    std::size_t n = 0;
    int d = 0;  // joint dimension the estimate was computed on
};

namespace detail {

inline void parallel_rows(Eigen::Index n, int threads, const auto& fn) {
    if (threads <= 1 || n < 64) {
        for (Eigen::Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const Eigen::Index b = static_cast<Eigen::Index>(t) * chunk;
        const Eigen::Index e = std::min(n, b + chunk);
        if (b < e)
            pool.emplace_back([&fn, b, e] {
                for (Eigen::Index i = b; i < e; ++i) fn(i);
            });
    }
    for (auto& th : pool) th.join();
}

// Pairwise squared Euclidean distances between rows.
inline Matrix squared_distances(const Matrix& m, int threads = 1) {
    const Eigen::Index n = m.rows();
    const Vector sq = m.rowwise().squaredNorm();
    Matrix g = m * m.transpose();
    Matrix d2(n, n);
    parallel_rows(n, threads, [&](Eigen::Index i) {
        for (Eigen::Index j = 0; j < n; ++j)
            d2(i, j) = std::max(0.0, sq[i] + sq[j] - 2.0 * g(i, j));
        d2(i, i) = 0.0;
    });
    return d2;
}

// Median of the nonzero pairwise Euclidean distances.
inline double median_distance(const Matrix& d2) {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(d2.rows()) * (d2.rows() - 1) / 2);
    for (Eigen::Index i = 0; i < d2.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d2.cols(); ++j)
            if (d2(i, j) > 0.0) dists.push_back(std::sqrt(d2(i, j)));
    if (dists.empty())
        throw NumericError("median bandwidth: degenerate sample, all pairwise distances zero");
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    double med = dists[mid];
    if (dists.size() % 2 == 0) {
        const double lo =
            *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (lo + med);
    }
    return med;
}

inline Matrix gaussian_kernel(const Matrix& d2, double sigma, int threads) {
    const double denom = 2.0 * sigma * sigma;
    Matrix k(d2.rows(), d2.cols());
    parallel_rows(d2.rows(), threads, [&](Eigen::Index i) {
        for (Eigen::Index j = 0; j < d2.cols(); ++j) k(i, j) = std::exp(-d2(i, j) / denom);
    });
    return k;
}

// H M H with H = I - (1/n) 1 1^T.
inline Matrix double_center(const Matrix& m) {
    const Vector row_mean = m.rowwise().mean();
    const Vector col_mean = m.colwise().mean();
    const double grand = row_mean.mean();
    Matrix out = m;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean.transpose();
    out.array() += grand;
    return out;
}

}  // namespace detail

// Empirical HSIC with Gaussian kernels: (1/(n-1)^2) trace(K H L H). The
// bandwidth per block is the median nonzero pairwise distance, or a fixed
// constant.
inline Estimate hsic(const PairedSample& p, const HsicOptions& opt = {}) {
    const Eigen::Index n = p.x.rows();
    if (n < 4) throw ArgumentError("hsic: need at least 4 observations");
    const Matrix d2x = detail::squared_distances(p.x, opt.threads);
    const Matrix d2y = detail::squared_distances(p.y, opt.threads);

    double sx, sy;
    if (opt.policy == SigmaPolicy::median) {
        sx = detail::median_distance(d2x);
        sy = detail::median_distance(d2y);
    } else {
        if (!(opt.sigma > 0)) throw ArgumentError("hsic: sigma must be > 0");
        sx = sy = opt.sigma;
    }
    const Matrix k = detail::gaussian_kernel(d2x, sx, opt.threads);
    const Matrix l = detail::gaussian_kernel(d2y, sy, opt.threads);
    const Matrix kc = detail::double_center(k);
    const double scale = static_cast<double>(n - 1) * static_cast<double>(n - 1);

    Estimate e;
    e.value = kc.cwiseProduct(l).sum() / scale;
    e.method = "hsic";
    e.sigma_policy = opt.policy == SigmaPolicy::median ? "median" : "fixed";
    e.sigma_x = sx;
    e.sigma_y = sy;
    e.n = static_cast<std::size_t>(n);
    e.d = static_cast<int>(p.x.cols() + p.y.cols());
    return e;
}

namespace detail {

// k-th nearest-neighbor distance from each row of `from` to the rows of `to`,
// excluding to's row with the same index.
inline std::vector<double> knn_distances(const Matrix& from, const Matrix& to, int k,
                                         int threads) {
    const Eigen::Index n = from.rows();
    std::vector<double> result(static_cast<std::size_t>(n));
    parallel_rows(n, threads, [&](Eigen::Index i) {
        std::vector<double> d2(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j)
            d2[static_cast<std::size_t>(j)] = (from.row(i) - to.row(j)).squaredNorm();
        d2[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
        std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
        result[static_cast<std::size_t>(i)] = std::sqrt(d2[static_cast<std::size_t>(k - 1)]);
    });
    return result;
}

}  // namespace detail

// MI as the kNN KL-divergence between the joint sample Z = [X|Y] and the
// product-of-marginals sample Z' = [X|pi(Y)] (pi a seeded uniform
// permutation):  D = (d/n) sum_i log(nu_k(i) / rho_k(i)),
// where rho_k is the k-th neighbor distance within Z (self excluded) and
// nu_k the k-th neighbor distance to Z' (the i-th row of Z', which shares
// x_i, excluded; both searches then range over n-1 candidates and the
// log(m/(n-1)) correction vanishes). Duplicate points that yield zero
// neighbor distances get uniform jitter of magnitude 1e-10 before a retry.
inline Estimate knn_mi(const PairedSample& p, int k, std::uint64_t seed, int threads = 1) {
    const Eigen::Index n = p.x.rows();
    if (k < 1) throw ArgumentError("knn_mi: k must be >= 1");
    if (n < k + 2) throw ArgumentError("knn_mi: need at least k + 2 observations");

    Rng rng(seed);
    const auto perm = rng.permutation(static_cast<std::size_t>(n));

    const auto estimate = [&](const Matrix& x, const Matrix& y,
                              double& out) -> bool {  // false on zero distances
        const Eigen::Index dx = x.cols(), dy = y.cols();
        Matrix z(n, dx + dy), zp(n, dx + dy);
        z << x, y;
        zp.leftCols(dx) = x;
        for (Eigen::Index i = 0; i < n; ++i)
            zp.row(i).tail(dy) = y.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));

        const auto rho = detail::knn_distances(z, z, k, threads);
        const auto nu = detail::knn_distances(z, zp, k, threads);
        double logsum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = rho[static_cast<std::size_t>(i)];
            const double v = nu[static_cast<std::size_t>(i)];
            if (r == 0.0 || v == 0.0) return false;
            logsum += std::log(v / r);
        }
        out = static_cast<double>(dx + dy) / static_cast<double>(n) * logsum;
        return true;
    };

    double value = 0.0;
    if (!estimate(p.x, p.y, value)) {
        Rng jitter_rng(derive_seed(seed, "knn-jitter"));
        Matrix xj = p.x, yj = p.y;
        for (Eigen::Index i = 0; i < xj.rows(); ++i)
            for (Eigen::Index c = 0; c < xj.cols(); ++c)
                xj(i, c) += jitter_rng.uniform(-1e-10, 1e-10);
        for (Eigen::Index i = 0; i < yj.rows(); ++i)
            for (Eigen::Index c = 0; c < yj.cols(); ++c)
                yj(i, c) += jitter_rng.uniform(-1e-10, 1e-10);
        if (!estimate(xj, yj, value))
            throw NumericError("knn_mi: degenerate sample, zero neighbor distances after jitter");
    }

    Estimate e;
    e.value = value;
    e.method = "knn";
    e.k = k;
    e.seed = seed;
    e.n = static_cast<std::size_t>(n);
    e.d = static_cast<int>(p.x.cols() + p.y.cols());
    return e;
}

struct CompareOptions {
    std::string method = "hsic";  // "hsic" | "knn"
    HsicOptions hsic;
    int k = 3;
    std::optional<int> proj_dim;  // PCA-project each space before estimating
    std::uint64_t seed = 1;
    int threads = 1;
};

struct ModalityReport {
    Estimate el_es;
    Estimate el_ev;
    int ordering = 0;  // sign of el_es.value - el_ev.value
    std::size_t n = 0;
};

// Aligns the three spaces on their common vocabulary and estimates the
// dependence of (el, ev) and (el, es) with identical parameters.
inline ModalityReport compare_modalities(const emb::EmbeddingSpace& el,
                                         const emb::EmbeddingSpace& es,
                                         const emb::EmbeddingSpace& ev,
                                         const CompareOptions& opt = {}) {
    const auto common = emb::common_vocab({&el, &es, &ev});
    if (common.empty()) throw CoverageError("compare_modalities: empty common vocabulary");

    Matrix ml = emb::restrict_to(el, common).matrix;
    Matrix ms = emb::restrict_to(es, common).matrix;
    Matrix mv = emb::restrict_to(ev, common).matrix;
    if (opt.proj_dim) {
        ml = pca_project(ml, *opt.proj_dim);
        ms = pca_project(ms, *opt.proj_dim);
        mv = pca_project(mv, *opt.proj_dim);
    }

    const auto run = [&](Matrix a, Matrix b) {
        PairedSample p = make_paired(std::move(a), std::move(b));
        Estimate e;
        if (opt.method == "hsic") {
            e = hsic(p, opt.hsic);
        } else if (opt.method == "knn") {
            e = knn_mi(p, opt.k, opt.seed, opt.threads);
        } else {
            throw ArgumentError("compare_modalities: unknown method '" + opt.method + "'");
        }
        if (opt.proj_dim) e.proj_dim = *opt.proj_dim;
        return e;
    };

    ModalityReport report;
    report.el_es = run(ml, ms);
    report.el_ev = run(ml, mv);
    const double diff = report.el_es.value - report.el_ev.value;
    report.ordering = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    report.n = common.size();
    return report;
}

}  // namespace embkit::mi
