#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"
#include "embkit/infogain.hpp"
#include "embkit/linalg.hpp"
#include "embkit/rng.hpp"

namespace embkit::cluster {

struct Clustering {
    std::vector<std::string> words;  // aligned with assignment
    std::vector<int> assignment;     // word i -> cluster id in [0, k)
    int k = 0;
    std::string algorithm;
};

// K-means with seeded k-means++ initialization and Lloyd iterations until the
// largest centroid shift drops below tol or max_iter is reached. An empty
// cluster is repaired by reseeding it at the point farthest from its current
// centroid. If duplicates make k non-empty clusters unreachable, labels are
// compacted and the reported k shrinks.
inline Clustering kmeans(const emb::EmbeddingSpace& e, int k, std::uint64_t seed,
                         int max_iter = 100, double tol = 1e-6,
                         std::vector<double>* inertia_trace = nullptr) {
    const Eigen::Index n = e.matrix.rows();
    if (k < 2 || k > n) throw ArgumentError("kmeans: k must be in [2, |V|]");
    const Matrix& pts = e.matrix;
    Rng rng(seed);

    // k-means++ seeding
    Matrix centroids(k, pts.cols());
    std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
    {
        const auto first = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        centroids.row(0) = pts.row(first);
        for (Eigen::Index i = 0; i < n; ++i)
            d2[static_cast<std::size_t>(i)] = (pts.row(i) - centroids.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (double v : d2) total += v;
            Eigen::Index pick = 0;
            if (total > 0.0) {
                const double u = rng.uniform() * total;
                double cum = 0.0;
                pick = n - 1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    cum += d2[static_cast<std::size_t>(i)];
                    if (cum > u) {  // strict: entries with zero weight are never picked
                        pick = i;
                        break;
                    }
                }
            } else {
                // all points coincide with a chosen centroid; any point works
                pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            }
            centroids.row(c) = pts.row(pick);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double dd = (pts.row(i) - centroids.row(c)).squaredNorm();
                d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], dd);
            }
        }
    }

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<double> assign_d2(static_cast<std::size_t>(n), 0.0);
    const auto assign_all = [&]() {
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (pts.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double dd = (pts.row(i) - centroids.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            assign[static_cast<std::size_t>(i)] = best;
            assign_d2[static_cast<std::size_t>(i)] = best_d;
            inertia += best_d;
        }
        return inertia;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        const double inertia = assign_all();
        if (inertia_trace) inertia_trace->push_back(inertia);

        Matrix sums = Matrix::Zero(k, pts.cols());
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) += pts.row(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        double shift = 0.0;
        std::vector<double> repair_d2 = assign_d2;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                Eigen::Index far = 0;
                for (Eigen::Index i = 1; i < n; ++i)
                    if (repair_d2[static_cast<std::size_t>(i)] > repair_d2[static_cast<std::size_t>(far)])
                        far = i;
                repair_d2[static_cast<std::size_t>(far)] = -1.0;  // claim the point
                shift = std::max(shift, (centroids.row(c) - pts.row(far)).norm());
                centroids.row(c) = pts.row(far);
                continue;
            }
            const Vector next =
                sums.row(c).transpose() / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            shift = std::max(shift, (centroids.row(c).transpose() - next).norm());
            centroids.row(c) = next.transpose();
        }
        if (shift < tol) break;
    }
    assign_all();

    // compact labels in case some cluster ended up unpopulated
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int next_id = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int& m = remap[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        if (m < 0) m = next_id++;
    }
    Clustering out;
    out.words = e.words;
    out.assignment.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        out.assignment[static_cast<std::size_t>(i)] =
            remap[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    out.k = next_id;
    out.algorithm = "kmeans";
    return out;
}

// Bottom-up Ward clustering via the Lance-Williams update on the merge cost
//   delta(A, B) = |A||B| / (|A|+|B|) * ||c_A - c_B||^2 ,
// initialized as half the squared distance between singletons. Merge ties are
// broken by the smallest (i, j) pair of cluster creation ids.
inline Clustering agglomerative_ward(const emb::EmbeddingSpace& e, int k) {
    const Eigen::Index n = e.matrix.rows();
    if (k < 1 || k > n) throw ArgumentError("agglomerative_ward: k must be in [1, |V|]");

    struct Slot {
        int creation_id;
        std::int64_t size;
        std::vector<int> members;
        bool active = true;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> delta(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        slots[static_cast<std::size_t>(i)] = {static_cast<int>(i), 1, {static_cast<int>(i)}, true};
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = 0.5 * (e.matrix.row(i) - e.matrix.row(j)).squaredNorm();
            delta[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
            delta[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d;
        }
    }

    int active_count = static_cast<int>(n);
    int next_creation_id = static_cast<int>(n);
    while (active_count > k) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<int, int> best_ids{0, 0};
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i].active) continue;
            for (std::size_t j = i + 1; j < slots.size(); ++j) {
                if (!slots[j].active) continue;
                const double d = delta[i][j];
                const auto ids = std::minmax(slots[i].creation_id, slots[j].creation_id);
                const std::pair<int, int> id_pair{ids.first, ids.second};
                if (d < best || (d == best && id_pair < best_ids)) {
                    best = d;
                    best_ids = id_pair;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        const auto ui = static_cast<std::size_t>(bi);
        const auto uj = static_cast<std::size_t>(bj);
        const double nij = static_cast<double>(slots[ui].size + slots[uj].size);
        for (std::size_t m = 0; m < slots.size(); ++m) {
            if (!slots[m].active || m == ui || m == uj) continue;
            const double nm = static_cast<double>(slots[m].size);
            const double d_new = ((static_cast<double>(slots[ui].size) + nm) * delta[ui][m] +
                                  (static_cast<double>(slots[uj].size) + nm) * delta[uj][m] -
                                  nm * delta[ui][uj]) /
                                 (nij + nm);
            delta[ui][m] = d_new;
            delta[m][ui] = d_new;
        }
        slots[ui].size += slots[uj].size;
        slots[ui].members.insert(slots[ui].members.end(), slots[uj].members.begin(),
                                 slots[uj].members.end());
        slots[ui].creation_id = next_creation_id++;
        slots[uj].active = false;
        --active_count;
    }

    // label remaining clusters by their smallest member index
    std::vector<std::vector<int>*> remaining;
    for (auto& s : slots) {
        if (!s.active) continue;
        std::sort(s.members.begin(), s.members.end());
        remaining.push_back(&s.members);
    }
    std::sort(remaining.begin(), remaining.end(),
              [](const auto* a, const auto* b) { return a->front() < b->front(); });

    Clustering out;
    out.words = e.words;
    out.assignment.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < remaining.size(); ++c)
        for (int m : *remaining[c]) out.assignment[static_cast<std::size_t>(m)] = static_cast<int>(c);
    out.k = static_cast<int>(remaining.size());
    out.algorithm = "ward";
    return out;
}

struct Scores {
    double dbi = 0.0;
    double chi = 0.0;
    double silhouette = 0.0;
};

// Internal validity indices with Euclidean distances:
//   DBI = (1/k) sum_i max_{j!=i} (s_i + s_j) / d(c_i, c_j),
//         s = mean member distance to the cluster centroid;
//   CHI = [tr(B)/(k-1)] / [tr(W)/(n-k)]  (1.0 when tr(W) = 0);
//   SC  = mean over points of (b - a)/max(a, b), a(x) = 0 for singletons.
inline Scores score(const emb::EmbeddingSpace& e, const Clustering& c) {
    if (c.words != e.words) throw ArgumentError("score: clustering does not match the space");
    const Eigen::Index n = e.matrix.rows();
    const int k = c.k;
    if (k < 2 || static_cast<Eigen::Index>(k) >= n)
        throw ArgumentError("score: need 2 <= k < |V|");

    Matrix centroids = Matrix::Zero(k, e.matrix.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        centroids.row(c.assignment[static_cast<std::size_t>(i)]) += e.matrix.row(i);
        ++counts[static_cast<std::size_t>(c.assignment[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
        if (counts[static_cast<std::size_t>(j)] == 0)
            throw ArgumentError("score: cluster " + std::to_string(j) + " is empty");
        centroids.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
    }

    // Davies-Bouldin
    std::vector<double> spread(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        spread[static_cast<std::size_t>(c.assignment[static_cast<std::size_t>(i)])] +=
            (e.matrix.row(i) - centroids.row(c.assignment[static_cast<std::size_t>(i)])).norm();
    for (int j = 0; j < k; ++j)
        spread[static_cast<std::size_t>(j)] /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
    double dbi = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double sep = (centroids.row(i) - centroids.row(j)).norm();
            const double mix = spread[static_cast<std::size_t>(i)] + spread[static_cast<std::size_t>(j)];
            const double ratio =
                sep > 0.0 ? mix / sep
                          : (mix == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            worst = std::max(worst, ratio);
        }
        dbi += worst;
    }
    dbi /= static_cast<double>(k);

    // Calinski-Harabasz
    const Eigen::RowVectorXd grand = e.matrix.colwise().mean();
    double tr_b = 0.0, tr_w = 0.0;
    for (int j = 0; j < k; ++j)
        tr_b += static_cast<double>(counts[static_cast<std::size_t>(j)]) *
                (centroids.row(j) - grand).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
        tr_w += (e.matrix.row(i) - centroids.row(c.assignment[static_cast<std::size_t>(i)]))
                    .squaredNorm();
    const double chi =
        tr_w == 0.0 ? 1.0
                    : (tr_b / static_cast<double>(k - 1)) /
                          (tr_w / static_cast<double>(n - k));

    // Silhouette over full pairwise distances
    double sc_sum = 0.0;
    std::vector<double> mean_to_cluster(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(mean_to_cluster.begin(), mean_to_cluster.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to_cluster[static_cast<std::size_t>(c.assignment[static_cast<std::size_t>(j)])] +=
                (e.matrix.row(i) - e.matrix.row(j)).norm();
        }
        const int own = c.assignment[static_cast<std::size_t>(i)];
        double a = 0.0;
        if (counts[static_cast<std::size_t>(own)] > 1)
            a = mean_to_cluster[static_cast<std::size_t>(own)] /
                static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            if (j == own) continue;
            b = std::min(b, mean_to_cluster[static_cast<std::size_t>(j)] /
                                static_cast<double>(counts[static_cast<std::size_t>(j)]));
        }
        const double denom = std::max(a, b);
        sc_sum += denom > 0.0 ? (b - a) / denom : 0.0;
    }

    Scores s;
    s.dbi = dbi;
    s.chi = chi;
    s.silhouette = sc_sum / static_cast<double>(n);
    return s;
}

struct JaccardTable {
    std::vector<double> thresholds;
    std::vector<int> counts;  // cluster pairs with J strictly above each threshold
    double max_similarity = 0.0;
};

// For every (A in c1, B in c2): J = |A∩B| / |A∪B|. Reports how many of the
// k1*k2 pairs exceed each threshold, plus the maximum similarity.
inline JaccardTable jaccard_table(const Clustering& c1, const Clustering& c2,
                                  std::vector<double> thresholds) {
    std::vector<std::string> w1 = c1.words, w2 = c2.words;
    std::sort(w1.begin(), w1.end());
    std::sort(w2.begin(), w2.end());
    if (w1 != w2) throw ArgumentError("jaccard_table: clusterings cover different word sets");

    std::vector<std::set<std::string>> a(static_cast<std::size_t>(c1.k)),
        b(static_cast<std::size_t>(c2.k));
    for (std::size_t i = 0; i < c1.words.size(); ++i)
        a[static_cast<std::size_t>(c1.assignment[i])].insert(c1.words[i]);
    for (std::size_t i = 0; i < c2.words.size(); ++i)
        b[static_cast<std::size_t>(c2.assignment[i])].insert(c2.words[i]);

    JaccardTable table;
    table.thresholds = std::move(thresholds);
    table.counts.assign(table.thresholds.size(), 0);
    for (const auto& sa : a) {
        for (const auto& sb : b) {
            std::size_t inter = 0;
            for (const auto& w : sa) inter += sb.count(w);
            const std::size_t uni = sa.size() + sb.size() - inter;
            const double j = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
            table.max_similarity = std::max(table.max_similarity, j);
            for (std::size_t t = 0; t < table.thresholds.size(); ++t)
                if (j > table.thresholds[t]) ++table.counts[t];
        }
    }
    return table;
}

struct Projection2D {
    std::vector<std::string> words;
    std::vector<double> x, y;
    std::vector<int> label;
};

// 2D PCA coordinates plus the cluster label, for plotting.
inline Projection2D export_2d(const emb::EmbeddingSpace& e, const Clustering& c) {
    if (c.words != e.words) throw ArgumentError("export_2d: clustering does not match the space");
    if (e.dim() < 2) throw ArgumentError("export_2d: need dimension >= 2");
    const Matrix coords = mi::pca_project(e.matrix, 2);
    Projection2D out;
    out.words = e.words;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        out.x.push_back(coords(i, 0));
        out.y.push_back(coords(i, 1));
        out.label.push_back(c.assignment[static_cast<std::size_t>(i)]);
    }
    return out;
}

// TSV: word<TAB>x<TAB>y<TAB>cluster.
inline void write_projection(std::ostream& out, const Projection2D& p) {
    char buf[64];
    out << "word\tx\ty\tcluster\n";
    for (std::size_t i = 0; i < p.words.size(); ++i) {
        out << p.words[i];
        std::snprintf(buf, sizeof buf, "%.9g", p.x[i]);
        out << '\t' << buf;
        std::snprintf(buf, sizeof buf, "%.9g", p.y[i]);
        out << '\t' << buf << '\t' << p.label[i] << '\n';
    }
}

}  // namespace embkit::cluster
