#include "graphclust/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "graphclust/rng.hpp"

namespace graphclust {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

}  // namespace

KmeansResult kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
    const std::size_t n = points.rows(), d = points.cols();
    if (k == 0 || k > n) {
        throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " invalid for n=" +
                                    std::to_string(n));
    }
    Rng rng(seed);

    // k-means++ seeding.
    DenseMatrix centroids(k, d);
    std::vector<char> chosen(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    {
        std::size_t first = rng.uniform_index(n);
        chosen[first] = 1;
        for (std::size_t j = 0; j < d; ++j) centroids(0, j) = points(first, j);
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist = sq_dist(points.row(i), centroids.row(c - 1), d);
                if (dist < d2[i]) d2[i] = dist;
                total += chosen[i] ? 0.0 : d2[i];
            }
            std::size_t pick = n;
            if (total > 0.0) {
                const double r = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (chosen[i]) continue;
                    acc += d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            }
            if (pick == n) {
                // All remaining mass is zero (duplicate points): first unchosen.
                for (std::size_t i = 0; i < n; ++i)
                    if (!chosen[i]) {
                        pick = i;
                        break;
                    }
            }
            chosen[pick] = 1;
            for (std::size_t j = 0; j < d; ++j) centroids(c, j) = points(pick, j);
        }
    }

    KmeansResult res;
    std::vector<int> assign(n, -1);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(points.row(i), centroids.row(0), d);
            for (std::size_t c = 1; c < k; ++c) {
                const double dist = sq_dist(points.row(i), centroids.row(c), d);
                if (dist < bd) {
                    bd = dist;
                    best = static_cast<int>(c);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            inertia += bd;
        }
        res.inertia = inertia;
        res.inertia_trace.push_back(inertia);
        res.iterations = static_cast<int>(iter + 1);
        if (!changed && iter > 0) break;

        centroids.fill(0.0);
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* c = centroids.row(assign[i]);
            const double* p = points.row(i);
            for (std::size_t j = 0; j < d; ++j) c[j] += p[j];
            ++count[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) continue;
            double* row = centroids.row(c);
            for (std::size_t j = 0; j < d; ++j) row[j] /= static_cast<double>(count[c]);
        }
        // Reseed any empty cluster to the point farthest from its centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] != 0) continue;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist = sq_dist(points.row(i), centroids.row(assign[i]), d);
                if (dist > fd) {
                    fd = dist;
                    far = i;
                }
            }
            for (std::size_t j = 0; j < d; ++j) centroids(c, j) = points(far, j);
            count[c] = 1;
        }
    }

    res.partition = Partition::from_assignment(assign);
    res.centroids = std::move(centroids);
    return res;
}

}  // namespace graphclust
