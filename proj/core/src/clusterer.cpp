// SPDX-License-Identifier: Apache-2.0
#include "rulegen/clusterer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <tuple>

#include "rulegen/util.hpp"

namespace rulegen::cluster {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// Maps one PRNG draw to [0,1); stable across standard libraries.
double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
}

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

std::vector<std::vector<double>> seed_centroids(const std::vector<embed::CodeVector>& vectors,
                                                std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(vectors[index_draw(rng, vectors.size())].values);
    std::vector<double> best_sq(vectors.size(), std::numeric_limits<double>::max());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            best_sq[i] = std::min(best_sq[i], sq_distance(vectors[i].values, centroids.back()));
            total += best_sq[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = index_draw(rng, vectors.size());  // all points coincide with a centroid
        } else {
            double r = unit_draw(rng) * total;
            double acc = 0.0;
            chosen = vectors.size() - 1;
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                acc += best_sq[i];
                if (r < acc) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(vectors[chosen].values);
    }
    return centroids;
}

}  // namespace

std::size_t default_k(std::size_t n) {
    if (n == 0) {
        return 1;
    }
    auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n) / 2.0)));
    return std::max<std::size_t>(1, k);
}

std::vector<CodeCluster> kmeans(const std::vector<embed::CodeVector>& vectors, std::size_t k,
                                std::uint64_t seed, std::size_t max_iter, SimilarityKind kind) {
    if (vectors.empty()) {
        throw Error(ErrorCode::EmptyInput, "kmeans over zero vectors");
    }
    if (k == 0 || k > vectors.size()) {
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(k) + " for " + std::to_string(vectors.size()) + " points");
    }
    std::size_t dim = vectors.front().values.size();
    for (const auto& v : vectors) {
        if (v.values.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "kmeans over ragged dimensions");
        }
    }

    auto centroids = seed_centroids(vectors, k, seed);
    std::vector<std::size_t> assignment(vectors.size(), 0);
    std::vector<std::size_t> previous(vectors.size(), SIZE_MAX);

#ifndef NDEBUG
    double last_objective = std::numeric_limits<double>::max();
#endif
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // assignment step (ties go to the lowest cluster index)
        bool changed = false;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            std::size_t best = 0;
            double best_d = sq_distance(vectors[i].values, centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = sq_distance(vectors[i].values, centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
            if (previous[i] != best) {
                changed = true;
            }
        }
#ifndef NDEBUG
        {
            double objective = 0.0;
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                objective += sq_distance(vectors[i].values, centroids[assignment[i]]);
            }
            assert(objective <= last_objective + 1e-9);
            last_objective = objective;
        }
#endif
        if (!changed) {
            break;
        }
        previous = assignment;

        // update step: mean in fixed member order; empty clusters keep centroids
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            std::size_t c = assignment[i];
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) {
                sums[c][d] += vectors[i].values[d];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) {
                centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
            }
        }
    }

    std::vector<CodeCluster> clusters(k);
    for (std::size_t c = 0; c < k; ++c) {
        clusters[c].centroid.values = centroids[c];
        clusters[c].centroid.source = "centroid";
    }
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        clusters[assignment[i]].member_indexes.push_back(i);
    }
    clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                  [](const CodeCluster& c) { return c.member_indexes.empty(); }),
                   clusters.end());
    std::sort(clusters.begin(), clusters.end(), [](const CodeCluster& a, const CodeCluster& b) {
        return a.member_indexes.front() < b.member_indexes.front();
    });
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        auto& cl = clusters[c];
        cl.id = static_cast<int>(c);
        double acc = 0.0;
        for (std::size_t i : cl.member_indexes) {
            if (kind == SimilarityKind::inverse_distance) {
                double d = std::sqrt(sq_distance(vectors[i].values, cl.centroid.values));
                acc += 1.0 / (1.0 + d);
            } else {
                acc += embed::cosine_similarity(vectors[i], cl.centroid);
            }
        }
        cl.intra_similarity = acc / static_cast<double>(cl.member_indexes.size());
        double n = 0.0;
        for (double v : cl.centroid.values) {
            n += v * v;
        }
        cl.centroid.norm = std::sqrt(n);
    }
    return clusters;
}

std::vector<CodeCluster> filter_clusters(const std::vector<CodeCluster>& clusters,
                                         double threshold) {
    std::vector<CodeCluster> kept;
    for (const auto& c : clusters) {
        if (c.intra_similarity >= threshold) {
            kept.push_back(c);
        }
    }
    return kept;
}

std::vector<std::size_t> select_representatives(const CodeCluster& cluster,
                                                const std::vector<embed::CodeVector>& vectors,
                                                const std::vector<MemberRef>& refs, std::size_t n) {
    struct Candidate {
        double distance;
        std::string package;
        std::string file;
        std::size_t unit_id;
        std::size_t index;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(cluster.member_indexes.size());
    for (std::size_t i : cluster.member_indexes) {
        double d = euclidean_distance(vectors[i], cluster.centroid);
        candidates.push_back({d, refs[i].package, refs[i].file, refs[i].unit_id, i});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.package, a.file, a.unit_id) <
               std::tie(b.distance, b.package, b.file, b.unit_id);
    });
    if (candidates.size() <= n) {
        std::vector<std::size_t> all;
        for (const auto& c : candidates) {
            all.push_back(c.index);
        }
        return all;
    }
    std::vector<std::size_t> picked;
    std::vector<bool> used(candidates.size(), false);
    std::vector<std::string> used_packages;
    // first pass: nearest member of each distinct package
    for (std::size_t i = 0; i < candidates.size() && picked.size() < n; ++i) {
        if (std::find(used_packages.begin(), used_packages.end(), candidates[i].package) !=
            used_packages.end()) {
            continue;
        }
        picked.push_back(candidates[i].index);
        used[i] = true;
        used_packages.push_back(candidates[i].package);
    }
    // second pass: fill remaining slots by plain nearest order
    for (std::size_t i = 0; i < candidates.size() && picked.size() < n; ++i) {
        if (!used[i]) {
            picked.push_back(candidates[i].index);
            used[i] = true;
        }
    }
    return picked;
}

double sse(const std::vector<CodeCluster>& clusters, const std::vector<embed::CodeVector>& vectors) {
    double total = 0.0;
    for (const auto& c : clusters) {
        for (std::size_t i : c.member_indexes) {
            total += sq_distance(vectors[i].values, c.centroid.values);
        }
    }
    return total;
}

}  // namespace rulegen::cluster
