// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rulegen/embedding.hpp"
#include "rulegen/util.hpp"

namespace rulegen::cluster {

struct MemberRef {
    std::string package;
    std::string file;
    std::size_t unit_id = 0;
};

struct CodeCluster {
    int id = 0;
    std::vector<std::size_t> member_indexes;  // into the caller's vector list
    embed::CodeVector centroid;
    double intra_similarity = 0.0;
};

enum class SimilarityKind { inverse_distance, cosine_mean };

/// Default cluster count: max(1, floor(sqrt(n/2))).
std::size_t default_k(std::size_t n);

/// Lloyd iterations with Euclidean distance and k-means++ style seeding driven
/// by a PRNG seeded with `seed`. Sampling avoids std::*_distribution so output
/// is identical for a given seed on every platform. Terminates when
/// assignments stop changing or after max_iter. Clusters come back sorted by
/// smallest member index; intra_similarity is populated using `kind`:
///   inverse_distance: mean of 1/(1 + d(member, centroid))
///   cosine_mean:      mean of cos(member, centroid)
/// Throws Error{EmptyInput|KTooLarge}.
std::vector<CodeCluster> kmeans(const std::vector<embed::CodeVector>& vectors, std::size_t k,
                                std::uint64_t seed = 42, std::size_t max_iter = 500,
                                SimilarityKind kind = SimilarityKind::inverse_distance);

/// Keeps clusters with intra_similarity >= threshold.
std::vector<CodeCluster> filter_clusters(const std::vector<CodeCluster>& clusters,
                                         double threshold = 0.85);

/// The n member indexes nearest the centroid, preferring members from distinct
/// packages; ties broken by (distance, package, file, unit_id). Fewer members
/// than n: all of them.
std::vector<std::size_t> select_representatives(const CodeCluster& cluster,
                                                const std::vector<embed::CodeVector>& vectors,
                                                const std::vector<MemberRef>& refs,
                                                std::size_t n = 2);

/// Sum of squared member-centroid distances (the Lloyd objective).
double sse(const std::vector<CodeCluster>& clusters,
           const std::vector<embed::CodeVector>& vectors);

}  // namespace rulegen::cluster
