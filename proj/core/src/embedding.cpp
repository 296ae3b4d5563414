// SPDX-License-Identifier: Apache-2.0
#include "rulegen/embedding.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "rulegen/http.hpp"
#include "rulegen/util.hpp"

namespace rulegen::embed {

using nlohmann::json;

double euclidean_distance(const CodeVector& a, const CodeVector& b) {
    if (a.values.size() != b.values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vector dims differ");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cosine_similarity(const CodeVector& a, const CodeVector& b) {
    if (a.values.size() != b.values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vector dims differ");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::uint64_t HashedBagEmbedder::hash_token(std::string_view text) {
    // FNV-1a 64; fixed so vectors are stable across platforms (std::hash is not)
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string HashedBagEmbedder::id() const {
    return "hashed-bag-" + std::to_string(dim_);
}

std::vector<double> HashedBagEmbedder::embed(const std::vector<seg::Token>& tokens) {
    std::vector<double> values(dim_, 0.0);
    for (const auto& token : tokens) {
        values[hash_token(token.text) % dim_] += 1.0;
    }
    return values;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::size_t dim, std::string api_key_env,
                               int max_retries)
    : endpoint_(std::move(endpoint)), dim_(dim), api_key_env_(std::move(api_key_env)),
      max_retries_(max_retries) {}

std::vector<double> RemoteEmbedder::embed(const std::vector<seg::Token>& tokens) {
    std::string text;
    for (const auto& token : tokens) {
        if (!text.empty()) {
            text.push_back(' ');
        }
        text += token.text;
    }
    std::map<std::string, std::string> headers;
    if (!api_key_env_.empty()) {
        if (const char* key = std::getenv(api_key_env_.c_str())) {
            headers["Authorization"] = std::string("Bearer ") + key;
        }
    }
    json body{{"input", text}};
    std::string payload = body.dump();
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
        }
        auto response = http_post_json(endpoint_, payload, headers);
        if (!response || response->status != 200) {
            continue;
        }
        json doc = json::parse(response->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("embedding") || !doc["embedding"].is_array()) {
            continue;
        }
        std::vector<double> values = doc["embedding"].get<std::vector<double>>();
        if (values.size() != dim_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "remote embedding has dim " + std::to_string(values.size()) +
                            ", expected " + std::to_string(dim_));
        }
        return values;
    }
    throw Error(ErrorCode::BackendUnavailable, "embedding service unreachable: " + endpoint_);
}

namespace {

double l2_norm(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

void normalize_in_place(CodeVector& vec) {
    double n = l2_norm(vec.values);
    if (n > 0.0) {
        for (double& v : vec.values) {
            v /= n;
        }
        vec.norm = 1.0;
    } else {
        vec.norm = 0.0;  // zero vector stays zero, normalization skipped
    }
}

}  // namespace

CodeVector embed_segment(const seg::CodeSegment& segment, EmbedderBackend& backend) {
    if (segment.tokens.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot embed an empty segment");
    }
    CodeVector vec;
    vec.values = backend.embed(segment.tokens);
    for (double v : vec.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::BackendUnavailable, "backend produced a non-finite value");
        }
    }
    vec.source = segment.file + "#" + std::to_string(segment.index);
    normalize_in_place(vec);
    return vec;
}

CodeVector aggregate_vectors(const std::vector<CodeVector>& vectors, AggregateMode mode,
                             std::size_t pad_to) {
    if (vectors.empty()) {
        throw Error(ErrorCode::EmptyInput, "aggregate over zero vectors");
    }
    CodeVector out;
    if (mode == AggregateMode::concat) {
        for (const auto& v : vectors) {
            out.values.insert(out.values.end(), v.values.begin(), v.values.end());
        }
        if (pad_to > out.values.size()) {
            out.values.resize(pad_to, 0.0);
        }
        out.norm = l2_norm(out.values);
        out.source = "concat:" + std::to_string(vectors.size());
        return out;
    }
    std::size_t dim = vectors.front().values.size();
    out.values.assign(dim, 0.0);
    for (const auto& v : vectors) {
        if (v.values.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "aggregate over ragged dimensions");
        }
        for (std::size_t i = 0; i < dim; ++i) {
            out.values[i] += v.values[i];
        }
    }
    for (double& v : out.values) {
        v /= static_cast<double>(vectors.size());
    }
    normalize_in_place(out);
    out.source = "mean:" + std::to_string(vectors.size());
    return out;
}

}  // namespace rulegen::embed
