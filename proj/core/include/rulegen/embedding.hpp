// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rulegen/segmenter.hpp"
#include "rulegen/util.hpp"

namespace rulegen::embed {

struct CodeVector {
    std::vector<double> values;
    double norm = 0.0;   // Euclidean length of `values` as stored
    std::string source;  // "<file>#<segment index>" or an aggregate tag
};

double euclidean_distance(const CodeVector& a, const CodeVector& b);
double cosine_similarity(const CodeVector& a, const CodeVector& b);

class EmbedderBackend {
  public:
    virtual ~EmbedderBackend() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string id() const = 0;
    /// Raw (not yet normalized) vector for one code segment.
    virtual std::vector<double> embed(const std::vector<seg::Token>& tokens) = 0;
};

/// Deterministic local backend: every token is hashed (FNV-1a 64) into one of
/// `dim` buckets and counts accumulate.
class HashedBagEmbedder final : public EmbedderBackend {
  public:
    explicit HashedBagEmbedder(std::size_t dim = 256) : dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    std::vector<double> embed(const std::vector<seg::Token>& tokens) override;

    static std::uint64_t hash_token(std::string_view text);

  private:
    std::size_t dim_;
};

/// HTTP embedding service: POST {"input": "<text>"} -> {"embedding": [floats]}.
/// The API key is read from the named environment variable, never from config.
class RemoteEmbedder final : public EmbedderBackend {
  public:
    RemoteEmbedder(std::string endpoint, std::size_t dim, std::string api_key_env = "",
                   int max_retries = 3);
    std::size_t dim() const override { return dim_; }
    std::string id() const override { return "remote:" + endpoint_; }
    std::vector<double> embed(const std::vector<seg::Token>& tokens) override;

  private:
    std::string endpoint_;
    std::size_t dim_;
    std::string api_key_env_;
    int max_retries_;
};

/// Deterministic per backend+input; output is L2-normalized. Throws
/// Error{EmptyInput} for an empty segment and Error{BackendUnavailable} when
/// the remote service cannot be reached.
CodeVector embed_segment(const seg::CodeSegment& segment, EmbedderBackend& backend);

enum class AggregateMode { mean, concat };

/// mean: element-wise mean, re-normalized (a zero vector is kept with norm 0).
/// concat: paper-literal concatenation in input order, zero-padded to `pad_to`
/// when that exceeds the concatenated length. Throws Error{DimensionMismatch}
/// on ragged inputs in mean mode and Error{EmptyInput} for an empty list.
CodeVector aggregate_vectors(const std::vector<CodeVector>& vectors,
                             AggregateMode mode = AggregateMode::mean, std::size_t pad_to = 0);

}  // namespace rulegen::embed
