#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdoc/core.hpp"
#include "sdoc/llm_gateway.hpp"
#include "sdoc/prompt_kit.hpp"

namespace sdoc {

struct ClusterAssignment {
  int k = 0;
  std::vector<EmbeddingVector> centroids;  // exactly k
  std::vector<int> membership;             // point index -> cluster index
  std::uint64_t seed = 0;
};

// Per-cluster lists of few-shot exemplars, optionally style-aligned.
struct ShotPool {
  std::vector<std::vector<Shot>> shots;  // k lists of m shots
  std::optional<SflType> style;
  std::uint64_t seed = 0;
};

// Embedding of "query text + single space + document text", L2-normalized.
// The document is expected to be the query's top-1 retrieval.
EmbeddingVector embed_pair(const Query& query, const Document& document, LlmGateway& gateway,
                           const std::string& model_id);

// Batched variant covering a whole shot-source set in one backend call.
std::vector<EmbeddingVector> embed_pairs(const std::vector<std::pair<Query, Document>>& pairs,
                                         LlmGateway& gateway, const std::string& model_id);

// Seeded k-means++ initialization followed by Lloyd iterations over squared
// Euclidean distance. Ties go to the lowest cluster index; empty clusters
// are repaired by stealing the point farthest from its assigned centroid.
// Stops when the largest centroid movement drops below tol or after
// max_iters. If sse_history is given it receives the within-cluster sum of
// squared distances after each iteration (non-increasing).
ClusterAssignment kmeans(const std::vector<EmbeddingVector>& points, int k, std::uint64_t seed,
                         int max_iters = 100, double tol = 1e-6,
                         std::vector<double>* sse_history = nullptr);

// Draws m pairs uniformly without replacement from each cluster, in draw
// order, using a generator seeded with `seed`.
ShotPool sample_shots(const ClusterAssignment& assignment,
                      const std::vector<std::pair<Query, Document>>& pairs, int m,
                      std::uint64_t seed);

}  // namespace sdoc
