#include "sdoc/embed_cluster.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>

#include "sdoc/error.hpp"

namespace sdoc {

namespace {

// Seeded draws built directly on mt19937_64 output so results do not depend
// on standard-library distribution internals.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t uniform_index(std::mt19937_64& rng, size_t n) {
  return std::min<size_t>(static_cast<size_t>(unit_double(rng) * static_cast<double>(n)), n - 1);
}

double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void validate_points(const std::vector<EmbeddingVector>& points) {
  if (points.empty()) {
    raise(ErrorCode::DegenerateInput, "no points to cluster");
  }
  const size_t dim = points.front().size();
  if (dim == 0) {
    raise(ErrorCode::DegenerateInput, "points have zero dimension");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) {
      raise(ErrorCode::DegenerateInput,
            "point " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
                ", expected " + std::to_string(dim));
    }
    for (double x : points[i]) {
      if (!std::isfinite(x)) {
        raise(ErrorCode::DegenerateInput, "point " + std::to_string(i) + " has a non-finite value");
      }
    }
  }
}

// k-means++: first centroid uniform, the rest drawn proportionally to the
// squared distance from the nearest chosen centroid.
std::vector<EmbeddingVector> plus_plus_init(const std::vector<EmbeddingVector>& points, int k,
                                            std::mt19937_64& rng) {
  const size_t n = points.size();
  std::vector<EmbeddingVector> centroids;
  centroids.reserve(k);
  std::vector<bool> chosen(n, false);

  const size_t first = uniform_index(rng, n);
  centroids.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> dist2(n);
  for (size_t i = 0; i < n; ++i) {
    dist2[i] = squared_distance(points[i], centroids.front());
  }

  while (centroids.size() < static_cast<size_t>(k)) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += dist2[i];
    }
    size_t pick = n;
    if (total > 0.0) {
      const double target = unit_double(rng) * total;
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += dist2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // all remaining mass is zero (duplicate points); take the first
      // unchosen index
      for (size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

int nearest_centroid(const EmbeddingVector& point, const std::vector<EmbeddingVector>& centroids) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_dist) {  // strict: ties keep the lowest cluster index
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

EmbeddingVector embed_pair(const Query& query, const Document& document, LlmGateway& gateway,
                           const std::string& model_id) {
  try {
    return gateway.embed({query.text + " " + document.text}, model_id).front();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw;
    raise(e.code(), std::string(e.what()) + " (query " + query.id + ")");
  }
}

std::vector<EmbeddingVector> embed_pairs(const std::vector<std::pair<Query, Document>>& pairs,
                                         LlmGateway& gateway, const std::string& model_id) {
  if (pairs.empty()) {
    raise(ErrorCode::InvalidArgument, "no pairs to embed");
  }
  std::vector<std::string> texts;
  texts.reserve(pairs.size());
  for (const auto& [query, document] : pairs) {
    texts.push_back(query.text + " " + document.text);
  }
  return gateway.embed(texts, model_id);
}

ClusterAssignment kmeans(const std::vector<EmbeddingVector>& points, int k, std::uint64_t seed,
                         int max_iters, double tol, std::vector<double>* sse_history) {
  validate_points(points);
  const size_t n = points.size();
  if (k < 1 || static_cast<size_t>(k) > n) {
    raise(ErrorCode::KTooLarge,
          "k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const size_t dim = points.front().size();

  std::mt19937_64 rng(seed);
  std::vector<EmbeddingVector> centroids = plus_plus_init(points, k, rng);
  std::vector<int> membership(n, 0);
  double last_sse = std::numeric_limits<double>::infinity();
  if (sse_history) sse_history->clear();

  for (int iter = 0; iter < max_iters; ++iter) {
    for (size_t i = 0; i < n; ++i) {
      membership[i] = nearest_centroid(points[i], centroids);
    }

    // Repair empty clusters by stealing the point farthest from its
    // centroid (most distant first, lowest index on ties).
    std::vector<int> counts(k, 0);
    for (int m : membership) counts[m]++;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      size_t steal = n;
      double worst = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (counts[membership[i]] <= 1) continue;  // do not empty another cluster
        const double d = squared_distance(points[i], centroids[membership[i]]);
        if (d > worst) {
          worst = d;
          steal = i;
        }
      }
      if (steal == n) {
        raise(ErrorCode::DegenerateInput, "cannot repair empty cluster");
      }
      counts[membership[steal]]--;
      membership[steal] = c;
      counts[c]++;
    }

    std::vector<EmbeddingVector> updated(k, EmbeddingVector(dim, 0.0));
    for (size_t i = 0; i < n; ++i) {
      for (size_t d = 0; d < dim; ++d) {
        updated[membership[i]][d] += points[i][d];
      }
    }
    double max_move = 0.0;
    for (int c = 0; c < k; ++c) {
      for (size_t d = 0; d < dim; ++d) {
        updated[c][d] /= counts[c];
      }
      max_move = std::max(max_move, std::sqrt(squared_distance(updated[c], centroids[c])));
    }
    centroids = std::move(updated);

    {
      double sse = 0.0;
      for (size_t i = 0; i < n; ++i) {
        sse += squared_distance(points[i], centroids[membership[i]]);
      }
      assert(sse <= last_sse + 1e-9);
      last_sse = sse;
      if (sse_history) sse_history->push_back(sse);
    }

    if (max_move < tol) {
      // one final assignment pass so every point sits with its nearest
      // centroid under the converged positions; fall back to the previous
      // membership if that pass would empty a cluster
      std::vector<int> final_membership(n);
      std::vector<int> final_counts(k, 0);
      for (size_t i = 0; i < n; ++i) {
        final_membership[i] = nearest_centroid(points[i], centroids);
        final_counts[final_membership[i]]++;
      }
      if (std::find(final_counts.begin(), final_counts.end(), 0) == final_counts.end()) {
        membership = std::move(final_membership);
      }
      break;
    }
  }

  ClusterAssignment assignment;
  assignment.k = k;
  assignment.centroids = std::move(centroids);
  assignment.membership = std::move(membership);
  assignment.seed = seed;
  return assignment;
}

ShotPool sample_shots(const ClusterAssignment& assignment,
                      const std::vector<std::pair<Query, Document>>& pairs, int m,
                      std::uint64_t seed) {
  if (m < 1) {
    raise(ErrorCode::InvalidArgument, "m must be positive");
  }
  if (assignment.membership.size() != pairs.size()) {
    raise(ErrorCode::InvalidArgument, "assignment covers " +
                                          std::to_string(assignment.membership.size()) +
                                          " points but " + std::to_string(pairs.size()) +
                                          " pairs were given");
  }

  std::vector<std::vector<size_t>> members(assignment.k);
  for (size_t i = 0; i < assignment.membership.size(); ++i) {
    members[assignment.membership[i]].push_back(i);
  }
  for (int c = 0; c < assignment.k; ++c) {
    if (members[c].size() < static_cast<size_t>(m)) {
      raise(ErrorCode::ClusterTooSmall, "cluster " + std::to_string(c) + " has " +
                                            std::to_string(members[c].size()) +
                                            " members, need " + std::to_string(m));
    }
  }

  std::mt19937_64 rng(seed);
  ShotPool pool;
  pool.seed = seed;
  pool.shots.resize(assignment.k);
  for (int c = 0; c < assignment.k; ++c) {
    auto& indices = members[c];
    // partial Fisher-Yates: the first m slots are the draws, in draw order
    for (int j = 0; j < m; ++j) {
      const size_t pick = j + uniform_index(rng, indices.size() - j);
      std::swap(indices[j], indices[pick]);
      const auto& [query, document] = pairs[indices[j]];
      pool.shots[c].push_back(Shot{query.id, query.text, document.text});
    }
  }
  return pool;
}

}  // namespace sdoc
