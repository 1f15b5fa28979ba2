#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sdoc/embed_cluster.hpp"
#include "sdoc/error.hpp"
#include "support/test_support.hpp"

using namespace sdoc;
using namespace sdoc::test;

namespace {

double sse_of(const std::vector<EmbeddingVector>& points, const std::vector<int>& membership,
              int k) {
  const size_t dim = points.front().size();
  std::vector<EmbeddingVector> centroids(k, EmbeddingVector(dim, 0.0));
  std::vector<int> counts(k, 0);
  for (size_t i = 0; i < points.size(); ++i) {
    counts[membership[i]]++;
    for (size_t d = 0; d < dim; ++d) centroids[membership[i]][d] += points[i][d];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) return std::numeric_limits<double>::infinity();
    for (size_t d = 0; d < dim; ++d) centroids[c][d] /= counts[c];
  }
  double sse = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t d = 0; d < dim; ++d) {
      const double diff = points[i][d] - centroids[membership[i]][d];
      sse += diff * diff;
    }
  }
  return sse;
}

// Brute force: enumerate every assignment of n points to 2 clusters and keep
// the minimum-SSE partition as a set of sets.
std::set<std::set<size_t>> best_two_partition(const std::vector<EmbeddingVector>& points) {
  const size_t n = points.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_membership;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> membership(n);
    for (size_t i = 0; i < n; ++i) membership[i] = (mask >> i) & 1;
    const double sse = sse_of(points, membership, 2);
    if (sse < best) {
      best = sse;
      best_membership = membership;
    }
  }
  std::set<std::set<size_t>> partition;
  std::set<size_t> zero, one;
  for (size_t i = 0; i < n; ++i) {
    (best_membership[i] == 0 ? zero : one).insert(i);
  }
  partition.insert(zero);
  partition.insert(one);
  return partition;
}

std::set<std::set<size_t>> partition_of(const ClusterAssignment& assignment) {
  std::vector<std::set<size_t>> clusters(assignment.k);
  for (size_t i = 0; i < assignment.membership.size(); ++i) {
    clusters[assignment.membership[i]].insert(i);
  }
  return {clusters.begin(), clusters.end()};
}

std::vector<EmbeddingVector> random_points(std::mt19937_64& rng, size_t n, size_t dim) {
  std::vector<EmbeddingVector> points(n, EmbeddingVector(dim));
  for (auto& p : points) {
    for (auto& x : p) {
      x = static_cast<double>(rng() % 2000) / 100.0 - 10.0;
    }
  }
  return points;
}

}  // namespace

TEST_CASE("k=1 centroid is the mean") {
  const std::vector<EmbeddingVector> points = {{0.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}};
  const auto assignment = kmeans(points, 1, 42);
  REQUIRE(assignment.centroids.size() == 1);
  CHECK(assignment.centroids[0][0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(assignment.centroids[0][1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(assignment.membership == std::vector<int>{0, 0, 0});
}

TEST_CASE("well-separated pairs match the brute-force minimum-SSE partition") {
  const std::vector<EmbeddingVector> points = {{0.0, 0.0}, {0.1, 0.0}, {10.0, 0.0}, {10.1, 0.0}};
  const auto expected = best_two_partition(points);
  for (std::uint64_t seed : {0ull, 1ull, 7ull, 99ull, 12345ull}) {
    const auto assignment = kmeans(points, 2, seed);
    CHECK(partition_of(assignment) == expected);
  }
  CHECK(expected == std::set<std::set<size_t>>{{0, 1}, {2, 3}});
}

TEST_CASE("seeded determinism: same inputs, same result") {
  std::mt19937_64 rng(3);
  const auto points = random_points(rng, 30, 3);
  const auto a = kmeans(points, 4, 17);
  const auto b = kmeans(points, 4, 17);
  CHECK(a.membership == b.membership);
  CHECK(a.centroids == b.centroids);
}

TEST_CASE("k equal to point count gives one point per cluster and zero SSE") {
  std::mt19937_64 rng(5);
  const auto points = random_points(rng, 8, 2);
  const auto assignment = kmeans(points, 8, 11);
  std::set<int> used(assignment.membership.begin(), assignment.membership.end());
  CHECK(used.size() == 8);
  CHECK(sse_of(points, assignment.membership, 8) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("within-cluster SSE is non-increasing across iterations") {
  std::mt19937_64 rng(2024);
  for (int instance = 0; instance < 100; ++instance) {
    const size_t n = 4 + rng() % 17;
    const size_t dim = 2 + rng() % 3;
    const int k = 1 + static_cast<int>(rng() % std::min<size_t>(5, n));
    const auto points = random_points(rng, n, dim);
    std::vector<double> history;
    kmeans(points, k, rng(), 100, 1e-6, &history);
    for (size_t i = 1; i < history.size(); ++i) {
      CHECK(history[i] <= history[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("partition is invariant to input order on the separated instance") {
  const std::vector<EmbeddingVector> points = {{0.0, 0.0}, {0.1, 0.0}, {10.0, 0.0}, {10.1, 0.0}};
  const std::vector<EmbeddingVector> shuffled = {{10.1, 0.0}, {0.0, 0.0}, {10.0, 0.0}, {0.1, 0.0}};
  auto canonical = [&](const ClusterAssignment& assignment,
                       const std::vector<EmbeddingVector>& pts) {
    std::set<std::set<std::pair<double, double>>> out;
    std::vector<std::set<std::pair<double, double>>> clusters(assignment.k);
    for (size_t i = 0; i < pts.size(); ++i) {
      clusters[assignment.membership[i]].insert({pts[i][0], pts[i][1]});
    }
    return std::set<std::set<std::pair<double, double>>>(clusters.begin(), clusters.end());
  };
  CHECK(canonical(kmeans(points, 2, 9), points) == canonical(kmeans(shuffled, 2, 9), shuffled));
}

TEST_CASE("kmeans rejects bad inputs") {
  CHECK(error_code_of([] { kmeans({{1.0}, {2.0}}, 3, 0); }) == ErrorCode::KTooLarge);
  CHECK(error_code_of([] { kmeans({{1.0}, {2.0}}, 0, 0); }) == ErrorCode::KTooLarge);
  CHECK(error_code_of([] {
          kmeans({{1.0}, {std::numeric_limits<double>::quiet_NaN()}}, 1, 0);
        }) == ErrorCode::DegenerateInput);
  CHECK(error_code_of([] { kmeans({{1.0}, {1.0, 2.0}}, 1, 0); }) == ErrorCode::DegenerateInput);
}

namespace {

std::vector<std::pair<Query, Document>> make_pairs(size_t n) {
  std::vector<std::pair<Query, Document>> pairs;
  for (size_t i = 0; i < n; ++i) {
    Query query{"q" + std::to_string(i), "question " + std::to_string(i), Task::OpenDomainQA};
    Document doc;
    doc.id = "d" + std::to_string(i);
    doc.text = "document " + std::to_string(i);
    doc.doc_type = DocType::wiki();
    doc.source = DocSource::Retrieved;
    doc.rank = 1;
    pairs.emplace_back(std::move(query), std::move(doc));
  }
  return pairs;
}

// Two tight blobs of five points each.
ClusterAssignment two_blob_assignment(std::vector<EmbeddingVector>* points_out = nullptr) {
  std::vector<EmbeddingVector> points;
  for (int i = 0; i < 10; ++i) {
    const double base = i < 5 ? 0.0 : 100.0;
    points.push_back({base + i * 0.001, 0.0});
  }
  if (points_out) *points_out = points;
  return kmeans(points, 2, 1);
}

}  // namespace

TEST_CASE("sample_shots draws m per cluster in seeded draw order") {
  const auto assignment = two_blob_assignment();
  const auto pairs = make_pairs(10);

  const ShotPool pool = sample_shots(assignment, pairs, 3, 7);
  REQUIRE(pool.shots.size() == 2);
  for (const auto& list : pool.shots) {
    CHECK(list.size() == 3);
  }
  CHECK(!pool.style.has_value());

  // every sampled shot belongs to the claimed cluster
  for (int c = 0; c < 2; ++c) {
    for (const auto& shot : pool.shots[c]) {
      const size_t index = std::stoul(shot.query_id.substr(1));
      CHECK(assignment.membership[index] == c);
    }
  }

  const ShotPool again = sample_shots(assignment, pairs, 3, 7);
  CHECK(pool.shots == again.shots);
}

TEST_CASE("sampling a full cluster yields a seeded permutation of it") {
  const auto assignment = two_blob_assignment();
  const auto pairs = make_pairs(10);
  const ShotPool pool = sample_shots(assignment, pairs, 5, 3);
  for (int c = 0; c < 2; ++c) {
    std::set<std::string> sampled;
    for (const auto& shot : pool.shots[c]) sampled.insert(shot.query_id);
    CHECK(sampled.size() == 5);
  }
}

TEST_CASE("m=1 with k=3 gives three singleton lists from distinct clusters") {
  std::vector<EmbeddingVector> points = {{0.0, 0.0}, {50.0, 0.0}, {100.0, 0.0}};
  const auto assignment = kmeans(points, 3, 0);
  const auto pairs = make_pairs(3);
  const ShotPool pool = sample_shots(assignment, pairs, 1, 0);
  REQUIRE(pool.shots.size() == 3);
  std::set<std::string> seen;
  for (const auto& list : pool.shots) {
    REQUIRE(list.size() == 1);
    seen.insert(list[0].query_id);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("undersized clusters are reported by index") {
  const auto assignment = two_blob_assignment();
  const auto pairs = make_pairs(10);
  CHECK(error_code_of([&] { sample_shots(assignment, pairs, 6, 0); }) ==
        ErrorCode::ClusterTooSmall);
}

TEST_CASE("embed_pair normalizes and joins with a single space") {
  FakeGateway fake(make_temp_dir("ec-embed"));
  const auto pairs = make_pairs(1);
  const auto v = embed_pair(pairs[0].first, pairs[0].second, fake.gateway, "em");
  double norm = 0.0;
  for (double x : v) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(fake.backend->embed_log.size() == 1);
  CHECK(fake.backend->embed_log[0] == "question 0 document 0");
}

TEST_CASE("replayed embeddings are deterministic") {
  const auto dir = make_temp_dir("ec-det");
  const auto pairs = make_pairs(1);
  EmbeddingVector first, second;
  {
    FakeGateway fake(dir / "c1");
    first = embed_pair(pairs[0].first, pairs[0].second, fake.gateway, "em");
  }
  {
    FakeGateway fake(dir / "c2");
    second = embed_pair(pairs[0].first, pairs[0].second, fake.gateway, "em");
  }
  CHECK(first == second);
}

TEST_CASE("distinct documents mean distinct cache keys and backend calls") {
  FakeGateway fake(make_temp_dir("ec-keys"));
  auto pairs = make_pairs(2);
  pairs[1].first = pairs[0].first;  // same query, different document
  embed_pair(pairs[0].first, pairs[0].second, fake.gateway, "em");
  embed_pair(pairs[1].first, pairs[1].second, fake.gateway, "em");
  CHECK(fake.backend->embed_log.size() == 2);
  CHECK(fake.gateway.stats().embed_backend_texts == 2);
  CHECK(embed_cache_key("em", "question 0 document 0") !=
        embed_cache_key("em", "question 0 document 1"));
}
