#pragma once

// Similarity computation on compressed vectors and the retrieval /
// reconstruction quality metrics.

#include <cstdint>
#include <span>
#include <vector>

#include "nvq/codec.hpp"
#include "nvq/types.hpp"

namespace nvq {

struct QueryResult {
    std::vector<std::uint32_t> ids;  // distinct, best first
    std::vector<double> scores;      // descending dot products
};

// Query-side state reused across a scan: the permuted query slice per
// subvector and the <q, mean> centering term.
struct PreparedQuery {
    std::vector<float> permuted;  // q[perm[i]]
    double mean_dot = 0.0;
};
PreparedQuery prepare_query(std::span<const float> q, const DatasetMeta& meta);

// <q, x~> by dequantize-and-accumulate, without materializing the decoded
// vector on the caller side. Equals dot(q, decode_vector(ev)) within float
// accumulation noise.
double quantized_dot(const PreparedQuery& pq, const EncodedVector& ev,
                     const DatasetMeta& meta);
double quantized_dot(std::span<const float> q, const EncodedVector& ev,
                     const DatasetMeta& meta);

// Exhaustive full-precision top-k by dot product; ties break toward the
// smaller id. Throws if k exceeds the collection size.
std::vector<QueryResult> exact_knn(const FloatMatrix& queries,
                                   const FloatMatrix& data, int k,
                                   int threads = 1);

// Full-scan top-k over the compressed collection via quantized_dot.
std::vector<QueryResult> quantized_knn(const FloatMatrix& queries,
                                       const EncodedDataset& enc, int k,
                                       int threads = 1);

// |exact top-k  intersect  approx top-k| / k, averaged over queries.
double recall_at_k(std::span<const QueryResult> ground,
                   std::span<const QueryResult> approx, int k);

// Mean average precision at k: relevant set = exact top-k ids, average
// precision over the approximate ranking truncated at k.
double map_at_k(std::span<const QueryResult> ground,
                std::span<const QueryResult> approx, int k);

struct MetricsReport {
    std::size_t n = 0;
    std::uint32_t d = 0;
    Family family = Family::uniform;
    int beta = 8;
    int m = 1;
    int k = 10;
    double mean_recon_error = 0.0;  // mean ||x - x~||^2
    double mean_dot_error = 0.0;    // mean over queries of sum_x (<q,x>-<q,x~>)^2
    double mean_objective = 1.0;    // mean vector-level uniform/nvq loss ratio
    double fallback_fraction = 0.0;
    double recall = 0.0;
    double map = 0.0;
};

MetricsReport error_stats(const FloatMatrix& raw, const EncodedDataset& enc,
                          const FloatMatrix& queries, int k, int threads = 1);

}  // namespace nvq
