#include "nvq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvq/parallel.hpp"
#include "nvq/quantizer.hpp"

namespace nvq {

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return s;
}

// Dequantized permuted-centered values of one encoded vector, into scratch.
void decode_permuted(const EncodedVector& ev, const DatasetMeta& meta,
                     std::vector<float>& out) {
    const std::uint32_t L = meta.sub_len();
    thread_local std::vector<std::uint8_t> codes;
    codes.resize(meta.d);
    std::vector<std::uint8_t> unpacked = unpack_codes(ev.codes);
    out.resize(meta.d);
    for (std::uint16_t j = 0; j < meta.m; ++j) {
        const SubvectorInfo& sub = ev.subs[j];
        float* dst = out.data() + j * L;
        if (sub.interval.degenerate()) {
            std::fill_n(dst, L, sub.interval.x_min);
            continue;
        }
        Params qp = sub.fell_back ? Params{Family::uniform, 0.0f, 0.0f}
                                  : sub.params;
        kernels::PreparedQuantizer prep =
            kernels::prepare(qp, sub.interval, meta.beta);
        kernels::kernel_ops(prep).dequantize(prep, unpacked.data() + j * L, L, dst);
    }
}

QueryResult top_k(std::vector<std::pair<double, std::uint32_t>>& scored, int k) {
    auto better = [](const std::pair<double, std::uint32_t>& a,
                     const std::pair<double, std::uint32_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
    QueryResult r;
    r.ids.reserve(k);
    r.scores.reserve(k);
    for (int i = 0; i < k; ++i) {
        r.scores.push_back(scored[i].first);
        r.ids.push_back(scored[i].second);
    }
    return r;
}

}  // namespace

PreparedQuery prepare_query(std::span<const float> q, const DatasetMeta& meta) {
    if (q.size() != meta.d) {
        throw std::invalid_argument("prepare_query: dimension mismatch");
    }
    PreparedQuery pq;
    pq.permuted.resize(meta.d);
    double md = 0.0;
    for (std::uint32_t i = 0; i < meta.d; ++i) {
        pq.permuted[i] = q[meta.permutation[i]];
    }
    for (std::uint32_t i = 0; i < meta.d; ++i) {
        md += static_cast<double>(q[i]) * static_cast<double>(meta.mean[i]);
    }
    pq.mean_dot = md;
    return pq;
}

double quantized_dot(const PreparedQuery& pq, const EncodedVector& ev,
                     const DatasetMeta& meta) {
    thread_local std::vector<float> decoded;
    decode_permuted(ev, meta, decoded);
    return dot(pq.permuted, decoded) + pq.mean_dot;
}

double quantized_dot(std::span<const float> q, const EncodedVector& ev,
                     const DatasetMeta& meta) {
    return quantized_dot(prepare_query(q, meta), ev, meta);
}

std::vector<QueryResult> exact_knn(const FloatMatrix& queries,
                                   const FloatMatrix& data, int k,
                                   int threads) {
    if (k < 1 || static_cast<std::size_t>(k) > data.rows()) {
        throw std::invalid_argument("exact_knn: k out of range");
    }
    if (queries.d != data.d) {
        throw std::invalid_argument("exact_knn: dimension mismatch");
    }
    std::vector<QueryResult> results(queries.rows());
    parallel_for(queries.rows(), threads, [&](std::size_t qi) {
        std::vector<std::pair<double, std::uint32_t>> scored(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) {
            scored[i] = {dot(queries.row(qi), data.row(i)),
                         static_cast<std::uint32_t>(i)};
        }
        results[qi] = top_k(scored, k);
    });
    return results;
}

std::vector<QueryResult> quantized_knn(const FloatMatrix& queries,
                                       const EncodedDataset& enc, int k,
                                       int threads) {
    if (k < 1 || static_cast<std::size_t>(k) > enc.vectors.size()) {
        throw std::invalid_argument("quantized_knn: k out of range");
    }
    std::vector<QueryResult> results(queries.rows());
    parallel_for(queries.rows(), threads, [&](std::size_t qi) {
        PreparedQuery pq = prepare_query(queries.row(qi), enc.meta);
        std::vector<std::pair<double, std::uint32_t>> scored(enc.vectors.size());
        for (std::size_t i = 0; i < enc.vectors.size(); ++i) {
            scored[i] = {quantized_dot(pq, enc.vectors[i], enc.meta),
                         static_cast<std::uint32_t>(i)};
        }
        results[qi] = top_k(scored, k);
    });
    return results;
}

double recall_at_k(std::span<const QueryResult> ground,
                   std::span<const QueryResult> approx, int k) {
    if (ground.size() != approx.size() || ground.empty()) {
        throw std::invalid_argument("recall_at_k: result sets do not match");
    }
    double total = 0.0;
    for (std::size_t q = 0; q < ground.size(); ++q) {
        std::vector<std::uint32_t> g(ground[q].ids.begin(),
                                     ground[q].ids.begin() + k);
        std::sort(g.begin(), g.end());
        int hits = 0;
        for (int i = 0; i < k; ++i) {
            if (std::binary_search(g.begin(), g.end(), approx[q].ids[i])) ++hits;
        }
        total += static_cast<double>(hits) / k;
    }
    return total / static_cast<double>(ground.size());
}

double map_at_k(std::span<const QueryResult> ground,
                std::span<const QueryResult> approx, int k) {
    if (ground.size() != approx.size() || ground.empty()) {
        throw std::invalid_argument("map_at_k: result sets do not match");
    }
    double total = 0.0;
    for (std::size_t q = 0; q < ground.size(); ++q) {
        std::vector<std::uint32_t> g(ground[q].ids.begin(),
                                     ground[q].ids.begin() + k);
        std::sort(g.begin(), g.end());
        int hits = 0;
        double ap = 0.0;
        for (int i = 0; i < k; ++i) {
            if (std::binary_search(g.begin(), g.end(), approx[q].ids[i])) {
                ++hits;
                ap += static_cast<double>(hits) / (i + 1);  // precision@i+1
            }
        }
        total += ap / k;
    }
    return total / static_cast<double>(ground.size());
}

MetricsReport error_stats(const FloatMatrix& raw, const EncodedDataset& enc,
                          const FloatMatrix& queries, int k, int threads) {
    const DatasetMeta& meta = enc.meta;
    if (raw.d != meta.d || raw.rows() != enc.vectors.size()) {
        throw std::invalid_argument("error_stats: raw/encoded datasets do not match");
    }
    MetricsReport rep;
    rep.n = raw.rows();
    rep.d = raw.d;
    rep.family = meta.family;
    rep.beta = meta.beta;
    rep.m = meta.m;
    rep.k = k;

    const std::uint32_t L = meta.sub_len();
    std::vector<double> recon_err(raw.rows());
    std::vector<double> objective(raw.rows());
    std::vector<std::size_t> fallbacks(raw.rows(), 0);
    parallel_for(raw.rows(), threads, [&](std::size_t i) {
        const EncodedVector& ev = enc.vectors[i];
        std::vector<float> x = decode_vector(ev, meta);
        double err = 0.0;
        for (std::uint32_t j = 0; j < meta.d; ++j) {
            double e = static_cast<double>(raw.row_ptr(i)[j]) -
                       static_cast<double>(x[j]);
            err += e * e;
        }
        recon_err[i] = err;

        // Vector-level improvement ratio from the stored representation.
        std::vector<float> centered(meta.d);
        for (std::uint32_t j = 0; j < meta.d; ++j) {
            centered[j] = raw.row_ptr(i)[meta.permutation[j]] -
                          meta.mean[meta.permutation[j]];
        }
        double unif_total = 0.0, nvq_total = 0.0;
        for (std::uint16_t s = 0; s < meta.m; ++s) {
            const SubvectorInfo& sub = ev.subs[s];
            std::span<const float> slice(centered.data() + s * L, L);
            if (sub.interval.degenerate()) continue;
            double unif = recon_loss(
                kernels::prepare({Family::uniform, 0, 0}, sub.interval, meta.beta),
                slice);
            double nvq = sub.fell_back
                             ? unif
                             : recon_loss(kernels::prepare(sub.params, sub.interval,
                                                           meta.beta),
                                          slice);
            unif_total += unif;
            nvq_total += nvq;
            if (sub.fell_back) ++fallbacks[i];
        }
        objective[i] = nvq_total > 0.0 ? unif_total / nvq_total : 1.0;
    });
    rep.mean_recon_error =
        std::accumulate(recon_err.begin(), recon_err.end(), 0.0) / raw.rows();
    rep.mean_objective =
        std::accumulate(objective.begin(), objective.end(), 0.0) / raw.rows();
    rep.fallback_fraction =
        static_cast<double>(std::accumulate(fallbacks.begin(), fallbacks.end(),
                                            std::size_t{0})) /
        (static_cast<double>(raw.rows()) * meta.m);

    if (queries.rows() > 0) {
        std::vector<double> dot_err(queries.rows());
        parallel_for(queries.rows(), threads, [&](std::size_t qi) {
            PreparedQuery pq = prepare_query(queries.row(qi), meta);
            double acc = 0.0;
            for (std::size_t i = 0; i < raw.rows(); ++i) {
                double exact = dot(queries.row(qi), raw.row(i));
                double approx = quantized_dot(pq, enc.vectors[i], meta);
                double e = exact - approx;
                acc += e * e;
            }
            dot_err[qi] = acc;
        });
        rep.mean_dot_error =
            std::accumulate(dot_err.begin(), dot_err.end(), 0.0) / queries.rows();

        std::vector<QueryResult> ground = exact_knn(queries, raw, k, threads);
        std::vector<QueryResult> approx = quantized_knn(queries, enc, k, threads);
        rep.recall = recall_at_k(ground, approx, k);
        rep.map = map_at_k(ground, approx, k);
    }
    return rep;
}

}  // namespace nvq
