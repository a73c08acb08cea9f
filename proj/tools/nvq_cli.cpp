// Command-line front end: compress/decompress vector datasets, evaluate
// reconstruction and retrieval quality, benchmark the kernels and generate
// synthetic data.

#include <CLI11.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "nvq/codec.hpp"
#include "nvq/eval.hpp"
#include "nvq/io.hpp"
#include "nvq/kernels.hpp"
#include "nvq/synth.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;

struct CommonOpts {
    std::string input, output;
    std::vector<std::string> families{"loglog"};
    std::vector<int> bits{8};
    std::vector<int> subvectors{1};
    std::uint64_t seed = 0;
    int k = 10;
    std::string queries;       // fvecs path
    int query_count = 0;       // synthesize this many queries when no path
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    int max_iters = 100;
    double tol = 1e-4;
    bool exact_math = false;
    std::string isa = "auto";
};

void apply_isa(const std::string& isa) {
    if (isa == "auto") return;
    if (isa == "scalar") {
        nvq::kernels::set_isa(nvq::kernels::Isa::scalar);
    } else if (isa == "avx2") {
        nvq::kernels::set_isa(nvq::kernels::Isa::avx2);
    } else {
        throw nvq::ConfigError("unknown --isa value: " + isa);
    }
}

nvq::EncodeConfig make_encode_config(const CommonOpts& o, nvq::Family family,
                                     int beta, int m) {
    nvq::EncodeConfig cfg;
    cfg.family = family;
    cfg.beta = beta;
    cfg.m = static_cast<std::uint16_t>(m);
    cfg.seed = o.seed;
    cfg.threads = std::max(1, o.threads);
    cfg.mode = o.exact_math ? nvq::kernels::MathMode::exact
                            : nvq::kernels::MathMode::fast;
    cfg.hp = nvq::default_hyperparams(2);
    cfg.hp.max_iters = o.max_iters;
    cfg.hp.tol = o.tol;
    return cfg;
}

int cmd_compress(const CommonOpts& o) {
    nvq::FloatMatrix data = nvq::read_fvecs(o.input);
    if (data.rows() == 0) throw nvq::ConfigError("input dataset is empty");
    nvq::EncodeConfig cfg = make_encode_config(
        o, nvq::family_from_name(o.families.at(0)), o.bits.at(0),
        o.subvectors.at(0));
    nvq::FitAggregate agg;
    auto t0 = std::chrono::steady_clock::now();
    nvq::EncodedDataset enc = nvq::encode_dataset(data, cfg, &agg);
    auto t1 = std::chrono::steady_clock::now();
    nvq::write_nvq_file(o.output, enc);

    const double raw_bytes =
        static_cast<double>(data.rows()) * (4.0 + 4.0 * data.d);
    const double nvq_bytes = static_cast<double>(
        nvq::nvq_file_size(data.d, data.rows(), cfg.m, cfg.beta));
    std::printf("vectors:            %zu\n", data.rows());
    std::printf("dimensions:         %u\n", data.d);
    std::printf("family:             %s\n", nvq::family_name(cfg.family));
    std::printf("bits:               %d\n", cfg.beta);
    std::printf("subvectors:         %u\n", cfg.m);
    std::printf("mean objective:     %.4f\n", agg.mean_objective());
    std::printf("fallback fraction:  %.4f\n", agg.fallback_fraction());
    std::printf("compression ratio:  %.2fx (%.0f B -> %.0f B vs raw fvecs)\n",
                raw_bytes / nvq_bytes, raw_bytes, nvq_bytes);
    std::printf("encode time:        %.2f s\n",
                std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

int cmd_decompress(const CommonOpts& o) {
    nvq::EncodedDataset enc = nvq::read_nvq_file(o.input);
    nvq::FloatMatrix out = nvq::decode_dataset(enc, std::max(1, o.threads));
    nvq::write_fvecs(o.output, out);
    std::printf("decoded %zu vectors of dimension %u\n", out.rows(), out.d);
    return 0;
}

nvq::FloatMatrix load_or_make_queries(const CommonOpts& o, std::uint32_t d) {
    if (!o.queries.empty()) {
        nvq::FloatMatrix q = nvq::read_fvecs(o.queries);
        if (q.rows() > 0 && q.d != d) {
            throw nvq::ConfigError("query dimension does not match dataset");
        }
        return q;
    }
    int count = o.query_count > 0 ? o.query_count : 0;
    return nvq::synth_dataset(count, d, nvq::mix_seed(o.seed, 0x9e55));
}

void write_csv_row(std::FILE* out, const nvq::MetricsReport& r) {
    std::fprintf(out, "%s,%d,%d,%zu,%u,%d,%.6f,%.4f,%.8g,%.8g,%.6f,%.6f\n",
                 nvq::family_name(r.family), r.beta, r.m, r.n, r.d, r.k,
                 r.mean_objective, r.fallback_fraction, r.mean_recon_error,
                 r.mean_dot_error, r.recall, r.map);
}

int cmd_eval(const CommonOpts& o, const std::string& compressed) {
    nvq::FloatMatrix raw = nvq::read_fvecs(o.input);
    if (raw.rows() == 0) throw nvq::ConfigError("input dataset is empty");
    nvq::FloatMatrix queries = load_or_make_queries(o, raw.d);

    std::FILE* out = stdout;
    if (!o.output.empty()) {
        out = std::fopen(o.output.c_str(), "w");
        if (!out) throw nvq::IoError("cannot open " + o.output + " for writing");
    }
    std::fprintf(out,
                 "family,beta,m,n,d,k,mean_objective,fallback_fraction,"
                 "mean_recon_mse,mean_dot_error,recall_at_k,map_at_k\n");

    int threads = std::max(1, o.threads);
    if (!compressed.empty()) {
        nvq::EncodedDataset enc = nvq::read_nvq_file(compressed);
        if (enc.meta.d != raw.d || enc.vectors.size() != raw.rows()) {
            throw nvq::ConfigError("compressed dataset does not match raw input");
        }
        write_csv_row(out, nvq::error_stats(raw, enc, queries, o.k, threads));
    } else {
        for (const std::string& fam : o.families) {
            for (int beta : o.bits) {
                for (int m : o.subvectors) {
                    nvq::EncodeConfig cfg = make_encode_config(
                        o, nvq::family_from_name(fam), beta, m);
                    nvq::EncodedDataset enc = nvq::encode_dataset(raw, cfg);
                    write_csv_row(out,
                                  nvq::error_stats(raw, enc, queries, o.k, threads));
                    std::fflush(out);
                }
            }
        }
    }
    if (out != stdout) std::fclose(out);
    return 0;
}

// Per-value operation counts of the fast kernels (exp/log, fused
// multiply-adds, multiplies, divides), for interpreting the timings.
struct OpCounts {
    int exp, log, fma, mul, div;
};
struct FamilyCosts {
    const char* name;
    OpCounts encode, decode;
};
constexpr FamilyCosts kCosts[] = {
    {"kumaraswamy", {2, 2, 18, 8, 0}, {2, 2, 18, 8, 0}},
    {"loglog", {1, 0, 6, 2, 1}, {0, 1, 7, 2, 1}},
    {"nqt", {0, 0, 2, 0, 1}, {0, 0, 2, 0, 1}},
};

struct BenchResult {
    double encode_vps = 0.0;
    double decode_vps = 0.0;
};

BenchResult bench_family(nvq::Family family, std::size_t total_values) {
    const std::size_t block = 4096;
    std::mt19937_64 engine(42);
    std::vector<float> values(block);
    for (float& v : values) {
        v = static_cast<float>((engine() >> 11) * 0x1.0p-53 * 2.0 - 1.0);
    }
    nvq::Interval iv{-1.0f, 1.0f};
    nvq::Params params{family, 0.0f, 0.0f};
    if (family == nvq::Family::kumaraswamy) params = {family, 1.7f, 2.3f};
    if (family == nvq::Family::loglog || family == nvq::Family::nqt) {
        params = {family, 9.0f, 0.0f};
    }
    nvq::kernels::PreparedQuantizer prep = nvq::kernels::prepare(params, iv, 8);
    const nvq::kernels::KernelOps& ops = nvq::kernels::kernel_ops(prep);

    std::vector<std::uint8_t> codes(block);
    std::vector<float> decoded(block);
    const std::size_t reps = std::max<std::size_t>(1, total_values / block);
    const std::size_t warmup = std::max<std::size_t>(1, reps / 20);

    for (std::size_t r = 0; r < warmup; ++r) {
        ops.quantize(prep, values.data(), block, codes.data());
    }
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
        ops.quantize(prep, values.data(), block, codes.data());
    }
    auto t1 = std::chrono::steady_clock::now();

    for (std::size_t r = 0; r < warmup; ++r) {
        ops.dequantize(prep, codes.data(), block, decoded.data());
    }
    auto t2 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
        ops.dequantize(prep, codes.data(), block, decoded.data());
    }
    auto t3 = std::chrono::steady_clock::now();

    // Keep the results alive so the loops cannot be elided.
    volatile float sink = decoded[0] + static_cast<float>(codes[block - 1]);
    (void)sink;

    BenchResult res;
    double n = static_cast<double>(reps) * block;
    res.encode_vps = n / std::chrono::duration<double>(t1 - t0).count();
    res.decode_vps = n / std::chrono::duration<double>(t3 - t2).count();
    return res;
}

int cmd_bench(const CommonOpts& o, std::size_t count) {
    std::printf("isa: %s\n",
                nvq::kernels::active_isa() == nvq::kernels::Isa::avx2 ? "avx2"
                                                                      : "scalar");
    std::printf("%-12s %16s %16s\n", "family", "encode (v/s)", "decode (v/s)");
    std::vector<std::pair<std::string, BenchResult>> rows;
    for (const std::string& fam : o.families) {
        nvq::Family family = nvq::family_from_name(fam);
        BenchResult r = bench_family(family, count);
        rows.emplace_back(fam, r);
        std::printf("%-12s %16.3e %16.3e\n", fam.c_str(), r.encode_vps,
                    r.decode_vps);
    }
    std::printf("\nper-value operation counts (fast lane):\n");
    std::printf("%-12s %24s %24s\n", "family", "encode e/l/fma/mul/div",
                "decode e/l/fma/mul/div");
    for (const FamilyCosts& c : kCosts) {
        std::printf("%-12s %11d/%d/%d/%d/%d %17d/%d/%d/%d/%d\n", c.name,
                    c.encode.exp, c.encode.log, c.encode.fma, c.encode.mul,
                    c.encode.div, c.decode.exp, c.decode.log, c.decode.fma,
                    c.decode.mul, c.decode.div);
    }
    return 0;
}

int cmd_synth(const CommonOpts& o, std::size_t count, std::uint32_t dim) {
    nvq::FloatMatrix data = nvq::synth_dataset(count, dim, o.seed);
    nvq::write_fvecs(o.output, data);
    std::printf("wrote %zu synthetic vectors of dimension %u to %s\n",
                data.rows(), data.d, o.output.c_str());
    return 0;
}

int cmd_inspect(const CommonOpts& o) {
    nvq::EncodedDataset enc = nvq::read_nvq_file(o.input);
    const nvq::DatasetMeta& meta = enc.meta;
    std::size_t fallbacks = 0;
    double p1_min = 1e30, p1_max = -1e30, p2_min = 1e30, p2_max = -1e30;
    for (const nvq::EncodedVector& ev : enc.vectors) {
        for (const nvq::SubvectorInfo& sub : ev.subs) {
            if (sub.fell_back) {
                ++fallbacks;
                continue;
            }
            p1_min = std::min(p1_min, static_cast<double>(sub.params.p1));
            p1_max = std::max(p1_max, static_cast<double>(sub.params.p1));
            p2_min = std::min(p2_min, static_cast<double>(sub.params.p2));
            p2_max = std::max(p2_max, static_cast<double>(sub.params.p2));
        }
    }
    std::printf("container:         %s\n", o.input.c_str());
    std::printf("vectors:           %" PRIu64 "\n", meta.n);
    std::printf("dimensions:        %u\n", meta.d);
    std::printf("subvectors:        %u\n", meta.m);
    std::printf("bits:              %u\n", meta.beta);
    std::printf("family:            %s\n", nvq::family_name(meta.family));
    std::printf("partition seed:    %" PRIu64 "\n", meta.partition_seed);
    std::printf("file size:         %" PRIu64 " B\n",
                nvq::nvq_file_size(meta.d, meta.n, meta.m, meta.beta));
    std::printf("fallback fraction: %.4f\n",
                meta.n ? static_cast<double>(fallbacks) /
                             (static_cast<double>(meta.n) * meta.m)
                       : 0.0);
    if (fallbacks < meta.n * meta.m) {
        std::printf("p1 range:          [%g, %g]\n", p1_min, p1_max);
        std::printf("p2 range:          [%g, %g]\n", p2_min, p2_max);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-vector learned non-uniform scalar quantization of "
                 "embedding vectors"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonOpts o;
    std::string compressed;
    std::size_t synth_count = 1000;
    std::uint32_t synth_dim = 768;
    std::size_t bench_count = 50'000'000;

    auto add_common = [&](CLI::App* cmd, bool with_fit) {
        cmd->add_option("--seed", o.seed, "RNG seed");
        cmd->add_option("--threads", o.threads, "worker thread cap");
        if (with_fit) {
            cmd->add_option("--family", o.families,
                            "nonlinearity family (repeatable for eval sweeps)")
                ->check(CLI::IsMember(
                    {"uniform", "kumaraswamy", "loglog", "nqt"}));
            cmd->add_option("--bits", o.bits, "code width (repeatable)")
                ->check(CLI::IsMember({4, 8}));
            cmd->add_option("--subvectors", o.subvectors,
                            "subvector count (repeatable)")
                ->check(CLI::IsMember({1, 2, 4, 8}));
            cmd->add_option("--max-iters", o.max_iters, "fit iteration cap");
            cmd->add_option("--tol", o.tol, "fit stopping tolerance");
            cmd->add_flag("--exact-math", o.exact_math,
                          "use exact transcendentals instead of the fast kernels");
        }
        cmd->add_option("--isa", o.isa, "kernel instruction set")
            ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    };

    CLI::App* compress = app.add_subcommand("compress", "fvecs -> NVQ1 container");
    compress->add_option("--input", o.input, "input fvecs")->required();
    compress->add_option("--output", o.output, "output container")->required();
    add_common(compress, true);

    CLI::App* decompress =
        app.add_subcommand("decompress", "NVQ1 container -> fvecs");
    decompress->add_option("--input", o.input, "input container")->required();
    decompress->add_option("--output", o.output, "output fvecs")->required();
    add_common(decompress, false);

    CLI::App* eval = app.add_subcommand(
        "eval", "reconstruction/retrieval metrics as CSV (sweeps the "
                "family/bits/subvectors grid, or evaluates --compressed)");
    eval->add_option("--input", o.input, "raw fvecs dataset")->required();
    eval->add_option("--output", o.output, "CSV output path (default stdout)");
    eval->add_option("--compressed", compressed, "existing NVQ1 container");
    eval->add_option("--queries", o.queries, "query fvecs");
    eval->add_option("--query-count", o.query_count,
                     "synthesize this many queries when --queries is absent");
    eval->add_option("--k", o.k, "neighbors for recall/MAP");
    add_common(eval, true);

    CLI::App* bench =
        app.add_subcommand("bench", "kernel encode/decode throughput");
    bench->add_option("--count", bench_count, "scalar ops per measurement");
    o.families = {"kumaraswamy", "loglog", "nqt"};
    add_common(bench, true);

    CLI::App* synth = app.add_subcommand("synth", "generate bell-shaped vectors");
    synth->add_option("--output", o.output, "output fvecs")->required();
    synth->add_option("--count", synth_count, "number of vectors");
    synth->add_option("--dim", synth_dim, "dimensionality");
    add_common(synth, false);

    CLI::App* inspect = app.add_subcommand("inspect", "show container summary");
    inspect->add_option("--input", o.input, "NVQ1 container")->required();
    add_common(inspect, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        apply_isa(o.isa);
        if (compress->parsed()) return cmd_compress(o);
        if (decompress->parsed()) return cmd_decompress(o);
        if (eval->parsed()) return cmd_eval(o, compressed);
        if (bench->parsed()) return cmd_bench(o, bench_count);
        if (synth->parsed()) return cmd_synth(o, synth_count, synth_dim);
        if (inspect->parsed()) return cmd_inspect(o);
    } catch (const nvq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nvq::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const nvq::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
