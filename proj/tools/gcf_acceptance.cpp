// Release acceptance gate. Runs the eleven criteria end to end and prints one
// verdict line per criterion; exit code 0 when every criterion passes, 3
// otherwise. Criteria 4-7 and 11 train the desk-scale benchmark from scratch,
// so a full run takes a few minutes; progress goes to stderr.
//
// Usage: gcf_acceptance [criterion-number ...]   (default: all eleven)

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "gcf/checkpoint.hpp"
#include "gcf/complexity.hpp"
#include "gcf/experiment.hpp"
#include "gcf/gradcam.hpp"
#include "gcf/gradcheck.hpp"
#include "gcf/head.hpp"
#include "gcf/inference.hpp"
#include "gcf/loss.hpp"
#include "gcf/matrix.hpp"
#include "gcf/rng.hpp"
#include "gcf/sgd.hpp"
#include "gcf/synth.hpp"
#include "gcf/train.hpp"

using namespace gcf;

namespace {

std::string fmt(const char* f, ...) {
    char buf[768];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool bits_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool bits_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!bits_equal(a.data()[i], b.data()[i])) return false;
    return true;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.next_gaussian();
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = a.same_shape(b) ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size() && worst < 1e300; ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Accumulates the fine-grained checks inside one criterion; the criterion
// passes only if every check held.
struct Check {
    std::size_t total = 0;
    std::vector<std::string> failed;

    void expect(bool ok, const std::string& what) {
        ++total;
        if (!ok) failed.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol,
               fmt("%s: got %.17g want %.17g", what.c_str(), got, want));
    }
    Outcome outcome(const std::string& extra = "") const {
        if (failed.empty()) {
            std::string d = fmt("%zu checks", total);
            if (!extra.empty()) d += "; " + extra;
            return {true, d};
        }
        return {false, fmt("%zu/%zu checks failed; first: %s", failed.size(), total,
                           failed.front().c_str())};
    }
};

Vector flatten_params(const GcfParams& p) {
    Vector out;
    p.for_each_tensor([&](const std::string&, const Matrix& m) {
        out.insert(out.end(), m.values().begin(), m.values().end());
    });
    return out;
}

void unflatten_params(const Vector& flat, GcfParams& p) {
    std::size_t k = 0;
    p.for_each_tensor([&](const std::string&, Matrix& m) {
        for (double& v : m.values()) v = flat[k++];
    });
}

Vector matrix_row(const Matrix& m, std::size_t i) {
    return Vector(m.row(i), m.row(i) + m.cols());
}

double gcf_test_top1(const std::vector<SyntheticVideo>& videos, const GcfParams& params) {
    std::vector<Vector> preds;
    std::vector<std::size_t> labels;
    preds.reserve(videos.size());
    labels.reserve(videos.size());
    for (const SyntheticVideo& v : videos) {
        preds.push_back(gcf_predict(v.descriptors, params).y);
        labels.push_back(v.label);
    }
    return top1_accuracy(preds, labels);
}

// --- shared benchmark fits (criteria 4-7) --------------------------------------

GcfConfig bench_head_config(GcfMode mode, std::size_t D = 32, std::size_t n = 1) {
    GcfConfig cfg;
    cfg.C = 10;
    cfg.d = 64;
    cfg.D = D;
    cfg.K = 20;
    cfg.n = n;
    cfg.h = 10;
    cfg.mode = mode;
    return cfg;
}

struct FitInfo {
    std::size_t epochs = 0;
    double secs = 0.0;
};

GcfParams train_head(const DatasetSplits& data, const GcfConfig& cfg, double lambda,
                     std::uint64_t seed, FitInfo* info) {
    Rng prng = Rng(seed).split("params");
    GcfParams params = GcfParams::init(cfg, prng);
    TrainerState state = TrainerState::init(params, SgdConfig{}, seed);
    LossConfig loss{lambda};
    TrainOptions opts;
    auto t0 = Clock::now();
    std::vector<EpochRecord> hist =
        train_gcf(data.train, data.val, params, state, SgdConfig{}, loss, opts);
    if (info) {
        info->epochs = hist.size();
        info->secs = seconds_since(t0);
    }
    std::fprintf(stderr, "    [fit] %s lambda=%.2g seed=%llu: %zu epochs, %.1fs\n",
                 to_string(cfg.mode).c_str(), lambda, (unsigned long long)seed, hist.size(),
                 info ? info->secs : 0.0);
    return params;
}

struct SeedRun {
    std::uint64_t seed = 0;
    double central = 0, dense = 0;          // baseline test top-1, percent
    double full = 0, icl = 0, cwo = 0;      // head test top-1, percent
    double slowest_fit = 0;                 // seconds, worst training run
    double unc_sparse = 0, unc_plain = 0;   // gate uncertainty, lambda .01 vs 0
    double loc_ordered = 0, loc_precision = 0;
};

const std::vector<SeedRun>& bench_runs() {
    static const std::vector<SeedRun> runs = [] {
        std::vector<SeedRun> out;
        for (std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{3}}) {
            std::fprintf(stderr, "  [bench] seed %llu: generating dataset\n",
                         (unsigned long long)seed);
            DatasetSplits data = generate_synthetic(bench_s(seed));
            SeedRun r;
            r.seed = seed;

            ClipClassifierParams clf;
            clf.W = Matrix(20, 64);
            auto t0 = Clock::now();
            TrainOptions copts;
            train_clip_classifier(data.train, data.val, clf, SgdConfig{}, copts, seed);
            double clip_secs = seconds_since(t0);
            std::fprintf(stderr, "    [fit] clip baseline seed=%llu: %.1fs\n",
                         (unsigned long long)seed, clip_secs);

            FitInfo fi;
            GcfParams full = train_head(data, bench_head_config(GcfMode::full), 0.01, seed, &fi);
            r.slowest_fit = std::max({clip_secs, fi.secs});
            GcfParams plain = train_head(data, bench_head_config(GcfMode::full), 0.0, seed, &fi);
            r.slowest_fit = std::max(r.slowest_fit, fi.secs);
            GcfParams icl =
                train_head(data, bench_head_config(GcfMode::inter_clip_only), 0.01, seed, &fi);
            r.slowest_fit = std::max(r.slowest_fit, fi.secs);
            GcfParams cwo =
                train_head(data, bench_head_config(GcfMode::clip_wise_only), 0.01, seed, &fi);
            r.slowest_fit = std::max(r.slowest_fit, fi.secs);

            StrategyReport rep = evaluate_strategies(data.test, clf, full);
            r.central = 100.0 * rep.central_top1;
            r.dense = 100.0 * rep.dense_top1;
            r.full = 100.0 * rep.gcf_top1;
            r.icl = 100.0 * gcf_test_top1(data.test, icl);
            r.cwo = 100.0 * gcf_test_top1(data.test, cwo);

            LocalizationScore ls = score_localization(data.test, full, 0.5);
            r.loc_ordered = ls.ordered_fraction;
            r.loc_precision = ls.precision;
            r.unc_sparse = mean_gate_uncertainty(data.test, full);
            r.unc_plain = mean_gate_uncertainty(data.test, plain);
            out.push_back(r);
        }
        return out;
    }();
    return runs;
}

double seed_mean(double SeedRun::* field) {
    const std::vector<SeedRun>& rs = bench_runs();
    double s = 0;
    for (const SeedRun& r : rs) s += r.*field;
    return s / double(rs.size());
}

// --- criterion 1: gradient exactness --------------------------------------------

struct GridRow {
    std::size_t C, d, D, K, n;
    double lambda;
    GcfMode mode;
    bool bias;
    ScoreNormalization norm;
};

// Twelve configurations covering every axis value: C in {2,4,8}, d in {3,8},
// D in {2,6}, K in {2,5}, n in {1,2}, lambda in {0, 0.01}, plus mode, bias
// and normalization variety.
const std::vector<GridRow>& gradcheck_grid() {
    static const GcfMode F = GcfMode::full;
    static const GcfMode I = GcfMode::inter_clip_only;
    static const GcfMode W = GcfMode::clip_wise_only;
    static const ScoreNormalization SM = ScoreNormalization::softmax;
    static const ScoreNormalization DV = ScoreNormalization::divisor;
    static const std::vector<GridRow> grid = {
        {2, 3, 2, 2, 1, 0.00, F, false, SM}, {4, 8, 6, 5, 2, 0.01, F, true, SM},
        {8, 3, 6, 2, 1, 0.01, I, false, DV}, {2, 8, 2, 5, 1, 0.00, W, true, SM},
        {4, 3, 6, 5, 1, 0.00, F, false, DV}, {8, 8, 2, 2, 2, 0.01, I, true, SM},
        {2, 3, 6, 5, 1, 0.01, W, false, SM}, {4, 8, 2, 2, 2, 0.00, F, false, SM},
        {8, 3, 2, 5, 1, 0.00, I, false, SM}, {2, 8, 6, 2, 2, 0.01, F, true, DV},
        {4, 3, 2, 2, 1, 0.01, W, false, SM}, {8, 8, 6, 5, 2, 0.00, F, false, SM},
    };
    return grid;
}

GcfConfig config_from_row(const GridRow& r) {
    GcfConfig cfg;
    cfg.C = r.C;
    cfg.d = r.d;
    cfg.D = r.D;
    cfg.K = r.K;
    cfg.n = r.n;
    cfg.mode = r.mode;
    cfg.normalization = r.norm;
    cfg.with_bias = r.bias;
    cfg.validate();
    return cfg;
}

Outcome crit_gradients() {
    auto t0 = Clock::now();
    double max_err = 0.0;
    std::string worst = "none";
    const std::vector<GridRow>& grid = gradcheck_grid();
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        GcfConfig cfg = config_from_row(grid[idx]);
        Rng prng = Rng(31 * idx + 7).split("params");
        GcfParams params = GcfParams::init(cfg, prng);
        Rng vrng(1000 + idx);
        ClipDescriptorSet V(gaussian_matrix(cfg.C, cfg.d, vrng));
        std::size_t label = idx % cfg.K;
        LossConfig loss{grid[idx].lambda};

        Vector theta = flatten_params(params);
        auto f = [&](const Vector& t) {
            GcfParams p = params;
            unflatten_params(t, p);
            return total_loss(gcf_forward(V, p), label, loss);
        };
        Vector numeric = finite_difference_grad(f, theta, 1e-5);
        GcfGrads grads = gcf_backward(gcf_forward(V, params), label, loss, params);
        Vector analytic = flatten_params(grads);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            double err = relative_error(analytic[i], numeric[i]);
            if (err > max_err) {
                max_err = err;
                worst = fmt("config %zu coord %zu", idx, i);
            }
        }
    }
    double secs = seconds_since(t0);
    bool pass = max_err < 1e-6 && secs < 120.0;
    return {pass, fmt("%zu configs, max_rel_err %.3e (%s), %.1fs", grid.size(), max_err,
                      worst.c_str(), secs)};
}

// --- criterion 2: oracle equivalences --------------------------------------------

void check_numerics(Check& c) {
    Rng r(11);
    Matrix X = gaussian_matrix(3, 4, r);
    c.expect(matmul(Matrix::identity(3), X) == X, "identity matmul");
    Matrix P = matmul(Matrix::from_rows({{1, 2}, {3, 4}}), Matrix::from_rows({{5}, {6}}));
    c.expect(P == Matrix::from_rows({{17}, {39}}), "matmul literal");

    Matrix sm = row_softmax(Matrix(1, 4));
    for (std::size_t j = 0; j < 4; ++j) c.near(sm(0, j), 0.25, 1e-12, "softmax of zeros");
    Matrix tied = row_softmax(Matrix::from_rows({{3.7, 3.7}}));
    c.near(tied(0, 0), 0.5, 1e-12, "softmax tie");
    c.near(tied(0, 1), 0.5, 1e-12, "softmax tie");

    c.near(sigmoid(Vector{0.0})[0], 0.5, 1e-12, "sigmoid(0)");
    c.near(relu(Vector{-3.7})[0], 0.0, 0.0, "relu negative");
    c.near(relu(Vector{2.5})[0], 2.5, 0.0, "relu positive");
    for (double x : {-4.2, -0.3, 0.0, 1.7, 8.0})
        c.near(sigmoid(Vector{x})[0] + sigmoid(Vector{-x})[0], 1.0, 1e-12, "sigmoid symmetry");

    c.near(row_mean(Matrix::from_rows({{1, 2, 3}}))[0], 2.0, 1e-12, "row mean");
    Matrix half(2, 5);
    for (double& v : half.values()) v = 0.5;
    c.near(l1_norm(half), 5.0, 1e-12, "l1 of 0.5 x10");
    c.near(l1_norm(Matrix(3, 3)), 0.0, 0.0, "l1 of zeros");
}

void check_fd_basics(Check& c) {
    Vector g = finite_difference_grad([](const Vector&) { return 4.2; }, {1.0, -2.0, 0.5}, 1e-5);
    for (double v : g) c.near(v, 0.0, 0.0, "fd of constant");

    Vector a{2.0, -3.0, 0.25};
    auto linear = [&](const Vector& p) {
        double s = 0;
        for (std::size_t i = 0; i < p.size(); ++i) s += a[i] * p[i];
        return s;
    };
    g = finite_difference_grad(linear, {0.3, 0.7, -1.1}, 1e-5);
    for (std::size_t i = 0; i < 3; ++i) c.near(g[i], a[i], 1e-9, "fd of linear");

    auto sq = [](const Vector& p) { return p[0] * p[0] + p[1] * p[1]; };
    g = finite_difference_grad(sq, {1.0, 2.0}, 1e-5);
    c.near(g[0], 2.0, 1e-8, "fd of norm^2");
    c.near(g[1], 4.0, 1e-8, "fd of norm^2");
}

void check_fusion_trivials(Check& c) {
    Rng r(21);
    {   // C = 1: attention collapses to 1x1 identity
        FusionLayerParams p = FusionLayerParams::init(3, 2, false, r);
        Matrix V = gaussian_matrix(1, 3, r);
        Matrix B = fusion_forward(V, p, ScoreNormalization::softmax);
        c.expect(max_abs_diff(B, matmul(matmul(V, p.W_v), p.W_z)) <= 1e-12, "C=1 collapse");
    }
    {   // zero query: every row becomes the same mean value projection
        FusionLayerParams p = FusionLayerParams::init(4, 3, false, r);
        p.W_q = Matrix(4, 3);
        Matrix V = gaussian_matrix(5, 4, r);
        Matrix B = fusion_forward(V, p, ScoreNormalization::softmax);
        Vector mean_u = col_mean(matmul(V, p.W_v));
        Vector want = matvec_transposed(p.W_z, mean_u);
        for (std::size_t i = 0; i < B.rows(); ++i)
            for (std::size_t j = 0; j < B.cols(); ++j)
                c.near(B(i, j), want[j], 1e-12, "zero-query rows");
    }
    {   // zero upstream gradient
        FusionLayerParams p = FusionLayerParams::init(4, 3, false, r);
        Matrix V = gaussian_matrix(5, 4, r);
        FusionCache cache;
        fusion_forward(V, p, ScoreNormalization::softmax, &cache);
        FusionGrads g = fusion_backward(cache, p, Matrix(5, 3));
        c.expect(max_abs_diff(g.dX, Matrix(5, 4)) == 0.0, "dB=0 gives dX=0");
        c.expect(max_abs_diff(g.dW_q, Matrix(4, 3)) == 0.0, "dB=0 gives dW_q=0");
        c.expect(max_abs_diff(g.dW_v, Matrix(4, 3)) == 0.0, "dB=0 gives dW_v=0");
    }
    {   // uniform attention with identity value path: dX_j = mean_i dB_i
        std::size_t C = 4, d = 3;
        FusionLayerParams p;
        p.W_q = Matrix(d, d);
        p.W_k = Matrix(d, d);
        p.W_v = Matrix::identity(d);
        p.W_z = Matrix::identity(d);
        Matrix V = gaussian_matrix(C, d, r);
        FusionCache cache;
        fusion_forward(V, p, ScoreNormalization::softmax, &cache);
        Matrix dB = gaussian_matrix(C, d, r);
        FusionGrads g = fusion_backward(cache, p, dB);
        Vector want = col_mean(dB);
        for (std::size_t j = 0; j < C; ++j)
            for (std::size_t k = 0; k < d; ++k)
                c.near(g.dX(j, k), want[k], 1e-12, "uniform-attention dX");
    }
    {   // stacking: one layer is fusion_forward; a zero-query second layer
        // replicates the row mean of the first layer's output
        std::vector<FusionLayerParams> layers;
        layers.push_back(FusionLayerParams::init(3, 2, false, r));
        layers.push_back(FusionLayerParams::init(2, 2, false, r));
        Matrix V = gaussian_matrix(4, 3, r);
        Matrix one = stacked_fusion(V, {layers[0]}, ScoreNormalization::softmax);
        c.expect(one == fusion_forward(V, layers[0], ScoreNormalization::softmax),
                 "stacked n=1");
        layers[1].W_q = Matrix(2, 2);
        layers[1].W_k = Matrix(2, 2);
        layers[1].W_v = Matrix::identity(2);
        layers[1].W_z = Matrix::identity(2);
        Matrix two = stacked_fusion(V, layers, ScoreNormalization::softmax);
        Vector m = col_mean(one);
        for (std::size_t i = 0; i < two.rows(); ++i)
            for (std::size_t j = 0; j < two.cols(); ++j)
                c.near(two(i, j), m[j], 1e-12, "trivial second layer");
    }
}

void check_head_trivials(Check& c) {
    Rng r(33);
    {   // clip summaries
        Matrix cm(3, 4);
        for (double& v : cm.values()) v = 2.25;
        for (double g : clip_summary(cm)) c.near(g, 2.25, 1e-12, "summary of constant rows");
        Vector g = clip_summary(Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}));
        c.near(g[0], 2.0, 1e-12, "summary literal");
        c.near(g[1], 5.0, 1e-12, "summary literal");
    }
    {   // zero gate weights pin the gate at 1/2
        GatingParams gp;
        gp.W1 = gaussian_matrix(4, 3, r);
        gp.W2 = Matrix(3, 4);
        for (double a : gated_attention({0.3, -0.2, 0.9}, gp))
            c.near(a, 0.5, 1e-12, "W2=0 gate");
        gp.W1 = Matrix(4, 3);
        gp.W2 = gaussian_matrix(3, 4, r);
        for (double a : gated_attention({0.3, -0.2, 0.9}, gp))
            c.near(a, 0.5, 1e-12, "W1=0 gate");
    }
    {   // rescale / residual extremes
        Matrix B = gaussian_matrix(3, 2, r);
        Matrix S, R;
        rescale_and_residual(B, Vector(3, 0.0), S, R);
        c.expect(max_abs_diff(S, Matrix(3, 2)) == 0.0, "att=0 kills S");
        c.expect(R == B, "att=0 keeps R=B");
        rescale_and_residual(B, Vector(3, 1.0), S, R);
        Matrix twice = B;
        twice *= 2.0;
        c.expect(max_abs_diff(R, twice) <= 1e-12, "att=1 doubles");
        rescale_and_residual(B, Vector(3, 0.5), S, R);
        Matrix once_half = B;
        once_half *= 1.5;
        c.expect(max_abs_diff(R, once_half) <= 1e-12, "att=0.5 scales 1.5x");
    }
    {   // video descriptor
        Matrix eq = Matrix::from_rows({{1.5, -2.0}, {1.5, -2.0}, {1.5, -2.0}});
        Vector v = video_descriptor(eq);
        c.near(v[0], 1.5, 1e-12, "descriptor of equal rows");
        c.near(v[1], -2.0, 1e-12, "descriptor of equal rows");
        v = video_descriptor(Matrix::from_rows({{1, 3}, {3, 5}}));
        c.near(v[0], 2.0, 1e-12, "descriptor literal");
        c.near(v[1], 4.0, 1e-12, "descriptor literal");
    }
    {   // classifier
        ClassifierParams cp;
        cp.W3 = Matrix(5, 3);
        for (double y : classify({0.2, -0.7, 1.1}, cp)) c.near(y, 0.2, 1e-12, "W3=0 uniform");
        Vector z{0.3, -1.2, 2.2, 0.0};
        Vector shifted = z;
        for (double& v : shifted) v += 3.14;
        Vector y1 = softmax(z), y2 = softmax(shifted);
        for (std::size_t i = 0; i < z.size(); ++i)
            c.near(y1[i], y2[i], 1e-12, "softmax shift invariance");
    }
    {   // a zeroed gate scales the video descriptor by 1.5 and preserves the
        // ungated head's argmax
        GcfConfig cfg;
        cfg.C = 5; cfg.d = 4; cfg.D = 3; cfg.K = 4; cfg.n = 1;
        Rng pr = Rng(5).split("params");
        GcfParams pf = GcfParams::init(cfg, pr);
        pf.gating.W1 = Matrix(cfg.gating_hidden(), cfg.C);
        pf.gating.W2 = Matrix(cfg.C, cfg.gating_hidden());
        GcfParams pi;
        pi.config = cfg;
        pi.config.mode = GcfMode::inter_clip_only;
        pi.fusion_layers = pf.fusion_layers;
        pi.classifier = pf.classifier;
        ClipDescriptorSet V(gaussian_matrix(cfg.C, cfg.d, r));
        ForwardTrace t1 = gcf_forward(V, pf);
        ForwardTrace t2 = gcf_forward(V, pi);
        for (double a : t1.att) c.near(a, 0.5, 1e-12, "zeroed gate att");
        for (std::size_t j = 0; j < t1.v_prime.size(); ++j)
            c.near(t1.v_prime[j], 1.5 * t2.v_prime[j], 1e-12, "zeroed gate scales v'");
        c.expect(argmax(t1.y) == argmax(t2.y), "zeroed gate keeps argmax");
    }
    {   // C=1, n=1 collapse against a hand-rolled chain
        GcfConfig cfg;
        cfg.C = 1; cfg.d = 3; cfg.D = 2; cfg.K = 3; cfg.n = 1;
        Rng pr = Rng(6).split("params");
        GcfParams p = GcfParams::init(cfg, pr);
        ClipDescriptorSet V(gaussian_matrix(1, 3, r));
        Matrix B = matmul(matmul(V.V, p.fusion_layers[0].W_v), p.fusion_layers[0].W_z);
        double g0 = (B(0, 0) + B(0, 1)) / 2.0;
        const Matrix& W1 = p.gating.W1;
        const Matrix& W2 = p.gating.W2;
        Vector hidden(W1.rows());
        for (std::size_t i = 0; i < W1.rows(); ++i) hidden[i] = std::max(0.0, W1(i, 0) * g0);
        double pre = 0;
        for (std::size_t i = 0; i < W2.cols(); ++i) pre += W2(0, i) * hidden[i];
        double att = 1.0 / (1.0 + std::exp(-pre));
        Vector v_prime{(1.0 + att) * B(0, 0), (1.0 + att) * B(0, 1)};
        Vector y = softmax(matvec(p.classifier.W3, v_prime));
        ForwardTrace t = gcf_forward(V, p);
        for (std::size_t k = 0; k < y.size(); ++k)
            c.near(t.y[k], y[k], 1e-12, "C=1 collapse");
    }
}

void check_loss_trivials(Check& c) {
    {   // cross entropy pins
        Vector onehot(4, 0.0);
        onehot[2] = 1.0;
        c.near(cross_entropy(onehot, 2), 0.0, 0.0, "one-hot CE");
        Vector uniform(600, 1.0 / 600.0);
        c.near(cross_entropy(uniform, 17), std::log(600.0), 1e-12, "uniform CE");
    }
    c.near(sparsity_loss(Vector(10, 0.5)), 5.0, 1e-12, "sparsity of 0.5 x10");
    c.near(sparsity_loss(Vector(10, 0.0)), 0.0, 0.0, "sparsity of zeros");
    {   // total loss composition
        GcfConfig cfg;
        cfg.C = 4; cfg.d = 3; cfg.D = 2; cfg.K = 3; cfg.n = 1;
        Rng pr = Rng(7).split("params");
        GcfParams p = GcfParams::init(cfg, pr);
        Rng vr(71);
        ClipDescriptorSet V(gaussian_matrix(4, 3, vr));
        ForwardTrace t = gcf_forward(V, p);
        c.near(total_loss(t, 1, LossConfig{0.0}), cross_entropy(t.y, 1), 0.0, "lambda=0");

        ForwardTrace manual;
        manual.mode = GcfMode::full;
        manual.att_active = true;
        manual.y = Vector(5, 0.0);
        manual.y[3] = 1.0;
        manual.att = Vector(10, 0.0);
        c.near(total_loss(manual, 3, LossConfig{0.01}), 0.0, 0.0, "perfect and att=0");
        manual.y[3] = std::exp(-2.0);
        manual.att = Vector(10, 0.5);
        c.near(total_loss(manual, 3, LossConfig{0.01}), 2.05, 1e-12, "2 + 0.01*5");
    }
    {   // saturated prediction: every gradient vanishes
        GcfConfig cfg;
        cfg.C = 3; cfg.d = 3; cfg.D = 3; cfg.K = 2; cfg.n = 1;
        Rng pr = Rng(8).split("params");
        GcfParams p = GcfParams::init(cfg, pr);
        p.fusion_layers[0].W_q = Matrix(3, 3);
        p.fusion_layers[0].W_k = Matrix(3, 3);
        p.fusion_layers[0].W_v = Matrix::identity(3);
        p.fusion_layers[0].W_z = Matrix::identity(3);
        p.gating.W1 = Matrix(3, 3);
        p.gating.W2 = Matrix(3, 3);
        for (std::size_t j = 0; j < 3; ++j) {
            p.classifier.W3(0, j) = 100.0;
            p.classifier.W3(1, j) = -100.0;
        }
        Matrix ones(3, 3);
        for (double& v : ones.values()) v = 1.0;
        ForwardTrace t = gcf_forward(ClipDescriptorSet(ones), p);
        GcfGrads g = gcf_backward(t, 0, LossConfig{0.0}, p);
        double norm = 0;
        for (double v : flatten_params(g)) norm += v * v;
        c.expect(std::sqrt(norm) < 1e-6, "saturated gradients vanish");
    }
    {   // the penalty enters the gradient linearly in lambda
        GcfConfig cfg;
        cfg.C = 4; cfg.d = 3; cfg.D = 2; cfg.K = 3; cfg.n = 1;
        Rng pr = Rng(9).split("params");
        GcfParams p = GcfParams::init(cfg, pr);
        Rng vr(91);
        ClipDescriptorSet V(gaussian_matrix(4, 3, vr));
        ForwardTrace t = gcf_forward(V, p);
        Vector g0 = flatten_params(gcf_backward(t, 2, LossConfig{0.0}, p));
        Vector g1 = flatten_params(gcf_backward(t, 2, LossConfig{0.37}, p));
        Vector g2 = flatten_params(gcf_backward(t, 2, LossConfig{0.74}, p));
        for (std::size_t i = 0; i < g0.size(); ++i)
            c.near(g2[i] - g0[i], 2.0 * (g1[i] - g0[i]), 1e-12, "lambda linearity");
    }
}

void check_sgd_trivials(Check& c) {
    GcfConfig cfg;
    cfg.C = 2; cfg.d = 2; cfg.D = 2; cfg.K = 2; cfg.n = 1;
    Rng pr = Rng(12).split("params");
    Rng gr(13);
    GcfParams grads = GcfParams::init(cfg, pr);
    grads.for_each_tensor([&](const std::string&, Matrix& m) {
        for (double& v : m.values()) v = gr.next_gaussian();
    });
    Vector gflat = flatten_params(grads);
    {   // no momentum, no decay: plain descent
        Rng p2 = Rng(14).split("params");
        GcfParams params = GcfParams::init(cfg, p2);
        Vector before = flatten_params(params);
        SgdConfig plain;
        plain.lr = 0.05;
        plain.momentum = 0.0;
        plain.dampening = 0.0;
        plain.weight_decay = 0.0;
        SgdState st = SgdState::init(params);
        sgd_step(params, grads, st, plain);
        Vector after = flatten_params(params);
        for (std::size_t i = 0; i < after.size(); ++i)
            c.near(after[i], before[i] - 0.05 * gflat[i], 1e-12, "vanilla step");
    }
    {   // first step copies the gradient into the buffer
        Rng p2 = Rng(15).split("params");
        GcfParams params = GcfParams::init(cfg, p2);
        SgdConfig m;
        m.weight_decay = 0.0;
        SgdState st = SgdState::init(params);
        sgd_step(params, grads, st, m);
        Vector buf = flatten_params(st.buffers);
        for (std::size_t i = 0; i < buf.size(); ++i)
            c.near(buf[i], gflat[i], 0.0, "first-step buffer");
    }
    {   // lr = 0 leaves weights bitwise unchanged
        Rng p2 = Rng(16).split("params");
        GcfParams params = GcfParams::init(cfg, p2);
        GcfParams before = params;
        SgdConfig z;
        z.lr = 0.0;
        SgdState st = SgdState::init(params);
        sgd_step(params, grads, st, z);
        Vector a = flatten_params(before), b = flatten_params(params);
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = bits_equal(a[i], b[i]);
        c.expect(same, "lr=0 bitwise no-op");
    }
}

void check_inference_trivials(Check& c) {
    Rng r(44);
    {   // loop padding
        Matrix V = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}});
        ClipDescriptorSet set(V);
        ClipDescriptorSet padded = pad_clips(set, 10);
        bool cyclic = padded.V.rows() == 10;
        for (std::size_t t = 0; cyclic && t < 10; ++t)
            cyclic = matrix_row(padded.V, t) == matrix_row(V, t % 3);
        c.expect(cyclic, "pad 3->10 cycles rows");
        c.expect(pad_clips(set, 3).V == V, "pad to same C is identity");
        ClipDescriptorSet six = pad_clips(set, 6);
        bool periodic = true;
        for (std::size_t t = 0; t < 3; ++t)
            periodic = periodic && matrix_row(six.V, t) == matrix_row(six.V, t + 3);
        c.expect(periodic, "pad to 2C is periodic");
    }
    {   // central / dense relationships
        ClipClassifierParams clf;
        clf.W = gaussian_matrix(4, 2, r);
        Matrix V = gaussian_matrix(10, 2, r);
        Vector got = central_clip_predict(ClipDescriptorSet(V), clf);
        Vector want = softmax(matvec(clf.W, matrix_row(V, 5)));
        for (std::size_t k = 0; k < want.size(); ++k)
            c.near(got[k], want[k], 1e-12, "central uses clip floor(C/2)");

        ClipDescriptorSet single(gaussian_matrix(1, 2, r));
        Vector c1 = central_clip_predict(single, clf);
        Vector d1 = dense_clips_predict(single, clf);
        for (std::size_t k = 0; k < c1.size(); ++k)
            c.near(c1[k], d1[k], 1e-12, "C=1 central equals dense");

        Matrix same(6, 2);
        Vector rrow = matrix_row(gaussian_matrix(1, 2, r), 0);
        for (std::size_t t = 0; t < 6; ++t)
            for (std::size_t j = 0; j < 2; ++j) same(t, j) = rrow[j];
        Vector cs = central_clip_predict(ClipDescriptorSet(same), clf);
        Vector ds = dense_clips_predict(ClipDescriptorSet(same), clf);
        for (std::size_t k = 0; k < cs.size(); ++k)
            c.near(cs[k], ds[k], 1e-12, "identical clips: central equals dense");
    }
    {   // localization thresholding is strict
        c.expect(localize(Vector(4, 0.5), 0.5).relevant_clips.empty(), "0.5 at 0.5 is empty");
        LocalizationResult lr = localize({0.9, 0.1, 0.8}, 0.5);
        c.expect(lr.relevant_clips == std::vector<std::size_t>{0, 2}, "picks 0 and 2");
        lr = localize({0.9, 0.1, 0.8}, 0.0);
        c.expect(lr.relevant_clips == std::vector<std::size_t>{0, 1, 2}, "threshold 0 keeps all");
    }
}

void check_synth_trivials(Check& c) {
    SynthConfig sc;
    sc.num_classes = 4;
    sc.clips_per_video = 6;
    sc.descriptor_dim = 5;
    sc.relevant_run_length = 2;
    sc.train_size = 6;
    sc.val_size = 2;
    sc.test_size = 2;
    sc.seed = 9;
    Matrix protos = synth_prototypes(sc);
    for (std::size_t i = 0; i < protos.rows(); ++i) {
        double n = 0;
        for (std::size_t j = 0; j < protos.cols(); ++j) n += protos(i, j) * protos(i, j);
        c.near(std::sqrt(n), 1.0, 1e-12, "prototype norms");
    }
    DatasetSplits data = generate_synthetic(sc);
    for (const std::vector<SyntheticVideo>* split : {&data.train, &data.val, &data.test}) {
        for (const SyntheticVideo& v : *split) {
            c.expect(v.label < sc.num_classes, "label range");
            std::size_t ones = 0, first = sc.clips_per_video;
            for (std::size_t t = 0; t < v.relevance_mask.size(); ++t)
                if (v.relevance_mask[t]) {
                    if (first == sc.clips_per_video) first = t;
                    ++ones;
                }
            bool contiguous = ones == sc.relevant_run_length;
            for (std::size_t t = first; contiguous && t < first + ones; ++t)
                contiguous = v.relevance_mask[t] == 1;
            c.expect(contiguous, "mask is one contiguous run");
        }
    }
}

void check_pairwise_oracle(Check& c) {
    double worst = 0;
    for (std::size_t t = 0; t < 50; ++t) {
        Rng r(4000 + t);
        std::size_t C = 1 + r.uniform_below(5);
        std::size_t d = 2 + r.uniform_below(5);
        std::size_t D = 2 + r.uniform_below(4);
        bool bias = t % 3 == 0;
        ScoreNormalization norm =
            t % 2 ? ScoreNormalization::divisor : ScoreNormalization::softmax;
        FusionLayerParams p = FusionLayerParams::init(d, D, bias, r);
        Matrix V = gaussian_matrix(C, d, r);
        Matrix B = fusion_forward(V, p, norm);

        auto project = [&](const Matrix& W, const Matrix& b) {
            Matrix out(C, D);
            for (std::size_t i = 0; i < C; ++i)
                for (std::size_t j = 0; j < D; ++j) {
                    double s = bias ? b(0, j) : 0.0;
                    for (std::size_t k = 0; k < d; ++k) s += V(i, k) * W(k, j);
                    out(i, j) = s;
                }
            return out;
        };
        Matrix Q = project(p.W_q, p.b_q);
        Matrix K = project(p.W_k, p.b_k);
        Matrix U = project(p.W_v, p.b_v);
        Matrix A(C, C);
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < C; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < D; ++k) s += Q(i, k) * K(j, k);
                A(i, j) = s / std::sqrt(double(D));
            }
        if (norm == ScoreNormalization::softmax) {
            for (std::size_t i = 0; i < C; ++i) {
                double mx = A(i, 0);
                for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, A(i, j));
                double z = 0;
                for (std::size_t j = 0; j < C; ++j) z += std::exp(A(i, j) - mx);
                for (std::size_t j = 0; j < C; ++j) A(i, j) = std::exp(A(i, j) - mx) / z;
            }
        }
        Matrix Bo(C, D);
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < D; ++j) {
                double h = 0;
                for (std::size_t l = 0; l < C; ++l) {
                    double hl = 0;
                    for (std::size_t k = 0; k < D; ++k) hl += U(l, k) * p.W_z(k, j);
                    h += A(i, l) * hl;
                }
                Bo(i, j) = h + (bias ? p.b_z(0, j) : 0.0);
            }
        worst = std::max(worst, max_abs_diff(B, Bo));
    }
    c.expect(worst <= 1e-10, fmt("pairwise oracle max diff %.3e", worst));
}

Outcome crit_oracles() {
    Check c;
    check_numerics(c);
    check_fd_basics(c);
    check_fusion_trivials(c);
    check_head_trivials(c);
    check_loss_trivials(c);
    check_sgd_trivials(c);
    {
        GcfConfig a;
        a.C = 3; a.d = 5; a.D = 4; a.K = 6; a.n = 1;
        GcfConfig b = a;
        b.n = 2;
        c.expect(count_params(b) - count_params(a) == 4 * a.D * a.D,
                 "extra layer costs 4D^2 params");
    }
    check_inference_trivials(c);
    check_synth_trivials(c);
    check_pairwise_oracle(c);
    return c.outcome("50 pairwise-oracle instances");
}

// --- criterion 3: permutation equivariance ----------------------------------------

Outcome crit_permutation() {
    Check c;
    for (std::size_t t = 0; t < 20; ++t) {
        Rng r(500 + t);
        std::size_t C = 2 + r.uniform_below(6);
        std::size_t d = 2 + r.uniform_below(5);
        std::size_t D = 2 + r.uniform_below(4);
        std::size_t n = 1 + (t % 2);
        bool bias = t % 4 == 0;
        // Softmax keeps fusion weights in (0,1); 1e-12 absolute then measures
        // genuine equivariance rather than summation-order noise.
        ScoreNormalization norm = ScoreNormalization::softmax;
        std::vector<FusionLayerParams> layers;
        layers.push_back(FusionLayerParams::init(d, D, bias, r));
        for (std::size_t l = 1; l < n; ++l)
            layers.push_back(FusionLayerParams::init(D, D, bias, r));
        Matrix V = gaussian_matrix(C, d, r);

        std::vector<std::size_t> perm(C);
        for (std::size_t i = 0; i < C; ++i) perm[i] = i;
        for (std::size_t i = C; i > 1; --i)
            std::swap(perm[i - 1], perm[r.uniform_below(i)]);
        Matrix PV(C, d);
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < d; ++j) PV(i, j) = V(perm[i], j);

        Matrix B = stacked_fusion(V, layers, norm);
        Matrix BP = stacked_fusion(PV, layers, norm);
        double worst = 0;
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < D; ++j)
                worst = std::max(worst, std::abs(BP(i, j) - B(perm[i], j)));
        c.expect(worst <= 1e-12, fmt("equivariance trial %zu diff %.3e", t, worst));
    }

    // The gate reads clip positions, so the full head must NOT be
    // permutation-invariant; record one concrete counterexample.
    GcfConfig cfg;
    cfg.C = 6; cfg.d = 5; cfg.D = 4; cfg.K = 3; cfg.n = 1;
    Rng pr = Rng(77).split("params");
    GcfParams params = GcfParams::init(cfg, pr);
    Rng vr(78);
    Matrix V = gaussian_matrix(6, 5, vr);
    Matrix RV(6, 5);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 5; ++j) RV(i, j) = V(5 - i, j);
    Vector y1 = gcf_forward(ClipDescriptorSet(V), params).y;
    Vector y2 = gcf_forward(ClipDescriptorSet(RV), params).y;
    double delta = 0;
    for (std::size_t k = 0; k < y1.size(); ++k) delta = std::max(delta, std::abs(y1[k] - y2[k]));
    c.expect(delta > 1e-9, fmt("full head looked invariant (max|dy| %.3e)", delta));
    return c.outcome(fmt("counterexample: reversing clips moves y by %.3e", delta));
}

// --- criteria 4-7: benchmark behaviour --------------------------------------------

Outcome crit_benchmark() {
    double full = seed_mean(&SeedRun::full);
    double dense = seed_mean(&SeedRun::dense);
    double central = seed_mean(&SeedRun::central);
    double slowest = 0;
    for (const SeedRun& r : bench_runs()) slowest = std::max(slowest, r.slowest_fit);
    bool pass = full >= dense + 5.0 && full >= central + 10.0 && slowest < 600.0;
    return {pass, fmt("gcf %.1f vs dense %.1f (needs +5) and central %.1f (needs +10); "
                      "slowest fit %.0fs",
                      full, dense, central, slowest)};
}

Outcome crit_ablations() {
    double full = seed_mean(&SeedRun::full);
    double icl = seed_mean(&SeedRun::icl);
    double cwo = seed_mean(&SeedRun::cwo);
    double dense = seed_mean(&SeedRun::dense);
    bool pass = full >= icl - 0.5 && full >= cwo - 0.5 && icl >= dense && cwo >= dense;
    return {pass, fmt("full %.1f, inter_clip_only %.1f, clip_wise_only %.1f, dense %.1f", full,
                      icl, cwo, dense)};
}

Outcome crit_sparsity() {
    bool pass = true;
    std::string detail;
    for (const SeedRun& r : bench_runs()) {
        pass = pass && r.unc_sparse < r.unc_plain;
        detail += fmt("%sseed %llu: %.6f vs %.6f", detail.empty() ? "" : "; ",
                      (unsigned long long)r.seed, r.unc_sparse, r.unc_plain);
    }
    return {pass, "gate uncertainty lambda=0.01 vs 0: " + detail};
}

Outcome crit_localization() {
    double ordered = seed_mean(&SeedRun::loc_ordered);
    double precision = seed_mean(&SeedRun::loc_precision);
    bool pass = ordered >= 0.8 && precision >= 0.7;
    return {pass, fmt("ordered fraction %.3f (needs 0.8), precision %.3f (needs 0.7)", ordered,
                      precision)};
}

// --- criterion 8: grad-cam properties ---------------------------------------------

Outcome crit_gradcam() {
    Check c;
    for (std::size_t t = 0; t < 100; ++t) {
        Rng r(7000 + t);
        FeatureMapVolume vol;
        vol.T = 1 + r.uniform_below(3);
        vol.Hp = 1 + r.uniform_below(4);
        vol.Wp = 1 + r.uniform_below(4);
        vol.Lp = 1 + r.uniform_below(3);
        vol.values.resize(vol.flat_size());
        vol.grad.resize(vol.flat_size());
        for (double& v : vol.values) v = r.next_gaussian();
        for (double& v : vol.grad) v = r.next_gaussian();

        Matrix alpha = grad_cam_weights(vol);
        double spatial = double(vol.Hp * vol.Wp);
        for (std::size_t f = 0; f < vol.T; ++f)
            for (std::size_t k = 0; k < vol.Lp; ++k) {
                double want = 0;
                for (std::size_t i = 0; i < vol.Hp; ++i)
                    for (std::size_t j = 0; j < vol.Wp; ++j)
                        want += vol.grad[vol.index(f, i, j, k)];
                c.near(alpha(f, k), want / spatial, 1e-12, "weight oracle");
            }

        std::vector<Matrix> maps = grad_cam_map(vol, alpha);
        bool nonneg = true;
        for (const Matrix& m : maps)
            for (double v : m.values()) nonneg = nonneg && v >= 0.0;
        c.expect(nonneg, "non-negative maps");
        for (std::size_t f = 0; f < vol.T; ++f)
            for (std::size_t i = 0; i < vol.Hp; ++i)
                for (std::size_t j = 0; j < vol.Wp; ++j) {
                    double m = 0;
                    for (std::size_t k = 0; k < vol.Lp; ++k)
                        m += alpha(f, k) * vol.values[vol.index(f, i, j, k)];
                    c.near(maps[f](i, j), std::max(m, 0.0), 1e-12, "map oracle");
                }

        FeatureMapVolume scaled = vol;
        for (double& v : scaled.grad) v *= 2.37;
        std::vector<Matrix> smaps = grad_cam_map(scaled, grad_cam_weights(scaled));
        for (std::size_t f = 0; f < vol.T; ++f) {
            Matrix want = maps[f];
            want *= 2.37;
            c.expect(max_abs_diff(smaps[f], want) <= 1e-12, "positive homogeneity");
        }
    }
    {   // resize pins
        Rng r(7777);
        Matrix map = gaussian_matrix(3, 4, r);
        c.expect(max_abs_diff(resize_map(map, 3, 4), map) <= 1e-12, "same-size resize");
        Matrix flat(2, 2);
        for (double& v : flat.values()) v = 7.5;
        Matrix big = resize_map(flat, 5, 7);
        double worst = 0;
        for (double v : big.values()) worst = std::max(worst, std::abs(v - 7.5));
        c.expect(worst <= 1e-12, "constant map stays constant");
    }
    return c.outcome("100 random volumes");
}

// --- criterion 9: complexity accounting -------------------------------------------

Outcome crit_complexity() {
    Check c;
    std::vector<GcfConfig> configs;
    for (const GridRow& r : gradcheck_grid()) configs.push_back(config_from_row(r));
    GcfConfig paper;
    paper.C = 10; paper.d = 2048; paper.D = 128; paper.K = 600; paper.n = 1; paper.h = 10;
    configs.push_back(paper);
    GcfConfig bench = bench_head_config(GcfMode::full);
    configs.push_back(bench);
    GcfConfig micro;
    micro.C = 4; micro.d = 8; micro.D = 6; micro.K = 3; micro.n = 1; micro.h = 4;
    configs.push_back(micro);

    for (std::size_t i = 0; i < configs.size(); ++i) {
        Rng prng = Rng(200 + i).split("params");
        GcfParams params = GcfParams::init(configs[i], prng);
        c.expect(count_params(configs[i]) == enumerate_params(params),
                 fmt("param count mismatch on config %zu", i));
        c.expect(count_flops(configs[i]) == measure_macs(params),
                 fmt("mac count mismatch on config %zu", i));
    }
    std::uint64_t head = count_params(bench);
    std::uint64_t budget = 2417000;  // 5% of the nominal 48.34M backbone
    c.expect(head < budget, fmt("bench head %llu params exceeds budget", (unsigned long long)head));
    return c.outcome(fmt("bench head %llu params (< %llu); paper-shape head %llu params",
                         (unsigned long long)head, (unsigned long long)budget,
                         (unsigned long long)count_params(paper)));
}

// --- criterion 10: determinism ----------------------------------------------------

bool videos_identical(const std::vector<SyntheticVideo>& a, const std::vector<SyntheticVideo>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].label != b[i].label || a[i].relevance_mask != b[i].relevance_mask) return false;
        if (!bits_equal(a[i].descriptors.V, b[i].descriptors.V)) return false;
    }
    return true;
}

bool records_identical(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].epoch != b[i].epoch) return false;
        if (!bits_equal(a[i].lr, b[i].lr) || !bits_equal(a[i].train_loss, b[i].train_loss) ||
            !bits_equal(a[i].train_accuracy, b[i].train_accuracy) ||
            !bits_equal(a[i].val_loss, b[i].val_loss) ||
            !bits_equal(a[i].val_accuracy, b[i].val_accuracy))
            return false;
    }
    return true;
}

Outcome crit_determinism() {
    Check c;
    SynthConfig sc = bench_s(1);
    DatasetSplits d1 = generate_synthetic(sc);
    DatasetSplits d2 = generate_synthetic(sc);
    c.expect(videos_identical(d1.train, d2.train) && videos_identical(d1.val, d2.val) &&
                 videos_identical(d1.test, d2.test),
             "regenerated dataset differs");

    GcfConfig cfg = bench_head_config(GcfMode::full);
    auto fresh = [&] {
        Rng prng = Rng(1).split("params");
        Checkpoint ck;
        ck.config = cfg;
        ck.sgd = SgdConfig{};
        ck.loss = LossConfig{};
        ck.params = GcfParams::init(cfg, prng);
        ck.state = TrainerState::init(ck.params, ck.sgd, 1);
        return ck;
    };
    auto advance = [&](Checkpoint& ck, std::size_t max_epochs) {
        TrainOptions opts;
        opts.max_epochs = max_epochs;
        return train_gcf(d1.train, d1.val, ck.params, ck.state, ck.sgd, ck.loss, opts);
    };

    std::fprintf(stderr, "  [determinism] two 5-epoch runs + one 2+3 resume\n");
    Checkpoint a = fresh();
    std::vector<EpochRecord> hist_a = advance(a, 5);
    std::string bytes_a = encode_checkpoint(a);

    Checkpoint b = fresh();
    std::vector<EpochRecord> hist_b = advance(b, 5);
    c.expect(records_identical(hist_a, hist_b), "retrained history differs");
    c.expect(bytes_a == encode_checkpoint(b), "retrained checkpoint differs");

    Checkpoint p = fresh();
    std::vector<EpochRecord> hist_p = advance(p, 2);
    Checkpoint resumed = decode_checkpoint(encode_checkpoint(p));
    std::vector<EpochRecord> hist_r = advance(resumed, 5);
    hist_p.insert(hist_p.end(), hist_r.begin(), hist_r.end());
    c.expect(records_identical(hist_a, hist_p), "2+3 epoch history differs from 5");
    c.expect(bytes_a == encode_checkpoint(resumed), "2+3 epoch checkpoint differs from 5");
    return c.outcome("dataset, history, checkpoint, resume all bitwise");
}

// --- criterion 11: hyperparameter sweep smoke --------------------------------------

Outcome crit_sweep() {
    DatasetSplits data = generate_synthetic(bench_s(1));
    std::string summary;
    for (std::size_t D : {std::size_t{8}, std::size_t{32}}) {
        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            GcfConfig cfg = bench_head_config(GcfMode::full, D, n);
            FitInfo fi;
            GcfParams params = train_head(data, cfg, 0.01, 1, &fi);
            double top1 = gcf_test_top1(data.test, params);
            std::printf("sweep {\"D\":%zu,\"n\":%zu,\"seed\":1,\"test_top1\":%.4f,"
                        "\"epochs\":%zu,\"seconds\":%.1f}\n",
                        D, n, top1, fi.epochs, fi.secs);
            std::fflush(stdout);
            summary += fmt("%sD=%zu/n=%zu %.1f%%", summary.empty() ? "" : ", ", D, n,
                           100.0 * top1);
        }
    }
    return {true, "4 rows emitted: " + summary};
}

struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
};

const std::vector<Entry>& criteria() {
    static const std::vector<Entry> entries = {
        {1, "gradient exactness", crit_gradients},
        {2, "oracle equivalences", crit_oracles},
        {3, "permutation equivariance", crit_permutation},
        {4, "benchmark ordering", crit_benchmark},
        {5, "ablation ordering", crit_ablations},
        {6, "sparsity effect", crit_sparsity},
        {7, "localization", crit_localization},
        {8, "grad-cam properties", crit_gradcam},
        {9, "complexity accounting", crit_complexity},
        {10, "determinism", crit_determinism},
        {11, "hyperparameter sweep", crit_sweep},
    };
    return entries;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    bool all_pass = true;
    std::size_t ran = 0;
    for (const Entry& e : criteria()) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), e.id) == wanted.end())
            continue;
        std::fprintf(stderr, "[acceptance] criterion %d: %s\n", e.id, e.name);
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o = {false, fmt("exception: %s", ex.what())};
        }
        std::printf("criterion %2d  %-26s %s  %s\n", e.id, e.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
        ++ran;
    }
    std::printf("acceptance gate: %s (%zu criteria)\n", all_pass ? "PASS" : "FAIL", ran);
    return all_pass ? 0 : 3;
}
