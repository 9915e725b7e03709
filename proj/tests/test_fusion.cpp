#include <doctest.h>

#include <cmath>
#include <vector>

#include "gcf/error.hpp"
#include "gcf/fusion.hpp"
#include "gcf/gradcheck.hpp"
#include "helpers.hpp"

using namespace gcf;
using testutil::max_abs_diff;
using testutil::random_matrix;

namespace {

// Term-by-term restatement of the fused descriptor: plain index loops, no
// shared matrix helpers beyond element access.
Matrix pairwise_oracle(const Matrix& V, const FusionLayerParams& p, ScoreNormalization norm) {
    const std::size_t C = V.rows(), d = V.cols(), D = p.out_dim();
    auto project = [&](const Matrix& W, const Matrix& b) {
        Matrix out(C, D);
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < D; ++j) {
                double acc = b.empty() ? 0.0 : b(0, j);
                for (std::size_t k = 0; k < d; ++k) acc += V(i, k) * W(k, j);
                out(i, j) = acc;
            }
        return out;
    };
    Matrix Q = project(p.W_q, p.b_q), K = project(p.W_k, p.b_k), U = project(p.W_v, p.b_v);

    Matrix A(C, C);
    const double scale = 1.0 / std::sqrt(static_cast<double>(D));
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t j = 0; j < C; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < D; ++k) s += Q(i, k) * K(j, k);
            A(i, j) = s * scale;
        }
        if (norm == ScoreNormalization::softmax) {
            double mx = A(i, 0);
            for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, A(i, j));
            double denom = 0.0;
            for (std::size_t j = 0; j < C; ++j) denom += std::exp(A(i, j) - mx);
            for (std::size_t j = 0; j < C; ++j) A(i, j) = std::exp(A(i, j) - mx) / denom;
        }
    }

    Matrix B(C, D);
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t out = 0; out < D; ++out) {
            double acc = p.b_z.empty() ? 0.0 : p.b_z(0, out);
            for (std::size_t k = 0; k < D; ++k) {
                double h = 0.0;
                for (std::size_t j = 0; j < C; ++j) h += A(i, j) * U(j, k);
                acc += h * p.W_z(k, out);
            }
            B(i, out) = acc;
        }
    }
    return B;
}

Vector flatten(const Matrix& m) { return Vector(m.values().begin(), m.values().end()); }

Matrix unflatten(const Vector& v, std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, v);
}

}  // namespace

TEST_SUITE_BEGIN("fusion");

TEST_CASE("single clip collapses to the projected transform") {
    Rng rng(201);
    Matrix V = random_matrix(rng, 1, 5);
    FusionLayerParams p = FusionLayerParams::init(5, 3, false, rng);
    Matrix B = fusion_forward(V, p, ScoreNormalization::softmax);
    Matrix expect = matmul(matmul(V, p.W_v), p.W_z);
    CHECK(max_abs_diff(B, expect) < 1e-12);
}

TEST_CASE("zero query gives uniform weights and identical rows") {
    Rng rng(202);
    const std::size_t C = 4, d = 5, D = 3;
    Matrix V = random_matrix(rng, C, d);
    FusionLayerParams p = FusionLayerParams::init(d, D, false, rng);
    p.W_q = Matrix(d, D);  // zeros

    FusionCache cache;
    Matrix B = fusion_forward(V, p, ScoreNormalization::softmax, &cache);
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j)
            CHECK(cache.A(i, j) == doctest::Approx(1.0 / C).epsilon(1e-14));

    Matrix U = matmul(V, p.W_v);
    Vector mean_u = col_mean(U);
    Vector expect = matvec_transposed(p.W_z, mean_u);  // row vector times W_z
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < D; ++j)
            CHECK(std::abs(B(i, j) - expect[j]) < 1e-12);
}

TEST_CASE("matches the pairwise-loop oracle on 50 seeded instances") {
    const std::size_t Cs[] = {1, 2, 3, 4, 6};
    const std::size_t ds[] = {1, 2, 4, 5, 8};
    const std::size_t Ds[] = {1, 2, 3, 6};
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(300 + trial);
        const std::size_t C = Cs[rng.uniform_below(5)];
        const std::size_t d = ds[rng.uniform_below(5)];
        const std::size_t D = Ds[rng.uniform_below(4)];
        const bool bias = trial % 3 == 0;
        const auto norm =
            trial % 4 == 0 ? ScoreNormalization::divisor : ScoreNormalization::softmax;
        Matrix V = random_matrix(rng, C, d);
        FusionLayerParams p = FusionLayerParams::init(d, D, bias, rng);
        Matrix got = fusion_forward(V, p, norm);
        Matrix want = pairwise_oracle(V, p, norm);
        CHECK(max_abs_diff(got, want) < 1e-10);
    }
}

TEST_CASE("attention rows sum to 1 with entries in (0,1)") {
    Rng rng(203);
    Matrix V = random_matrix(rng, 5, 4, 2.0);
    FusionLayerParams p = FusionLayerParams::init(4, 3, false, rng);
    FusionCache cache;
    fusion_forward(V, p, ScoreNormalization::softmax, &cache);
    for (std::size_t i = 0; i < 5; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(cache.A(i, j) > 0.0);
            CHECK(cache.A(i, j) < 1.0);
            row_sum += cache.A(i, j);
        }
        CHECK(std::abs(row_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("permutation equivariance") {
    Rng rng(204);
    const std::size_t C = 6, d = 4, D = 3;
    Matrix V = random_matrix(rng, C, d);
    FusionLayerParams p = FusionLayerParams::init(d, D, false, rng);
    Matrix B = fusion_forward(V, p, ScoreNormalization::softmax);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> perm(C);
        for (std::size_t i = 0; i < C; ++i) perm[i] = i;
        rng.shuffle(perm);
        Matrix PV(C, d), PB(C, D);
        for (std::size_t i = 0; i < C; ++i) {
            for (std::size_t j = 0; j < d; ++j) PV(i, j) = V(perm[i], j);
            for (std::size_t j = 0; j < D; ++j) PB(i, j) = B(perm[i], j);
        }
        Matrix got = fusion_forward(PV, p, ScoreNormalization::softmax);
        CHECK(max_abs_diff(got, PB) < 1e-12);
    }
}

TEST_CASE("stacking: base case, trivial second layer, threefold composition") {
    Rng rng(205);
    const std::size_t C = 4, d = 5, D = 3;
    Matrix V = random_matrix(rng, C, d);

    std::vector<FusionLayerParams> one{FusionLayerParams::init(d, D, false, rng)};
    CHECK(max_abs_diff(stacked_fusion(V, one, ScoreNormalization::softmax),
                       fusion_forward(V, one[0], ScoreNormalization::softmax)) == 0.0);

    // second layer with zero scores and identity value/output: replicated row-mean
    std::vector<FusionLayerParams> two = one;
    FusionLayerParams trivial;
    trivial.W_q = Matrix(D, D);
    trivial.W_k = Matrix(D, D);
    trivial.W_v = Matrix::identity(D);
    trivial.W_z = Matrix::identity(D);
    two.push_back(trivial);
    Matrix first = fusion_forward(V, one[0], ScoreNormalization::softmax);
    Vector mean_row = col_mean(first);
    Matrix got = stacked_fusion(V, two, ScoreNormalization::softmax);
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < D; ++j)
            CHECK(std::abs(got(i, j) - mean_row[j]) < 1e-12);

    std::vector<FusionLayerParams> three{FusionLayerParams::init(d, D, false, rng),
                                         FusionLayerParams::init(D, D, false, rng),
                                         FusionLayerParams::init(D, D, false, rng)};
    Matrix manual = V;
    for (const auto& layer : three) manual = fusion_forward(manual, layer, ScoreNormalization::softmax);
    CHECK(max_abs_diff(stacked_fusion(V, three, ScoreNormalization::softmax), manual) < 1e-12);

    CHECK_THROWS_AS(stacked_fusion(V, {}, ScoreNormalization::softmax), GcfError);
    std::vector<FusionLayerParams> bad{FusionLayerParams::init(d, D, false, rng),
                                       FusionLayerParams::init(D + 1, D, false, rng)};
    CHECK_THROWS_AS(stacked_fusion(V, bad, ScoreNormalization::softmax), GcfError);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    Rng rng(206);
    Matrix V = random_matrix(rng, 3, 4);
    FusionLayerParams p = FusionLayerParams::init(4, 2, false, rng);
    FusionCache cache;
    fusion_forward(V, p, ScoreNormalization::softmax, &cache);
    FusionGrads g = fusion_backward(cache, p, Matrix(3, 2));
    CHECK(l1_norm(g.dX) == 0.0);
    CHECK(l1_norm(g.dW_q) == 0.0);
    CHECK(l1_norm(g.dW_k) == 0.0);
    CHECK(l1_norm(g.dW_v) == 0.0);
    CHECK(l1_norm(g.dW_z) == 0.0);
}

TEST_CASE("backward: uniform-attention identity case spreads dB evenly") {
    Rng rng(207);
    const std::size_t C = 4, d = 3;
    Matrix V = random_matrix(rng, C, d);
    FusionLayerParams p;
    p.W_q = Matrix(d, d);
    p.W_k = Matrix(d, d);
    p.W_v = Matrix::identity(d);
    p.W_z = Matrix::identity(d);

    FusionCache cache;
    fusion_forward(V, p, ScoreNormalization::softmax, &cache);
    Matrix dB = random_matrix(rng, C, d);
    FusionGrads g = fusion_backward(cache, p, dB);

    Vector col_totals = col_sum(dB);
    for (std::size_t j = 0; j < C; ++j)
        for (std::size_t k = 0; k < d; ++k)
            CHECK(std::abs(g.dX(j, k) - col_totals[k] / static_cast<double>(C)) < 1e-12);
}

TEST_CASE("backward matches finite differences on random instances") {
    const std::size_t Cs[] = {2, 4, 8};
    const std::size_t ds[] = {3, 8};
    const std::size_t Ds[] = {2, 6};
    int trial = 0;
    for (std::size_t C : Cs) {
        for (std::size_t d : ds) {
            for (std::size_t D : Ds) {
                Rng rng(400 + trial);
                const bool bias = trial % 2 == 1;
                const auto norm =
                    trial % 3 == 0 ? ScoreNormalization::divisor : ScoreNormalization::softmax;
                ++trial;
                Matrix V = random_matrix(rng, C, d);
                FusionLayerParams p = FusionLayerParams::init(d, D, bias, rng);

                FusionCache cache;
                Matrix B = fusion_forward(V, p, norm, &cache);
                FusionGrads analytic = fusion_backward(cache, p, B);  // dL/dB = B for L=0.5*|B|^2

                auto loss_with = [&](const FusionLayerParams& q, const Matrix& X) {
                    Matrix out = fusion_forward(X, q, norm);
                    double acc = 0.0;
                    for (double v : out.values()) acc += v * v;
                    return 0.5 * acc;
                };

                struct Probe {
                    Matrix* param;
                    const Matrix* grad;
                };
                FusionLayerParams probe_params = p;
                Matrix probe_V = V;
                std::vector<Probe> probes = {{&probe_V, &analytic.dX},
                                             {&probe_params.W_q, &analytic.dW_q},
                                             {&probe_params.W_k, &analytic.dW_k},
                                             {&probe_params.W_v, &analytic.dW_v},
                                             {&probe_params.W_z, &analytic.dW_z}};
                if (bias) {
                    probes.push_back({&probe_params.b_q, &analytic.db_q});
                    probes.push_back({&probe_params.b_k, &analytic.db_k});
                    probes.push_back({&probe_params.b_v, &analytic.db_v});
                    probes.push_back({&probe_params.b_z, &analytic.db_z});
                }
                for (auto& pr : probes) {
                    Vector flat = flatten(*pr.param);
                    const std::size_t rows = pr.param->rows(), cols = pr.param->cols();
                    auto f = [&](const Vector& x) {
                        *pr.param = unflatten(x, rows, cols);
                        return loss_with(probe_params, probe_V);
                    };
                    Vector numeric = finite_difference_grad(f, flat, 1e-5);
                    *pr.param = unflatten(flat, rows, cols);
                    Vector an = flatten(*pr.grad);
                    double worst = 0.0;
                    for (std::size_t i = 0; i < an.size(); ++i)
                        worst = std::max(worst, relative_error(an[i], numeric[i]));
                    CHECK(worst < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("backward rejects a cache that does not match the params") {
    Rng rng(208);
    Matrix V = random_matrix(rng, 3, 4);
    FusionLayerParams p = FusionLayerParams::init(4, 2, false, rng);
    FusionCache cache;
    fusion_forward(V, p, ScoreNormalization::softmax, &cache);
    FusionLayerParams other = FusionLayerParams::init(5, 2, false, rng);
    CHECK_THROWS_AS(fusion_backward(cache, other, Matrix(3, 2)), GcfError);
}

TEST_SUITE_END();
