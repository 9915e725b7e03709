#include <doctest.h>

#include <cmath>
#include <vector>

#include "gcf/error.hpp"
#include "gcf/gradcheck.hpp"
#include "gcf/loss.hpp"
#include "helpers.hpp"

using namespace gcf;
using testutil::random_matrix;

namespace {

Vector pack(const GcfParams& params) {
    Vector flat;
    params.for_each_tensor([&](const std::string&, const Matrix& m) {
        flat.insert(flat.end(), m.values().begin(), m.values().end());
    });
    return flat;
}

void unpack(GcfParams& params, const Vector& flat) {
    std::size_t pos = 0;
    params.for_each_tensor([&](const std::string&, Matrix& m) {
        auto span = m.values();
        for (std::size_t i = 0; i < span.size(); ++i) span[i] = flat.at(pos++);
    });
}

}  // namespace

TEST_SUITE_BEGIN("loss");

TEST_CASE("cross entropy of a one-hot prediction is zero") {
    CHECK(cross_entropy({0.0, 1.0, 0.0}, 1) == 0.0);
}

TEST_CASE("cross entropy of a uniform prediction is log K") {
    const std::size_t K = 600;
    Vector y(K, 1.0 / K);
    CHECK(cross_entropy(y, 123) == doctest::Approx(std::log(600.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy is minus the log probability") {
    Vector y = {0.1, 0.7, 0.2};
    CHECK(std::abs(cross_entropy(y, 0) - (-std::log(0.1))) < 1e-12);
    CHECK(std::abs(cross_entropy(y, 2) - (-std::log(0.2))) < 1e-12);
    CHECK_THROWS_AS(cross_entropy(y, 3), GcfError);
}

TEST_CASE("cross entropy clamps vanishing probabilities") {
    Vector y = {1.0, 0.0};
    double v = cross_entropy(y, 1);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(-std::log(1e-300)).epsilon(1e-12));
}

TEST_CASE("sparsity loss is the plain L1 norm") {
    CHECK(sparsity_loss({0.5, 0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-15));
    double acc = 0.0;
    Vector att;
    Rng rng(601);
    for (int i = 0; i < 17; ++i) {
        att.push_back(rng.next_double());
        acc += att.back();
    }
    CHECK(sparsity_loss(att) == doctest::Approx(acc).epsilon(1e-15));
}

TEST_CASE("total loss composes the two terms") {
    ForwardTrace t;
    t.att = Vector(10, 0.5);
    t.att_active = true;
    t.y = {std::exp(-2.0), 1.0 - std::exp(-2.0)};  // classification term is exactly 2
    LossConfig cfg;
    cfg.lambda = 0.01;
    CHECK(total_loss(t, 0, cfg) == doctest::Approx(2.0 + 0.01 * 5.0).epsilon(1e-12));

    cfg.lambda = 0.0;
    CHECK(total_loss(t, 0, cfg) == doctest::Approx(2.0).epsilon(1e-12));

    cfg.lambda = 0.01;
    t.att_active = false;  // skipped gate: sentinel ones must not be penalized
    CHECK(total_loss(t, 0, cfg) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("loss config rejects bad lambda") {
    LossConfig cfg;
    cfg.lambda = -0.5;
    CHECK_THROWS_AS(cfg.validate(), GcfError);
    cfg.lambda = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), GcfError);
}

TEST_CASE("backward matches finite differences across modes and biases") {
    const GcfMode modes[] = {GcfMode::full, GcfMode::inter_clip_only, GcfMode::clip_wise_only};
    int trial = 0;
    for (GcfMode mode : modes) {
        for (bool bias : {false, true}) {
            Rng rng(700 + trial++);
            GcfConfig cfg;
            cfg.C = 2;
            cfg.d = 3;
            cfg.D = 2;
            cfg.K = 2;
            cfg.n = 1;
            cfg.h = 2;
            cfg.mode = mode;
            cfg.with_bias = bias;
            GcfParams params = GcfParams::init(cfg, rng);
            ClipDescriptorSet clips(random_matrix(rng, cfg.C, cfg.d));
            const std::size_t label = 1;
            LossConfig loss_cfg;
            loss_cfg.lambda = 0.01;

            ForwardTrace trace = gcf_forward(clips, params);
            GcfGrads analytic = gcf_backward(trace, label, loss_cfg, params);

            GcfParams probe = params;
            auto f = [&](const Vector& x) {
                unpack(probe, x);
                return total_loss(gcf_forward(clips, probe), label, loss_cfg);
            };
            Vector flat = pack(params);
            Vector numeric = finite_difference_grad(f, flat, 1e-5);
            Vector an = pack(analytic);
            REQUIRE(an.size() == numeric.size());
            double worst = 0.0;
            for (std::size_t i = 0; i < an.size(); ++i)
                worst = std::max(worst, relative_error(an[i], numeric[i]));
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("a saturated gate contributes vanishing gate gradients") {
    Rng rng(602);
    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 4;
    cfg.D = 2;
    cfg.K = 2;
    cfg.with_bias = true;
    GcfParams params = GcfParams::init(cfg, rng);
    for (std::size_t i = 0; i < cfg.C; ++i) params.gating.b2(0, i) = 45.0;  // att -> 1

    ClipDescriptorSet clips(random_matrix(rng, cfg.C, cfg.d));
    ForwardTrace trace = gcf_forward(clips, params);
    for (double a : trace.att) CHECK(a > 1.0 - 1e-12);

    LossConfig loss_cfg;
    GcfGrads g = gcf_backward(trace, 0, loss_cfg, params);
    CHECK(l1_norm(g.gating.W1) < 1e-6);
    CHECK(l1_norm(g.gating.W2) < 1e-6);
    // the classifier still learns
    CHECK(l1_norm(g.classifier.W3) > 1e-6);
}

TEST_CASE("gradients are affine in lambda") {
    Rng rng(603);
    GcfConfig cfg;
    cfg.C = 4;
    cfg.d = 3;
    cfg.D = 3;
    cfg.K = 3;
    GcfParams params = GcfParams::init(cfg, rng);
    ClipDescriptorSet clips(random_matrix(rng, cfg.C, cfg.d));
    ForwardTrace trace = gcf_forward(clips, params);

    auto grads_at = [&](double lambda) {
        LossConfig c;
        c.lambda = lambda;
        return pack(gcf_backward(trace, 2, c, params));
    };
    Vector g0 = grads_at(0.0);
    Vector g1 = grads_at(0.03);
    Vector g2 = grads_at(0.06);
    for (std::size_t i = 0; i < g0.size(); ++i) {
        double lhs = g2[i] - g0[i];
        double rhs = 2.0 * (g1[i] - g0[i]);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("backward rejects a trace from a different mode") {
    Rng rng(604);
    GcfConfig cfg;
    cfg.C = 2;
    cfg.d = 3;
    cfg.D = 2;
    cfg.K = 2;
    GcfParams params = GcfParams::init(cfg, rng);
    ClipDescriptorSet clips(random_matrix(rng, cfg.C, cfg.d));
    ForwardTrace trace = gcf_forward(clips, params);

    GcfConfig other_cfg = cfg;
    other_cfg.mode = GcfMode::inter_clip_only;
    GcfParams other = GcfParams::init(other_cfg, rng);
    LossConfig loss_cfg;
    CHECK_THROWS_AS(gcf_backward(trace, 0, loss_cfg, other), GcfError);
    CHECK_THROWS_AS(gcf_backward(trace, 99, loss_cfg, params), GcfError);
}

TEST_SUITE_END();
