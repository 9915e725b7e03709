#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "gcf/error.hpp"
#include "gcf/train.hpp"
#include "helpers.hpp"

using namespace gcf;
using testutil::max_abs_diff;

namespace {

// Tiny separable task: K gaussian blobs around orthogonal-ish means, every
// clip of a video drawn from the video's class blob.
std::vector<SyntheticVideo> blob_videos(std::size_t count, std::size_t C, std::size_t d,
                                        std::size_t K, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SyntheticVideo> out;
    out.reserve(count);
    for (std::size_t v = 0; v < count; ++v) {
        SyntheticVideo video;
        video.label = v % K;
        Matrix V(C, d);
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double mean = (j % K == video.label) ? 2.0 : 0.0;
                V(i, j) = mean + sigma * rng.next_gaussian();
            }
        video.descriptors = ClipDescriptorSet(V);
        out.push_back(std::move(video));
    }
    return out;
}

bool params_equal(const GcfParams& a, const GcfParams& b) {
    bool same = true;
    std::vector<const Matrix*> lhs;
    a.for_each_tensor([&](const std::string&, const Matrix& m) { lhs.push_back(&m); });
    std::size_t i = 0;
    b.for_each_tensor([&](const std::string&, const Matrix& m) {
        const Matrix& l = *lhs.at(i++);
        if (l.rows() != m.rows() || l.cols() != m.cols()) {
            same = false;
            return;
        }
        if (std::memcmp(l.values().data(), m.values().data(),
                        m.values().size() * sizeof(double)) != 0)
            same = false;
    });
    return same;
}

bool records_equal(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].epoch != b[i].epoch) return false;
        if (std::memcmp(&a[i].lr, &b[i].lr, sizeof(double)) != 0) return false;
        if (std::memcmp(&a[i].train_loss, &b[i].train_loss, sizeof(double)) != 0) return false;
        if (std::memcmp(&a[i].val_loss, &b[i].val_loss, sizeof(double)) != 0) return false;
        if (std::memcmp(&a[i].train_accuracy, &b[i].train_accuracy, sizeof(double)) != 0)
            return false;
        if (std::memcmp(&a[i].val_accuracy, &b[i].val_accuracy, sizeof(double)) != 0) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE_BEGIN("train");

TEST_CASE("plateau schedule walks 0.1 -> 1e-4 and stops after 13 flat epochs") {
    SgdConfig cfg;  // patience 3, factor 0.1, 3 reductions
    PlateauSchedule s = PlateauSchedule::init(cfg);
    CHECK(s.lr == 0.1);
    CHECK(std::isinf(s.best_val_loss));

    std::vector<double> lrs;
    int epochs = 0;
    while (!s.stopped) {
        s.observe(1.0, cfg, 1e-4);
        lrs.push_back(s.lr);
        ++epochs;
        REQUIRE(epochs < 100);
    }
    CHECK(epochs == 13);
    CHECK(lrs[0] == 0.1);   // first observation is an improvement over +inf
    CHECK(lrs[3] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(lrs[6] == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(lrs[9] == doctest::Approx(0.0001).epsilon(1e-12));
    CHECK(s.reductions_done == 3);
}

TEST_CASE("plateau schedule only counts improvements beyond min_delta") {
    SgdConfig cfg;
    cfg.plateau_patience = 2;
    PlateauSchedule s = PlateauSchedule::init(cfg);
    s.observe(1.0, cfg, 1e-4);
    CHECK(s.best_val_loss == 1.0);
    s.observe(1.0 - 5e-5, cfg, 1e-4);  // within min_delta: not an improvement
    CHECK(s.best_val_loss == 1.0);
    CHECK(s.bad_epochs == 1);
    s.observe(0.9, cfg, 1e-4);
    CHECK(s.best_val_loss == 0.9);
    CHECK(s.bad_epochs == 0);
}

TEST_CASE("training lowers the loss on a separable task") {
    auto train_set = blob_videos(60, 4, 6, 3, 0.3, 11);
    auto val_set = blob_videos(30, 4, 6, 3, 0.3, 12);

    GcfConfig cfg;
    cfg.C = 4;
    cfg.d = 6;
    cfg.D = 4;
    cfg.K = 3;
    Rng init_rng(77);
    GcfParams params = GcfParams::init(cfg, init_rng);
    SgdConfig sgd_cfg;
    sgd_cfg.batch_size = 8;
    LossConfig loss_cfg;
    TrainOptions opts;
    opts.max_epochs = 30;
    TrainerState state = TrainerState::init(params, sgd_cfg, 5);

    auto records = train_gcf(train_set, val_set, params, state, sgd_cfg, loss_cfg, opts);
    REQUIRE(!records.empty());
    CHECK(records.front().epoch == 1);
    CHECK(records.back().train_loss < records.front().train_loss);
    CHECK(records.back().val_accuracy > 0.8);
    CHECK(state.epochs_done == records.size());

    EvalStats stats = evaluate_gcf(val_set, params, loss_cfg);
    CHECK(stats.accuracy == records.back().val_accuracy);
    CHECK(stats.loss == records.back().val_loss);
}

TEST_CASE("same seed, same history, same weights") {
    auto train_set = blob_videos(40, 3, 5, 2, 0.4, 21);
    auto val_set = blob_videos(20, 3, 5, 2, 0.4, 22);

    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 5;
    cfg.D = 3;
    cfg.K = 2;
    SgdConfig sgd_cfg;
    sgd_cfg.batch_size = 7;
    LossConfig loss_cfg;
    TrainOptions opts;
    opts.max_epochs = 8;

    auto run = [&]() {
        Rng init_rng(99);
        GcfParams params = GcfParams::init(cfg, init_rng);
        TrainerState state = TrainerState::init(params, sgd_cfg, 13);
        auto records = train_gcf(train_set, val_set, params, state, sgd_cfg, loss_cfg, opts);
        return std::pair{params, records};
    };
    auto [p1, r1] = run();
    auto [p2, r2] = run();
    CHECK(params_equal(p1, p2));
    CHECK(records_equal(r1, r2));
}

TEST_CASE("worker count never changes the result") {
    auto train_set = blob_videos(30, 3, 5, 2, 0.4, 31);
    auto val_set = blob_videos(10, 3, 5, 2, 0.4, 32);

    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 5;
    cfg.D = 3;
    cfg.K = 2;
    SgdConfig sgd_cfg;
    sgd_cfg.batch_size = 8;
    LossConfig loss_cfg;

    auto run = [&](std::size_t workers) {
        Rng init_rng(55);
        GcfParams params = GcfParams::init(cfg, init_rng);
        TrainerState state = TrainerState::init(params, sgd_cfg, 7);
        TrainOptions opts;
        opts.max_epochs = 5;
        opts.workers = workers;
        auto records = train_gcf(train_set, val_set, params, state, sgd_cfg, loss_cfg, opts);
        return std::pair{params, records};
    };
    auto [p1, r1] = run(1);
    auto [p2, r2] = run(2);
    auto [p3, r3] = run(5);
    CHECK(params_equal(p1, p2));
    CHECK(params_equal(p1, p3));
    CHECK(records_equal(r1, r2));
    CHECK(records_equal(r1, r3));
}

TEST_CASE("zero learning rate leaves the parameters bitwise untouched") {
    auto train_set = blob_videos(20, 3, 4, 2, 0.4, 41);
    auto val_set = blob_videos(10, 3, 4, 2, 0.4, 42);

    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 4;
    cfg.D = 2;
    cfg.K = 2;
    Rng init_rng(1);
    GcfParams params = GcfParams::init(cfg, init_rng);
    GcfParams before = params;
    SgdConfig sgd_cfg;
    sgd_cfg.lr = 0.0;
    LossConfig loss_cfg;
    TrainOptions opts;
    opts.max_epochs = 3;
    TrainerState state = TrainerState::init(params, sgd_cfg, 3);
    train_gcf(train_set, val_set, params, state, sgd_cfg, loss_cfg, opts);
    CHECK(params_equal(params, before));
}

TEST_CASE("the epoch callback observes every record in order") {
    auto train_set = blob_videos(12, 3, 4, 2, 0.4, 51);
    auto val_set = blob_videos(6, 3, 4, 2, 0.4, 52);

    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 4;
    cfg.D = 2;
    cfg.K = 2;
    Rng init_rng(2);
    GcfParams params = GcfParams::init(cfg, init_rng);
    SgdConfig sgd_cfg;
    LossConfig loss_cfg;
    TrainOptions opts;
    opts.max_epochs = 4;
    std::vector<std::uint64_t> seen;
    opts.on_epoch = [&](const EpochRecord& r) { seen.push_back(r.epoch); };
    TrainerState state = TrainerState::init(params, sgd_cfg, 3);
    auto records = train_gcf(train_set, val_set, params, state, sgd_cfg, loss_cfg, opts);
    REQUIRE(seen.size() == records.size());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i + 1);
}

TEST_CASE("empty training set is rejected") {
    GcfConfig cfg;
    cfg.C = 3;
    cfg.d = 4;
    cfg.D = 2;
    cfg.K = 2;
    Rng init_rng(3);
    GcfParams params = GcfParams::init(cfg, init_rng);
    SgdConfig sgd_cfg;
    LossConfig loss_cfg;
    TrainOptions opts;
    TrainerState state = TrainerState::init(params, sgd_cfg, 3);
    auto val_set = blob_videos(4, 3, 4, 2, 0.4, 61);
    CHECK_THROWS_AS(train_gcf({}, val_set, params, state, sgd_cfg, loss_cfg, opts), GcfError);
}

TEST_CASE("clip classifier trains on flattened clips and improves") {
    auto train_set = blob_videos(50, 4, 6, 3, 0.3, 71);
    auto val_set = blob_videos(20, 4, 6, 3, 0.3, 72);

    ClipClassifierParams clf;
    clf.W = Matrix(3, 6);
    SgdConfig sgd_cfg;
    sgd_cfg.batch_size = 16;
    TrainOptions opts;
    opts.max_epochs = 25;
    auto records = train_clip_classifier(train_set, val_set, clf, sgd_cfg, opts, 9);
    REQUIRE(!records.empty());
    CHECK(records.back().val_accuracy > 0.7);
    CHECK(records.back().train_loss < records.front().train_loss);
}

TEST_SUITE_END();
