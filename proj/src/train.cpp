#include "gcf/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "gcf/error.hpp"

namespace gcf {

void SyntheticVideo::validate() const {
    require(descriptors.clip_count() >= 1, "validation", "video has no clips");
    if (!relevance_mask.empty()) {
        require(relevance_mask.size() == descriptors.clip_count(), "validation",
                "relevance mask length does not match clip count");
        bool any = false;
        for (auto b : relevance_mask) {
            require(b == 0 || b == 1, "validation", "relevance mask entries must be 0 or 1");
            any = any || b == 1;
        }
        require(any, "validation", "relevance mask marks no relevant clip");
    }
}

PlateauSchedule PlateauSchedule::init(const SgdConfig& cfg) {
    PlateauSchedule s;
    s.lr = cfg.lr;
    s.best_val_loss = std::numeric_limits<double>::infinity();
    return s;
}

void PlateauSchedule::observe(double val_loss, const SgdConfig& cfg, double min_delta) {
    if (stopped) return;
    if (val_loss <= best_val_loss - min_delta) {
        best_val_loss = val_loss;
        bad_epochs = 0;
        return;
    }
    ++bad_epochs;
    if (bad_epochs < cfg.plateau_patience) return;
    if (reductions_done < cfg.lr_reductions) {
        lr *= cfg.lr_factor;
        ++reductions_done;
        bad_epochs = 0;
    } else {
        stopped = true;
    }
}

void TrainOptions::validate() const {
    require(max_epochs >= 1, "validation", "train: max_epochs must be at least 1");
    require(std::isfinite(min_delta) && min_delta >= 0.0, "validation",
            "train: min_delta must be finite and non-negative");
    require(workers >= 1, "validation", "train: workers must be at least 1");
}

TrainerState TrainerState::init(const GcfParams& params, const SgdConfig& cfg,
                                std::uint64_t seed) {
    TrainerState s{0, PlateauSchedule::init(cfg), SgdState::init(params), Rng(seed).split("shuffle")};
    return s;
}

EvalStats evaluate_gcf(const std::vector<SyntheticVideo>& videos, const GcfParams& params,
                       const LossConfig& loss) {
    require(!videos.empty(), "validation", "evaluate: empty video set");
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& v : videos) {
        ForwardTrace trace = gcf_forward(v.descriptors, params);
        loss_sum += total_loss(trace, v.label, loss);
        if (argmax(trace.y) == v.label) ++correct;
    }
    return {loss_sum / static_cast<double>(videos.size()),
            static_cast<double>(correct) / static_cast<double>(videos.size())};
}

namespace {

// Per-sample gradients for [begin, end) of the shuffled order, stored into
// slots so the caller can fold them in sample order no matter who computed
// them.
void batch_worker(const std::vector<SyntheticVideo>& train_set,
                  const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  std::size_t stride, std::size_t offset, const GcfParams& params,
                  const LossConfig& loss_cfg, std::vector<GcfGrads>& grad_slots,
                  std::vector<double>& loss_slots, std::vector<std::uint8_t>& correct_slots) {
    for (std::size_t s = begin + offset; s < end; s += stride) {
        const SyntheticVideo& video = train_set[order[s]];
        ForwardTrace trace = gcf_forward(video.descriptors, params);
        grad_slots[s - begin] = gcf_backward(trace, video.label, loss_cfg, params);
        loss_slots[s - begin] = total_loss(trace, video.label, loss_cfg);
        correct_slots[s - begin] = argmax(trace.y) == video.label ? 1 : 0;
    }
}

void add_grads(GcfGrads& acc, const GcfGrads& g) {
    std::vector<Matrix*> dst;
    acc.for_each_tensor([&](const std::string&, Matrix& m) { dst.push_back(&m); });
    std::size_t i = 0;
    g.for_each_tensor([&](const std::string&, const Matrix& src) { *dst.at(i++) += src; });
}

void scale_grads(GcfGrads& acc, double s) {
    acc.for_each_tensor([&](const std::string&, Matrix& m) { m *= s; });
}

}  // namespace

std::vector<EpochRecord> train_gcf(const std::vector<SyntheticVideo>& train_set,
                                   const std::vector<SyntheticVideo>& val_set, GcfParams& params,
                                   TrainerState& state, const SgdConfig& sgd_cfg,
                                   const LossConfig& loss_cfg, const TrainOptions& opts) {
    sgd_cfg.validate();
    loss_cfg.validate();
    opts.validate();
    params.validate();
    require(!train_set.empty(), "validation", "train: empty training split");
    require(!val_set.empty(), "validation", "train: empty validation split");
    for (const auto& v : train_set) {
        require(v.label < params.config.K, "validation", "train: label out of range");
    }

    std::vector<EpochRecord> history;
    std::vector<std::size_t> order(train_set.size());
    const std::size_t slot_count = std::min<std::size_t>(sgd_cfg.batch_size, train_set.size());
    std::vector<GcfGrads> grad_slots(slot_count, GcfParams::zeros_like(params));
    std::vector<double> loss_slots(slot_count, 0.0);
    std::vector<std::uint8_t> correct_slots(slot_count, 0);

    while (!state.schedule.stopped && state.epochs_done < opts.max_epochs) {
        std::iota(order.begin(), order.end(), std::size_t(0));
        state.shuffle_rng.shuffle(order);

        SgdConfig step_cfg = sgd_cfg;
        step_cfg.lr = state.schedule.lr;

        double train_loss_sum = 0.0;
        std::size_t train_correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += sgd_cfg.batch_size) {
            const std::size_t end = std::min(begin + sgd_cfg.batch_size, order.size());
            const std::size_t count = end - begin;

            if (opts.workers <= 1 || count <= 1) {
                batch_worker(train_set, order, begin, end, 1, 0, params, loss_cfg, grad_slots,
                             loss_slots, correct_slots);
            } else {
                const std::size_t n = std::min(opts.workers, count);
                std::vector<std::thread> threads;
                threads.reserve(n);
                for (std::size_t w = 0; w < n; ++w) {
                    threads.emplace_back(batch_worker, std::cref(train_set), std::cref(order),
                                         begin, end, n, w, std::cref(params), std::cref(loss_cfg),
                                         std::ref(grad_slots), std::ref(loss_slots),
                                         std::ref(correct_slots));
                }
                for (auto& t : threads) t.join();
            }

            GcfGrads batch_grads = std::move(grad_slots[0]);
            for (std::size_t s = 1; s < count; ++s) add_grads(batch_grads, grad_slots[s]);
            scale_grads(batch_grads, 1.0 / static_cast<double>(count));
            for (std::size_t s = 0; s < count; ++s) {
                train_loss_sum += loss_slots[s];
                train_correct += correct_slots[s];
            }
            sgd_step(params, batch_grads, state.sgd, step_cfg);
            grad_slots[0] = std::move(batch_grads);  // reuse the storage next batch
        }

        EvalStats val = evaluate_gcf(val_set, params, loss_cfg);
        EpochRecord rec;
        rec.epoch = state.epochs_done + 1;
        rec.lr = state.schedule.lr;
        rec.train_loss = train_loss_sum / static_cast<double>(train_set.size());
        rec.train_accuracy =
            static_cast<double>(train_correct) / static_cast<double>(train_set.size());
        rec.val_loss = val.loss;
        rec.val_accuracy = val.accuracy;
        history.push_back(rec);
        if (opts.on_epoch) opts.on_epoch(rec);

        state.schedule.observe(val.loss, sgd_cfg, opts.min_delta);
        ++state.epochs_done;
    }
    return history;
}

// --- clip-level baseline ----------------------------------------------------------

void ClipClassifierParams::validate() const {
    require(W.rows() >= 2 && W.cols() >= 1, "validation",
            "clip classifier needs K >= 2 and d >= 1");
    W.ensure_finite("clip classifier weights");
}

namespace {

struct ClipRef {
    std::size_t video = 0;
    std::size_t clip = 0;
};

std::vector<ClipRef> flatten_clips(const std::vector<SyntheticVideo>& videos) {
    std::vector<ClipRef> refs;
    for (std::size_t v = 0; v < videos.size(); ++v) {
        for (std::size_t c = 0; c < videos[v].descriptors.clip_count(); ++c) {
            refs.push_back({v, c});
        }
    }
    return refs;
}

Vector clip_row(const SyntheticVideo& video, std::size_t clip) {
    const Matrix& V = video.descriptors.V;
    return Vector(V.row(clip), V.row(clip) + V.cols());
}

double clip_eval(const std::vector<SyntheticVideo>& videos, const ClipClassifierParams& clf,
                 double& accuracy) {
    double loss_sum = 0.0;
    std::size_t correct = 0, total = 0;
    for (const auto& video : videos) {
        for (std::size_t c = 0; c < video.descriptors.clip_count(); ++c) {
            Vector y = softmax(matvec(clf.W, clip_row(video, c)));
            loss_sum += cross_entropy(y, video.label);
            if (argmax(y) == video.label) ++correct;
            ++total;
        }
    }
    accuracy = static_cast<double>(correct) / static_cast<double>(total);
    return loss_sum / static_cast<double>(total);
}

}  // namespace

std::vector<EpochRecord> train_clip_classifier(const std::vector<SyntheticVideo>& train_set,
                                               const std::vector<SyntheticVideo>& val_set,
                                               ClipClassifierParams& clf, const SgdConfig& sgd_cfg,
                                               const TrainOptions& opts, std::uint64_t seed) {
    sgd_cfg.validate();
    opts.validate();
    clf.validate();
    require(!train_set.empty(), "validation", "train: empty training split");
    require(!val_set.empty(), "validation", "train: empty validation split");
    const std::size_t K = clf.W.rows();
    for (const auto& v : train_set) {
        require(v.label < K, "validation", "train: label out of range");
        require(v.descriptors.dim() == clf.W.cols(), "validation",
                "train: descriptor width does not match classifier");
    }

    std::vector<ClipRef> refs = flatten_clips(train_set);

    Rng rng = Rng(seed).split("shuffle");
    PlateauSchedule schedule = PlateauSchedule::init(sgd_cfg);
    Matrix buffer(clf.W.rows(), clf.W.cols());
    std::uint64_t steps = 0;

    std::vector<EpochRecord> history;
    for (std::size_t epoch = 1; epoch <= opts.max_epochs && !schedule.stopped; ++epoch) {
        rng.shuffle(refs);
        double train_loss_sum = 0.0;
        std::size_t train_correct = 0;
        for (std::size_t begin = 0; begin < refs.size(); begin += sgd_cfg.batch_size) {
            const std::size_t end = std::min(begin + sgd_cfg.batch_size, refs.size());
            Matrix grad(clf.W.rows(), clf.W.cols());
            for (std::size_t s = begin; s < end; ++s) {
                const SyntheticVideo& video = train_set[refs[s].video];
                Vector x = clip_row(video, refs[s].clip);
                Vector y = softmax(matvec(clf.W, x));
                train_loss_sum += cross_entropy(y, video.label);
                if (argmax(y) == video.label) ++train_correct;
                y[video.label] -= 1.0;
                grad += outer(y, x);
            }
            grad *= 1.0 / static_cast<double>(end - begin);

            const bool first = steps == 0;
            double* wp = clf.W.data();
            const double* gp = grad.data();
            double* bp = buffer.data();
            for (std::size_t i = 0; i < clf.W.size(); ++i) {
                const double decayed = gp[i] + sgd_cfg.weight_decay * wp[i];
                bp[i] = first ? decayed
                              : sgd_cfg.momentum * bp[i] + (1.0 - sgd_cfg.dampening) * decayed;
                wp[i] -= schedule.lr * bp[i];
            }
            ++steps;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = schedule.lr;
        rec.train_loss = train_loss_sum / static_cast<double>(refs.size());
        rec.train_accuracy = static_cast<double>(train_correct) / static_cast<double>(refs.size());
        rec.val_loss = clip_eval(val_set, clf, rec.val_accuracy);
        history.push_back(rec);
        if (opts.on_epoch) opts.on_epoch(rec);
        schedule.observe(rec.val_loss, sgd_cfg, opts.min_delta);
    }
    return history;
}

}  // namespace gcf
