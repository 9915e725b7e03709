#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/loss.hpp"
#include "gcf/rng.hpp"
#include "gcf/sgd.hpp"

namespace gcf {

// Reduce-on-plateau learning rate schedule: when validation loss fails to
// improve by min_delta for `patience` consecutive epochs, lr is scaled by
// lr_factor; after the allowed reductions the next plateau stops training.
struct PlateauSchedule {
    double lr = 0.1;
    double best_val_loss = 0.0;  // +inf until the first observation
    std::uint64_t bad_epochs = 0;
    std::uint64_t reductions_done = 0;
    bool stopped = false;

    static PlateauSchedule init(const SgdConfig& cfg);
    // Feed one epoch's validation loss; updates lr / stopped.
    void observe(double val_loss, const SgdConfig& cfg, double min_delta);
};

struct EpochRecord;

struct TrainOptions {
    std::size_t max_epochs = 200;
    double min_delta = 1e-4;
    std::size_t workers = 1;  // per-sample gradients within a batch
    // Invoked after each epoch's record is final; purely observational.
    std::function<void(const EpochRecord&)> on_epoch;

    void validate() const;
};

// Everything train_gcf mutates besides the parameters, sufficient to resume
// a run bitwise after serialization.
struct TrainerState {
    std::uint64_t epochs_done = 0;
    PlateauSchedule schedule;
    SgdState sgd;
    Rng shuffle_rng;

    static TrainerState init(const GcfParams& params, const SgdConfig& cfg, std::uint64_t seed);
};

// One line of training history. Train loss/accuracy are measured on the fly
// as the epoch's batches are consumed (the model evolves within the epoch);
// validation is a full pass with the post-epoch parameters.
struct EpochRecord {
    std::uint64_t epoch = 0;  // 1-based
    double lr = 0.0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Mean total_loss and top-1 accuracy of the head over a set of videos.
EvalStats evaluate_gcf(const std::vector<SyntheticVideo>& videos, const GcfParams& params,
                       const LossConfig& loss);

// Mini-batch SGD from state.epochs_done up to opts.max_epochs or until the
// schedule stops. Batches are contiguous chunks of a seeded shuffle; the
// final short batch is kept. Per-sample gradients are summed in sample order
// regardless of worker count, so results never depend on opts.workers.
// Returns one record per epoch actually run.
std::vector<EpochRecord> train_gcf(const std::vector<SyntheticVideo>& train_set,
                                   const std::vector<SyntheticVideo>& val_set, GcfParams& params,
                                   TrainerState& state, const SgdConfig& sgd_cfg,
                                   const LossConfig& loss_cfg, const TrainOptions& opts);

// --- per-clip linear baseline ---------------------------------------------------

// Linear softmax over raw clip descriptors, the stand-in clip-level
// classifier behind the central/dense prediction strategies.
struct ClipClassifierParams {
    Matrix W;  // K x d

    void validate() const;
};

// Trains the baseline with the same recipe: every clip of a video inherits
// the video label, batches are shuffled clips, plateau schedule on the
// validation clip loss.
std::vector<EpochRecord> train_clip_classifier(const std::vector<SyntheticVideo>& train_set,
                                               const std::vector<SyntheticVideo>& val_set,
                                               ClipClassifierParams& clf, const SgdConfig& sgd_cfg,
                                               const TrainOptions& opts, std::uint64_t seed);

}  // namespace gcf
