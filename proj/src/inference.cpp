#include "gcf/inference.hpp"

#include <cmath>
#include <cstring>

#include "gcf/error.hpp"

namespace gcf {

ClipDescriptorSet pad_clips(const ClipDescriptorSet& V, std::size_t target_C) {
    const std::size_t C = V.clip_count(), d = V.dim();
    require(C >= 1, "empty_input", "pad_clips: no clips to pad");
    require(target_C >= C, "validation",
            "pad_clips: target clip count is below the input count; truncation must be explicit");
    if (target_C == C) return V;
    Matrix out(target_C, d);
    for (std::size_t t = 0; t < target_C; ++t) {
        std::memcpy(out.row(t), V.V.row(t % C), d * sizeof(double));
    }
    return ClipDescriptorSet(std::move(out));
}

ClipDescriptorSet truncate_clips(const ClipDescriptorSet& V, std::size_t target_C) {
    const std::size_t C = V.clip_count(), d = V.dim();
    require(target_C >= 1 && target_C <= C, "validation",
            "truncate_clips: target must lie in [1, clip count]");
    if (target_C == C) return V;
    Matrix out(target_C, d);
    std::memcpy(out.data(), V.V.data(), target_C * d * sizeof(double));
    return ClipDescriptorSet(std::move(out));
}

namespace {

Vector clip_probability(const ClipDescriptorSet& V, const ClipClassifierParams& clf,
                        std::size_t clip) {
    Vector x(V.V.row(clip), V.V.row(clip) + V.dim());
    return softmax(matvec(clf.W, x));
}

}  // namespace

Vector central_clip_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf) {
    return central_clips_predict(V, clf, 1);
}

Vector central_clips_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf,
                             std::size_t k) {
    clf.validate();
    const std::size_t C = V.clip_count();
    require(C >= 1, "empty_input", "central prediction: no clips");
    require(k >= 1 && k <= C, "validation", "central prediction: k must lie in [1, clip count]");
    require(V.dim() == clf.W.cols(), "shape_mismatch",
            "central prediction: descriptor width does not match classifier");

    std::size_t start = C / 2 >= k / 2 ? C / 2 - k / 2 : 0;
    if (start + k > C) start = C - k;

    Vector acc(clf.W.rows(), 0.0);
    for (std::size_t c = start; c < start + k; ++c) {
        Vector y = clip_probability(V, clf, c);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += y[j];
    }
    return scale(acc, 1.0 / static_cast<double>(k));
}

Vector dense_clips_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf) {
    clf.validate();
    const std::size_t C = V.clip_count();
    require(C >= 1, "empty_input", "dense prediction: no clips");
    require(V.dim() == clf.W.cols(), "shape_mismatch",
            "dense prediction: descriptor width does not match classifier");

    Vector acc(clf.W.rows(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        Vector y = clip_probability(V, clf, c);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += y[j];
    }
    return scale(acc, 1.0 / static_cast<double>(C));
}

GcfPrediction gcf_predict(const ClipDescriptorSet& V, const GcfParams& params) {
    require(V.clip_count() == params.config.C, "shape_mismatch",
            "gcf_predict: clip count does not match the head (pad_clips first)");
    ForwardTrace trace = gcf_forward(V, params);
    return {std::move(trace.y), std::move(trace.att), trace.att_active};
}

double top1_accuracy(const std::vector<Vector>& predictions,
                     const std::vector<std::size_t>& labels) {
    require(!predictions.empty(), "empty_input", "top1_accuracy: no predictions");
    require(predictions.size() == labels.size(), "shape_mismatch",
            "top1_accuracy: prediction and label counts differ");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (argmax(predictions[i]) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

LocalizationResult localize(const Vector& att, double threshold) {
    require(std::isfinite(threshold), "validation", "localize: threshold must be finite");
    LocalizationResult result;
    result.att = att;
    result.threshold = threshold;
    for (std::size_t i = 0; i < att.size(); ++i) {
        require(std::isfinite(att[i]), "non_finite", "localize: non-finite attention value");
        if (att[i] > threshold) result.relevant_clips.push_back(i);
    }
    return result;
}

}  // namespace gcf
