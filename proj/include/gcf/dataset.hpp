#pragma once

#include <cstdint>
#include <vector>

#include "gcf/fusion.hpp"

namespace gcf {

// One synthetic video: clip descriptors, a class label, and the ground-truth
// relevance mask (which clips carry the action). The mask is used only for
// scoring localization, never during training.
struct SyntheticVideo {
    ClipDescriptorSet descriptors;
    std::size_t label = 0;
    std::vector<std::uint8_t> relevance_mask;

    void validate() const;
};

struct DatasetSplits {
    std::vector<SyntheticVideo> train;
    std::vector<SyntheticVideo> val;
    std::vector<SyntheticVideo> test;
};

}  // namespace gcf
