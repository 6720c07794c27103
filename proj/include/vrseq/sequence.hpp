#pragma once

#include <stdexcept>
#include <vector>

namespace vrseq {

enum class ViewTag { probe, gallery };

// One identity's observed feature-vector sequence under one camera view.
struct FrameSequence {
    std::vector<std::vector<double>> frames;
    int label = 0;
    ViewTag view = ViewTag::probe;

    int length() const { return static_cast<int>(frames.size()); }
    int dim() const { return frames.empty() ? 0 : static_cast<int>(frames[0].size()); }

    void validate() const {
        if (frames.empty()) throw std::invalid_argument("FrameSequence: empty sequence");
        for (const auto& f : frames)
            if (f.size() != frames[0].size())
                throw std::invalid_argument("FrameSequence: ragged frame dimensions");
    }

    // Prefix view used by the variable-length study.
    FrameSequence truncated(int max_len) const {
        FrameSequence out = *this;
        if (max_len < length())
            out.frames.assign(frames.begin(), frames.begin() + max_len);
        return out;
    }
};

// Final latent representation used for matching.
struct SequenceEmbedding {
    std::vector<double> z;
    ViewTag view = ViewTag::probe;
    int label = 0;
};

}  // namespace vrseq
