#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vrseq/sequence.hpp"
#include "vrseq/tensor.hpp"

namespace vrseq {

// Synthetic stand-in for one pedestrian: a static appearance vector plus a
// few sinusoidal motion components that modulate it over time.
struct IdentitySpec {
    int id = 0;
    std::vector<double> base;
    std::vector<double> freq, phase, amp;
};

// Affine camera-view distortion with additive observation noise.
struct ViewTransform {
    Tensor a;  // D x D
    std::vector<double> b;
    double noise_std = 0.0;
};

struct DatasetConfig {
    int num_identities = 32;
    int frame_dim = 32;
    int len_min = 8, len_max = 32;
    std::uint64_t seed = 1;
    double view_gap = 1.0;   // 0 plus zero noise makes both views identical
    double noise_std = 0.1;
    int motion_components = 3;
};

struct CrossViewDataset {
    DatasetConfig cfg;
    std::vector<IdentitySpec> identities;
    ViewTransform probe_view, gallery_view;
    std::vector<FrameSequence> probe;    // one per identity, label = identity index
    std::vector<FrameSequence> gallery;

    int num_identities() const { return static_cast<int>(identities.size()); }
    void validate() const;
};

// Frame t of identity i under view v:
//   ViewTransform_v(base_i + sum_k amp_k * sin(freq_k * t + phase_k)) + noise
// Fully reproducible from cfg.seed; per-identity streams are derived from it
// so identities can be generated independently.
CrossViewDataset generate_dataset(const DatasetConfig& cfg);

struct TrainValSplit {
    std::vector<int> train_ids, val_ids;
};

// Disjoint identity split: ceil(fraction * L) train, remainder validation,
// shuffled by seed.
TrainValSplit split_train_val(const CrossViewDataset& ds, double fraction,
                              std::uint64_t seed);

void save_dataset(const CrossViewDataset& ds, const std::string& path);
CrossViewDataset load_dataset(const std::string& path);

bool datasets_equal(const CrossViewDataset& a, const CrossViewDataset& b);

}  // namespace vrseq
