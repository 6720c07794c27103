#pragma once

#include <vector>

#include "vrseq/evaluate.hpp"
#include "vrseq/train.hpp"

namespace vrseq {

// Rank-1 over a (probe length, gallery length) grid; sequences shorter than
// a requested length are used whole, and the mean effective prefix lengths
// are recorded per cell.
struct LengthGrid {
    std::vector<int> lengths;            // requested, one axis
    std::vector<double> rank1;           // row-major probe x gallery
    std::vector<double> eff_probe_len;   // mean effective lengths per cell
    std::vector<double> eff_gallery_len;

    double at(int pi, int gi) const {
        return rank1[static_cast<size_t>(pi) * lengths.size() + gi];
    }
};

std::vector<int> default_length_grid();  // 1, 2, 4, ..., 128

LengthGrid variable_length_ablation(const Model& model, const CrossViewDataset& ds,
                                    const std::vector<int>& lengths = default_length_grid());

struct FusionAblationRow {
    FusionMode mode;
    int epoch = 0;
    double rank1 = 0.0;  // full-dataset retrieval at this checkpoint
};

// Trains twice from the same seed and data, differing only in fusion mode,
// and reports rank-1 at the given epoch checkpoints (the final epoch is
// always included).
std::vector<FusionAblationRow> fusion_ablation(const CrossViewDataset& ds,
                                               const TrainConfig& base,
                                               const std::vector<int>& checkpoints);

}  // namespace vrseq
