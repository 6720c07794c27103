#pragma once

#include <string>

#include "vrseq/dataset.hpp"
#include "vrseq/train.hpp"

namespace vrseq {

// Serialises the complete training state: configuration, current parameter
// table, best-validation snapshot, optimizer moments, rng state and the
// per-epoch report. Loading and continuing reproduces the uninterrupted
// run's losses bit-exactly.
void save_checkpoint(const TrainSession& session, const std::string& path);

// `ds` must be the dataset the checkpoint was trained on (seed and shape are
// fingerprinted).
TrainSession load_checkpoint(const CrossViewDataset& ds, const std::string& path);

// Convenience for inference: loads the checkpoint and applies the
// best-validation parameters.
std::unique_ptr<Model> load_model_for_eval(const CrossViewDataset& ds,
                                           const std::string& path);

}  // namespace vrseq
