#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vrseq/adversarial.hpp"
#include "vrseq/dataset.hpp"
#include "vrseq/model.hpp"

namespace vrseq {

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 1e-3;
    int patience = 10;       // early-stop window on validation total loss
    int batch_pairs = 8;
    double lambda = 0.6;
    FusionMode fusion = FusionMode::early;
    OptimizerKind optimizer = OptimizerKind::adam;
    std::uint64_t seed = 7;
    double train_fraction = 0.9;
    VrnnConfig model;
    int head_hidden = 32;

    void validate() const;
    AdversarialConfig adversarial() const {
        return {lambda, fusion, learning_rate, optimizer};
    }
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    LossBreakdown train, val;
    double val_kl = 0.0;
    double val_rank1 = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 0 when no epoch ran
    double wall_time_sec = 0.0;
};

// Per-epoch hook, called with the current (not best) parameters.
using EpochCallback = std::function<void(int epoch, const Model&)>;

// Resumable training state. Everything needed to continue a run bit-exactly
// lives here and round-trips through the checkpoint file.
struct TrainSession {
    TrainConfig cfg;
    std::unique_ptr<Model> model;
    OptimizerState opt;
    std::array<std::uint64_t, 4> rng_state{};
    int epochs_done = 0;
    int best_epoch = 0;
    double best_val_total = 0.0;
    std::map<std::string, std::vector<double>> best_params;
    TrainReport report;

    static TrainSession start(const CrossViewDataset& ds, const TrainConfig& cfg);

    // Runs epochs until cfg.epochs or the early-stop window closes. Returns
    // the stopping epoch count.
    int run(const CrossViewDataset& ds, const EpochCallback& callback = {});

    // Copies the best-validation snapshot into the live parameters (no-op if
    // nothing ran).
    void apply_best();
};

struct TrainResult {
    std::unique_ptr<Model> model;  // best-validation parameters
    TrainReport report;
};

TrainResult train(const CrossViewDataset& ds, const TrainConfig& cfg,
                  const EpochCallback& callback = {});

// Nine log-spaced values in [1e-2, 1]: 10^(-2 + k/4), k = 0..8.
std::vector<double> default_lambda_grid();

struct LambdaSelection {
    std::vector<double> grid;
    std::vector<double> risks;  // reverse-validation risk per grid value
    double best_lambda = 0.0;
    std::size_t best_index = 0;
};

// Reverse cross-validation: for each candidate, train the full system on the
// train split, pseudo-label its embeddings with the trained heads, fit a
// fresh reverse classifier on those pseudo-labels, and score that classifier
// against ground truth on the held-out probe validation split. Lowest risk
// wins (first occurrence on ties).
LambdaSelection select_lambda(const CrossViewDataset& ds, const std::vector<double>& grid,
                              const TrainConfig& cfg);

}  // namespace vrseq
