#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vrseq/param_store.hpp"
#include "vrseq/sequence.hpp"
#include "vrseq/vrnn.hpp"

namespace vrseq {

// Identity classifier over embeddings (2-layer MLP, logit width = number of
// identities). head_y scores probe-view embeddings, head_d gallery-view ones.
struct ClassifierHead {
    Mlp mlp;
    int num_classes = 0;

    static ClassifierHead create(ParamStore& store, const std::string& group, int latent_dim,
                                 int hidden, int num_classes, Rng& rng);
};

std::vector<double> classify(std::span<const double> emb, const ClassifierHead& head,
                             Mlp::Cache* cache = nullptr);

enum class FusionMode { early, late };
enum class OptimizerKind { adam, sgd };

struct AdversarialConfig {
    double lambda = 0.6;
    FusionMode fusion = FusionMode::early;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
};

struct LossBreakdown {
    double vrnn = 0.0;     // L_V, length-normalised, averaged over the pair
    double cls_y = 0.0;    // L_y
    double cls_d = 0.0;    // L_d
    double cls = 0.0;      // L_C = L_y + L_d
    double reg = 0.0;      // L_R, cross-applied verification loss
    double total = 0.0;    // E = L_V + L_C + lambda * L_R
};

// Identity in the forward pass; the backward companion scales the upstream
// gradient by -lambda. Training wires the cross-view term's backward seed
// through it, which turns the saddle-point formulation into a descent
// direction shared by every parameter group.
Tensor gradient_reversal(const Tensor& x, double lambda);
std::vector<double> gradient_reversal_backward(std::span<const double> upstream,
                                               double lambda);

struct SequencePair {
    const FrameSequence* probe = nullptr;
    const FrameSequence* gallery = nullptr;
    int label = 0;
};
using PairBatch = std::vector<SequencePair>;

// Straight per-view classification losses on the final posterior-mean
// embeddings: (L_y, L_d).
std::pair<double, double> classification_losses(const SequencePair& pair,
                                                const VrnnModel& model,
                                                const ClassifierHead& head_y,
                                                const ClassifierHead& head_d);

// Cross-applied verification loss for one pair: gallery head scored on the
// probe embedding plus probe head scored on the gallery embedding.
double verification_regularizer(const SequencePair& pair, const VrnnModel& model,
                                const ClassifierHead& head_y, const ClassifierHead& head_d);

// Full objective over a batch of identity pairs. Early fusion applies the
// cross-view term to the posterior mean at every step (averaged over t),
// late fusion only at the final step; the straight classification losses
// always act on the final step, so with lambda == 0 the two modes coincide
// exactly. When with_grad is set, gradients of `total` accumulate into the
// store for every group.
LossBreakdown total_objective(const PairBatch& batch, const VrnnModel& model,
                              const ClassifierHead& head_y, const ClassifierHead& head_d,
                              const AdversarialConfig& cfg, Rng& rng, bool with_grad);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t step = 0;
    std::map<std::string, std::vector<double>> m, v;
};

// One update from the gradients currently in the store. Throws on any
// non-finite gradient, naming the offending parameter.
void update_step(ParamStore& params, double learning_rate, OptimizerState& opt);

}  // namespace vrseq
