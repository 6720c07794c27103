#pragma once

#include <span>
#include <string>
#include <vector>

#include "vrseq/gaussian.hpp"
#include "vrseq/light_lstm.hpp"
#include "vrseq/mlp.hpp"
#include "vrseq/param_store.hpp"
#include "vrseq/sequence.hpp"

namespace vrseq {

struct VrnnConfig {
    int frame_dim = 32;
    int feat_dim = 32;    // output width of the phi_x / phi_z feature maps
    int latent_dim = 16;
    int mlp_hidden = 32;
    int cell_dim = 64;    // M
    int proj_dim = 16;    // R
    int lstm_layers = 3;

    LightLstmConfig lstm_config() const {
        return {2 * feat_dim, cell_dim, proj_dim, lstm_layers};
    }
    void validate() const;
};

// Variational recurrent network. At each step the posterior is inferred from
// the featurised frame and the previous recurrent output, the prior from the
// recurrent output alone, and the decoder reconstructs the frame from the
// featurised latent sample. The recurrence consumes both feature maps.
//
// Parameter groups: everything except the decoder head registers under
// "encoder"; the decoder head registers under "decoder".
struct VrnnModel {
    VrnnConfig cfg;
    Mlp phi_x, phi_z;
    GaussianHead enc, prior, dec;
    LightLstmWeights lstm;

    static VrnnModel create(ParamStore& store, const VrnnConfig& cfg, Rng& rng);

    GaussianParams encode_step(std::span<const double> x_t, std::span<const double> h_prev,
                               Mlp::Cache* fx_cache = nullptr,
                               GaussianHead::Cache* enc_cache = nullptr,
                               std::vector<double>* fx_out = nullptr) const;
    GaussianParams prior_step(std::span<const double> h_prev,
                              GaussianHead::Cache* cache = nullptr) const;
    GaussianParams decode_step(std::span<const double> z_t, std::span<const double> h_prev,
                               Mlp::Cache* fz_cache = nullptr,
                               GaussianHead::Cache* dec_cache = nullptr,
                               std::vector<double>* fz_out = nullptr) const;
    RecurrentState recurrence_update(const RecurrentState& prev, std::span<const double> x_t,
                                     std::span<const double> z_t,
                                     LstmStepCache* cache = nullptr) const;
};

// Everything retained from one sequence forward pass.
struct StepTrace {
    std::vector<GaussianParams> posterior;
    std::vector<GaussianParams> prior;
    std::vector<GaussianParams> decoder;
    std::vector<std::vector<double>> z;  // sampled latents
    std::vector<RecurrentState> states;

    struct StepCache {
        Mlp::Cache phi_x, phi_z;
        std::vector<double> fx, fz;
        GaussianHead::Cache enc, prior, dec;
        std::vector<double> eps;
        LstmStepCache lstm;
    };
    std::vector<StepCache> caches;

    int length() const { return static_cast<int>(posterior.size()); }
};

// Sum over steps of KL(posterior || prior) + reconstruction NLL, one
// reparameterized sample per step; the quantity is minimised in training.
double elbo(const FrameSequence& seq, const VrnnModel& model, Rng& rng,
            StepTrace* trace = nullptr);

// Reverse pass for one traced sequence. w_kl / w_nll weight the per-step KL
// and reconstruction terms; d_post_mean (when non-empty) carries external
// per-step gradients on the posterior mean, e.g. from classifier heads.
void vrnn_backward(const FrameSequence& seq, const VrnnModel& model, const StepTrace& trace,
                   double w_kl, double w_nll,
                   const std::vector<std::vector<double>>& d_post_mean);

enum class EmbedMode { mean, sample };

// Runs the recurrence deterministically (latents fixed at their posterior
// means) and returns the final-step posterior mean, or one sample from the
// final-step posterior when mode == sample.
SequenceEmbedding embed_sequence(const FrameSequence& seq, const VrnnModel& model,
                                 EmbedMode mode, Rng& rng);

}  // namespace vrseq
