#include "vrseq/vrnn.hpp"

#include <stdexcept>

namespace vrseq {

void VrnnConfig::validate() const {
    if (frame_dim < 1 || feat_dim < 1 || latent_dim < 1 || mlp_hidden < 1)
        throw std::invalid_argument("VrnnConfig: dims must be >= 1");
    lstm_config().validate();
}

VrnnModel VrnnModel::create(ParamStore& store, const VrnnConfig& cfg, Rng& rng) {
    cfg.validate();
    VrnnModel m;
    m.cfg = cfg;
    const int h = cfg.mlp_hidden, r = cfg.proj_dim;
    m.phi_x = Mlp::create(store, "encoder/phi_x", cfg.frame_dim, h, cfg.feat_dim, rng);
    m.phi_z = Mlp::create(store, "encoder/phi_z", cfg.latent_dim, h, cfg.feat_dim, rng);
    m.enc = GaussianHead::create(store, "encoder/enc", cfg.feat_dim + r, h, cfg.latent_dim, rng);
    m.prior = GaussianHead::create(store, "encoder/prior", r, h, cfg.latent_dim, rng);
    m.lstm = LightLstmWeights::create(store, "encoder/lstm", cfg.lstm_config(), rng);
    m.dec = GaussianHead::create(store, "decoder/dec", cfg.feat_dim + r, h, cfg.frame_dim, rng);
    return m;
}

namespace {
std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}
}  // namespace

GaussianParams VrnnModel::encode_step(std::span<const double> x_t,
                                      std::span<const double> h_prev, Mlp::Cache* fx_cache,
                                      GaussianHead::Cache* enc_cache,
                                      std::vector<double>* fx_out) const {
    if (static_cast<int>(x_t.size()) != cfg.frame_dim)
        throw std::invalid_argument("encode_step: frame dim mismatch");
    if (static_cast<int>(h_prev.size()) != cfg.proj_dim)
        throw std::invalid_argument("encode_step: hidden dim mismatch");
    std::vector<double> fx = phi_x.forward(x_t, fx_cache);
    GaussianParams g = enc.forward(concat(fx, h_prev), enc_cache);
    if (fx_out) *fx_out = std::move(fx);
    return g;
}

GaussianParams VrnnModel::prior_step(std::span<const double> h_prev,
                                     GaussianHead::Cache* cache) const {
    if (static_cast<int>(h_prev.size()) != cfg.proj_dim)
        throw std::invalid_argument("prior_step: hidden dim mismatch");
    return prior.forward(h_prev, cache);
}

GaussianParams VrnnModel::decode_step(std::span<const double> z_t,
                                      std::span<const double> h_prev, Mlp::Cache* fz_cache,
                                      GaussianHead::Cache* dec_cache,
                                      std::vector<double>* fz_out) const {
    if (static_cast<int>(z_t.size()) != cfg.latent_dim)
        throw std::invalid_argument("decode_step: latent dim mismatch");
    if (static_cast<int>(h_prev.size()) != cfg.proj_dim)
        throw std::invalid_argument("decode_step: hidden dim mismatch");
    std::vector<double> fz = phi_z.forward(z_t, fz_cache);
    GaussianParams g = dec.forward(concat(fz, h_prev), dec_cache);
    if (fz_out) *fz_out = std::move(fz);
    return g;
}

RecurrentState VrnnModel::recurrence_update(const RecurrentState& prev,
                                            std::span<const double> x_t,
                                            std::span<const double> z_t,
                                            LstmStepCache* cache) const {
    std::vector<double> fx = phi_x.forward(x_t);
    std::vector<double> fz = phi_z.forward(z_t);
    return light_lstm_step(concat(fx, fz), prev, lstm, cache);
}

double elbo(const FrameSequence& seq, const VrnnModel& model, Rng& rng, StepTrace* trace) {
    seq.validate();
    if (seq.dim() != model.cfg.frame_dim)
        throw std::invalid_argument("elbo: frame dim mismatch");
    const int t_len = seq.length();

    StepTrace local;
    StepTrace& tr = trace ? *trace : local;
    tr.posterior.resize(t_len);
    tr.prior.resize(t_len);
    tr.decoder.resize(t_len);
    tr.z.resize(t_len);
    tr.states.resize(t_len);
    tr.caches.resize(t_len);

    RecurrentState state = RecurrentState::zeros(model.cfg.lstm_config());
    double loss = 0.0;
    for (int t = 0; t < t_len; ++t) {
        auto& cache = tr.caches[t];
        const std::vector<double>& h_prev = state.top_r();

        tr.posterior[t] =
            model.encode_step(seq.frames[t], h_prev, &cache.phi_x, &cache.enc, &cache.fx);
        tr.prior[t] = model.prior_step(h_prev, &cache.prior);
        tr.z[t] = reparameterize(tr.posterior[t], rng, &cache.eps);
        tr.decoder[t] =
            model.decode_step(tr.z[t], h_prev, &cache.phi_z, &cache.dec, &cache.fz);

        loss += gaussian_kl_diag(tr.posterior[t], tr.prior[t]);
        loss += gaussian_nll(seq.frames[t], tr.decoder[t]);

        state = light_lstm_step(concat(cache.fx, cache.fz), state, model.lstm, &cache.lstm);
        tr.states[t] = state;
    }
    return loss;
}

void vrnn_backward(const FrameSequence& seq, const VrnnModel& model, const StepTrace& trace,
                   double w_kl, double w_nll,
                   const std::vector<std::vector<double>>& d_post_mean) {
    const int t_len = seq.length();
    if (trace.length() != t_len)
        throw std::invalid_argument("vrnn_backward: trace does not match sequence");
    if (!d_post_mean.empty() && static_cast<int>(d_post_mean.size()) != t_len)
        throw std::invalid_argument("vrnn_backward: upstream grads do not match sequence");

    const auto lstm_cfg = model.cfg.lstm_config();
    const int feat = model.cfg.feat_dim, zdim = model.cfg.latent_dim, r = model.cfg.proj_dim;

    LstmBackwardCarry carry = LstmBackwardCarry::zeros(lstm_cfg);
    const RecurrentState zero_state = RecurrentState::zeros(lstm_cfg);
    std::vector<double> d_h(r, 0.0);  // gradient on h_t from step t+1's consumers

    for (int t = t_len - 1; t >= 0; --t) {
        const auto& cache = trace.caches[t];

        std::vector<double> d_po_mean(zdim, 0.0), d_po_std(zdim, 0.0);
        std::vector<double> d_pr_mean(zdim, 0.0), d_pr_std(zdim, 0.0);
        if (!d_post_mean.empty() && !d_post_mean[t].empty()) {
            if (static_cast<int>(d_post_mean[t].size()) != zdim)
                throw std::invalid_argument("vrnn_backward: upstream grad dim mismatch");
            add_scaled(d_po_mean, d_post_mean[t], 1.0);
        }
        if (w_kl != 0.0)
            gaussian_kl_diag_backward(trace.posterior[t], trace.prior[t], w_kl, d_po_mean,
                                      d_po_std, d_pr_mean, d_pr_std);

        std::vector<double> d_dec_mean(model.cfg.frame_dim, 0.0),
            d_dec_std(model.cfg.frame_dim, 0.0);
        if (w_nll != 0.0)
            gaussian_nll_backward(seq.frames[t], trace.decoder[t], w_nll, d_dec_mean,
                                  d_dec_std);

        // recurrence first: its input gradient feeds the feature maps below
        const RecurrentState& prev = t == 0 ? zero_state : trace.states[t - 1];
        std::vector<double> d_u = lstm_backward_step(cache.lstm, prev, d_h, carry, model.lstm);

        // decoder head -> (d_fz, d_h_prev)
        std::vector<double> d_dec_in = model.dec.backward(cache.dec, d_dec_mean, d_dec_std);
        std::vector<double> d_fz(d_dec_in.begin(), d_dec_in.begin() + feat);
        std::vector<double> d_h_prev(d_dec_in.begin() + feat, d_dec_in.end());
        add_scaled(d_fz, std::span<const double>(d_u).subspan(feat, feat), 1.0);

        // phi_z -> latent sample -> posterior parameters
        std::vector<double> d_z = model.phi_z.backward(cache.phi_z, d_fz);
        for (int d = 0; d < zdim; ++d) {
            d_po_mean[d] += d_z[d];
            d_po_std[d] += d_z[d] * cache.eps[d];
        }

        // encoder head -> (d_fx, d_h_prev)
        std::vector<double> d_enc_in = model.enc.backward(cache.enc, d_po_mean, d_po_std);
        std::vector<double> d_fx(d_enc_in.begin(), d_enc_in.begin() + feat);
        add_scaled(d_h_prev, std::span<const double>(d_enc_in).subspan(feat, r), 1.0);
        add_scaled(d_fx, std::span<const double>(d_u).subspan(0, feat), 1.0);

        std::vector<double> d_h_prior = model.prior.backward(cache.prior, d_pr_mean, d_pr_std);
        add_scaled(d_h_prev, d_h_prior, 1.0);

        model.phi_x.backward(cache.phi_x, d_fx);  // input gradient not needed

        d_h = std::move(d_h_prev);
    }
}

SequenceEmbedding embed_sequence(const FrameSequence& seq, const VrnnModel& model,
                                 EmbedMode mode, Rng& rng) {
    seq.validate();
    if (seq.dim() != model.cfg.frame_dim)
        throw std::invalid_argument("embed_sequence: frame dim mismatch");

    RecurrentState state = RecurrentState::zeros(model.cfg.lstm_config());
    GaussianParams post;
    for (int t = 0; t < seq.length(); ++t) {
        post = model.encode_step(seq.frames[t], state.top_r());
        if (t + 1 < seq.length())
            state = model.recurrence_update(state, seq.frames[t], post.mean);
    }

    SequenceEmbedding emb;
    emb.view = seq.view;
    emb.label = seq.label;
    emb.z = mode == EmbedMode::mean ? post.mean : reparameterize(post, rng);
    return emb;
}

}  // namespace vrseq
