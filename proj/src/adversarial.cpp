#include "vrseq/adversarial.hpp"

#include <cmath>
#include <stdexcept>

#include "vrseq/loss_ops.hpp"

namespace vrseq {

ClassifierHead ClassifierHead::create(ParamStore& store, const std::string& group,
                                      int latent_dim, int hidden, int num_classes,
                                      Rng& rng) {
    if (num_classes < 2) throw std::invalid_argument("ClassifierHead: need >= 2 classes");
    ClassifierHead h;
    h.mlp = Mlp::create(store, group, latent_dim, hidden, num_classes, rng);
    h.num_classes = num_classes;
    return h;
}

std::vector<double> classify(std::span<const double> emb, const ClassifierHead& head,
                             Mlp::Cache* cache) {
    return head.mlp.forward(emb, cache);
}

Tensor gradient_reversal(const Tensor& x, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("gradient_reversal: lambda must be >= 0");
    return x;
}

std::vector<double> gradient_reversal_backward(std::span<const double> upstream,
                                               double lambda) {
    std::vector<double> out(upstream.size());
    for (size_t i = 0; i < upstream.size(); ++i) out[i] = -lambda * upstream[i];
    return out;
}

namespace {

SequenceEmbedding mean_embedding(const FrameSequence& seq, const VrnnModel& model) {
    Rng unused(0);
    return embed_sequence(seq, model, EmbedMode::mean, unused);
}

void check_pair(const SequencePair& pair, int num_classes) {
    if (!pair.probe || !pair.gallery) throw std::invalid_argument("pair: missing sequence");
    if (pair.label < 0 || pair.label >= num_classes)
        throw std::invalid_argument("pair: label out of range");
}

}  // namespace

std::pair<double, double> classification_losses(const SequencePair& pair,
                                                const VrnnModel& model,
                                                const ClassifierHead& head_y,
                                                const ClassifierHead& head_d) {
    check_pair(pair, head_y.num_classes);
    const auto emb_p = mean_embedding(*pair.probe, model);
    const auto emb_g = mean_embedding(*pair.gallery, model);
    const double ly = softmax_cross_entropy(classify(emb_p.z, head_y), pair.label);
    const double ld = softmax_cross_entropy(classify(emb_g.z, head_d), pair.label);
    return {ly, ld};
}

double verification_regularizer(const SequencePair& pair, const VrnnModel& model,
                                const ClassifierHead& head_y,
                                const ClassifierHead& head_d) {
    check_pair(pair, head_y.num_classes);
    const auto emb_p = mean_embedding(*pair.probe, model);
    const auto emb_g = mean_embedding(*pair.gallery, model);
    return softmax_cross_entropy(classify(emb_p.z, head_d), pair.label) +
           softmax_cross_entropy(classify(emb_g.z, head_y), pair.label);
}

namespace {

// Steps the cross-view term touches for one sequence, with per-step weights
// that average over them.
struct CrossSteps {
    std::vector<int> steps;
    double weight = 0.0;  // per-step
};

CrossSteps cross_steps(FusionMode mode, int t_len) {
    CrossSteps cs;
    if (mode == FusionMode::late) {
        cs.steps = {t_len - 1};
        cs.weight = 1.0;
    } else {
        cs.steps.resize(t_len);
        for (int t = 0; t < t_len; ++t) cs.steps[t] = t;
        cs.weight = 1.0 / t_len;
    }
    return cs;
}

}  // namespace

LossBreakdown total_objective(const PairBatch& batch, const VrnnModel& model,
                              const ClassifierHead& head_y, const ClassifierHead& head_d,
                              const AdversarialConfig& cfg, Rng& rng, bool with_grad) {
    if (batch.empty()) throw std::invalid_argument("total_objective: empty batch");
    if (cfg.lambda < 0.0) throw std::invalid_argument("total_objective: lambda must be >= 0");

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    // The saddle formulation hands the cross-view term a "maximise" seed of
    // -1; the reversal node maps it to +lambda, so the whole objective is
    // descended as one scalar.
    const double w_cross =
        gradient_reversal_backward(std::vector<double>{-inv_b}, cfg.lambda)[0];

    LossBreakdown out;
    for (const SequencePair& pair : batch) {
        check_pair(pair, head_y.num_classes);
        pair.probe->validate();
        pair.gallery->validate();

        StepTrace trace_p, trace_g;
        const double elbo_p = elbo(*pair.probe, model, rng, &trace_p);
        const double elbo_g = elbo(*pair.gallery, model, rng, &trace_g);
        const int tp = pair.probe->length(), tg = pair.gallery->length();
        out.vrnn += inv_b * 0.5 * (elbo_p / tp + elbo_g / tg);

        struct SeqSide {
            const FrameSequence* seq;
            StepTrace* trace;
            const ClassifierHead* straight;  // own-view head
            const ClassifierHead* cross;     // other view's head
        };
        const SeqSide sides[2] = {{pair.probe, &trace_p, &head_y, &head_d},
                                  {pair.gallery, &trace_g, &head_d, &head_y}};

        for (const SeqSide& side : sides) {
            const int t_len = side.seq->length();
            std::vector<std::vector<double>> d_mean;
            if (with_grad)
                d_mean.assign(t_len, std::vector<double>(model.cfg.latent_dim, 0.0));

            // straight classification on the final-step posterior mean
            {
                Mlp::Cache cache;
                const auto& emb = side.trace->posterior[t_len - 1].mean;
                const auto logits = classify(emb, *side.straight, &cache);
                const double l = softmax_cross_entropy(logits, pair.label);
                (side.straight == &head_y ? out.cls_y : out.cls_d) += inv_b * l;
                if (with_grad) {
                    std::vector<double> d_logits(logits.size(), 0.0);
                    softmax_cross_entropy_backward(logits, pair.label, inv_b, d_logits);
                    add_scaled(d_mean[t_len - 1], side.straight->mlp.backward(cache, d_logits),
                               1.0);
                }
            }

            // cross-applied verification term
            const CrossSteps cs = cross_steps(cfg.fusion, t_len);
            for (int t : cs.steps) {
                Mlp::Cache cache;
                const auto& emb = side.trace->posterior[t].mean;
                const auto logits = classify(emb, *side.cross, &cache);
                out.reg += inv_b * cs.weight * softmax_cross_entropy(logits, pair.label);
                if (with_grad && cfg.lambda != 0.0) {
                    std::vector<double> d_logits(logits.size(), 0.0);
                    softmax_cross_entropy_backward(logits, pair.label, w_cross * cs.weight,
                                                   d_logits);
                    add_scaled(d_mean[t], side.cross->mlp.backward(cache, d_logits), 1.0);
                }
            }

            if (with_grad) {
                const double w_elbo = inv_b * 0.5 / t_len;
                vrnn_backward(*side.seq, model, *side.trace, w_elbo, w_elbo, d_mean);
            }
        }
    }

    out.cls = out.cls_y + out.cls_d;
    out.total = out.vrnn + out.cls + cfg.lambda * out.reg;
    if (!std::isfinite(out.total))
        throw std::runtime_error("total_objective: non-finite loss");
    return out;
}

void update_step(ParamStore& params, double learning_rate, OptimizerState& opt) {
    if (!(learning_rate >= 0.0))
        throw std::invalid_argument("update_step: learning rate must be >= 0");
    std::string offender;
    if (!params.grads_finite(&offender))
        throw std::runtime_error("update_step: non-finite gradient in " + offender);

    if (opt.kind == OptimizerKind::sgd) {
        params.for_each([&](ParamStore::Entry& e) {
            for (int i = 0; i < e.value.size(); ++i) e.value[i] -= learning_rate * e.grad[i];
        });
        return;
    }

    opt.step += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    params.for_each([&](ParamStore::Entry& e) {
        auto& m = opt.m[e.name];
        auto& v = opt.v[e.name];
        if (m.empty()) m.assign(e.value.size(), 0.0);
        if (v.empty()) v.assign(e.value.size(), 0.0);
        for (int i = 0; i < e.value.size(); ++i) {
            const double g = e.grad[i];
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            e.value[i] -= learning_rate * mh / (std::sqrt(vh) + opt.eps);
        }
    });
}

}  // namespace vrseq
