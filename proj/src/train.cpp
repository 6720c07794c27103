#include "vrseq/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "vrseq/evaluate.hpp"
#include "vrseq/loss_ops.hpp"

namespace vrseq {

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (patience < 1 || patience > std::max(epochs, 1))
        throw std::invalid_argument("TrainConfig: patience must be in [1, epochs]");
    if (batch_pairs < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("TrainConfig: train fraction must be in (0,1)");
    model.validate();
}

namespace {

PairBatch make_pairs(const CrossViewDataset& ds, const std::vector<int>& ids) {
    PairBatch batch;
    batch.reserve(ids.size());
    for (int id : ids) batch.push_back({&ds.probe[id], &ds.gallery[id], id});
    return batch;
}

void shuffle_ids(std::vector<int>& ids, Rng& rng) {
    for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
        std::swap(ids[i], ids[j]);
    }
}

void accumulate(LossBreakdown& acc, const LossBreakdown& lb, double w) {
    acc.vrnn += w * lb.vrnn;
    acc.cls_y += w * lb.cls_y;
    acc.cls_d += w * lb.cls_d;
    acc.cls += w * lb.cls;
    acc.reg += w * lb.reg;
    acc.total += w * lb.total;
}

}  // namespace

TrainSession TrainSession::start(const CrossViewDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    ds.validate();
    const TrainValSplit split = split_train_val(ds, cfg.train_fraction, cfg.seed);
    if (split.val_ids.empty())
        throw std::invalid_argument("train: validation split is empty");

    TrainSession s;
    s.cfg = cfg;
    if (cfg.model.frame_dim != ds.cfg.frame_dim) {
        // follow the data rather than erroring: frame dim is a dataset property
        TrainConfig fixed = cfg;
        fixed.model.frame_dim = ds.cfg.frame_dim;
        s.cfg = fixed;
    }
    s.model = Model::create(s.cfg.model, ds.num_identities(), s.cfg.head_hidden, s.cfg.seed);
    s.opt.kind = s.cfg.optimizer;
    s.rng_state = Rng(Rng::mix(s.cfg.seed, 2)).state();
    s.best_val_total = std::numeric_limits<double>::infinity();
    return s;
}

int TrainSession::run(const CrossViewDataset& ds, const EpochCallback& callback) {
    const auto t_start = std::chrono::steady_clock::now();
    const TrainValSplit split = split_train_val(ds, cfg.train_fraction, cfg.seed);
    const PairBatch val_pairs = make_pairs(ds, split.val_ids);
    const AdversarialConfig adv = cfg.adversarial();

    Rng rng(0);
    rng.set_state(rng_state);

    while (epochs_done < cfg.epochs) {
        const int epoch = epochs_done + 1;

        std::vector<int> order = split.train_ids;
        shuffle_ids(order, rng);

        LossBreakdown train_avg;
        const double inv_n = 1.0 / static_cast<double>(order.size());
        for (size_t off = 0; off < order.size(); off += cfg.batch_pairs) {
            const size_t end = std::min(order.size(), off + cfg.batch_pairs);
            const std::vector<int> batch_ids(order.begin() + off, order.begin() + end);
            const PairBatch batch = make_pairs(ds, batch_ids);
            model->store.zero_grads();
            const LossBreakdown lb = total_objective(batch, model->vrnn, model->head_y,
                                                     model->head_d, adv, rng, true);
            update_step(model->store, cfg.learning_rate, opt);
            accumulate(train_avg, lb, static_cast<double>(batch.size()) * inv_n);
        }

        // validation pass: separate stream so the train stream's draw count
        // stays a pure function of the updates
        Rng val_rng(Rng::mix(cfg.seed, 9000000ull + static_cast<std::uint64_t>(epoch)));
        const LossBreakdown val_lb = total_objective(val_pairs, model->vrnn, model->head_y,
                                                     model->head_d, adv, val_rng, false);

        std::vector<FrameSequence> vp, vg;
        for (int id : split.val_ids) {
            vp.push_back(ds.probe[id]);
            vg.push_back(ds.gallery[id]);
        }
        const auto emb_p = embed_all(*model, vp);
        const auto emb_g = embed_all(*model, vg);
        const double val_kl = cross_view_kl(emb_p, emb_g).kl;
        const double val_rank1 = cmc(rank_gallery(score_matrix(emb_p, emb_g)), 1);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train = train_avg;
        rec.val = val_lb;
        rec.val_kl = val_kl;
        rec.val_rank1 = val_rank1;
        report.epochs.push_back(rec);
        epochs_done = epoch;

        if (val_lb.total < best_val_total) {
            best_val_total = val_lb.total;
            best_epoch = epoch;
            best_params = model->store.snapshot_values();
        }

        if (callback) callback(epoch, *model);

        if (epoch - best_epoch >= cfg.patience) break;
    }

    rng_state = rng.state();
    report.best_epoch = best_epoch;
    report.wall_time_sec +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return epochs_done;
}

void TrainSession::apply_best() {
    if (best_epoch > 0) model->store.restore_values(best_params);
}

TrainResult train(const CrossViewDataset& ds, const TrainConfig& cfg,
                  const EpochCallback& callback) {
    TrainSession session = TrainSession::start(ds, cfg);
    session.run(ds, callback);
    session.apply_best();
    return {std::move(session.model), std::move(session.report)};
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 8; ++k) grid.push_back(std::pow(10.0, -2.0 + k / 4.0));
    return grid;
}

namespace {

int argmax(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

LambdaSelection select_lambda(const CrossViewDataset& ds, const std::vector<double>& grid,
                              const TrainConfig& cfg) {
    if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
    ds.validate();

    // Each view is split 90/10 along time: the first 90% of every sequence's
    // frames are the train portion, the tail is held out. Every identity
    // appears on both sides, so the reverse classifier's error against
    // ground truth is a meaningful transfer risk.
    CrossViewDataset train_ds = ds;
    std::vector<FrameSequence> probe_val;
    for (int i = 0; i < ds.num_identities(); ++i) {
        for (auto* side : {&train_ds.probe, &train_ds.gallery}) {
            FrameSequence& seq = (*side)[i];
            const int t_len = seq.length();
            if (t_len < 2)
                throw std::invalid_argument(
                    "select_lambda: degenerate split, sequences need >= 2 frames");
            const int cut = std::max(
                1, std::min(t_len - 1, static_cast<int>(std::floor(0.9 * t_len))));
            if (side == &train_ds.probe) {
                FrameSequence tail = seq;
                tail.frames.assign(seq.frames.begin() + cut, seq.frames.end());
                probe_val.push_back(std::move(tail));
            }
            seq.frames.resize(cut);
        }
    }

    LambdaSelection sel;
    sel.grid = grid;

    for (size_t gi = 0; gi < grid.size(); ++gi) {
        TrainConfig run_cfg = cfg;
        run_cfg.lambda = grid[gi];
        TrainResult result = train(train_ds, run_cfg);
        const Model& model = *result.model;

        // pseudo-label the train-portion embeddings with the trained heads
        const auto emb_p = embed_all(model, train_ds.probe);
        const auto emb_g = embed_all(model, train_ds.gallery);

        struct Labelled {
            const std::vector<double>* z;
            int pseudo;
        };
        std::vector<Labelled> reverse_set;
        for (const auto& e : emb_g)
            reverse_set.push_back({&e.z, argmax(classify(e.z, model.head_d))});
        for (const auto& e : emb_p)
            reverse_set.push_back({&e.z, argmax(classify(e.z, model.head_y))});

        // fresh reverse classifier, fixed 20-epoch schedule on the frozen embeddings
        ParamStore rev_store;
        Rng rev_rng(Rng::mix(cfg.seed, 50000ull + gi));
        ClassifierHead reverse = ClassifierHead::create(
            rev_store, "reverse", cfg.model.latent_dim, cfg.head_hidden,
            ds.num_identities(), rev_rng);
        OptimizerState rev_opt;
        rev_opt.kind = OptimizerKind::adam;
        const double w = 1.0 / static_cast<double>(reverse_set.size());
        for (int e = 0; e < 20; ++e) {
            rev_store.zero_grads();
            for (const auto& item : reverse_set) {
                Mlp::Cache cache;
                const auto logits = classify(*item.z, reverse, &cache);
                std::vector<double> d_logits(logits.size(), 0.0);
                softmax_cross_entropy_backward(logits, item.pseudo, w, d_logits);
                reverse.mlp.backward(cache, d_logits);
            }
            update_step(rev_store, cfg.learning_rate, rev_opt);
        }

        // reverse-validation risk: error of the reverse classifier on the
        // held-out probe tails, scored against ground truth
        const auto emb_v = embed_all(model, probe_val);
        int errors = 0;
        for (const auto& e : emb_v)
            if (argmax(classify(e.z, reverse)) != e.label) ++errors;
        sel.risks.push_back(static_cast<double>(errors) /
                            static_cast<double>(emb_v.size()));
    }

    sel.best_index = 0;
    for (size_t i = 1; i < sel.risks.size(); ++i)
        if (sel.risks[i] < sel.risks[sel.best_index]) sel.best_index = i;
    sel.best_lambda = sel.grid[sel.best_index];
    return sel;
}

}  // namespace vrseq
