#include "vrseq/checkpoint.hpp"

#include <limits>
#include <stdexcept>

#include "vrseq/binio.hpp"

namespace vrseq {

namespace {

constexpr char kMagic[4] = {'V', 'A', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

void put_table(BinWriter& w, const std::map<std::string, std::vector<double>>& table) {
    w.u32(static_cast<std::uint32_t>(table.size()));
    for (const auto& [name, data] : table) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(data.size()));
        w.f64_span(data);
    }
}

// main parameter table carries shapes; moment/snapshot tables only lengths
void put_param_table(BinWriter& w, const ParamStore& store) {
    w.u32(static_cast<std::uint32_t>(store.entry_count()));
    store.for_each([&](const ParamStore::Entry& e) {
        w.str(e.name);
        const auto& shape = e.value.shape();
        w.u32(static_cast<std::uint32_t>(shape.size()));
        for (int d : shape) w.u32(static_cast<std::uint32_t>(d));
        w.f64_span(e.value.values());
    });
}

void get_param_table(BinReader& r, ParamStore& store) {
    const std::uint32_t n = r.u32();
    if (static_cast<int>(n) != store.entry_count())
        throw std::invalid_argument("checkpoint parameter table does not match the model");
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::string name = r.str();
        std::vector<int> shape(r.u32());
        for (int& d : shape) d = static_cast<int>(r.u32());
        auto& entry = store.entry(name);
        if (shape != entry.value.shape())
            throw std::invalid_argument("checkpoint shape mismatch for " + name);
        r.f64_span(entry.value.values());
    }
}

std::map<std::string, std::vector<double>> get_table(BinReader& r) {
    std::map<std::string, std::vector<double>> table;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        std::vector<double> data(r.u32());
        r.f64_span(data);
        table.emplace(std::move(name), std::move(data));
    }
    return table;
}

void put_breakdown(BinWriter& w, const LossBreakdown& lb) {
    w.f64(lb.vrnn);
    w.f64(lb.cls_y);
    w.f64(lb.cls_d);
    w.f64(lb.cls);
    w.f64(lb.reg);
    w.f64(lb.total);
}

LossBreakdown get_breakdown(BinReader& r) {
    LossBreakdown lb;
    lb.vrnn = r.f64();
    lb.cls_y = r.f64();
    lb.cls_d = r.f64();
    lb.cls = r.f64();
    lb.reg = r.f64();
    lb.total = r.f64();
    return lb;
}

}  // namespace

void save_checkpoint(const TrainSession& session, const std::string& path) {
    const TrainConfig& cfg = session.cfg;
    BinWriter w(kMagic, kVersion);

    // training configuration
    w.u32(static_cast<std::uint32_t>(cfg.epochs));
    w.f64(cfg.learning_rate);
    w.u32(static_cast<std::uint32_t>(cfg.patience));
    w.u32(static_cast<std::uint32_t>(cfg.batch_pairs));
    w.f64(cfg.lambda);
    w.u8(cfg.fusion == FusionMode::early ? 0 : 1);
    w.u8(cfg.optimizer == OptimizerKind::adam ? 0 : 1);
    w.u64(cfg.seed);
    w.f64(cfg.train_fraction);
    w.u32(static_cast<std::uint32_t>(cfg.model.frame_dim));
    w.u32(static_cast<std::uint32_t>(cfg.model.feat_dim));
    w.u32(static_cast<std::uint32_t>(cfg.model.latent_dim));
    w.u32(static_cast<std::uint32_t>(cfg.model.mlp_hidden));
    w.u32(static_cast<std::uint32_t>(cfg.model.cell_dim));
    w.u32(static_cast<std::uint32_t>(cfg.model.proj_dim));
    w.u32(static_cast<std::uint32_t>(cfg.model.lstm_layers));
    w.u32(static_cast<std::uint32_t>(cfg.head_hidden));
    w.u32(static_cast<std::uint32_t>(session.model->num_classes));

    // parameter tables
    put_param_table(w, session.model->store);
    w.u8(session.best_epoch > 0 ? 1 : 0);
    if (session.best_epoch > 0) put_table(w, session.best_params);

    // optimizer moments
    w.u8(session.opt.kind == OptimizerKind::adam ? 0 : 1);
    w.u64(static_cast<std::uint64_t>(session.opt.step));
    put_table(w, session.opt.m);
    put_table(w, session.opt.v);

    // rng state + progress
    for (auto word : session.rng_state) w.u64(word);
    w.u32(static_cast<std::uint32_t>(session.epochs_done));
    w.u32(static_cast<std::uint32_t>(session.best_epoch));
    w.f64(session.best_val_total);

    // report rows
    w.u32(static_cast<std::uint32_t>(session.report.epochs.size()));
    for (const auto& rec : session.report.epochs) {
        w.u32(static_cast<std::uint32_t>(rec.epoch));
        put_breakdown(w, rec.train);
        put_breakdown(w, rec.val);
        w.f64(rec.val_kl);
        w.f64(rec.val_rank1);
    }
    // wall time deliberately not serialised: checkpoint bytes must be a pure
    // function of seed + flags

    w.write_file(path);
}

TrainSession load_checkpoint(const CrossViewDataset& ds, const std::string& path) {
    BinReader r = BinReader::read_file(path, kMagic, kVersion);

    TrainConfig cfg;
    cfg.epochs = static_cast<int>(r.u32());
    cfg.learning_rate = r.f64();
    cfg.patience = static_cast<int>(r.u32());
    cfg.batch_pairs = static_cast<int>(r.u32());
    cfg.lambda = r.f64();
    cfg.fusion = r.u8() == 0 ? FusionMode::early : FusionMode::late;
    cfg.optimizer = r.u8() == 0 ? OptimizerKind::adam : OptimizerKind::sgd;
    cfg.seed = r.u64();
    cfg.train_fraction = r.f64();
    cfg.model.frame_dim = static_cast<int>(r.u32());
    cfg.model.feat_dim = static_cast<int>(r.u32());
    cfg.model.latent_dim = static_cast<int>(r.u32());
    cfg.model.mlp_hidden = static_cast<int>(r.u32());
    cfg.model.cell_dim = static_cast<int>(r.u32());
    cfg.model.proj_dim = static_cast<int>(r.u32());
    cfg.model.lstm_layers = static_cast<int>(r.u32());
    cfg.head_hidden = static_cast<int>(r.u32());
    const int num_classes = static_cast<int>(r.u32());

    if (num_classes != ds.num_identities() || cfg.model.frame_dim != ds.cfg.frame_dim)
        throw std::invalid_argument("checkpoint does not match the given dataset");

    TrainSession s;
    s.cfg = cfg;
    s.model = Model::create(cfg.model, num_classes, cfg.head_hidden, cfg.seed);
    get_param_table(r, s.model->store);

    s.best_val_total = std::numeric_limits<double>::infinity();
    if (r.u8() == 1) s.best_params = get_table(r);

    s.opt.kind = r.u8() == 0 ? OptimizerKind::adam : OptimizerKind::sgd;
    s.opt.step = static_cast<std::int64_t>(r.u64());
    s.opt.m = get_table(r);
    s.opt.v = get_table(r);

    for (auto& word : s.rng_state) word = r.u64();
    s.epochs_done = static_cast<int>(r.u32());
    s.best_epoch = static_cast<int>(r.u32());
    const double best_val = r.f64();
    if (s.best_epoch > 0) s.best_val_total = best_val;

    const std::uint32_t rows = r.u32();
    for (std::uint32_t i = 0; i < rows; ++i) {
        EpochRecord rec;
        rec.epoch = static_cast<int>(r.u32());
        rec.train = get_breakdown(r);
        rec.val = get_breakdown(r);
        rec.val_kl = r.f64();
        rec.val_rank1 = r.f64();
        s.report.epochs.push_back(rec);
    }
    s.report.best_epoch = s.best_epoch;
    return s;
}

std::unique_ptr<Model> load_model_for_eval(const CrossViewDataset& ds,
                                           const std::string& path) {
    TrainSession s = load_checkpoint(ds, path);
    s.apply_best();
    return std::move(s.model);
}

}  // namespace vrseq
