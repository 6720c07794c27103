#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vrseq/ablation.hpp"
#include "vrseq/checkpoint.hpp"
#include "vrseq/evaluate.hpp"
#include "vrseq/loss_ops.hpp"
#include "vrseq/train.hpp"

namespace py = pybind11;
using namespace vrseq;

namespace {

GaussianParams make_gaussian(const std::vector<double>& mean,
                             const std::vector<double>& std) {
    return GaussianParams(mean, std);
}

FrameSequence make_sequence(const std::vector<std::vector<double>>& frames, int label,
                            const std::string& view) {
    FrameSequence s;
    s.frames = frames;
    s.label = label;
    s.view = view == "gallery" ? ViewTag::gallery : ViewTag::probe;
    s.validate();
    return s;
}

py::dict breakdown_dict(const LossBreakdown& lb) {
    py::dict d;
    d["L_V"] = lb.vrnn;
    d["L_y"] = lb.cls_y;
    d["L_d"] = lb.cls_d;
    d["L_C"] = lb.cls;
    d["L_R"] = lb.reg;
    d["E"] = lb.total;
    return d;
}

TrainConfig config_from_kwargs(int epochs, double lr, int patience, int batch_pairs,
                               double lambda, const std::string& fusion,
                               const std::string& optimizer, std::uint64_t seed,
                               double train_fraction, int feat_dim, int latent_dim,
                               int mlp_hidden, int cell_dim, int proj_dim, int lstm_layers,
                               int head_hidden) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.patience = patience;
    cfg.batch_pairs = batch_pairs;
    cfg.lambda = lambda;
    cfg.fusion = fusion == "late" ? FusionMode::late : FusionMode::early;
    cfg.optimizer = optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
    cfg.seed = seed;
    cfg.train_fraction = train_fraction;
    cfg.model.feat_dim = feat_dim;
    cfg.model.latent_dim = latent_dim;
    cfg.model.mlp_hidden = mlp_hidden;
    cfg.model.cell_dim = cell_dim;
    cfg.model.proj_dim = proj_dim;
    cfg.model.lstm_layers = lstm_layers;
    cfg.head_hidden = head_hidden;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(vrseq, m) {
    m.doc() = "view-invariant recurrent sequence embeddings";

    m.def(
        "gaussian_kl_diag",
        [](const std::vector<double>& q_mean, const std::vector<double>& q_std,
           const std::vector<double>& p_mean, const std::vector<double>& p_std) {
            return gaussian_kl_diag(make_gaussian(q_mean, q_std),
                                    make_gaussian(p_mean, p_std));
        },
        py::arg("q_mean"), py::arg("q_std"), py::arg("p_mean"), py::arg("p_std"),
        "Closed-form KL divergence between diagonal Gaussians");

    m.def(
        "gaussian_nll",
        [](const std::vector<double>& x, const std::vector<double>& mean,
           const std::vector<double>& std) {
            return gaussian_nll(x, make_gaussian(mean, std));
        },
        py::arg("x"), py::arg("mean"), py::arg("std"));

    m.def(
        "softmax_cross_entropy",
        [](const std::vector<double>& logits, int label) {
            return softmax_cross_entropy(logits, label);
        },
        py::arg("logits"), py::arg("label"));

    m.def(
        "reparameterize",
        [](const std::vector<double>& mean, const std::vector<double>& std,
           std::uint64_t seed) {
            Rng rng(seed);
            return reparameterize(make_gaussian(mean, std), rng);
        },
        py::arg("mean"), py::arg("std"), py::arg("seed"));

    m.def("mult_count_vanilla", &mult_count_vanilla, py::arg("input_dim"),
          py::arg("cell_dim"));
    m.def("mult_count_projected", &mult_count_projected, py::arg("input_dim"),
          py::arg("cell_dim"), py::arg("proj_dim"));

    m.def("default_lambda_grid", &default_lambda_grid);

    py::class_<CrossViewDataset>(m, "Dataset")
        .def_property_readonly("num_identities", &CrossViewDataset::num_identities)
        .def_property_readonly("frame_dim",
                               [](const CrossViewDataset& ds) { return ds.cfg.frame_dim; })
        .def_property_readonly("seed", [](const CrossViewDataset& ds) { return ds.cfg.seed; })
        .def("probe_frames",
             [](const CrossViewDataset& ds, int i) { return ds.probe.at(i).frames; })
        .def("gallery_frames",
             [](const CrossViewDataset& ds, int i) { return ds.gallery.at(i).frames; })
        .def("save", &save_dataset, py::arg("path"));

    m.def(
        "generate_dataset",
        [](int identities, int frame_dim, int len_min, int len_max, std::uint64_t seed,
           double view_gap, double noise_std, int motion_components) {
            DatasetConfig cfg;
            cfg.num_identities = identities;
            cfg.frame_dim = frame_dim;
            cfg.len_min = len_min;
            cfg.len_max = len_max;
            cfg.seed = seed;
            cfg.view_gap = view_gap;
            cfg.noise_std = noise_std;
            cfg.motion_components = motion_components;
            return generate_dataset(cfg);
        },
        py::arg("identities") = 32, py::arg("frame_dim") = 32, py::arg("len_min") = 8,
        py::arg("len_max") = 32, py::arg("seed") = 1, py::arg("view_gap") = 1.0,
        py::arg("noise_std") = 0.1, py::arg("motion_components") = 3);

    m.def("load_dataset", &load_dataset, py::arg("path"));

    py::class_<Model, std::shared_ptr<Model>>(m, "Model")
        .def_property_readonly("param_count",
                               [](const Model& m_) { return m_.store.param_count(); })
        .def("embed",
             [](const Model& m_, const std::vector<std::vector<double>>& frames,
                const std::string& mode, std::uint64_t seed) {
                 FrameSequence seq = make_sequence(frames, 0, "probe");
                 Rng rng(seed);
                 return embed_sequence(seq, m_.vrnn,
                                       mode == "sample" ? EmbedMode::sample : EmbedMode::mean,
                                       rng)
                     .z;
             },
             py::arg("frames"), py::arg("mode") = "mean", py::arg("seed") = 0);

    m.def(
        "train",
        [](const CrossViewDataset& ds, int epochs, double lr, int patience, int batch_pairs,
           double lambda, const std::string& fusion, const std::string& optimizer,
           std::uint64_t seed, double train_fraction, int feat_dim, int latent_dim,
           int mlp_hidden, int cell_dim, int proj_dim, int lstm_layers, int head_hidden) {
            TrainConfig cfg = config_from_kwargs(
                epochs, lr, patience, batch_pairs, lambda, fusion, optimizer, seed,
                train_fraction, feat_dim, latent_dim, mlp_hidden, cell_dim, proj_dim,
                lstm_layers, head_hidden);
            cfg.model.frame_dim = ds.cfg.frame_dim;
            TrainResult result = train(ds, cfg);
            py::list rows;
            for (const auto& rec : result.report.epochs) {
                py::dict row;
                row["epoch"] = rec.epoch;
                row["train"] = breakdown_dict(rec.train);
                row["val"] = breakdown_dict(rec.val);
                row["val_kl"] = rec.val_kl;
                row["val_rank1"] = rec.val_rank1;
                rows.append(row);
            }
            py::dict report;
            report["epochs"] = rows;
            report["best_epoch"] = result.report.best_epoch;
            return py::make_tuple(
                std::shared_ptr<Model>(std::move(result.model)), report);
        },
        py::arg("dataset"), py::arg("epochs") = 50, py::arg("lr") = 1e-3,
        py::arg("patience") = 10, py::arg("batch_pairs") = 8, py::arg("lambda_") = 0.6,
        py::arg("fusion") = "early", py::arg("optimizer") = "adam", py::arg("seed") = 7,
        py::arg("train_fraction") = 0.9, py::arg("feat_dim") = 32,
        py::arg("latent_dim") = 16, py::arg("mlp_hidden") = 32, py::arg("cell_dim") = 64,
        py::arg("proj_dim") = 16, py::arg("lstm_layers") = 3, py::arg("head_hidden") = 32);

    m.def(
        "evaluate",
        [](const Model& model, const CrossViewDataset& ds) {
            const EvalSummary s = evaluate_model(model, ds);
            py::dict d;
            d["rank1"] = s.rank1;
            d["rank5"] = s.rank5;
            d["rank10"] = s.rank10;
            d["rank20"] = s.rank20;
            d["map"] = s.map;
            d["cross_view_kl"] = s.view_kl;
            d["cmc"] = s.curve.values;
            return d;
        },
        py::arg("model"), py::arg("dataset"));

    m.def(
        "cmc",
        [](const std::vector<std::vector<double>>& scores,
           const std::vector<int>& probe_labels, const std::vector<int>& gallery_labels,
           int r) {
            ScoreMatrix s;
            s.n_probe = static_cast<int>(scores.size());
            s.n_gallery = s.n_probe > 0 ? static_cast<int>(scores[0].size()) : 0;
            for (const auto& row : scores)
                s.scores.insert(s.scores.end(), row.begin(), row.end());
            s.probe_labels = probe_labels;
            s.gallery_labels = gallery_labels;
            return cmc(rank_gallery(s), r);
        },
        py::arg("scores"), py::arg("probe_labels"), py::arg("gallery_labels"), py::arg("r"));

    m.def(
        "mean_ap",
        [](const std::vector<std::vector<double>>& scores,
           const std::vector<int>& probe_labels, const std::vector<int>& gallery_labels) {
            ScoreMatrix s;
            s.n_probe = static_cast<int>(scores.size());
            s.n_gallery = s.n_probe > 0 ? static_cast<int>(scores[0].size()) : 0;
            for (const auto& row : scores)
                s.scores.insert(s.scores.end(), row.begin(), row.end());
            s.probe_labels = probe_labels;
            s.gallery_labels = gallery_labels;
            return mean_ap(s);
        },
        py::arg("scores"), py::arg("probe_labels"), py::arg("gallery_labels"));

    m.def(
        "load_model",
        [](const CrossViewDataset& ds, const std::string& path) {
            return std::shared_ptr<Model>(load_model_for_eval(ds, path));
        },
        py::arg("dataset"), py::arg("path"));
}
