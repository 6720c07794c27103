#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vrseq/ablation.hpp"
#include "vrseq/binio.hpp"
#include "vrseq/checkpoint.hpp"
#include "vrseq/evaluate.hpp"
#include "vrseq/grad_check.hpp"
#include "vrseq/train.hpp"

using namespace vrseq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// shortest round-trip decimal, keeps CSV output byte-stable across runs
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

// Flat key=value config support with precedence flags > file > defaults:
// strip "--config FILE" from the raw arguments and inject "--key value" for
// every file entry whose option was not given explicitly. Unknown keys
// surface as ordinary unknown-option usage errors.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a path");
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line is not key=value: " + line);
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::string value = line.substr(eq + 1);
        const auto vstart = value.find_first_not_of(' ');
        value = vstart == std::string::npos ? "" : value.substr(vstart);

        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (!given) {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

struct TrainFlags {
    TrainConfig cfg;
    std::string fusion = "early";
    std::string optimizer = "adam";

    void attach(CLI::App* cmd) {
        cmd->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
        cmd->add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
        cmd->add_option("--patience", cfg.patience, "Early-stop patience (epochs)")
            ->capture_default_str();
        cmd->add_option("--batch", cfg.batch_pairs, "Identity pairs per update")
            ->capture_default_str();
        cmd->add_option("--lambda", cfg.lambda, "Cross-view regulariser weight")
            ->capture_default_str();
        cmd->add_option("--fusion", fusion, "Cross-view term timing: early|late")
            ->check(CLI::IsMember({"early", "late"}))
            ->capture_default_str();
        cmd->add_option("--optimizer", optimizer, "Optimizer: adam|sgd")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        cmd->add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
        cmd->add_option("--train-fraction", cfg.train_fraction,
                        "Train share of the identity split")
            ->capture_default_str();
        cmd->add_option("--feat-dim", cfg.model.feat_dim, "Feature map width")
            ->capture_default_str();
        cmd->add_option("--latent-dim", cfg.model.latent_dim, "Latent width")
            ->capture_default_str();
        cmd->add_option("--mlp-hidden", cfg.model.mlp_hidden, "Hidden width of the maps")
            ->capture_default_str();
        cmd->add_option("--cell-dim", cfg.model.cell_dim, "LSTM cell width M")
            ->capture_default_str();
        cmd->add_option("--proj-dim", cfg.model.proj_dim, "Recurrent projection width R")
            ->capture_default_str();
        cmd->add_option("--lstm-layers", cfg.model.lstm_layers, "Stacked LSTM layers")
            ->capture_default_str();
        cmd->add_option("--head-hidden", cfg.head_hidden, "Classifier hidden width")
            ->capture_default_str();
    }

    TrainConfig resolve() const {
        TrainConfig out = cfg;
        out.fusion = fusion == "early" ? FusionMode::early : FusionMode::late;
        out.optimizer = optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::sgd;
        return out;
    }
};

std::string report_csv(const TrainReport& report) {
    std::ostringstream out;
    out << "epoch,L_V,L_y,L_d,L_C,L_R,E_train,E_val,kl_val\n";
    for (const auto& rec : report.epochs) {
        out << rec.epoch << ',' << fmt(rec.train.vrnn) << ',' << fmt(rec.train.cls_y) << ','
            << fmt(rec.train.cls_d) << ',' << fmt(rec.train.cls) << ','
            << fmt(rec.train.reg) << ',' << fmt(rec.train.total) << ','
            << fmt(rec.val.total) << ',' << fmt(rec.val_kl) << '\n';
    }
    return out.str();
}

int cmd_gen_data(const DatasetConfig& cfg, const std::string& out_path) {
    const CrossViewDataset ds = generate_dataset(cfg);
    save_dataset(ds, out_path);

    int t_min = ds.probe[0].length(), t_max = t_min;
    long long t_sum = 0;
    for (const auto* side : {&ds.probe, &ds.gallery})
        for (const auto& s : *side) {
            t_min = std::min(t_min, s.length());
            t_max = std::max(t_max, s.length());
            t_sum += s.length();
        }
    std::cout << "dataset: " << out_path << "\n"
              << "identities: " << ds.num_identities() << "\n"
              << "frame_dim: " << ds.cfg.frame_dim << "\n"
              << "sequences: " << 2 * ds.num_identities() << " (lengths " << t_min << ".."
              << t_max << ", mean " << fmt(static_cast<double>(t_sum) / (2.0 * ds.num_identities()))
              << ")\n";
    return kExitOk;
}

int cmd_train(const TrainFlags& flags, const std::string& data_path,
              const std::string& out_path, const std::string& report_path,
              const std::string& resume_path, int epochs_explicit) {
    const CrossViewDataset ds = load_dataset(data_path);
    TrainSession session = [&] {
        if (!resume_path.empty()) {
            TrainSession s = load_checkpoint(ds, resume_path);
            if (epochs_explicit >= 0) s.cfg.epochs = epochs_explicit;
            return s;
        }
        TrainConfig cfg = flags.resolve();
        cfg.model.frame_dim = ds.cfg.frame_dim;
        return TrainSession::start(ds, cfg);
    }();

    session.run(ds);
    save_checkpoint(session, out_path);
    write_text_file(report_path, report_csv(session.report));

    std::cout << "epochs run: " << session.epochs_done << "\n"
              << "best epoch: " << session.best_epoch << "\n";
    if (!session.report.epochs.empty()) {
        const auto& last = session.report.epochs.back();
        std::cout << "final E_train: " << fmt(last.train.total) << "\n"
                  << "final E_val: " << fmt(last.val.total) << "\n"
                  << "final kl_val: " << fmt(last.val_kl) << "\n";
    }
    std::cout << "checkpoint: " << out_path << "\nreport: " << report_path << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& data_path, const std::string& ckpt_path,
             const std::string& out_dir) {
    const CrossViewDataset ds = load_dataset(data_path);
    const auto model = load_model_for_eval(ds, ckpt_path);
    const EvalSummary s = evaluate_model(*model, ds);

    std::filesystem::create_directories(out_dir);
    {
        std::ostringstream out;
        out << "rank1,rank5,rank10,rank20,map,cross_view_kl\n"
            << fmt(s.rank1) << ',' << fmt(s.rank5) << ',' << fmt(s.rank10) << ','
            << fmt(s.rank20) << ',' << fmt(s.map) << ',' << fmt(s.view_kl) << '\n';
        write_text_file(out_dir + "/metrics.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "rank,rate\n";
        for (size_t r = 0; r < s.curve.values.size(); ++r)
            out << r + 1 << ',' << fmt(s.curve.values[r]) << '\n';
        write_text_file(out_dir + "/cmc_curve.csv", out.str());
    }
    std::cout << "rank1: " << fmt(s.rank1) << "\nrank5: " << fmt(s.rank5)
              << "\nrank10: " << fmt(s.rank10) << "\nrank20: " << fmt(s.rank20)
              << "\nmAP: " << fmt(s.map) << "\ncross_view_kl: " << fmt(s.view_kl) << "\n"
              << "wrote " << out_dir << "/metrics.csv and " << out_dir << "/cmc_curve.csv\n";
    return kExitOk;
}

int cmd_ablate_length(const std::string& data_path, const std::string& ckpt_path,
                      const std::string& out_path) {
    const CrossViewDataset ds = load_dataset(data_path);
    const auto model = load_model_for_eval(ds, ckpt_path);
    const LengthGrid grid = variable_length_ablation(*model, ds);

    std::ostringstream out;
    out << "probe_len,gallery_len,eff_probe_len,eff_gallery_len,rank1\n";
    const int n = static_cast<int>(grid.lengths.size());
    for (int pi = 0; pi < n; ++pi)
        for (int gi = 0; gi < n; ++gi) {
            const size_t cell = static_cast<size_t>(pi) * n + gi;
            out << grid.lengths[pi] << ',' << grid.lengths[gi] << ','
                << fmt(grid.eff_probe_len[cell]) << ',' << fmt(grid.eff_gallery_len[cell])
                << ',' << fmt(grid.rank1[cell]) << '\n';
        }
    write_text_file(out_path, out.str());
    std::cout << "wrote " << out_path << " (" << n * n << " cells)\n";
    return kExitOk;
}

int cmd_ablate_fusion(const TrainFlags& flags, const std::string& data_path,
                      const std::string& out_path, const std::vector<int>& checkpoints) {
    const CrossViewDataset ds = load_dataset(data_path);
    TrainConfig cfg = flags.resolve();
    cfg.model.frame_dim = ds.cfg.frame_dim;
    const auto rows = fusion_ablation(ds, cfg, checkpoints);

    std::ostringstream out;
    out << "mode,epoch,rank1\n";
    for (const auto& row : rows)
        out << (row.mode == FusionMode::early ? "early" : "late") << ',' << row.epoch << ','
            << fmt(row.rank1) << '\n';
    write_text_file(out_path, out.str());
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    return kExitOk;
}

int cmd_select_lambda(const TrainFlags& flags, const std::string& data_path,
                      const std::string& out_path) {
    const CrossViewDataset ds = load_dataset(data_path);
    TrainConfig cfg = flags.resolve();
    cfg.model.frame_dim = ds.cfg.frame_dim;
    const LambdaSelection sel = select_lambda(ds, default_lambda_grid(), cfg);

    std::ostringstream out;
    out << "lambda,risk\n";
    for (size_t i = 0; i < sel.grid.size(); ++i)
        out << fmt(sel.grid[i]) << ',' << fmt(sel.risks[i]) << '\n';
    write_text_file(out_path, out.str());
    std::cout << "lambda* = " << fmt(sel.best_lambda) << "\nwrote " << out_path << "\n";
    return kExitOk;
}

int cmd_grad_check(double eps, bool inject_sign_error) {
    bool all_ok = true;
    auto judge = [&](const char* what, ParamStore& store,
                     const std::function<double(bool)>& loss) {
        const auto report = finite_diff_check(store, loss, eps);
        std::cout << what << ": max_rel_error " << fmt(report.max_rel_error) << " (worst "
                  << report.worst_param << ")\n";
        for (const auto& [group, err] : report.group_max)
            std::cout << "  " << group << ": " << fmt(err) << "\n";
        if (report.max_rel_error >= 1e-4) {
            all_ok = false;
            std::cout << what << ": FAIL\n";
        } else {
            std::cout << what << ": PASS\n";
        }
    };

    {
        // single recurrent step under a fixed linear readout
        ParamStore store;
        Rng rng(41);
        LightLstmConfig cfg{6, 8, 4, 2};
        auto w = LightLstmWeights::create(store, "lstm", cfg, rng);
        Rng wake(42);
        store.for_each([&](ParamStore::Entry& e) {
            for (int i = 0; i < e.value.size(); ++i) e.value[i] = wake.uniform(-0.8, 0.8);
        });
        Rng data_rng(43);
        std::vector<std::vector<double>> seq(1, std::vector<double>(6));
        for (double& v : seq[0]) v = data_rng.normal();
        std::vector<std::vector<double>> probe(1, std::vector<double>(4));
        for (double& v : probe[0]) v = data_rng.normal();
        auto loss = [&](bool with_grad) {
            std::vector<LstmStepCache> caches;
            const auto states = forward_sequence(seq, w, &caches);
            double l = 0.0;
            for (int j = 0; j < 4; ++j) l += probe[0][j] * states[0].top_r()[j];
            if (with_grad) {
                bptt_backward(seq, states, caches, probe, w);
                if (inject_sign_error) {
                    auto& g = store.grad("lstm/layer0/W_ix");
                    g[0] = -g[0];
                }
            }
            return l;
        };
        judge("light-lstm step", store, loss);
    }

    {
        // five-step sequence objective
        VrnnConfig cfg;
        cfg.frame_dim = 8;
        cfg.feat_dim = 6;
        cfg.latent_dim = 4;
        cfg.mlp_hidden = 6;
        cfg.cell_dim = 8;
        cfg.proj_dim = 4;
        cfg.lstm_layers = 2;
        ParamStore store;
        Rng rng(51);
        VrnnModel model = VrnnModel::create(store, cfg, rng);
        Rng wake(52);
        store.for_each([&](ParamStore::Entry& e) {
            for (int i = 0; i < e.value.size(); ++i) e.value[i] = wake.uniform(-0.8, 0.8);
        });
        Rng data_rng(53);
        FrameSequence seq;
        seq.frames.assign(5, std::vector<double>(8));
        for (auto& f : seq.frames)
            for (double& v : f) v = data_rng.normal();
        auto loss = [&](bool with_grad) {
            Rng r(54);
            StepTrace trace;
            const double l = elbo(seq, model, r, &trace);
            if (with_grad) vrnn_backward(seq, model, trace, 1.0, 1.0, {});
            return l;
        };
        judge("sequence elbo", store, loss);
    }

    {
        // full objective with the cross-view term active
        VrnnConfig cfg;
        cfg.frame_dim = 8;
        cfg.feat_dim = 6;
        cfg.latent_dim = 4;
        cfg.mlp_hidden = 6;
        cfg.cell_dim = 8;
        cfg.proj_dim = 4;
        cfg.lstm_layers = 2;
        auto model = Model::create(cfg, 4, 6, 61);
        Rng wake(62);
        model->store.for_each([&](ParamStore::Entry& e) {
            for (int i = 0; i < e.value.size(); ++i) e.value[i] = wake.uniform(-0.8, 0.8);
        });
        Rng data_rng(63);
        std::vector<FrameSequence> probes(4), galleries(4);
        PairBatch batch;
        for (int i = 0; i < 4; ++i) {
            probes[i].view = ViewTag::probe;
            probes[i].label = i;
            probes[i].frames.assign(4, std::vector<double>(8));
            for (auto& f : probes[i].frames)
                for (double& v : f) v = data_rng.normal();
            galleries[i] = probes[i];
            galleries[i].view = ViewTag::gallery;
            for (auto& f : galleries[i].frames)
                for (double& v : f) v += 0.3 * data_rng.normal();
            batch.push_back({&probes[i], &galleries[i], i});
        }
        AdversarialConfig adv;
        adv.lambda = 0.6;
        auto loss = [&](bool with_grad) {
            Rng r(64);
            return total_objective(batch, model->vrnn, model->head_y, model->head_d, adv, r,
                                   with_grad)
                .total;
        };
        judge("combined objective", model->store, loss);
    }

    return all_ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"view-invariant recurrent sequence embeddings"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic cross-view dataset");
    std::string config_file_doc;
    gen->add_option("--config", config_file_doc, "Flat key=value config file (flags win)");
    DatasetConfig gen_cfg;
    std::string gen_out;
    gen->add_option("--identities", gen_cfg.num_identities, "Number of identities")
        ->capture_default_str();
    gen->add_option("--dim", gen_cfg.frame_dim, "Frame dimension")->capture_default_str();
    gen->add_option("--len-min", gen_cfg.len_min, "Minimum sequence length")
        ->capture_default_str();
    gen->add_option("--len-max", gen_cfg.len_max, "Maximum sequence length")
        ->capture_default_str();
    gen->add_option("--seed", gen_cfg.seed, "Dataset seed")->capture_default_str();
    gen->add_option("--view-gap", gen_cfg.view_gap, "Cross-view distortion strength")
        ->capture_default_str();
    gen->add_option("--noise", gen_cfg.noise_std, "Per-frame observation noise std")
        ->capture_default_str();
    gen->add_option("--motion-components", gen_cfg.motion_components,
                    "Sinusoids per identity")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
    train_cmd->add_option("--config", config_file_doc, "Flat key=value config file (flags win)");
    TrainFlags train_flags;
    std::string train_data, train_out = "model.vack", train_report = "train_report.csv",
                train_resume;
    train_cmd->add_option("--data", train_data, "Dataset path")->required();
    train_cmd->add_option("--out", train_out, "Checkpoint output path")
        ->capture_default_str();
    train_cmd->add_option("--report", train_report, "Per-epoch CSV output path")
        ->capture_default_str();
    train_cmd->add_option("--resume", train_resume,
                          "Continue from a checkpoint (other model flags ignored)");
    train_flags.attach(train_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate retrieval metrics");
    eval_cmd->add_option("--config", config_file_doc, "Flat key=value config file (flags win)");
    std::string eval_data, eval_ckpt, eval_out = ".";
    eval_cmd->add_option("--data", eval_data, "Dataset path")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint path")->required();
    eval_cmd->add_option("--out-dir", eval_out, "Directory for metrics.csv / cmc_curve.csv")
        ->capture_default_str();

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Length or fusion-timing study");
    ablate_cmd->add_option("--config", config_file_doc, "Flat key=value config file (flags win)");
    TrainFlags ablate_flags;
    std::string ablate_mode, ablate_data, ablate_ckpt, ablate_out = "ablation.csv";
    std::vector<int> ablate_epochs = {10, 20, 30, 40, 50};
    ablate_cmd->add_option("--mode", ablate_mode, "length|fusion")
        ->check(CLI::IsMember({"length", "fusion"}))
        ->required();
    ablate_cmd->add_option("--data", ablate_data, "Dataset path")->required();
    ablate_cmd->add_option("--checkpoint", ablate_ckpt, "Checkpoint path (length mode)");
    ablate_cmd->add_option("--out", ablate_out, "Output CSV path")->capture_default_str();
    ablate_cmd->add_option("--eval-epochs", ablate_epochs,
                           "Epoch checkpoints for fusion mode")
        ->capture_default_str();
    ablate_flags.attach(ablate_cmd);

    // select-lambda
    auto* lambda_cmd =
        app.add_subcommand("select-lambda", "Reverse cross-validation over the lambda grid");
    lambda_cmd->add_option("--config", config_file_doc, "Flat key=value config file (flags win)");
    TrainFlags lambda_flags;
    std::string lambda_data, lambda_out = "lambda_risk.csv";
    lambda_cmd->add_option("--data", lambda_data, "Dataset path")->required();
    lambda_cmd->add_option("--out", lambda_out, "Risk table CSV path")
        ->capture_default_str();
    lambda_flags.attach(lambda_cmd);

    // grad-check
    auto* check_cmd =
        app.add_subcommand("grad-check", "Finite-difference audit of every gradient path");
    double check_eps = 1e-5;
    bool inject = false;
    check_cmd->add_option("--eps", check_eps, "Perturbation step")->capture_default_str();
    check_cmd->add_flag("--inject-sign-error", inject,
                        "Deliberately corrupt one gradient (negative control)");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config_file(args);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::reverse(args.begin(), args.end());  // CLI11's vector parse order
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_cfg, gen_out);
        if (train_cmd->parsed()) {
            // distinguish "--epochs given" from default when resuming
            const int epochs_explicit =
                train_cmd->count("--epochs") > 0 ? train_flags.cfg.epochs : -1;
            return cmd_train(train_flags, train_data, train_out, train_report, train_resume,
                             epochs_explicit);
        }
        if (eval_cmd->parsed()) return cmd_eval(eval_data, eval_ckpt, eval_out);
        if (ablate_cmd->parsed()) {
            if (ablate_mode == "length") {
                if (ablate_ckpt.empty())
                    throw std::invalid_argument("--checkpoint is required for length mode");
                return cmd_ablate_length(ablate_data, ablate_ckpt, ablate_out);
            }
            return cmd_ablate_fusion(ablate_flags, ablate_data, ablate_out, ablate_epochs);
        }
        if (lambda_cmd->parsed())
            return cmd_select_lambda(lambda_flags, lambda_data, lambda_out);
        if (check_cmd->parsed()) return cmd_grad_check(check_eps, inject);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
    return kExitUsage;
}
