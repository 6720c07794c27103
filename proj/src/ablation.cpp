#include "vrseq/ablation.hpp"

#include <algorithm>

namespace vrseq {

std::vector<int> default_length_grid() { return {1, 2, 4, 8, 16, 32, 64, 128}; }

LengthGrid variable_length_ablation(const Model& model, const CrossViewDataset& ds,
                                    const std::vector<int>& lengths) {
    ds.validate();
    LengthGrid grid;
    grid.lengths = lengths;

    auto mean_effective = [&](const std::vector<FrameSequence>& seqs, int len) {
        double sum = 0.0;
        for (const auto& s : seqs) sum += std::min(len, s.length());
        return sum / static_cast<double>(seqs.size());
    };

    for (int lp : lengths) {
        for (int lg : lengths) {
            const EvalSummary s = evaluate_model(model, ds, {}, lp, lg);
            grid.rank1.push_back(s.rank1);
            grid.eff_probe_len.push_back(mean_effective(ds.probe, lp));
            grid.eff_gallery_len.push_back(mean_effective(ds.gallery, lg));
        }
    }
    return grid;
}

std::vector<FusionAblationRow> fusion_ablation(const CrossViewDataset& ds,
                                               const TrainConfig& base,
                                               const std::vector<int>& checkpoints) {
    std::vector<FusionAblationRow> rows;
    for (FusionMode mode : {FusionMode::early, FusionMode::late}) {
        TrainConfig cfg = base;
        cfg.fusion = mode;
        std::vector<FusionAblationRow> mode_rows;
        auto hook = [&](int epoch, const Model& model) {
            if (std::find(checkpoints.begin(), checkpoints.end(), epoch) !=
                checkpoints.end())
                mode_rows.push_back({mode, epoch, evaluate_model(model, ds).rank1});
        };
        TrainResult result = train(ds, cfg, hook);
        const int final_epoch =
            result.report.epochs.empty() ? 0 : result.report.epochs.back().epoch;
        if (final_epoch > 0 &&
            (mode_rows.empty() || mode_rows.back().epoch != final_epoch)) {
            // best-validation parameters for the final row
            mode_rows.push_back({mode, final_epoch, evaluate_model(*result.model, ds).rank1});
        }
        rows.insert(rows.end(), mode_rows.begin(), mode_rows.end());
    }
    return rows;
}

}  // namespace vrseq
