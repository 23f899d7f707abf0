#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rainshift/cli/config.hpp"
#include "rainshift/cli/plot.hpp"
#include "rainshift/core/check.hpp"
#include "rainshift/datasets/bridge.hpp"
#include "rainshift/datasets/domain_gap.hpp"
#include "rainshift/datasets/toyworld.hpp"
#include "rainshift/evalm/metrics.hpp"
#include "rainshift/i2i/train.hpp"
#include "rainshift/seg/model.hpp"
#include "rainshift/uda/trainer.hpp"

namespace fs = std::filesystem;
using namespace rainshift;

namespace {

struct CommonArgs {
    std::string config_path;
    cli::ExperimentConfig cfg;

    void resolve() {
        if (!config_path.empty()) cfg = cli::load_config(config_path);
    }
};

int cmd_toygen(CommonArgs& common, const std::string& out_dir) {
    const auto& cfg = common.cfg;
    check(cfg.toy_n >= 1, "toygen: --n must be >= 1");
    fs::create_directories(out_dir);

    datasets::ToyWorldConfig toy = cfg.toy;
    struct Job {
        datasets::ToyDomain domain;
        int n;
        uint64_t seed_offset;
        std::string manifest;
    };
    std::vector<Job> jobs = {
        {datasets::ToyDomain::source_clear, cfg.toy_n, 0, "source_clear.manifest"},
        {datasets::ToyDomain::target_rain, cfg.toy_n, 0, "target_rain.manifest"},
        {datasets::ToyDomain::bridge_clear, cfg.toy_bridge_n, 0, "bridge_clear.manifest"},
        {datasets::ToyDomain::bridge_rain, cfg.toy_bridge_n, 0, "bridge_rain.manifest"},
    };
    if (cfg.toy_eval_n > 0)
        jobs.push_back({datasets::ToyDomain::target_rain, cfg.toy_eval_n, 0x7e57ULL,
                        "target_eval.manifest"});

    for (const auto& job : jobs) {
        datasets::ToyWorldConfig jc = toy;
        jc.seed = toy.seed + job.seed_offset;
        const std::string sub =
            job.seed_offset ? (fs::path(out_dir) / "eval").string() : out_dir;
        datasets::DatasetManifest m = datasets::generate_toy_dataset(jc, job.n, job.domain, sub);
        if (job.seed_offset) m.name += "_eval";
        datasets::save_manifest(m, (fs::path(out_dir) / job.manifest).string());
        std::cout << "wrote " << job.manifest << " (" << m.samples.size() << " samples)\n";
    }
    cli::write_resolved_config(common.cfg, (fs::path(out_dir) / "config.resolved.json").string());
    return 0;
}

int cmd_bridge_build(CommonArgs& common, const std::string& a_path, const std::string& b_path,
                     const std::string& c_path, const std::string& d_path,
                     const std::string& out_dir, bool print_gap) {
    const auto a = datasets::load_manifest(a_path, false);
    const auto b = datasets::load_manifest(b_path, false);
    const auto c = datasets::load_manifest(c_path, false);
    const auto d = datasets::load_manifest(d_path, false);

    const auto rep = datasets::check_bridge_compatibility(a, b, c, d);
    if (!rep.ok) {
        std::cerr << "bridge compatibility FAILED:\n";
        for (const auto& v : rep.violations) std::cerr << "  - " << v << "\n";
        return 1;
    }
    if (c.samples.empty() && d.samples.empty())
        std::cerr << "warning: empty bridge sets, unions equal the originals\n";

    auto [ap, bp] = datasets::assemble_bridged_dataset(a, b, c, d);
    fs::create_directories(out_dir);
    const std::string ap_path = (fs::path(out_dir) / "a_bridged.manifest").string();
    const std::string bp_path = (fs::path(out_dir) / "b_bridged.manifest").string();
    datasets::save_manifest(ap, ap_path);
    datasets::save_manifest(bp, bp_path);
    std::cout << "A' = " << ap.samples.size() << " samples -> " << ap_path << "\n";
    std::cout << "B' = " << bp.samples.size() << " samples -> " << bp_path << "\n";

    if (print_gap) {
        const auto unbridged = datasets::domain_gap_estimate(a, b);
        const auto bridged = datasets::domain_gap_estimate(ap, bp);
        std::cout << "kl_proxy(A,B)   = " << unbridged.kl_proxy << "\n";
        std::cout << "kl_proxy(A',B') = " << bridged.kl_proxy << "\n";
    }
    cli::write_resolved_config(common.cfg, (fs::path(out_dir) / "config.resolved.json").string());
    return 0;
}

int cmd_i2i_train(CommonArgs& common, const std::string& a_path, const std::string& b_path,
                  const std::string& out_dir) {
    const auto a = datasets::load_manifest(a_path, false);
    const auto b = datasets::load_manifest(b_path, false);
    fs::create_directories(out_dir);
    cli::write_resolved_config(common.cfg, (fs::path(out_dir) / "config.resolved.json").string());
    const auto res = i2i::train_i2i(a, b, common.cfg.i2i, out_dir);
    std::cout << "checkpoint: " << res.checkpoint_path << "\n";
    std::cout << "loss curves: " << res.losses_csv_path << "\n";
    return 0;
}

int cmd_i2i_translate(const std::string& ckpt, const std::string& image_path,
                      const std::string& out_path, uint64_t style_seed, int n_styles) {
    check(fs::exists(ckpt), "checkpoint not found: " + ckpt);
    auto model = i2i::TranslatorModel::load(ckpt);
    const Image img = load_image(image_path);
    Rng rng(style_seed);
    if (n_styles <= 1) {
        const auto style = i2i::sample_style(model.spec().style_dim, rng);
        save_image(i2i::translate(model, img, style), out_path);
        std::cout << "wrote " << out_path << "\n";
        return 0;
    }
    for (int s = 0; s < n_styles; ++s) {
        const auto style = i2i::sample_style(model.spec().style_dim, rng);
        fs::path p(out_path);
        const std::string numbered =
            (p.parent_path() / (p.stem().string() + "_s" + std::to_string(s) +
                                p.extension().string()))
                .string();
        save_image(i2i::translate(model, img, style), numbered);
        std::cout << "wrote " << numbered << "\n";
    }
    return 0;
}

int cmd_uda_train(CommonArgs& common, const std::string& src_path, const std::string& tgt_path,
                  const std::string& eval_path, const std::string& translator_ckpt,
                  const std::string& out_dir, const std::string& resume_path) {
    uda::UdaRunInputs inputs;
    inputs.src = datasets::load_manifest(src_path, false);
    inputs.tgt = datasets::load_manifest(tgt_path, false);
    if (!eval_path.empty()) inputs.eval_set = datasets::load_manifest(eval_path, false);
    inputs.translator_checkpoint = translator_ckpt;

    uda::UdaConfig cfg = common.cfg.uda;
    cfg.model.class_count = inputs.src.class_count;
    fs::create_directories(out_dir);
    cli::write_resolved_config(common.cfg, (fs::path(out_dir) / "config.resolved.json").string());

    const auto res = uda::run_uda_training(inputs, cfg, out_dir, resume_path);
    std::cout << "model: " << res.checkpoint_path << "\nmetrics: " << res.metrics_csv_path
              << "\nfinal alpha: " << res.final_alpha << "\n";
    if (!res.evals.empty())
        std::cout << "final mIoU (all classes): " << res.evals.back().miou_all << "\n";
    return 0;
}

std::vector<double> csv_column(const std::string& path, const std::string& column,
                               const std::string& filter_col = "", const std::string& filter = "") {
    std::ifstream in(path);
    check(in.good(), "cannot open CSV: " + path);
    std::string line;
    check(static_cast<bool>(std::getline(in, line)), path + ": empty CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    int col = -1, fcol = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) col = static_cast<int>(i);
        if (!filter_col.empty() && header[i] == filter_col) fcol = static_cast<int>(i);
    }
    check(col >= 0, path + ": no column '" + column + "'");
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (static_cast<int>(fields.size()) <= col) continue;
        if (fcol >= 0 && (static_cast<int>(fields.size()) <= fcol || fields[fcol] != filter))
            continue;
        if (fields[col].empty()) continue;
        out.push_back(std::stod(fields[col]));
    }
    return out;
}

int cmd_eval(const std::string& ckpt, const std::string& manifest_path, const std::string& out_csv,
             const std::string& plots_dir, const std::string& metrics_csv) {
    const auto manifest = datasets::load_manifest(manifest_path, false);
    seg::SegNet net = seg::SegNet::load(ckpt);
    check(net.config().class_count == manifest.class_count,
          "eval: checkpoint classes != manifest classes");

    evalm::ConfusionMatrix cm(manifest.class_count);
    for (const auto& rec : manifest.samples) {
        check(!rec.label_ref.empty(), "eval: sample " + rec.image_ref + " has no label");
        const Image img = load_image(rec.image_ref);
        const LabelImage gt = load_label(rec.label_ref);
        accumulate_confusion(evalm::argmax_labels(net.predict_probs(img)), gt, cm);
    }
    const auto rep = evalm::evaluate_miou(cm);
    evalm::write_eval_report_csv(rep, manifest.class_names, out_csv);
    std::cout << "mIoU (all classes): " << rep.miou_all
              << "\nmIoU (defined classes): " << rep.miou_defined
              << "\npixel accuracy: " << rep.pixel_accuracy << "\nreport: " << out_csv << "\n";

    if (!plots_dir.empty()) {
        // Plot emission is best effort and never fails the command.
        try {
            check(!metrics_csv.empty(), "--plots requires --metrics");
            fs::create_directories(plots_dir);
            cli::write_line_plot({{"alpha", csv_column(metrics_csv, "alpha")}},
                                 (fs::path(plots_dir) / "alpha.ppm").string());
            cli::write_line_plot({{"coverage", csv_column(metrics_csv, "coverage")}},
                                 (fs::path(plots_dir) / "coverage.ppm").string());
            cli::write_line_plot({{"l_ce", csv_column(metrics_csv, "l_ce")},
                                  {"l_ss", csv_column(metrics_csv, "l_ss")}},
                                 (fs::path(plots_dir) / "losses.ppm").string());
            std::cout << "plots: " << plots_dir << "\n";
        } catch (const std::exception& e) {
            std::cerr << "warning: plot emission failed: " << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_gap(const std::string& s1_path, const std::string& s2_path) {
    const auto s1 = datasets::load_manifest(s1_path, false);
    const auto s2 = datasets::load_manifest(s2_path, false);
    const auto rep = datasets::domain_gap_estimate(s1, s2);
    std::cout << "kl_proxy = " << rep.kl_proxy << (rep.degenerate_clamped ? " (std clamped)" : "")
              << "\n";
    for (int ch = 0; ch < 3; ++ch)
        std::cout << "ch" << ch << ": mean " << rep.s1.mean[ch] << " vs " << rep.s2.mean[ch]
                  << ", std " << rep.s1.std[ch] << " vs " << rep.s2.std[ch] << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-bridged translation and rain-adaptation training toolkit"};
    app.require_subcommand(1);

    CommonArgs common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "experiment config JSON");
        return sub;
    };

    // toygen
    std::string out_dir;
    auto* toygen = add_common(app.add_subcommand("toygen", "generate the four toy domains"));
    toygen->add_option("--out", out_dir, "output directory")->required();
    int flag_n = -1, flag_eval_n = -1, flag_bridge_n = -1, flag_q = -1, flag_size = -1;
    uint64_t flag_seed = 0;
    bool has_seed = false;
    toygen->add_option("--n", flag_n, "samples per main domain");
    toygen->add_option("--eval-n", flag_eval_n, "held-out labeled target samples");
    toygen->add_option("--bridge-n", flag_bridge_n, "samples per bridge domain");
    toygen->add_option("--q", flag_q, "class count");
    toygen->add_option("--size", flag_size, "square image size");
    toygen->add_option("--seed", flag_seed, "toy world seed")->each([&](const std::string&) {
        has_seed = true;
    });

    // bridge-build
    std::string a_path, b_path, c_path, d_path;
    bool print_gap = false;
    auto* bridge = add_common(app.add_subcommand("bridge-build", "assemble bridged training sets"));
    bridge->add_option("--a", a_path, "source manifest")->required();
    bridge->add_option("--b", b_path, "target manifest")->required();
    bridge->add_option("--c", c_path, "clear bridge manifest")->required();
    bridge->add_option("--d", d_path, "rain bridge manifest")->required();
    bridge->add_option("--out", out_dir, "output directory")->required();
    bridge->add_flag("--gap", print_gap, "print channel-statistics gap before/after bridging");

    // i2i-train
    auto* i2it = add_common(app.add_subcommand("i2i-train", "train the translator"));
    i2it->add_option("--a", a_path, "clear (bridged) manifest")->required();
    i2it->add_option("--b", b_path, "rain (bridged) manifest")->required();
    i2it->add_option("--out", out_dir, "output directory")->required();
    long flag_iters = -1;
    i2it->add_option("--iters", flag_iters, "training iterations");
    uint64_t i2i_seed = 0;
    bool has_i2i_seed = false;
    i2it->add_option("--seed", i2i_seed, "training seed")->each([&](const std::string&) {
        has_i2i_seed = true;
    });

    // i2i-translate
    std::string ckpt_path, image_path, out_path;
    uint64_t style_seed = 0;
    int n_styles = 1;
    auto* i2ix = add_common(app.add_subcommand("i2i-translate", "translate one image"));
    i2ix->add_option("--checkpoint", ckpt_path, "translator checkpoint")->required();
    i2ix->add_option("--image", image_path, "input image (PPM)")->required();
    i2ix->add_option("--out", out_path, "output image path")->required();
    i2ix->add_option("--style-seed", style_seed, "style RNG seed");
    i2ix->add_option("--n-styles", n_styles, "write this many styled outputs");

    // uda-train
    std::string src_path, tgt_path, eval_path, translator_ckpt, resume_path, strategy_str;
    auto* udat = add_common(app.add_subcommand("uda-train", "adaptation training"));
    udat->add_option("--src", src_path, "labeled source manifest")->required();
    udat->add_option("--tgt", tgt_path, "unlabeled target manifest")->required();
    udat->add_option("--eval", eval_path, "labeled held-out target manifest");
    udat->add_option("--translator", translator_ckpt, "translator checkpoint for OMS");
    udat->add_option("--out", out_dir, "output directory")->required();
    udat->add_option("--strategy", strategy_str, "pseudo-label strategy: none|batchwise|wpl");
    udat->add_option("--resume", resume_path, "resume from a training state file");
    uint64_t uda_seed = 0;
    bool has_uda_seed = false;
    udat->add_option("--seed", uda_seed, "training seed")->each([&](const std::string&) {
        has_uda_seed = true;
    });
    double flag_p_translate = -1.0;
    udat->add_option("--p-translate", flag_p_translate, "translated-batch probability");
    int flag_epochs = -1, flag_refine = -1;
    udat->add_option("--epochs", flag_epochs, "main-phase epochs");
    udat->add_option("--refine-epochs", flag_refine, "refinement-phase epochs");

    // eval
    std::string report_csv, plots_dir, metrics_csv;
    auto* evalc = add_common(app.add_subcommand("eval", "evaluate a segmentation checkpoint"));
    evalc->add_option("--checkpoint", ckpt_path, "segmentation checkpoint")->required();
    evalc->add_option("--manifest", src_path, "labeled manifest")->required();
    evalc->add_option("--out", report_csv, "report CSV path")->required();
    evalc->add_option("--plots", plots_dir, "directory for curve plots");
    evalc->add_option("--metrics", metrics_csv, "training metrics CSV to plot");

    // gap
    auto* gapc = add_common(app.add_subcommand("gap", "channel-statistics domain gap"));
    gapc->add_option("--s1", a_path, "first manifest")->required();
    gapc->add_option("--s2", b_path, "second manifest")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        common.resolve();
        if (toygen->parsed()) {
            if (flag_n >= 0) common.cfg.toy_n = flag_n;
            if (flag_eval_n >= 0) common.cfg.toy_eval_n = flag_eval_n;
            if (flag_bridge_n >= 0) common.cfg.toy_bridge_n = flag_bridge_n;
            if (flag_q >= 0) common.cfg.toy.class_count = flag_q;
            if (flag_size >= 0) common.cfg.toy.image_h = common.cfg.toy.image_w = flag_size;
            if (has_seed) common.cfg.toy.seed = flag_seed;
            return cmd_toygen(common, out_dir);
        }
        if (bridge->parsed())
            return cmd_bridge_build(common, a_path, b_path, c_path, d_path, out_dir, print_gap);
        if (i2it->parsed()) {
            if (flag_iters >= 0) common.cfg.i2i.iterations = flag_iters;
            if (has_i2i_seed) common.cfg.i2i.seed = i2i_seed;
            return cmd_i2i_train(common, a_path, b_path, out_dir);
        }
        if (i2ix->parsed())
            return cmd_i2i_translate(ckpt_path, image_path, out_path, style_seed, n_styles);
        if (udat->parsed()) {
            if (!strategy_str.empty())
                common.cfg.uda.strategy = uda::strategy_from_string(strategy_str);
            if (has_uda_seed) common.cfg.uda.seed = uda_seed;
            if (flag_p_translate >= 0) common.cfg.uda.paths.p_translate = flag_p_translate;
            if (flag_epochs >= 0) common.cfg.uda.epochs = flag_epochs;
            if (flag_refine >= 0) common.cfg.uda.refine_epochs = flag_refine;
            return cmd_uda_train(common, src_path, tgt_path, eval_path, translator_ckpt, out_dir,
                                 resume_path);
        }
        if (evalc->parsed()) return cmd_eval(ckpt_path, src_path, report_csv, plots_dir, metrics_csv);
        if (gapc->parsed()) return cmd_gap(a_path, b_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
