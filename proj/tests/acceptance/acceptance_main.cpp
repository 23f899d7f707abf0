// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the exit code is the number of failed criteria. Long-running
// pipeline pieces go through the command-line tool, numerical suites run
// in-process against the library.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../wpl_test_support.hpp"
#include "rainshift/core/check.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/datasets/bridge.hpp"
#include "rainshift/datasets/manifest.hpp"
#include "rainshift/datasets/toyworld.hpp"
#include "rainshift/evalm/diversity.hpp"
#include "rainshift/evalm/metrics.hpp"
#include "rainshift/i2i/translator.hpp"
#include "rainshift/uda/trainer.hpp"
#include "rainshift/wpl/wpl.hpp"

namespace fs = std::filesystem;
using namespace rainshift;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
fs::path g_work;
int g_failures = 0;

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name << " ("
              << detail << ")" << std::endl;
    if (!pass) ++g_failures;
}

void info(const std::string& msg) { std::cout << "[INFO] " << msg << std::endl; }

int run_cli(const std::string& args, const std::string& log_name) {
    const std::string log = (g_work / (log_name + ".log")).string();
    const std::string cmd = g_cli + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// First data row, first column of an eval report CSV (the mIoU).
double read_report_miou(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    check(static_cast<bool>(std::getline(in, line)), csv.string() + ": missing header");
    check(static_cast<bool>(std::getline(in, line)), csv.string() + ": missing data row");
    return std::stod(line.substr(0, line.find(',')));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------------------

void criterion1_gradient_suite() {
    const auto start = Clock::now();
    Rng rng(101);
    wpl::WplLossConfig cfg;
    int fails = 0;
    double worst_beta = 0.0, worst_p = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        const int q = trial % 3 == 0 ? 2 : (trial % 3 == 1 ? 3 : 19);
        const auto [p, alpha] = wpl_oracle::random_point_off_boundary(8, 8, q, rng);
        const wpl::ThresholdParam theta = wpl::ThresholdParam::from_alpha(alpha);
        const auto res = wpl::wpl_loss(p, theta, cfg);

        const double fd_b = wpl_oracle::fd_beta(p, theta.beta, cfg);
        const double rel_b = std::abs(res.d_beta - fd_b) / std::max(std::abs(fd_b), 1e-8);
        worst_beta = std::max(worst_beta, rel_b);
        if (rel_b >= 1e-4) ++fails;

        int pick = -1;
        for (size_t u = 0; u < p.pixels(); ++u)
            if (res.state.included[u]) pick = static_cast<int>(u);
        if (pick >= 0) {
            const int cls = res.state.classes[pick];
            const double h = 1e-6;
            wpl::ProbabilityMap pp = p, pm = p;
            pp.p[pick * q + cls] += h;
            pm.p[pick * q + cls] -= h;
            const double fd_p = (wpl_oracle::frozen_loss_in_p(p, pp, alpha, cfg) -
                                 wpl_oracle::frozen_loss_in_p(p, pm, alpha, cfg)) /
                                (2 * h);
            const double an = res.d_p[pick * q + cls];
            const double rel_p = std::abs(an - fd_p) / std::max(std::abs(fd_p), 1e-8);
            worst_p = std::max(worst_p, rel_p);
            if (rel_p >= 1e-4) ++fails;
        }
    }
    const double secs = elapsed(start);
    report(1, "WPL gradient suite vs central differences", fails == 0 && secs < 60.0,
           "100 points, worst rel err beta=" + fmt(worst_beta) + " p=" + fmt(worst_p) + ", " +
               fmt(secs) + " s");
}

void criterion2_brute_force() {
    const auto start = Clock::now();
    Rng rng(202);
    long mismatches = 0;
    for (const int q : {2, 3, 19}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const auto p = wpl_oracle::random_map(8, 8, q, rng);
            const double alpha = 0.15 + 0.8 * rng.uniform();
            const auto s = wpl::compute_pseudo_label(p, alpha);
            const auto w = wpl::compute_weights(p, alpha);
            double ce_acc = 0.0;
            long n_inc = 0;
            for (size_t u = 0; u < p.pixels(); ++u) {
                const auto d = wpl_oracle::decide_pixel(p.p.data() + u * q, q, alpha);
                if (s.classes[u] != d.cls || (s.included[u] == 1) != d.included ||
                    w[u] != d.weight)
                    ++mismatches;
                if (d.included) {
                    ++n_inc;
                    ce_acc += d.weight * -std::log(std::max(d.max_p, 1e-12));
                }
            }
            wpl::PseudoLabelState full = s;
            full.weights = w;
            const double expect = n_inc ? ce_acc / double(n_inc) : 0.0;
            if (wpl::weighted_ce(p, full) != expect) ++mismatches;
        }
    }
    const double secs = elapsed(start);
    report(2, "brute-force oracle equivalence (1000 maps x Q in {2,3,19})",
           mismatches == 0 && secs < 120.0,
           std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s");
}

void criterion3_scalar_anchors() {
    const wpl::WplLossConfig cfg;  // sigma = 0.005, gamma = 1 (reference values)
    const double lb = wpl::balancing_loss(0.8);
    const bool lb_ok = std::abs(lb - 2.5903) < 1e-4;

    wpl::ProbabilityMap p(1, 1, 2);
    p.p = {0.9, 0.1};
    const auto w = wpl::compute_weights(p, 0.8);
    const bool w_ok = w[0] == 0.5;  // exact in double precision

    const double lss = cfg.sigma * 2.0 + cfg.gamma * 2.5903;
    const bool lss_ok = std::abs(lss - 2.6003) < 1e-4;

    report(3, "scalar anchors L_b(0.8), w(0.9|0.8), combined loss", lb_ok && w_ok && lss_ok,
           "L_b=" + fmt(lb) + ", w=" + fmt(w[0]) + (w_ok ? " (exact)" : " (NOT exact)") +
               ", L_ss=" + fmt(lss));
}

uda::LoadedSet load_subset(const datasets::DatasetManifest& m, int n, bool labels) {
    datasets::DatasetManifest sub = m;
    sub.samples.resize(std::min<size_t>(n, m.samples.size()));
    return uda::load_set(sub, labels);
}

void criterion4_alpha_dynamics(const datasets::DatasetManifest& src,
                               const datasets::DatasetManifest& tgt) {
    // Sign tests by finite differences, away from inclusion boundaries.
    Rng rng(404);
    int sign_fails = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto [p, alpha] = wpl_oracle::random_point_off_boundary(8, 8, 3, rng);
        const double h = 1e-6;
        const double dlb =
            (wpl_oracle::scalar_balancing(alpha + h) - wpl_oracle::scalar_balancing(alpha - h)) /
            (2 * h);
        const double dlw = (wpl_oracle::scalar_weighted_ce(p, alpha + h,
                                                           wpl::LossNormalization::mean) -
                            wpl_oracle::scalar_weighted_ce(p, alpha - h,
                                                           wpl::LossNormalization::mean)) /
                           (2 * h);
        if (!(dlb > 0.0)) ++sign_fails;
        if (!(dlw <= 1e-12)) ++sign_fails;
    }

    // Coverage expansion over three seeded refinement runs.
    int expanded = 0;
    std::string cov_detail;
    for (uint64_t seed : {11ull, 12ull, 13ull}) {
        uda::UdaConfig cfg;
        cfg.epochs = 1;
        cfg.refine_epochs = 5;
        cfg.batch_size = 4;
        cfg.crop_h = cfg.crop_w = 64;
        cfg.model.widths = {8, 16, 32};
        cfg.model.class_count = 4;
        cfg.enc_lr = 3e-3;
        cfg.dec_lr = 1e-2;
        cfg.augment.scale_min = 0.8;
        cfg.augment.scale_max = 1.3;
        cfg.paths.p_translate = 0.0;
        cfg.eval_every = 0;
        cfg.seed = seed;

        uda::UdaTrainer trainer(load_subset(src, 150, true), load_subset(tgt, 150, false), cfg,
                                nullptr);
        const auto res = trainer.run((g_work / ("c4_seed" + std::to_string(seed))).string(),
                                     std::nullopt);
        const auto& cov = res.refine_coverage;
        if (cov.size() < 10) {
            cov_detail += " seed" + std::to_string(seed) + ":too-few-steps";
            continue;
        }
        const size_t k = std::max<size_t>(1, cov.size() / 10);
        double first = 0, last = 0;
        for (size_t i = 0; i < k; ++i) {
            first += cov[i] / k;
            last += cov[cov.size() - k + i] / k;
        }
        if (last > first) ++expanded;
        cov_detail += " seed" + std::to_string(seed) + ":" + fmt(first) + "->" + fmt(last);
    }
    report(4, "alpha dynamics: sign tests and pseudo-label expansion",
           sign_fails == 0 && expanded >= 2,
           std::to_string(sign_fails) + " sign failures; expansion in " +
               std::to_string(expanded) + "/3 seeds:" + cov_detail);
}

struct Criterion5Artifacts {
    bool ran = false;
    fs::path translator_ckpt;
    fs::path data_dir;
    double miou_full = 0.0;
    double miou_base = 0.0;
};

Criterion5Artifacts criterion5_toy_uda() {
    Criterion5Artifacts art;
    const auto start = Clock::now();

    const fs::path cfg_path = g_work / "toy_config.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({
  "toy": {"image_h": 64, "image_w": 64, "class_count": 4, "seed": 42,
          "n": 500, "eval_n": 200, "bridge_n": 150},
  "i2i": {"iterations": 4000, "crop": 64, "base_width": 8, "disc_width": 16,
          "mlp_hidden": 32, "log_every": 50},
  "uda": {"epochs": 10, "refine_epochs": 8, "batch_size": 4, "crop_h": 64, "crop_w": 64,
          "enc_lr": 0.003, "dec_lr": 0.01, "lr_halving_epochs": 5,
          "widths": [8, 16, 32], "eval_every": 2,
          "augment": {"scale_min": 0.8, "scale_max": 1.3, "flip_prob": 0.5},
          "paths": {"p_tp": 0.75, "p_translate": 0.5}}
})";
    }
    const std::string cfg_arg = " --config " + cfg_path.string();
    const fs::path data = g_work / "data";
    art.data_dir = data;

    auto fail = [&](const std::string& step) {
        report(5, "toy adaptation end-to-end", false, step + " failed, see logs in " +
                                                          g_work.string());
        return art;
    };

    if (run_cli("toygen --out " + data.string() + cfg_arg, "c5_toygen") != 0)
        return fail("toygen");
    if (run_cli("bridge-build --a " + (data / "source_clear.manifest").string() + " --b " +
                    (data / "target_rain.manifest").string() + " --c " +
                    (data / "bridge_clear.manifest").string() + " --d " +
                    (data / "bridge_rain.manifest").string() + " --out " +
                    (g_work / "bridged").string() + " --gap",
                "c5_bridge") != 0)
        return fail("bridge-build");
    if (run_cli("i2i-train --a " + (g_work / "bridged" / "a_bridged.manifest").string() +
                    " --b " + (g_work / "bridged" / "b_bridged.manifest").string() + " --out " +
                    (g_work / "i2i").string() + cfg_arg + " --seed 42",
                "c5_i2i") != 0)
        return fail("i2i-train");
    art.translator_ckpt = g_work / "i2i" / "i2i.ckpt";

    const std::string common = " --src " + (data / "source_clear.manifest").string() + " --tgt " +
                               (data / "target_rain.manifest").string() + " --eval " +
                               (data / "target_eval.manifest").string() + cfg_arg + " --seed 7";
    if (run_cli("uda-train" + common + " --translator " + art.translator_ckpt.string() +
                    " --strategy wpl --out " + (g_work / "uda_full").string(),
                "c5_uda_full") != 0)
        return fail("uda-train (full pipeline)");
    // The no-adaptation reference trains on raw source images only for the
    // same total number of epochs.
    if (run_cli("uda-train" + common + " --strategy none --p-translate 0 --epochs 18 "
                "--refine-epochs 0 --out " +
                    (g_work / "uda_base").string(),
                "c5_uda_base") != 0)
        return fail("uda-train (no adaptation)");

    if (run_cli("eval --checkpoint " + (g_work / "uda_full" / "seg.ckpt").string() +
                    " --manifest " + (data / "target_eval.manifest").string() + " --out " +
                    (g_work / "report_full.csv").string() + " --plots " +
                    (g_work / "plots").string() + " --metrics " +
                    (g_work / "uda_full" / "metrics.csv").string(),
                "c5_eval_full") != 0)
        return fail("eval (full)");
    if (run_cli("eval --checkpoint " + (g_work / "uda_base" / "seg.ckpt").string() +
                    " --manifest " + (data / "target_eval.manifest").string() + " --out " +
                    (g_work / "report_base.csv").string(),
                "c5_eval_base") != 0)
        return fail("eval (baseline)");

    art.miou_full = read_report_miou(g_work / "report_full.csv");
    art.miou_base = read_report_miou(g_work / "report_base.csv");
    const double secs = elapsed(start);
    const bool pass = art.miou_full >= art.miou_base + 0.05 && secs < 1800.0;
    art.ran = true;
    report(5, "toy adaptation end-to-end (bridge + style sampling + weighted pseudo-labels)",
           pass,
           "target mIoU " + fmt(art.miou_full) + " vs no-adaptation " + fmt(art.miou_base) +
               " (gap " + fmt(art.miou_full - art.miou_base) + ", needs >= 0.05), " + fmt(secs) +
               " s");
    return art;
}

void criterion5_supplements(const Criterion5Artifacts& art) {
    if (!art.ran) {
        info("skipping translator supplements: pipeline artifacts unavailable");
        return;
    }
    auto model = i2i::TranslatorModel::load(art.translator_ckpt.string());
    const auto eval_manifest =
        datasets::load_manifest((art.data_dir / "source_clear.manifest").string(), false);

    std::vector<Image> sources;
    for (int i = 0; i < 24; ++i) sources.push_back(load_image(eval_manifest.samples[i].image_ref));

    // Distinct styles must visibly change the output.
    Rng rng(55);
    double mad = 0.0;
    int mad_pairs = 0;
    for (int i = 0; i < 8; ++i) {
        i2i::StyleCode s1 = i2i::sample_style(model.spec().style_dim, rng);
        i2i::StyleCode s2 = i2i::sample_style(model.spec().style_dim, rng);
        if (i2i::style_distance(s1, s2) <= 1.0) continue;
        const Image o1 = i2i::translate(model, sources[i], s1);
        const Image o2 = i2i::translate(model, sources[i], s2);
        double acc = 0;
        for (size_t k = 0; k < o1.data.size(); ++k)
            acc += std::abs(double(o1.data[k]) - o2.data[k]);
        mad += acc / double(o1.data.size());
        ++mad_pairs;
    }
    mad = mad_pairs ? mad / mad_pairs : 0.0;
    info("trained translator: mean abs pixel diff across distant styles = " + fmt(mad) +
         " over " + std::to_string(mad_pairs) + " pairs (expect > 0.01)");

    const double diversity = evalm::style_diversity(model, sources, 4, rng);
    info("trained translator: style diversity = " + fmt(diversity) + " (expect > 0.01)");

    // Style reconstruction: re-encoding a translation recovers the style.
    double mse = 0.0;
    for (int i = 0; i < 8; ++i) {
        const i2i::StyleCode s = i2i::sample_style(model.spec().style_dim, rng);
        const Image out = i2i::translate(model, sources[i], s);
        const i2i::StyleCode rec = i2i::encode_style(model, out, i2i::Domain::rain);
        double acc = 0;
        for (int d = 0; d < s.dim(); ++d)
            acc += (double(s.values[d]) - rec.values[d]) * (double(s.values[d]) - rec.values[d]);
        mse += acc / s.dim();
    }
    mse /= 8;
    info("trained translator: style reconstruction MSE = " + fmt(mse));

    // Rain-trait transfer, measured by the droplet template detector on
    // translated clear images (threshold from the generator's radius range).
    const evalm::DropletDetector det(2.0, 4.0);
    std::vector<Image> translated;
    Rng rng2(77);
    for (const auto& img : sources)
        translated.push_back(i2i::translate(model, img, i2i::sample_style(model.spec().style_dim,
                                                                          rng2)));
    const double rate = evalm::droplet_presence_rate(translated, det);
    info("trained translator: droplet presence rate on translated clear images = " + fmt(rate));
}

void criterion6_gating() {
    Rng rng(606);
    const double p_tp = 0.75;
    int fired = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (uda::self_supervision_gate(rng.uniform(), p_tp)) ++fired;
    const double freq = double(fired) / n;
    report(6, "self-supervised path gating frequency", std::abs(freq - 0.25) <= 0.02,
           fmt(freq) + " over 10000 draws with p_tp=0.75, expected 0.25 +/- 0.02");
}

void criterion7_bridge_arithmetic() {
    datasets::DatasetManifest a, b, c, d;
    for (auto* m : {&a, &b, &c, &d}) {
        m->class_count = 4;
        m->class_names = {"c0", "c1", "c2", "c3"};
    }
    auto add = [](datasets::DatasetManifest& m, const std::string& ref, datasets::Weather w,
                  const std::string& video, long frame) {
        datasets::SampleRecord r;
        r.image_ref = ref;
        r.tags.weather = w;
        r.tags.setup = "channel0";
        r.source_video = video;
        r.frame_index = frame;
        m.samples.push_back(r);
    };
    add(a, "a0", datasets::Weather::clear, "", 0);
    add(b, "b0", datasets::Weather::rain, "", 0);
    for (int v = 0; v < 2; ++v)
        for (long f = 0; f < 6026; ++f)
            add(c, "c" + std::to_string(v) + "_" + std::to_string(f), datasets::Weather::clear,
                "cv" + std::to_string(v), f);
    for (int v = 0; v < 3; ++v)
        for (long f = 0; f < 9294; ++f)
            add(d, "d" + std::to_string(v) + "_" + std::to_string(f), datasets::Weather::rain,
                "dv" + std::to_string(v), f);

    const auto [ap, bp] = datasets::assemble_bridged_dataset(a, b, c, d);
    const long clear_added = long(ap.samples.size()) - long(a.samples.size());
    const long rain_added = long(bp.samples.size()) - long(b.samples.size());
    const long total = clear_added + rain_added;
    report(7, "bridge arithmetic at the reference frame counts",
           clear_added == 12052 && rain_added == 27882 && total == 39934,
           "2x6026=" + std::to_string(clear_added) + ", 3x9294=" + std::to_string(rain_added) +
               ", total=" + std::to_string(total));
}

void criterion8_reproducibility(const fs::path& tiny, const std::string& cfg_arg) {
    const std::string common = " --src " + (tiny / "source_clear.manifest").string() + " --tgt " +
                               (tiny / "target_rain.manifest").string() + cfg_arg + " --seed 21";

    bool ok = true;
    std::string detail;

    // Identical reruns.
    ok &= run_cli("uda-train" + common + " --strategy wpl --out " + (g_work / "c8_r1").string(),
                  "c8_r1") == 0;
    ok &= run_cli("uda-train" + common + " --strategy wpl --out " + (g_work / "c8_r2").string(),
                  "c8_r2") == 0;
    const bool csv_same =
        ok && slurp(g_work / "c8_r1" / "metrics.csv") == slurp(g_work / "c8_r2" / "metrics.csv");
    detail += std::string("metric CSVs ") + (csv_same ? "identical" : "DIFFER");

    // i2i reruns are covered by the same contract.
    ok &= run_cli("i2i-train --a " + (tiny / "source_clear.manifest").string() + " --b " +
                      (tiny / "target_rain.manifest").string() + cfg_arg +
                      " --iters 25 --seed 33 --out " + (g_work / "c8_i1").string(),
                  "c8_i1") == 0;
    ok &= run_cli("i2i-train --a " + (tiny / "source_clear.manifest").string() + " --b " +
                      (tiny / "target_rain.manifest").string() + cfg_arg +
                      " --iters 25 --seed 33 --out " + (g_work / "c8_i2").string(),
                  "c8_i2") == 0;
    const bool i2i_same = ok && slurp(g_work / "c8_i1" / "i2i_losses.csv") ==
                                    slurp(g_work / "c8_i2" / "i2i_losses.csv");
    detail += std::string(", loss CSVs ") + (i2i_same ? "identical" : "DIFFER");

    // Resume from a mid-run state matches the uninterrupted run bit for bit.
    ok &= run_cli("uda-train" + common + " --strategy wpl --out " +
                      (g_work / "c8_full").string(),
                  "c8_full") == 0;
    ok &= run_cli("uda-train" + common + " --strategy wpl --out " +
                      (g_work / "c8_part").string(),
                  "c8_part") == 0;
    const fs::path mid = g_work / "c8_part" / "state_epoch0002.ckpt";
    bool resume_same = false;
    if (ok && fs::exists(mid)) {
        ok &= run_cli("uda-train" + common + " --strategy wpl --resume " + mid.string() +
                          " --out " + (g_work / "c8_resumed").string(),
                      "c8_resumed") == 0;
        resume_same = ok && slurp(g_work / "c8_full" / "state_final.ckpt") ==
                                slurp(g_work / "c8_resumed" / "state_final.ckpt") &&
                      slurp(g_work / "c8_full" / "seg.ckpt") ==
                          slurp(g_work / "c8_resumed" / "seg.ckpt");
    }
    detail += std::string(", resume ") + (resume_same ? "matches" : "DIFFERS");

    report(8, "seeded reproducibility and exact resume", csv_same && i2i_same && resume_same,
           detail);
}

void criterion9_strategy_harness(const fs::path& tiny, const std::string& cfg_arg,
                                 const fs::path& translator) {
    const std::string common = " --src " + (tiny / "source_clear.manifest").string() + " --tgt " +
                               (tiny / "target_rain.manifest").string() + " --eval " +
                               (tiny / "target_eval.manifest").string() + cfg_arg +
                               " --translator " + translator.string() + " --seed 77";
    bool ok = true;
    std::string detail;
    for (const std::string strat : {"none", "batchwise", "wpl"}) {
        const fs::path out = g_work / ("c9_" + strat);
        ok &= run_cli("uda-train" + common + " --strategy " + strat + " --out " + out.string(),
                      "c9_" + strat) == 0;
        double miou = -1;
        if (ok && run_cli("eval --checkpoint " + (out / "seg.ckpt").string() + " --manifest " +
                              (tiny / "target_eval.manifest").string() + " --out " +
                              (out / "report.csv").string(),
                          "c9_eval_" + strat) == 0)
            miou = read_report_miou(out / "report.csv");
        ok &= miou >= 0.0 && fs::exists(out / "metrics.csv");
        detail += strat + "=" + fmt(miou) + " ";
    }
    report(9, "pseudo-label strategy harness completes for none/batchwise/wpl", ok,
           "toy mIoU (not asserted): " + detail);
    info("full-scale reference ordering (not asserted at toy scale): "
         "weighted 40.04 > none 39.77 > batch-wise 38.23 mIoU");
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli, workdir;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") cli = argv[i + 1];
        else if (flag == "--workdir") workdir = argv[i + 1];
    }
    if (cli.empty() || workdir.empty()) {
        std::cerr << "usage: acceptance --cli <path-to-cli> --workdir <dir>\n";
        return 64;
    }
    g_cli = cli;
    g_work = fs::path(workdir);
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    const auto suite_start = Clock::now();

    criterion1_gradient_suite();
    criterion2_brute_force();
    criterion3_scalar_anchors();

    // The big pipeline first produces the shared data and translator.
    const Criterion5Artifacts art = criterion5_toy_uda();

    if (art.ran) {
        const auto src = datasets::load_manifest((art.data_dir / "source_clear.manifest").string(),
                                                 false);
        const auto tgt = datasets::load_manifest((art.data_dir / "target_rain.manifest").string(),
                                                 false);
        criterion4_alpha_dynamics(src, tgt);
    } else {
        report(4, "alpha dynamics: sign tests and pseudo-label expansion", false,
               "pipeline data unavailable");
    }

    criterion5_supplements(art);
    criterion6_gating();
    criterion7_bridge_arithmetic();

    // Small dedicated dataset for the reproducibility and strategy harnesses.
    const fs::path tiny = g_work / "tiny";
    const fs::path tiny_cfg = g_work / "tiny_config.json";
    {
        std::ofstream cfg(tiny_cfg);
        cfg << R"({
  "toy": {"image_h": 64, "image_w": 64, "class_count": 4, "seed": 5,
          "n": 80, "eval_n": 40, "bridge_n": 20},
  "i2i": {"iterations": 25, "crop": 64, "base_width": 8, "disc_width": 16, "log_every": 5},
  "uda": {"epochs": 2, "refine_epochs": 2, "batch_size": 4, "crop_h": 64, "crop_w": 64,
          "enc_lr": 0.003, "dec_lr": 0.01, "widths": [8, 16, 32], "eval_every": 2,
          "checkpoint_every": 2,
          "augment": {"scale_min": 0.8, "scale_max": 1.3},
          "paths": {"p_tp": 0.75, "p_translate": 0.0}}
})";
    }
    const std::string tiny_cfg_arg = " --config " + tiny_cfg.string();
    if (run_cli("toygen --out " + tiny.string() + tiny_cfg_arg, "tinygen") == 0) {
        criterion8_reproducibility(tiny, tiny_cfg_arg);
        if (art.ran) {
            // Strategy runs keep the translation path on (the Table-4 style
            // comparison shares the translated training).
            const fs::path c9_cfg = g_work / "c9_config.json";
            std::ofstream cfg(c9_cfg);
            cfg << R"({
  "uda": {"epochs": 1, "refine_epochs": 2, "batch_size": 4, "crop_h": 64, "crop_w": 64,
          "enc_lr": 0.003, "dec_lr": 0.01, "widths": [8, 16, 32], "eval_every": 3,
          "augment": {"scale_min": 0.8, "scale_max": 1.3},
          "paths": {"p_tp": 0.75, "p_translate": 0.5}}
})";
            cfg.close();
            criterion9_strategy_harness(tiny, " --config " + c9_cfg.string(),
                                        art.translator_ckpt);
        } else {
            report(9, "pseudo-label strategy harness completes for none/batchwise/wpl", false,
                   "translator unavailable");
        }
    } else {
        report(8, "seeded reproducibility and exact resume", false, "tiny toygen failed");
        report(9, "pseudo-label strategy harness completes for none/batchwise/wpl", false,
               "tiny toygen failed");
    }

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(g_failures) +
                                                                " CRITERIA FAILED")
              << " (suite time " << fmt(elapsed(suite_start)) << " s)" << std::endl;
    return g_failures;
}
