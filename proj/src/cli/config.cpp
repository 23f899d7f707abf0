#include "rainshift/cli/config.hpp"

#include <fstream>
#include <set>

#include "rainshift/core/check.hpp"

namespace rainshift::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    check(j.is_object(), "config: '" + ctx + "' must be an object");
    for (const auto& [key, _] : j.items())
        check(allowed.count(key) > 0, "config: unknown key '" + key + "' in " + ctx);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;

    json toy;
    toy["image_h"] = cfg.toy.image_h;
    toy["image_w"] = cfg.toy.image_w;
    toy["class_count"] = cfg.toy.class_count;
    toy["shape_density"] = cfg.toy.shape_density;
    toy["seed"] = cfg.toy.seed;
    toy["n"] = cfg.toy_n;
    toy["eval_n"] = cfg.toy_eval_n;
    toy["bridge_n"] = cfg.toy_bridge_n;
    toy["rain"] = {{"droplet_count_min", cfg.toy.rain.droplet_count_min},
                   {"droplet_count_max", cfg.toy.rain.droplet_count_max},
                   {"droplet_radius_min", cfg.toy.rain.droplet_radius_min},
                   {"droplet_radius_max", cfg.toy.rain.droplet_radius_max},
                   {"darkening_factor", cfg.toy.rain.darkening_factor},
                   {"desaturation", cfg.toy.rain.desaturation},
                   {"blur_radius", cfg.toy.rain.blur_radius}};
    toy["setup"] = {{"hue_shift", cfg.toy.setup.hue_shift},
                    {"vignette_strength", cfg.toy.setup.vignette_strength}};
    j["toy"] = toy;

    json i2i;
    i2i["iterations"] = cfg.i2i.iterations;
    i2i["batch_size"] = cfg.i2i.batch_size;
    i2i["crop"] = cfg.i2i.crop;
    i2i["resize_height"] = cfg.i2i.resize_height;
    i2i["lr"] = cfg.i2i.lr;
    i2i["adam_beta1"] = cfg.i2i.adam_beta1;
    i2i["adam_beta2"] = cfg.i2i.adam_beta2;
    i2i["w_adv"] = cfg.i2i.w_adv;
    i2i["w_recon"] = cfg.i2i.w_recon;
    i2i["w_style"] = cfg.i2i.w_style;
    i2i["w_content"] = cfg.i2i.w_content;
    i2i["style_dim"] = cfg.i2i.spec.style_dim;
    i2i["base_width"] = cfg.i2i.spec.base_width;
    i2i["res_blocks"] = cfg.i2i.spec.res_blocks;
    i2i["disc_width"] = cfg.i2i.spec.disc_width;
    i2i["mlp_hidden"] = cfg.i2i.spec.mlp_hidden;
    i2i["log_every"] = cfg.i2i.log_every;
    j["i2i"] = i2i;

    json uda;
    uda["epochs"] = cfg.uda.epochs;
    uda["refine_epochs"] = cfg.uda.refine_epochs;
    uda["batch_size"] = cfg.uda.batch_size;
    uda["crop_h"] = cfg.uda.crop_h;
    uda["crop_w"] = cfg.uda.crop_w;
    uda["enc_lr"] = cfg.uda.enc_lr;
    uda["dec_lr"] = cfg.uda.dec_lr;
    uda["momentum"] = cfg.uda.momentum;
    uda["lr_halving_epochs"] = cfg.uda.lr_halving_epochs;
    uda["eval_every"] = cfg.uda.eval_every;
    uda["checkpoint_every"] = cfg.uda.checkpoint_every;
    uda["strategy"] = uda::to_string(cfg.uda.strategy);
    uda["widths"] = cfg.uda.model.widths;
    uda["wpl"] = {{"sigma", cfg.uda.wpl.sigma},
                  {"gamma", cfg.uda.wpl.gamma},
                  {"alpha_init", cfg.uda.wpl.alpha_init},
                  {"alpha_lr", cfg.uda.wpl.alpha_lr},
                  {"alpha_momentum", cfg.uda.wpl.alpha_momentum},
                  {"normalization",
                   cfg.uda.wpl.normalization == wpl::LossNormalization::mean ? "mean" : "sum"}};
    j["uda"]["paths"] = {{"p_tp", cfg.uda.paths.p_tp},
                         {"p_translate", cfg.uda.paths.p_translate}};
    j["uda"]["augment"] = {{"scale_min", cfg.uda.augment.scale_min},
                           {"scale_max", cfg.uda.augment.scale_max},
                           {"flip_prob", cfg.uda.augment.flip_prob}};
    for (auto& [k, v] : uda.items()) j["uda"][k] = v;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    reject_unknown(j, {"seed", "toy", "i2i", "uda"}, "<root>");
    maybe(j, "seed", cfg.seed);

    if (j.contains("toy")) {
        const json& t = j.at("toy");
        reject_unknown(t,
                       {"image_h", "image_w", "class_count", "shape_density", "seed", "n",
                        "eval_n", "bridge_n", "rain", "setup"},
                       "toy");
        maybe(t, "image_h", cfg.toy.image_h);
        maybe(t, "image_w", cfg.toy.image_w);
        maybe(t, "class_count", cfg.toy.class_count);
        maybe(t, "shape_density", cfg.toy.shape_density);
        maybe(t, "seed", cfg.toy.seed);
        maybe(t, "n", cfg.toy_n);
        maybe(t, "eval_n", cfg.toy_eval_n);
        maybe(t, "bridge_n", cfg.toy_bridge_n);
        if (t.contains("rain")) {
            const json& r = t.at("rain");
            reject_unknown(r,
                           {"droplet_count_min", "droplet_count_max", "droplet_radius_min",
                            "droplet_radius_max", "darkening_factor", "desaturation",
                            "blur_radius"},
                           "toy.rain");
            maybe(r, "droplet_count_min", cfg.toy.rain.droplet_count_min);
            maybe(r, "droplet_count_max", cfg.toy.rain.droplet_count_max);
            maybe(r, "droplet_radius_min", cfg.toy.rain.droplet_radius_min);
            maybe(r, "droplet_radius_max", cfg.toy.rain.droplet_radius_max);
            maybe(r, "darkening_factor", cfg.toy.rain.darkening_factor);
            maybe(r, "desaturation", cfg.toy.rain.desaturation);
            maybe(r, "blur_radius", cfg.toy.rain.blur_radius);
        }
        if (t.contains("setup")) {
            const json& s = t.at("setup");
            reject_unknown(s, {"hue_shift", "vignette_strength"}, "toy.setup");
            maybe(s, "hue_shift", cfg.toy.setup.hue_shift);
            maybe(s, "vignette_strength", cfg.toy.setup.vignette_strength);
        }
    }

    if (j.contains("i2i")) {
        const json& t = j.at("i2i");
        reject_unknown(t,
                       {"iterations", "batch_size", "crop", "resize_height", "lr", "adam_beta1",
                        "adam_beta2", "w_adv", "w_recon", "w_style", "w_content", "style_dim",
                        "base_width", "res_blocks", "disc_width", "mlp_hidden", "log_every"},
                       "i2i");
        maybe(t, "iterations", cfg.i2i.iterations);
        maybe(t, "batch_size", cfg.i2i.batch_size);
        maybe(t, "crop", cfg.i2i.crop);
        maybe(t, "resize_height", cfg.i2i.resize_height);
        maybe(t, "lr", cfg.i2i.lr);
        maybe(t, "adam_beta1", cfg.i2i.adam_beta1);
        maybe(t, "adam_beta2", cfg.i2i.adam_beta2);
        maybe(t, "w_adv", cfg.i2i.w_adv);
        maybe(t, "w_recon", cfg.i2i.w_recon);
        maybe(t, "w_style", cfg.i2i.w_style);
        maybe(t, "w_content", cfg.i2i.w_content);
        maybe(t, "style_dim", cfg.i2i.spec.style_dim);
        maybe(t, "base_width", cfg.i2i.spec.base_width);
        maybe(t, "res_blocks", cfg.i2i.spec.res_blocks);
        maybe(t, "disc_width", cfg.i2i.spec.disc_width);
        maybe(t, "mlp_hidden", cfg.i2i.spec.mlp_hidden);
        maybe(t, "log_every", cfg.i2i.log_every);
    }

    if (j.contains("uda")) {
        const json& t = j.at("uda");
        reject_unknown(t,
                       {"epochs", "refine_epochs", "batch_size", "crop_h", "crop_w", "enc_lr",
                        "dec_lr", "momentum", "lr_halving_epochs", "eval_every",
                        "checkpoint_every", "strategy", "widths", "wpl", "paths", "augment"},
                       "uda");
        maybe(t, "epochs", cfg.uda.epochs);
        maybe(t, "refine_epochs", cfg.uda.refine_epochs);
        maybe(t, "batch_size", cfg.uda.batch_size);
        maybe(t, "crop_h", cfg.uda.crop_h);
        maybe(t, "crop_w", cfg.uda.crop_w);
        maybe(t, "enc_lr", cfg.uda.enc_lr);
        maybe(t, "dec_lr", cfg.uda.dec_lr);
        maybe(t, "momentum", cfg.uda.momentum);
        maybe(t, "lr_halving_epochs", cfg.uda.lr_halving_epochs);
        maybe(t, "eval_every", cfg.uda.eval_every);
        maybe(t, "checkpoint_every", cfg.uda.checkpoint_every);
        if (t.contains("strategy"))
            cfg.uda.strategy = uda::strategy_from_string(t.at("strategy").get<std::string>());
        maybe(t, "widths", cfg.uda.model.widths);
        if (t.contains("wpl")) {
            const json& w = t.at("wpl");
            reject_unknown(
                w, {"sigma", "gamma", "alpha_init", "alpha_lr", "alpha_momentum", "normalization"},
                "uda.wpl");
            maybe(w, "sigma", cfg.uda.wpl.sigma);
            maybe(w, "gamma", cfg.uda.wpl.gamma);
            maybe(w, "alpha_init", cfg.uda.wpl.alpha_init);
            maybe(w, "alpha_lr", cfg.uda.wpl.alpha_lr);
            maybe(w, "alpha_momentum", cfg.uda.wpl.alpha_momentum);
            if (w.contains("normalization")) {
                const std::string n = w.at("normalization").get<std::string>();
                check(n == "mean" || n == "sum", "config: uda.wpl.normalization must be mean|sum");
                cfg.uda.wpl.normalization =
                    n == "mean" ? wpl::LossNormalization::mean : wpl::LossNormalization::sum;
            }
        }
        if (t.contains("paths")) {
            const json& p = t.at("paths");
            reject_unknown(p, {"p_tp", "p_translate"}, "uda.paths");
            maybe(p, "p_tp", cfg.uda.paths.p_tp);
            maybe(p, "p_translate", cfg.uda.paths.p_translate);
        }
        if (t.contains("augment")) {
            const json& a = t.at("augment");
            reject_unknown(a, {"scale_min", "scale_max", "flip_prob"}, "uda.augment");
            maybe(a, "scale_min", cfg.uda.augment.scale_min);
            maybe(a, "scale_max", cfg.uda.augment.scale_max);
            maybe(a, "flip_prob", cfg.uda.augment.flip_prob);
        }
    }
    cfg.uda.model.class_count = cfg.toy.class_count;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), "cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

void write_resolved_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    check(out.good(), "cannot write resolved config: " + path);
    out << to_json(cfg).dump(2) << "\n";
}

}  // namespace rainshift::cli
