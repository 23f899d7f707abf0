#include "rainshift/i2i/train.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "rainshift/core/check.hpp"
#include "rainshift/core/csv.hpp"
#include "rainshift/datasets/augment.hpp"
#include "rainshift/nn/optim.hpp"

namespace fs = std::filesystem;

namespace rainshift::i2i {

namespace {

using nn::Tape;
using nn::Tensor;

// mean(|x - y|); gradient w.r.t. x written scaled by `weight`.
double l1_loss(const Tensor& x, const Tensor& y, double weight, Tensor& dx) {
    check(x.same_shape(y), "l1_loss: shape mismatch");
    const float g = static_cast<float>(weight / static_cast<double>(x.size()));
    double acc = 0.0;
    dx = Tensor(x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) {
        const float d = x.data[i] - y.data[i];
        acc += std::abs(d);
        dx.data[i] = d > 0.f ? g : (d < 0.f ? -g : 0.f);
    }
    return acc / static_cast<double>(x.size());
}

// mean((x - target)^2) against a constant target; least-squares GAN term.
double lsgan_loss(const Tensor& x, float target, double weight, Tensor& dx) {
    const float g = static_cast<float>(2.0 * weight / static_cast<double>(x.size()));
    double acc = 0.0;
    dx = Tensor(x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) {
        const float d = x.data[i] - target;
        acc += static_cast<double>(d) * d;
        dx.data[i] = g * d;
    }
    return acc / static_cast<double>(x.size());
}

Image load_training_image(const datasets::SampleRecord& rec, const I2iTrainConfig& cfg, Rng& rng) {
    Image img = load_image(rec.image_ref);
    if (cfg.resize_height > 0 && img.h != cfg.resize_height) {
        const double s = static_cast<double>(cfg.resize_height) / img.h;
        datasets::AugmentConfig ac;
        ac.scale_min = ac.scale_max = s;
        ac.flip_prob = 0.0;
        img = datasets::apply_augment_image(img, {s, false, 0, 0}, ac);
    }
    if (cfg.crop > 0 && (img.h > cfg.crop || img.w > cfg.crop)) {
        check(img.h >= cfg.crop && img.w >= cfg.crop, "i2i crop larger than image");
        const int oy = img.h > cfg.crop ? rng.uniform_int(img.h - cfg.crop + 1) : 0;
        const int ox = img.w > cfg.crop ? rng.uniform_int(img.w - cfg.crop + 1) : 0;
        Image out(img.c, cfg.crop, cfg.crop);
        for (int c = 0; c < img.c; ++c)
            for (int y = 0; y < cfg.crop; ++y)
                for (int x = 0; x < cfg.crop; ++x) out.at(c, y, x) = img.at(c, y + oy, x + ox);
        img = std::move(out);
    }
    return img;
}

struct LossTotals {
    double adv_d = 0, adv_g = 0, recon_img = 0, recon_latent = 0, total_g = 0;
};

}  // namespace

I2iTrainResult train_i2i(const datasets::DatasetManifest& a_bridged,
                         const datasets::DatasetManifest& b_bridged, const I2iTrainConfig& cfg,
                         const std::string& out_dir) {
    check(!a_bridged.samples.empty() && !b_bridged.samples.empty(),
          "train_i2i: both manifests must be non-empty");
    check(cfg.lr > 0, "train_i2i: learning rate must be positive");
    check(cfg.iterations >= 0 && cfg.batch_size >= 1, "train_i2i: bad iteration/batch config");
    fs::create_directories(out_dir);

    TranslatorModel model(cfg.spec, cfg.seed ^ 0x5eedULL);
    nn::Adam opt_g(model.generator_params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2);
    nn::Adam opt_d(model.discriminator_params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2);
    Rng rng(cfg.seed);

    I2iTrainResult res;
    res.checkpoint_path = (fs::path(out_dir) / "i2i.ckpt").string();
    res.losses_csv_path = (fs::path(out_dir) / "i2i_losses.csv").string();
    CsvWriter csv(res.losses_csv_path, {"iteration", "loss_name", "value"});

    const int sd = cfg.spec.style_dim;
    const float inv_batch = 1.f / static_cast<float>(cfg.batch_size);

    for (long it = 0; it < cfg.iterations; ++it) {
        LossTotals totals;

        // Discriminator update. Generator outputs are treated as constants:
        // their tapes are dropped without a backward pass.
        opt_d.zero_grad();
        for (int bi = 0; bi < cfg.batch_size; ++bi) {
            const auto& rec_a = a_bridged.samples[rng.uniform_int(int(a_bridged.samples.size()))];
            const auto& rec_b = b_bridged.samples[rng.uniform_int(int(b_bridged.samples.size()))];
            const Tensor xa = image_to_tanh_input(load_training_image(rec_a, cfg, rng));
            const Tensor xb = image_to_tanh_input(load_training_image(rec_b, cfg, rng));

            Tensor s_db = Tensor::vec(sd), s_da = Tensor::vec(sd);
            for (auto& v : s_db.data) v = static_cast<float>(rng.normal());
            for (auto& v : s_da.data) v = static_cast<float>(rng.normal());

            Tape tg;
            const Tensor fake_b =
                model.decoder(Domain::rain)
                    .forward(model.enc_content(Domain::clear).forward(xa, tg), s_db, tg);
            const Tensor fake_a =
                model.decoder(Domain::clear)
                    .forward(model.enc_content(Domain::rain).forward(xb, tg), s_da, tg);

            auto critic_step = [&](Discriminator& disc, const Tensor& real, const Tensor& fake) {
                Tape tr;
                Tensor d_real = disc.forward(real, tr);
                Tensor grad;
                totals.adv_d += lsgan_loss(d_real, 1.f, cfg.w_adv * inv_batch, grad);
                disc.backward(grad, tr);
                Tape tf;
                Tensor d_fake = disc.forward(fake, tf);
                totals.adv_d += lsgan_loss(d_fake, 0.f, cfg.w_adv * inv_batch, grad);
                disc.backward(grad, tf);
            };
            critic_step(model.discriminator(Domain::rain), xb, fake_b);
            critic_step(model.discriminator(Domain::clear), xa, fake_a);
        }
        opt_d.step();

        // Generator update.
        opt_g.zero_grad();
        for (int bi = 0; bi < cfg.batch_size; ++bi) {
            const auto& rec_a = a_bridged.samples[rng.uniform_int(int(a_bridged.samples.size()))];
            const auto& rec_b = b_bridged.samples[rng.uniform_int(int(b_bridged.samples.size()))];
            const Tensor xa = image_to_tanh_input(load_training_image(rec_a, cfg, rng));
            const Tensor xb = image_to_tanh_input(load_training_image(rec_b, cfg, rng));

            Tensor s_rb = Tensor::vec(sd), s_ra = Tensor::vec(sd);
            for (auto& v : s_rb.data) v = static_cast<float>(rng.normal());
            for (auto& v : s_ra.data) v = static_cast<float>(rng.normal());

            Tape t_ca, t_cb, t_sa, t_sb, t_da, t_db, t_fb, t_fa;
            const Tensor c_a = model.enc_content(Domain::clear).forward(xa, t_ca);
            const Tensor c_b = model.enc_content(Domain::rain).forward(xb, t_cb);
            const Tensor s_a = model.enc_style(Domain::clear).forward(xa, t_sa);
            const Tensor s_b = model.enc_style(Domain::rain).forward(xb, t_sb);

            const Tensor recon_a = model.decoder(Domain::clear).forward(c_a, s_a, t_da);
            const Tensor recon_b = model.decoder(Domain::rain).forward(c_b, s_b, t_db);
            const Tensor fake_b = model.decoder(Domain::rain).forward(c_a, s_rb, t_fb);
            const Tensor fake_a = model.decoder(Domain::clear).forward(c_b, s_ra, t_fa);

            Tape t_cab, t_sab, t_cba, t_sba, t_dyf, t_dxf;
            const Tensor c_ab = model.enc_content(Domain::rain).forward(fake_b, t_cab);
            const Tensor s_ab = model.enc_style(Domain::rain).forward(fake_b, t_sab);
            const Tensor c_ba = model.enc_content(Domain::clear).forward(fake_a, t_cba);
            const Tensor s_ba = model.enc_style(Domain::clear).forward(fake_a, t_sba);
            const Tensor d_fb = model.discriminator(Domain::rain).forward(fake_b, t_dyf);
            const Tensor d_fa = model.discriminator(Domain::clear).forward(fake_a, t_dxf);

            Tensor g;  // scratch gradient
            Tensor d_ca(c_a.c, c_a.h, c_a.w), d_cb(c_b.c, c_b.h, c_b.w);
            Tensor d_fake_b(fake_b.c, fake_b.h, fake_b.w), d_fake_a(fake_a.c, fake_a.h, fake_a.w);

            // Within-domain image reconstruction.
            totals.recon_img += l1_loss(recon_a, xa, cfg.w_recon * inv_batch, g);
            {
                auto [dc, ds] = model.decoder(Domain::clear).backward(g, t_da);
                nn::add_inplace(d_ca, dc);
                model.enc_style(Domain::clear).backward(ds, t_sa);
            }
            totals.recon_img += l1_loss(recon_b, xb, cfg.w_recon * inv_batch, g);
            {
                auto [dc, ds] = model.decoder(Domain::rain).backward(g, t_db);
                nn::add_inplace(d_cb, dc);
                model.enc_style(Domain::rain).backward(ds, t_sb);
            }

            // Latent reconstruction: the re-encoded style must match the
            // sampled one, the re-encoded content the original one.
            totals.recon_latent += l1_loss(s_ab, s_rb, cfg.w_style * inv_batch, g);
            nn::add_inplace(d_fake_b, model.enc_style(Domain::rain).backward(g, t_sab));
            totals.recon_latent += l1_loss(s_ba, s_ra, cfg.w_style * inv_batch, g);
            nn::add_inplace(d_fake_a, model.enc_style(Domain::clear).backward(g, t_sba));

            totals.recon_latent += l1_loss(c_ab, c_a, cfg.w_content * inv_batch, g);
            nn::add_inplace(d_fake_b, model.enc_content(Domain::rain).backward(g, t_cab));
            // direct term of |c_ab - c_a| on c_a
            axpy(d_ca, -1.f, g);
            totals.recon_latent += l1_loss(c_ba, c_b, cfg.w_content * inv_batch, g);
            nn::add_inplace(d_fake_a, model.enc_content(Domain::clear).backward(g, t_cba));
            axpy(d_cb, -1.f, g);

            // Adversarial terms (through the frozen-for-this-step critics).
            totals.adv_g += lsgan_loss(d_fb, 1.f, cfg.w_adv * inv_batch, g);
            nn::add_inplace(d_fake_b, model.discriminator(Domain::rain).backward(g, t_dyf));
            totals.adv_g += lsgan_loss(d_fa, 1.f, cfg.w_adv * inv_batch, g);
            nn::add_inplace(d_fake_a, model.discriminator(Domain::clear).backward(g, t_dxf));

            {
                auto [dc, ds] = model.decoder(Domain::rain).backward(d_fake_b, t_fb);
                nn::add_inplace(d_ca, dc);
                (void)ds;  // sampled style, no parameters behind it
            }
            {
                auto [dc, ds] = model.decoder(Domain::clear).backward(d_fake_a, t_fa);
                nn::add_inplace(d_cb, dc);
                (void)ds;
            }
            model.enc_content(Domain::clear).backward(d_ca, t_ca);
            model.enc_content(Domain::rain).backward(d_cb, t_cb);
        }
        opt_g.step();

        totals.total_g = totals.adv_g + totals.recon_img + totals.recon_latent;
        if (!std::isfinite(totals.total_g) || !std::isfinite(totals.adv_d)) {
            const std::string snap = (fs::path(out_dir) / "i2i_diag.ckpt").string();
            model.save(snap);
            throw RuntimeFailure("train_i2i: non-finite loss at iteration " + std::to_string(it) +
                                 "; diagnostic snapshot at " + snap);
        }
        if (it % cfg.log_every == 0 || it + 1 == cfg.iterations) {
            const std::string is = CsvWriter::fmt(static_cast<long>(it));
            csv.write_row({is, "adv_d", CsvWriter::fmt(totals.adv_d)});
            csv.write_row({is, "adv_g", CsvWriter::fmt(totals.adv_g)});
            csv.write_row({is, "recon_img", CsvWriter::fmt(totals.recon_img)});
            csv.write_row({is, "recon_latent", CsvWriter::fmt(totals.recon_latent)});
            csv.write_row({is, "total_g", CsvWriter::fmt(totals.total_g)});
        }
        ++res.iterations_run;
    }

    model.save(res.checkpoint_path);
    return res;
}

}  // namespace rainshift::i2i
