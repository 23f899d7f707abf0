#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rainshift/core/check.hpp"
#include "rainshift/core/rng.hpp"
#include "rainshift/datasets/augment.hpp"
#include "rainshift/datasets/bridge.hpp"
#include "rainshift/datasets/domain_gap.hpp"
#include "rainshift/datasets/manifest.hpp"
#include "rainshift/datasets/toyworld.hpp"

using namespace rainshift;
using namespace rainshift::datasets;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rainshift_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

SampleRecord make_record(const std::string& ref, Weather w, const std::string& setup,
                         const std::string& video = "", long frame = -1) {
    SampleRecord r;
    r.image_ref = ref;
    r.tags.weather = w;
    r.tags.setup = setup;
    r.source_video = video;
    if (frame >= 0) r.frame_index = frame;
    return r;
}

DatasetManifest make_manifest(const std::string& name, int q = 4) {
    DatasetManifest m;
    m.name = name;
    m.class_count = q;
    for (int i = 0; i < q; ++i) m.class_names.push_back("c" + std::to_string(i));
    return m;
}

}  // namespace

TEST_CASE("manifest: three record lines give three samples") {
    const auto dir = temp_dir("man3");
    for (int i = 0; i < 3; ++i) {
        Image img(3, 4, 4, 0.5f);
        save_image(img, (dir / ("img" + std::to_string(i) + ".ppm")).string());
    }
    std::ofstream out(dir / "m.manifest");
    out << "image=img0.ppm weather=clear setup=cam0\n";
    out << "image=img1.ppm weather=clear setup=cam0\n";
    out << "image=img2.ppm weather=rain setup=cam1 origin=bridge video=v0 frame=7\n";
    out.close();

    const auto m = load_manifest((dir / "m.manifest").string());
    REQUIRE(m.samples.size() == 3);
    CHECK(m.samples[2].tags.origin == Origin::bridge);
    CHECK(m.samples[2].frame_index.value() == 7);
    CHECK(m.samples[0].image_ref == (dir / "img0.ppm").lexically_normal().string());
}

TEST_CASE("manifest: label size mismatch names the sample") {
    const auto dir = temp_dir("mansize");
    save_image(Image(3, 4, 4, 0.5f), (dir / "a.ppm").string());
    save_label(LabelImage(3, 4, 0), (dir / "a.pgm").string());
    std::ofstream out(dir / "m.manifest");
    out << "image=a.ppm label=a.pgm weather=clear setup=s\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_manifest((dir / "m.manifest").string()),
                         doctest::Contains("a.ppm"), ValidationError);
}

TEST_CASE("manifest: class value out of range rejected") {
    const auto dir = temp_dir("manrange");
    save_image(Image(3, 4, 4, 0.5f), (dir / "a.ppm").string());
    LabelImage lbl(4, 4, 0);
    lbl.at(1, 1) = 3;  // only 2 classes declared
    save_label(lbl, (dir / "a.pgm").string());
    std::ofstream out(dir / "m.manifest");
    out << "#! name=t classes=bg,fg\n";
    out << "image=a.ppm label=a.pgm weather=clear setup=s\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_manifest((dir / "m.manifest").string()),
                         doctest::Contains("out of range"), ValidationError);

    // Ignore index is always allowed.
    lbl.at(1, 1) = kIgnoreIndex;
    save_label(lbl, (dir / "a.pgm").string());
    CHECK_NOTHROW(load_manifest((dir / "m.manifest").string()));
}

TEST_CASE("manifest: empty file loads as empty manifest") {
    const auto dir = temp_dir("manempty");
    std::ofstream(dir / "m.manifest").close();
    const auto m = load_manifest((dir / "m.manifest").string());
    CHECK(m.samples.empty());
    CHECK(m.class_count > 0);
}

TEST_CASE("manifest: malformed and duplicate records carry line numbers") {
    const auto dir = temp_dir("manbad");
    {
        std::ofstream out(dir / "m.manifest");
        out << "image=a.ppm weather=clear setup=s\n";
        out << "this-is-not-a-field\n";
    }
    CHECK_THROWS_WITH_AS(load_manifest((dir / "m.manifest").string(), false),
                         doctest::Contains(":2"), ValidationError);
    {
        std::ofstream out(dir / "m.manifest");
        out << "image=a.ppm weather=clear setup=s\n";
        out << "image=a.ppm weather=rain setup=s\n";
    }
    CHECK_THROWS_WITH_AS(load_manifest((dir / "m.manifest").string(), false),
                         doctest::Contains("duplicate"), ValidationError);
}

TEST_CASE("manifest: save/load round trip") {
    const auto dir = temp_dir("manrt");
    auto m = make_manifest("toy", 3);
    m.samples.push_back(make_record((dir / "x.ppm").string(), Weather::rain, "cam2", "vid", 5));
    m.samples.back().tags.origin = Origin::bridge;
    save_manifest(m, (dir / "m.manifest").string());
    const auto back = load_manifest((dir / "m.manifest").string(), false);
    REQUIRE(back.samples.size() == 1);
    CHECK(back.name == "toy");
    CHECK(back.class_names == m.class_names);
    CHECK(back.samples[0].image_ref == m.samples[0].image_ref);
    CHECK(back.samples[0].tags.weather == Weather::rain);
    CHECK(back.samples[0].tags.origin == Origin::bridge);
    CHECK(back.samples[0].source_video == "vid");
    CHECK(back.samples[0].frame_index.value() == 5);
}

TEST_CASE("bridge compatibility criteria") {
    auto a = make_manifest("a"), b = make_manifest("b"), c = make_manifest("c"),
         d = make_manifest("d");
    a.samples.push_back(make_record("a0", Weather::clear, "srccam"));
    b.samples.push_back(make_record("b0", Weather::rain, "tgtcam"));
    c.samples.push_back(make_record("c0", Weather::clear, "chX"));
    d.samples.push_back(make_record("d0", Weather::rain, "chX"));

    CHECK(check_bridge_compatibility(a, b, c, d).ok);

    SUBCASE("rain sample in clear bridge set is a violation") {
        c.samples.push_back(make_record("c1", Weather::rain, "chX"));
        const auto rep = check_bridge_compatibility(a, b, c, d);
        CHECK(!rep.ok);
        REQUIRE(rep.violations.size() == 1);
        CHECK(rep.violations[0].find("c1") != std::string::npos);
    }
    SUBCASE("setup mismatch is a violation") {
        d.samples[0].tags.setup = "chY";
        const auto rep = check_bridge_compatibility(a, b, c, d);
        CHECK(!rep.ok);
        CHECK(rep.violations[0].find("setup mismatch") != std::string::npos);
    }
    SUBCASE("empty bridge pair is compatible") {
        c.samples.clear();
        d.samples.clear();
        CHECK(check_bridge_compatibility(a, b, c, d).ok);
    }
}

TEST_CASE("assemble_bridged_dataset unions") {
    auto a = make_manifest("a"), b = make_manifest("b"), c = make_manifest("c"),
         d = make_manifest("d");
    a.samples.push_back(make_record("a0", Weather::clear, "s"));
    a.samples.push_back(make_record("a1", Weather::clear, "s"));
    b.samples.push_back(make_record("b0", Weather::rain, "t"));
    c.samples.push_back(make_record("c0", Weather::clear, "ch"));
    d.samples.push_back(make_record("d0", Weather::rain, "ch"));

    auto [ap, bp] = assemble_bridged_dataset(a, b, c, d);
    CHECK(ap.samples.size() == 3);
    CHECK(bp.samples.size() == 2);
    CHECK(ap.samples[2].tags.origin == Origin::bridge);
    for (const auto& s : a.samples) CHECK(ap.has_sample(s.image_ref));
    for (const auto& s : c.samples) CHECK(ap.has_sample(s.image_ref));

    SUBCASE("empty C gives identity") {
        c.samples.clear();
        d.samples.clear();
        auto [ap2, bp2] = assemble_bridged_dataset(a, b, c, d);
        CHECK(ap2.samples.size() == a.samples.size());
        for (size_t i = 0; i < a.samples.size(); ++i)
            CHECK(ap2.samples[i].image_ref == a.samples[i].image_ref);
    }
    SUBCASE("duplicates removed, first occurrence wins") {
        c.samples.push_back(make_record("a0", Weather::clear, "ch"));  // duplicate of a0
        auto [ap2, bp2] = assemble_bridged_dataset(a, b, c, d);
        CHECK(ap2.samples.size() == 3);  // a0, a1, c0
        int count_a0 = 0;
        for (const auto& s : ap2.samples)
            if (s.image_ref == "a0") {
                ++count_a0;
                CHECK(s.tags.origin == Origin::original);  // the A copy won
            }
        CHECK(count_a0 == 1);
    }
}

TEST_CASE("bridge frame counts at the reference scale") {
    auto a = make_manifest("a"), b = make_manifest("b"), c = make_manifest("c"),
         d = make_manifest("d");
    a.samples.push_back(make_record("a0", Weather::clear, "s"));
    b.samples.push_back(make_record("b0", Weather::rain, "t"));
    for (int v = 0; v < 2; ++v)
        for (int f = 0; f < 6026; ++f)
            c.samples.push_back(make_record("cv" + std::to_string(v) + "_" + std::to_string(f),
                                            Weather::clear, "ch", "cv" + std::to_string(v), f));
    for (int v = 0; v < 3; ++v)
        for (int f = 0; f < 9294; ++f)
            d.samples.push_back(make_record("dv" + std::to_string(v) + "_" + std::to_string(f),
                                            Weather::rain, "ch", "dv" + std::to_string(v), f));
    REQUIRE(c.samples.size() == 12052);
    REQUIRE(d.samples.size() == 27882);

    auto [ap, bp] = assemble_bridged_dataset(a, b, c, d);
    const size_t bridge_total =
        (ap.samples.size() - a.samples.size()) + (bp.samples.size() - b.samples.size());
    CHECK(bridge_total == 39934);
}

TEST_CASE("subsample_video_frames formula") {
    CHECK(subsample_video_frames(10, 10) == std::vector<long>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(subsample_video_frames(10, 1) == std::vector<long>{0});
    CHECK(subsample_video_frames(10, 4) == std::vector<long>{0, 2, 5, 7});
    CHECK_THROWS_AS(subsample_video_frames(3, 4), ValidationError);

    // Independent oracle: evaluate floor(i*N/k) directly in floating point.
    for (long n : {1L, 7L, 10L, 9999L}) {
        for (long k = 1; k <= n; k = k * 3 + 1) {
            const auto idx = subsample_video_frames(n, k);
            REQUIRE(idx.size() == static_cast<size_t>(k));
            for (long i = 0; i < k; ++i)
                CHECK(idx[i] == static_cast<long>(std::floor(double(i) * double(n) / double(k))));
        }
    }
}

TEST_CASE("subsampling property: strictly increasing, in range, exactly k") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const long n = 1 + rng.uniform_int(10000);
        const long k = 1 + rng.uniform_int(static_cast<int>(n));
        const auto idx = subsample_video_frames(n, k);
        REQUIRE(idx.size() == static_cast<size_t>(k));
        CHECK(idx[0] == 0);
        for (size_t i = 0; i + 1 < idx.size(); ++i) CHECK(idx[i] < idx[i + 1]);
        CHECK(idx.back() < n);
    }
}

TEST_CASE("augmentation identity path and determinism") {
    datasets::ToyWorldConfig tc;
    tc.image_h = tc.image_w = 32;
    Image img;
    LabelImage lbl;
    render_toy_sample(tc, ToyDomain::source_clear, 0, img, lbl);

    AugmentConfig cfg;
    cfg.crop_h = cfg.crop_w = 32;

    SUBCASE("scale 1, no flip, zero offset is the identity") {
        AugmentParams p{1.0, false, 0, 0};
        CHECK(apply_augment_image(img, p, cfg).data == img.data);
        CHECK(apply_augment_label(lbl, p, cfg).data == lbl.data);
    }
    SUBCASE("flip applied twice restores the original") {
        AugmentParams p{1.0, true, 0, 0};
        const Image once = apply_augment_image(img, p, cfg);
        CHECK(apply_augment_image(once, p, cfg).data == img.data);
    }
    SUBCASE("fixed seed reproduces the augmented output") {
        Rng r1(99), r2(99);
        const auto a1 = augment_sample(img, &lbl, cfg, r1);
        const auto a2 = augment_sample(img, &lbl, cfg, r2);
        CHECK(a1.image.data == a2.image.data);
        CHECK(a1.label->data == a2.label->data);
    }
}

TEST_CASE("augmentation label alignment is pixel-exact nearest-neighbor") {
    Rng rng(5);
    datasets::ToyWorldConfig tc;
    tc.image_h = tc.image_w = 40;
    Image img;
    LabelImage lbl;
    render_toy_sample(tc, ToyDomain::source_clear, 3, img, lbl);

    AugmentConfig cfg;
    cfg.crop_h = cfg.crop_w = 24;
    for (int trial = 0; trial < 30; ++trial) {
        const AugmentParams p = sample_augment_params(cfg, rng, img.h, img.w);
        const LabelImage got = apply_augment_label(lbl, p, cfg);

        // Independent oracle: re-derive every output pixel with explicit
        // nearest-neighbor geometry.
        const int sh = std::max(1, (int)std::lround(lbl.h * p.scale));
        const int sw = std::max(1, (int)std::lround(lbl.w * p.scale));
        for (int y = 0; y < cfg.crop_h; ++y) {
            for (int x = 0; x < cfg.crop_w; ++x) {
                const int gy = y + p.off_y;
                int gx = x + p.off_x;
                uint8_t expect = kIgnoreIndex;
                if (gy < sh && gx < sw) {
                    if (p.flip) gx = sw - 1 - gx;
                    const int py = std::clamp(
                        (int)std::lround((gy + 0.5) * double(lbl.h) / sh - 0.5), 0, lbl.h - 1);
                    const int px = std::clamp(
                        (int)std::lround((gx + 0.5) * double(lbl.w) / sw - 0.5), 0, lbl.w - 1);
                    expect = lbl.at(py, px);
                }
                REQUIRE(got.at(y, x) == expect);
            }
        }
    }
}

TEST_CASE("toy generation is deterministic and respects droplet ranges") {
    datasets::ToyWorldConfig cfg;
    cfg.image_h = cfg.image_w = 32;
    cfg.rain.droplet_count_min = 5;
    cfg.rain.droplet_count_max = 10;

    Image i1, i2;
    LabelImage l1, l2;
    ToyRenderInfo info;
    for (int idx = 0; idx < 20; ++idx) {
        render_toy_sample(cfg, ToyDomain::target_rain, idx, i1, l1, &info);
        render_toy_sample(cfg, ToyDomain::target_rain, idx, i2, l2);
        CHECK(i1.data == i2.data);
        CHECK(l1.data == l2.data);
        CHECK(info.droplet_count >= 5);
        CHECK(info.droplet_count <= 10);
    }

    // The rain transform leaves labels untouched: rendering the same sample
    // with a neutral rain transform yields the same label raster but a
    // different image.
    datasets::ToyWorldConfig neutral = cfg;
    neutral.rain.darkening_factor = 1.0;
    neutral.rain.blur_radius = 0;
    neutral.rain.droplet_count_min = neutral.rain.droplet_count_max = 0;
    render_toy_sample(cfg, ToyDomain::target_rain, 7, i1, l1);
    render_toy_sample(neutral, ToyDomain::target_rain, 7, i2, l2);
    CHECK(l1.data == l2.data);
    CHECK(i1.data != i2.data);
}

TEST_CASE("generate_toy_dataset writes a loadable manifest") {
    const auto dir = temp_dir("toygen");
    datasets::ToyWorldConfig cfg;
    cfg.image_h = cfg.image_w = 16;
    const auto m = generate_toy_dataset(cfg, 5, ToyDomain::bridge_rain, dir.string());
    REQUIRE(m.samples.size() == 5);
    CHECK(m.class_count == 4);
    CHECK(m.samples[0].tags.weather == Weather::rain);
    CHECK(m.samples[0].tags.setup == "cam-bridge");
    CHECK(m.samples[0].source_video == "bridge_rain-vid0");
    save_manifest(m, (dir / "m.manifest").string());
    const auto back = load_manifest((dir / "m.manifest").string());  // full pixel validation
    CHECK(back.samples.size() == 5);
    CHECK_THROWS_AS(generate_toy_dataset(cfg, 0, ToyDomain::source_clear, dir.string()),
                    ValidationError);
}

TEST_CASE("symmetrized gaussian KL matches a quadrature oracle") {
    // Closed form checked against numerical integration of
    // (p - q) (ln p - ln q).
    auto quad = [](double m1, double s1, double m2, double s2) {
        const double lo = std::min(m1 - 12 * s1, m2 - 12 * s2);
        const double hi = std::max(m1 + 12 * s1, m2 + 12 * s2);
        const int n = 200000;
        const double dx = (hi - lo) / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = lo + (i + 0.5) * dx;
            const double p = std::exp(-0.5 * (x - m1) * (x - m1) / (s1 * s1)) /
                             (s1 * std::sqrt(2 * M_PI));
            const double q = std::exp(-0.5 * (x - m2) * (x - m2) / (s2 * s2)) /
                             (s2 * std::sqrt(2 * M_PI));
            acc += (p - q) * (std::log(p) - std::log(q)) * dx;
        }
        return acc;
    };

    CHECK(symmetrized_gaussian_kl(0, 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(quad(0, 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-4));

    Rng rng(17);
    for (int t = 0; t < 5; ++t) {
        const double m1 = rng.uniform() * 2 - 1, m2 = rng.uniform() * 2 - 1;
        const double s1 = 0.5 + rng.uniform(), s2 = 0.5 + rng.uniform();
        CHECK(symmetrized_gaussian_kl(m1, s1, m2, s2) ==
              doctest::Approx(quad(m1, s1, m2, s2)).epsilon(1e-3));
    }
}

TEST_CASE("domain gap: identity, symmetry, degenerate flag") {
    const auto dir = temp_dir("gap");
    datasets::ToyWorldConfig cfg;
    cfg.image_h = cfg.image_w = 16;
    const auto s1 = generate_toy_dataset(cfg, 6, ToyDomain::source_clear, (dir / "s1").string());
    const auto s2 = generate_toy_dataset(cfg, 6, ToyDomain::target_rain, (dir / "s2").string());

    CHECK(domain_gap_estimate(s1, s1).kl_proxy == doctest::Approx(0.0));
    const auto g12 = domain_gap_estimate(s1, s2);
    const auto g21 = domain_gap_estimate(s2, s1);
    CHECK(g12.kl_proxy == doctest::Approx(g21.kl_proxy).epsilon(1e-12));
    CHECK(g12.kl_proxy > 0.0);

    // Constant images clamp the std and set the flag.
    const auto cdir = dir / "const";
    fs::create_directories(cdir);
    save_image(Image(3, 8, 8, 0.5f), (cdir / "c.ppm").string());
    auto cm = make_manifest("const");
    cm.samples.push_back(make_record((cdir / "c.ppm").string(), Weather::clear, "s"));
    const auto gc = domain_gap_estimate(cm, s1);
    CHECK(gc.degenerate_clamped);

    DatasetManifest empty = make_manifest("empty");
    CHECK_THROWS_AS(domain_gap_estimate(empty, s1), ValidationError);
}

TEST_CASE("bridged pair closes the channel-statistics gap on defaults") {
    const auto dir = temp_dir("gap_bridge");
    datasets::ToyWorldConfig cfg;
    cfg.image_h = cfg.image_w = 32;
    const int n = 40;
    const auto a = generate_toy_dataset(cfg, n, ToyDomain::source_clear, (dir / "a").string());
    const auto b = generate_toy_dataset(cfg, n, ToyDomain::target_rain, (dir / "b").string());
    const auto c = generate_toy_dataset(cfg, n, ToyDomain::bridge_clear, (dir / "c").string());
    const auto d = generate_toy_dataset(cfg, n, ToyDomain::bridge_rain, (dir / "d").string());

    auto [ap, bp] = assemble_bridged_dataset(a, b, c, d);
    const double unbridged = domain_gap_estimate(a, b).kl_proxy;
    const double bridged = domain_gap_estimate(ap, bp).kl_proxy;
    CHECK(bridged <= unbridged);
}
