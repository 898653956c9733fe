#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "vsd/blood.hpp"

using namespace vsd;
using namespace vsd::blood;

namespace {

// Disjoint-support fixture: blood model over reds, non-blood over greens.
ColorModel3D red_model() {
    std::vector<std::array<int, 3>> px;
    for (int r = 160; r < 240; r += 8)
        for (int g = 0; g < 40; g += 8)
            for (int b = 0; b < 40; b += 8) px.push_back({r, g, b});
    return build_model(px);
}

ColorModel3D green_model() {
    std::vector<std::array<int, 3>> px;
    for (int g = 160; g < 240; g += 8)
        for (int r = 0; r < 40; r += 8)
            for (int b = 0; b < 40; b += 8) px.push_back({r, g, b});
    return build_model(px);
}

Image solid_image(int w, int h, int r, int g, int b) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.rgb[3 * i] = static_cast<std::uint8_t>(r);
        img.rgb[3 * i + 1] = static_cast<std::uint8_t>(g);
        img.rgb[3 * i + 2] = static_cast<std::uint8_t>(b);
    }
    return img;
}

BinaryMask random_mask(int w, int h, std::mt19937_64& rng, double density = 0.5) {
    BinaryMask mask;
    mask.width = w;
    mask.height = h;
    mask.m.resize(static_cast<std::size_t>(w) * h);
    for (auto& v : mask.m)
        v = (rng() % 1000) < density * 1000 ? 1 : 0;
    return mask;
}

}  // namespace

TEST_CASE("bin_of maps components to floor(c/8)") {
    auto check = [](int r, int g, int b, int br, int bg, int bb) {
        const BinIndex bin = bin_of(r, g, b);
        CHECK(bin.r == br);
        CHECK(bin.g == bg);
        CHECK(bin.b == bb);
    };
    check(255, 0, 8, 31, 0, 1);
    check(0, 0, 0, 0, 0, 0);
    check(7, 8, 248, 0, 1, 31);
    CHECK_THROWS_AS(bin_of(-1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(bin_of(0, 256, 0), std::invalid_argument);
}

TEST_CASE("build_model single bin and symmetry") {
    const auto single = build_model({{200, 10, 10}, {200, 10, 10}, {200, 10, 10}, {200, 10, 10}});
    CHECK(single.total() == 4);
    CHECK(single.prob(200, 10, 10) == 1.0);

    const auto two = build_model({{10, 10, 10}, {10, 10, 10}, {200, 200, 200}, {200, 200, 200}});
    CHECK(two.prob(10, 10, 10) == 0.5);
    CHECK(two.prob(200, 200, 200) == 0.5);
}

TEST_CASE("build_model empty stream is unnormalized") {
    const auto model = build_model({});
    CHECK(model.total() == 0);
    CHECK_FALSE(model.normalized());
    double sum = 0.0;
    for (double p : model.probs()) sum += p;
    CHECK(sum == 0.0);
}

TEST_CASE("build_model probabilities sum to one over a large random stream") {
    std::mt19937_64 rng(42);
    std::vector<std::array<int, 3>> px;
    px.reserve(1000000);
    for (int i = 0; i < 1000000; ++i)
        px.push_back({static_cast<int>(rng() % 256), static_cast<int>(rng() % 256),
                      static_cast<int>(rng() % 256)});
    const auto model = build_model(px);
    double sum = 0.0;
    for (double p : model.probs()) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("model normalization is idempotent") {
    auto model = build_model({{1, 2, 3}, {100, 110, 120}, {1, 2, 3}});
    const auto once = model.probs();
    model.normalize();
    CHECK(model.probs() == once);
}

TEST_CASE("model file round trip") {
    testsupport::TempDir tmp;
    const auto model = red_model();
    const std::string path = tmp.file("blood.vfbm");
    model.save(path);
    const auto loaded = ColorModel3D::load(path);
    CHECK(loaded.total() == model.total());
    CHECK(loaded.probs() == model.probs());
}

TEST_CASE("model load rejects bad magic") {
    testsupport::TempDir tmp;
    const std::string path = tmp.file("junk.vfbm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE garbage";
    }
    CHECK_THROWS_AS(ColorModel3D::load(path), FormatError);
}

TEST_CASE("blood_probability arithmetic") {
    // Pb = 0.02, Pn = 0.06 -> 0.25
    std::vector<std::array<int, 3>> blood_px, nonblood_px;
    for (int i = 0; i < 2; ++i) blood_px.push_back({200, 10, 10});
    for (int i = 0; i < 98; ++i) blood_px.push_back({0, 200, 0});
    for (int i = 0; i < 6; ++i) nonblood_px.push_back({200, 10, 10});
    for (int i = 0; i < 94; ++i) nonblood_px.push_back({0, 0, 200});
    const auto bm = build_model(blood_px);
    const auto nm = build_model(nonblood_px);
    CHECK(bm.prob(200, 10, 10) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(nm.prob(200, 10, 10) == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(blood_probability(200, 10, 10, bm, nm) == doctest::Approx(0.25).epsilon(1e-12));
    // Pb > 0, Pn = 0 -> 1.0 ; Pb = Pn = 0 -> 0.0
    CHECK(blood_probability(0, 200, 0, bm, nm) == 1.0);
    CHECK(blood_probability(128, 128, 128, bm, nm) == 0.0);
}

TEST_CASE("blood and non-blood probabilities are complementary") {
    const auto bm = red_model();
    const auto nm = green_model();
    std::mt19937_64 rng(5);
    for (int t = 0; t < 2000; ++t) {
        const int r = static_cast<int>(rng() % 256);
        const int g = static_cast<int>(rng() % 256);
        const int b = static_cast<int>(rng() % 256);
        const BinIndex bin = bin_of(r, g, b);
        const double pb = bm.prob_at(bin), pn = nm.prob_at(bin);
        if (pb + pn > 0.0) {
            const double p = blood_probability(r, g, b, bm, nm);
            CHECK(p + pn / (pb + pn) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("compute_bpm disjoint-support two-color image") {
    const auto bm = red_model();
    const auto nm = green_model();
    Image img = solid_image(8, 4, 200, 8, 8);
    for (int y = 2; y < 4; ++y)
        for (int x = 0; x < 8; ++x) {
            img.rgb[3 * (y * 8 + x)] = 8;
            img.rgb[3 * (y * 8 + x) + 1] = 200;
            img.rgb[3 * (y * 8 + x) + 2] = 8;
        }
    const auto bpm = compute_bpm(img, bm, nm);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(bpm.at(x, y) == (y < 2 ? 1.0 : 0.0));
}

TEST_CASE("compute_bpm matches scalar-loop oracle on a random image") {
    const auto bm = red_model();
    const auto nm = green_model();
    std::mt19937_64 rng(77);
    Image img;
    img.width = 31;
    img.height = 17;
    img.rgb.resize(img.pixel_count() * 3);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() % 256);
    const auto bpm = compute_bpm(img, bm, nm);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* px = img.pixel(x, y);
            const double pb = bm.prob(px[0], px[1], px[2]);
            const double pn = nm.prob(px[0], px[1], px[2]);
            const double expected = pb + pn > 0.0 ? pb / (pb + pn) : 0.0;
            CHECK(bpm.at(x, y) == expected);
        }
}

TEST_CASE("compute_bpm is row-permutation equivariant") {
    const auto bm = red_model();
    const auto nm = green_model();
    std::mt19937_64 rng(123);
    Image img;
    img.width = 9;
    img.height = 6;
    img.rgb.resize(img.pixel_count() * 3);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() % 256);

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Image shuffled = img;
    for (int y = 0; y < img.height; ++y)
        std::copy(img.rgb.begin() + perm[y] * img.width * 3,
                  img.rgb.begin() + (perm[y] + 1) * img.width * 3,
                  shuffled.rgb.begin() + y * img.width * 3);

    const auto a = compute_bpm(img, bm, nm);
    const auto b = compute_bpm(shuffled, bm, nm);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            CHECK(b.at(x, y) == a.at(x, perm[y]));
}

TEST_CASE("compute_bpm rejects zero-dimension image") {
    const auto bm = red_model();
    CHECK_THROWS_AS(compute_bpm(Image{}, bm, bm), std::invalid_argument);
}

TEST_CASE("binarize_bpm boundaries") {
    BloodProbabilityMap bpm;
    bpm.width = 3;
    bpm.height = 1;
    bpm.p = {0.4, 0.5, 0.6};
    CHECK(binarize_bpm(bpm, 0.0).m == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(binarize_bpm(bpm, 0.5).m == std::vector<std::uint8_t>{0, 1, 1});
    bpm.p = {0.99, 0.5, 0.1};
    CHECK(binarize_bpm(bpm, 1.0).m == std::vector<std::uint8_t>{0, 0, 0});
    CHECK_THROWS_AS(binarize_bpm(bpm, 1.5), std::invalid_argument);
}

TEST_CASE("connected_components on two disjoint blocks") {
    BinaryMask mask;
    mask.width = 10;
    mask.height = 5;
    mask.m.assign(50, 0);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) {
            mask.m[y * 10 + x] = 1;
            mask.m[y * 10 + x + 6] = 1;
        }
    const auto comps = connected_components(mask);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].area == 9);
    CHECK(comps[1].area == 9);
    CHECK(comps[0].perimeter == 12);
    CHECK(comps[0].centroid_x == doctest::Approx(1.0));
    CHECK(comps[0].centroid_y == doctest::Approx(1.0));
}

TEST_CASE("connected_components empty mask") {
    BinaryMask mask;
    mask.width = 4;
    mask.height = 4;
    mask.m.assign(16, 0);
    CHECK(connected_components(mask).empty());
}

TEST_CASE("connected_components agrees with flood-fill oracle") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 25; ++t) {
        const auto mask = random_mask(64, 64, rng, 0.45);
        const auto comps = connected_components(mask);
        const auto ff = oracle::flood_fill(mask);
        auto stats = oracle::flood_fill_stats(mask, ff);
        REQUIRE(comps.size() == static_cast<std::size_t>(ff.component_count));
        std::stable_sort(stats.begin(), stats.end(),
                         [](const auto& a, const auto& b) { return a.area > b.area; });
        long true_pixels = 0;
        for (auto v : mask.m) true_pixels += v;
        long area_sum = 0;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            area_sum += comps[i].area;
            CHECK(comps[i].area == stats[i].area);
            CHECK(comps[i].perimeter == stats[i].perimeter);
            CHECK(comps[i].min_x == stats[i].min_x);
            CHECK(comps[i].max_y == stats[i].max_y);
            CHECK(comps[i].centroid_x == doctest::Approx(stats[i].centroid_x).epsilon(1e-12));
            CHECK(comps[i].centroid_y == doctest::Approx(stats[i].centroid_y).epsilon(1e-12));
        }
        CHECK(area_sum == true_pixels);
    }
}

TEST_CASE("blood_feature on an all-black frame is all zero") {
    const auto bm = red_model();
    const auto nm = green_model();
    const auto f = blood_feature(solid_image(16, 12, 0, 0, 0), bm, nm, 0.5);
    for (double v : f.values()) CHECK(v == 0.0);
}

TEST_CASE("blood_feature on a full blood-red frame") {
    const auto bm = red_model();
    const auto nm = green_model();
    const int w = 16, h = 12;
    const auto f = blood_feature(solid_image(w, h, 200, 8, 8), bm, nm, 0.5).values();
    CHECK(f[0] == 1.0);                                     // blood ratio
    CHECK(f[1] == 1.0);                                     // mean probability
    CHECK(f[3] == 1.0);                                     // max probability
    CHECK(f[5] == 1.0);                                     // largest component
    CHECK(f[8] == 1.0);                                     // bbox fill
    CHECK(f[9] == doctest::Approx((w - 1.0) / (2.0 * w)));  // centroid x / width
    CHECK(f[10] == doctest::Approx((h - 1.0) / (2.0 * h)));
    CHECK(f[12] == 0.0);  // uniform rows
    CHECK(f[13] == 0.0);
}

TEST_CASE("blood_feature mid-frame square area ratio") {
    const auto bm = red_model();
    const auto nm = green_model();
    const int w = 16, h = 16;
    Image img = solid_image(w, h, 8, 200, 8);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) {
            img.rgb[3 * (y * w + x)] = 200;
            img.rgb[3 * (y * w + x) + 1] = 8;
            img.rgb[3 * (y * w + x) + 2] = 8;
        }
    const auto f = blood_feature(img, bm, nm, 0.5).values();
    CHECK(f[5] == doctest::Approx(0.25));  // 64 / 256
    CHECK(f[0] == doctest::Approx(0.25));
}

TEST_CASE("blood_feature bounded entries and mirror property") {
    const auto bm = red_model();
    const auto nm = green_model();
    std::mt19937_64 rng(31337);
    for (int t = 0; t < 10; ++t) {
        Image img;
        img.width = 24;
        img.height = 18;
        img.rgb.resize(img.pixel_count() * 3);
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            const bool red = rng() % 3 == 0;
            img.rgb[3 * i] = static_cast<std::uint8_t>(red ? 160 + rng() % 60 : rng() % 40);
            img.rgb[3 * i + 1] = static_cast<std::uint8_t>(red ? rng() % 30 : 160 + rng() % 60);
            img.rgb[3 * i + 2] = static_cast<std::uint8_t>(rng() % 40);
        }
        const auto f = blood_feature(img, bm, nm, 0.5).values();
        for (int idx : {0, 1, 3, 5, 6, 8, 9, 10})
            CHECK((f[idx] >= 0.0 && f[idx] <= 1.0));

        Image mirrored = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c)
                    mirrored.rgb[3 * (y * img.width + x) + c] =
                        img.rgb[3 * (y * img.width + (img.width - 1 - x)) + c];
        const auto g = blood_feature(mirrored, bm, nm, 0.5).values();
        if (f[5] > 0.0)
            CHECK(std::abs(g[9] - (1.0 - f[9])) <= 1.0 / img.width + 1e-12);
    }
}

TEST_CASE("extend_model behaviour") {
    const auto bm = red_model();
    const auto nm = green_model();
    testsupport::TempDir tmp;

    SUBCASE("pure non-blood corpus leaves the model unchanged") {
        const std::string green = tmp.file("green.ppm");
        write_ppm(green, solid_image(10, 10, 8, 200, 8));
        const auto extended = extend_model(bm, bm, nm, {green}, 0.9);
        CHECK(extended.total() == bm.total());
        CHECK(extended.probs() == bm.probs());
    }
    SUBCASE("self-like corpus grows the total") {
        const std::string red = tmp.file("red.ppm");
        write_ppm(red, solid_image(10, 10, 200, 8, 8));
        const auto extended = extend_model(bm, bm, nm, {red}, 0.9);
        CHECK(extended.total() == bm.total() + 100);
    }
    SUBCASE("added mass lies only in red-region bins") {
        const std::string red = tmp.file("red2.ppm");
        write_ppm(red, solid_image(6, 6, 216, 16, 16));
        const auto extended = extend_model(bm, bm, nm, {red}, 0.9);
        for (int r = 0; r < kBinsPerAxis; ++r)
            for (int g = 0; g < kBinsPerAxis; ++g)
                for (int b = 0; b < kBinsPerAxis; ++b) {
                    const BinIndex bin{r, g, b};
                    if (extended.count_at(bin) != bm.count_at(bin)) {
                        CHECK(r == 216 / 8);
                        CHECK(g == 16 / 8);
                        CHECK(b == 16 / 8);
                    }
                }
    }
    SUBCASE("unreadable image is skipped") {
        const std::string bogus = tmp.file("bogus.ppm");
        {
            std::ofstream out(bogus);
            out << "not a ppm";
        }
        const auto extended = extend_model(bm, bm, nm, {bogus}, 0.9);
        CHECK(extended.total() == bm.total());
    }
    SUBCASE("threshold outside (0,1) rejected") {
        CHECK_THROWS_AS(extend_model(bm, bm, nm, {}, 1.0), std::invalid_argument);
    }
    SUBCASE("extension stops at the million-pixel target") {
        ColorModel3D big;
        for (std::uint64_t i = 0; i < kExtendPixelTarget - 10; ++i)
            big.add_pixel(200, 8, 8);
        big.normalize();
        const std::string red = tmp.file("cap.ppm");
        write_ppm(red, solid_image(10, 10, 200, 8, 8));
        const auto extended = extend_model(big, bm, nm, {red, red}, 0.9);
        CHECK(extended.total() == kExtendPixelTarget);
    }
}
