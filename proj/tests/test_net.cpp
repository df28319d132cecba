#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dispref/autodiff/checkpoint.hpp"
#include "dispref/autodiff/ops.hpp"
#include "dispref/core/image_io.hpp"
#include "dispref/net/config.hpp"
#include "dispref/net/model.hpp"
#include "dispref/net/refine.hpp"
#include "gradcheck.hpp"

using namespace dispref;
namespace fs = std::filesystem;

namespace {

NetConfig tiny_config(HeadKind head = HeadKind::classify_offset) {
    NetConfig c;
    c.levels = 3;
    c.channels = {3, 4, 5};
    c.max_disp = 8;
    c.mlp_hidden = {6, 5};
    c.head = head;
    return c;
}

PixelGrid random_image(std::mt19937_64& rng, int w, int h, int ch = 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PixelGrid g(w, h, ch);
    for (double& v : g.data()) v = u(rng);
    return g;
}

DisparityMap random_disparity(std::mt19937_64& rng, int w, int h, double d_max, double hole_rate = 0.1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DisparityMap d(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (u(rng) >= hole_rate) d.at(x, y) = u(rng) * d_max;
    return d;
}

std::vector<ContinuousCoord> random_coords(std::mt19937_64& rng, int n, int w, int h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ContinuousCoord> c;
    for (int i = 0; i < n; ++i) c.push_back({u(rng) * (w - 1), u(rng) * (h - 1)});
    return c;
}

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "dispref_test_net";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("config presets and validation") {
    const NetConfig desk = NetConfig::desk_scale();
    CHECK_NOTHROW(desk.validate());
    CHECK(desk.d_bins() == 33);
    CHECK(desk.feature_dim() == 16 + 32 + 64 + 96);
    const NetConfig big = NetConfig::full_scale();
    CHECK_NOTHROW(big.validate());
    CHECK(big.d_bins() == 257);
    CHECK(big.feature_dim() == 64 + 128 + 256 + 512 + 512);
    CHECK(big.image_channels == 3);

    NetConfig bad = desk;
    bad.channels.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = desk;
    bad.max_disp = 0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = desk;
    bad.image_channels = 2;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("model card round trip and strictness") {
    NetConfig c = tiny_config(HeadKind::l1_regression);
    CHECK(NetConfig::from_card(c.to_card()) == c);
    CHECK_THROWS_AS(NetConfig::from_card(c.to_card() + "dropout = 0.5\n"), std::domain_error);
    CHECK_THROWS_AS(NetConfig::from_card("levels = 3\n"), std::domain_error);
    CHECK_THROWS_AS(NetConfig::from_card("levels = three\nchannels = 1\nmax_disp = 2\nmlp_hidden = 2\n"
                                         "image_channels = 1\nhead = l1\n"),
                    std::domain_error);
}

TEST_CASE("pyramid extents on odd sizes") {
    std::mt19937_64 rng(1);
    RefinementModel m(tiny_config(), 3);
    const PixelGrid img = random_image(rng, 17, 13);
    const FeaturePyramid p =
        m.features(image_input(img, 1), disparity_input(random_disparity(rng, 17, 13, 8.0), 8));
    REQUIRE(p.size() == 3);
    CHECK(p.levels[0].shape() == ad::Shape{3, 13, 17});
    CHECK(p.levels[1].shape() == ad::Shape{4, 7, 9});
    CHECK(p.levels[2].shape() == ad::Shape{5, 4, 5});
    CHECK(p.scales[2] == 0.25);
    const auto feats = m.sample_point_features(p, random_coords(rng, 10, 17, 13));
    CHECK(feats.shape() == ad::Shape{10, 12});
    CHECK_THROWS_AS(m.sample_point_features(p, std::vector<ContinuousCoord>{{16.5, 0.0}}), std::domain_error);
}

TEST_CASE("input normalization") {
    PixelGrid rgb(2, 1, 3, std::vector<double>{1, 0, 0, 0, 1, 0});
    const ad::Tensor g = image_input(rgb, 1);
    CHECK(g.shape() == ad::Shape{1, 1, 2});
    CHECK(g.values()[0] == doctest::Approx(0.299));
    CHECK(image_input(rgb, 3).shape() == ad::Shape{3, 1, 2});
    CHECK_THROWS_AS(image_input(PixelGrid(2, 2, 1, 1.5), 1), std::domain_error);

    DisparityMap d(3, 1, 0.0);
    d.at(0, 0) = 16.0;
    d.at(1, 0) = 40.0;  // beyond max_disp: clipped
    d.invalidate(2, 0);
    const ad::Tensor t = disparity_input(d, 32);
    CHECK(t.values()[0] == 0.5);
    CHECK(t.values()[1] == 1.0);
    CHECK(t.values()[2] == 0.0);
    CHECK(t.values()[3 + 1] == 1.0);
    CHECK(t.values()[3 + 2] == 0.0);

    RefinementModel m(tiny_config(), 1);
    CHECK_THROWS_AS(m.encode_image(ad::Tensor::constant({1, 4, 4}, std::vector<double>(16, -0.5))),
                    std::domain_error);
    CHECK_THROWS_AS(m.encode_image(ad::Tensor::zeros({3, 4, 4})), std::domain_error);
}

TEST_CASE("head structure: disparity = argmax + offset, offset in [-1, 1]") {
    std::mt19937_64 rng(2);
    RefinementModel m(tiny_config(), 5);
    const RefinementField field(m, random_image(rng, 20, 16), random_disparity(rng, 20, 16, 8.0));
    const auto coords = random_coords(rng, 500, 20, 16);
    const HeadOutput h = field.query_heads(coords);
    REQUIRE(h.argmax.size() == 500);
    for (std::size_t i = 0; i < 500; ++i) {
        const double off = h.offset.values()[i];
        CHECK(off >= -1.0);
        CHECK(off <= 1.0);
        CHECK(h.disparity[i] - off == static_cast<double>(h.argmax[i]));
        const double* row = h.logits.values().data() + i * 9;
        CHECK(h.argmax[i] == std::max_element(row, row + 9) - row);
    }
}

TEST_CASE("regression head outputs scaled disparity") {
    std::mt19937_64 rng(3);
    RefinementModel m(tiny_config(HeadKind::l1_regression), 5);
    CHECK(m.params().find("mlp_o.out.weight") == nullptr);
    const RefinementField field(m, random_image(rng, 12, 12), random_disparity(rng, 12, 12, 8.0));
    const HeadOutput h = field.query_heads(random_coords(rng, 7, 12, 12));
    CHECK(h.argmax.empty());
    for (int i = 0; i < 7; ++i) CHECK(h.disparity[i] == h.regression.values()[i] * 8.0);
}

TEST_CASE("point prediction agrees with batched prediction") {
    std::mt19937_64 rng(4);
    RefinementModel m(tiny_config(), 6);
    const FeaturePyramid p =
        m.features(image_input(random_image(rng, 10, 10), 1), disparity_input(random_disparity(rng, 10, 10, 8), 8));
    const auto coords = random_coords(rng, 4, 10, 10);
    const ad::Tensor f = m.sample_point_features(p, coords);
    const HeadOutput batch = m.predict(f);
    for (int i = 0; i < 4; ++i) {
        const auto row = f.values().subspan(static_cast<std::size_t>(i) * f.dim(1), f.dim(1));
        const PointPrediction pp = m.predict_point(row);
        CHECK(pp.bin == batch.argmax[i]);
        CHECK(pp.disparity == doctest::Approx(batch.disparity[i]).epsilon(1e-12));  // GEMM blocking differs by batch size
    }
}

TEST_CASE("finite differences: every parameter of a reduced network on a 16x16 crop") {
    std::mt19937_64 rng(5);
    RefinementModel m(tiny_config(), 7);
    // Zero-initialized biases can sit exactly on a ReLU kink; move off it.
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (auto& p : m.params())
        if (p.name.ends_with(".bias"))
            for (double& v : p.tensor.mutable_values()) v += jitter(rng);
    const ad::Tensor img = image_input(random_image(rng, 16, 16), 1);
    const ad::Tensor disp = disparity_input(random_disparity(rng, 16, 16, 8.0), 8);
    const auto coords = random_coords(rng, 24, 16, 16);
    auto f = [&] {
        const HeadOutput h = m.predict(m.sample_point_features(m.features(img, disp), coords));
        return ad::add(gradcheck::project(h.logits, 1), gradcheck::project(h.offset, 2));
    };
    std::vector<ad::Tensor> leaves;
    for (const auto& p : m.params()) leaves.push_back(p.tensor);
    const auto r = gradcheck::check(f, leaves);
    CHECK(r.checked == m.params().scalar_count());
    CHECK(r.max_relative <= 1e-4);
}

TEST_CASE("save and load reproduce predictions; mismatches are reported") {
    std::mt19937_64 rng(6);
    RefinementModel m(tiny_config(), 8);
    const fs::path ck = temp_dir() / "tiny.ckpt";
    m.save(ck);
    CHECK(fs::exists(model_card_path(ck)));
    const RefinementModel back = RefinementModel::load(ck);
    CHECK(back.config() == m.config());
    const PixelGrid img = random_image(rng, 12, 10);
    const DisparityMap raw = random_disparity(rng, 12, 10, 8.0);
    const StereoPair pair(img, img);
    CHECK(refine_grid(pair, raw, m, 12, 10) == refine_grid(pair, raw, back, 12, 10));

    // A card that disagrees with the weights.
    NetConfig other = tiny_config();
    other.channels = {3, 4, 6};
    write_model_card(model_card_path(ck), other);
    CHECK_THROWS_AS(RefinementModel::load(ck), ad::CheckpointMismatch);
    CHECK_THROWS_AS(RefinementModel::load(temp_dir() / "absent.ckpt"), IoError);
}

TEST_CASE("different seeds give different weights, same seed the same") {
    RefinementModel a(tiny_config(), 1), b(tiny_config(), 1), c(tiny_config(), 2);
    const auto& wa = a.params().at("enc_img.level0.conv0.weight").tensor;
    CHECK(std::equal(wa.values().begin(), wa.values().end(),
                     b.params().at("enc_img.level0.conv0.weight").tensor.values().begin()));
    CHECK_FALSE(std::equal(wa.values().begin(), wa.values().end(),
                           c.params().at("enc_img.level0.conv0.weight").tensor.values().begin()));
}

TEST_CASE("refine_grid: native resolution equals sampling at integer coordinates") {
    std::mt19937_64 rng(7);
    RefinementModel m(tiny_config(), 9);
    const PixelGrid img = random_image(rng, 14, 11);
    const DisparityMap raw = random_disparity(rng, 14, 11, 8.0);
    const DisparityMap out = refine_grid(StereoPair(img, img), raw, m, 14, 11);
    const RefinementField field(m, img, raw);
    std::vector<ContinuousCoord> pix;
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 14; ++x) pix.push_back({double(x), double(y)});
    const auto q = field.query(pix);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 14; ++x) CHECK(out.at(x, y) == std::max(0.0, q[y * 14 + x]));
    CHECK_THROWS_AS(refine_grid(StereoPair(img, img), DisparityMap(7, 5, 1.0), m, 14, 11), std::domain_error);
}

TEST_CASE("refine_grid: coinciding coordinates agree across output sizes") {
    std::mt19937_64 rng(8);
    RefinementModel m(tiny_config(), 10);
    const int w = 15, h = 12;
    const PixelGrid img = random_image(rng, w, h);
    const DisparityMap raw = random_disparity(rng, w, h, 8.0);
    const StereoPair pair(img, img);
    const DisparityMap one = refine_grid(pair, raw, m, w, h);
    const DisparityMap two = refine_grid(pair, raw, m, 2 * w - 1, 2 * h - 1);
    const double unit = (2.0 * w - 1) / w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) CHECK(std::abs(two.at(2 * x, 2 * y) / unit - one.at(x, y)) <= 1e-9);
    CHECK(refine_grid(pair, raw, m, 2 * w - 1, 2 * h - 1) == two);  // deterministic
}

TEST_CASE("output grid coordinates use the align-corners mapping") {
    const auto c = output_grid_coords(10, 5, 19, 9);
    CHECK(c.size() == 19 * 9);
    CHECK(c.back().x == 9.0);
    CHECK(c.back().y == 4.0);
    CHECK(c[1].x == 0.5);
    CHECK_THROWS_AS(output_grid_coords(10, 5, 0, 9), std::domain_error);
}
