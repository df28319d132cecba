#include "dispref/train/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dispref/core/sampling.hpp"

namespace dispref {
namespace {

SceneLayer random_texture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SceneLayer l;
    const int waves = 6;
    for (int k = 0; k < waves; ++k) {
        const double theta = unit(rng) * std::numbers::pi;
        const double f = 0.15 + 0.9 * unit(rng);  // rad/px
        l.freq_x.push_back(f * std::cos(theta));
        l.freq_y.push_back(f * std::sin(theta));
        l.phase.push_back(unit(rng) * 2.0 * std::numbers::pi);
        l.amp.push_back(0.3 + 0.7 * unit(rng));
    }
    double total = 0.0;
    for (double a : l.amp) total += a;
    const double contrast = 0.25 + 0.2 * unit(rng);
    for (double& a : l.amp) a *= contrast / total;
    l.base = 0.5 + (unit(rng) - 0.5) * (1.0 - 2.0 * contrast);
    return l;
}

int top_layer_left(const std::vector<SceneLayer>& layers, double x, double y) {
    for (int i = static_cast<int>(layers.size()) - 1; i > 0; --i)
        if (layers[i].contains(x, y)) return i;
    return 0;
}

// Layer visible at right-image column xr and the left-frame point it shows.
int top_layer_right(const std::vector<SceneLayer>& layers, double xr, double y, double& xl_out) {
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
        const DisparityPlane& p = layers[i].disparity;
        // xl - (a + b xl + c y) = xr
        const double xl = (xr + p.a + p.c * y) / (1.0 - p.b);
        if (i == 0 || layers[i].contains(xl, y)) {
            xl_out = xl;
            return i;
        }
    }
    return 0;
}

}  // namespace

bool SceneLayer::contains(double x, double y) const {
    switch (shape) {
        case Shape::full:
            return true;
        case Shape::rectangle:
            return std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
        case Shape::ellipse: {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            return u * u + v * v <= 1.0;
        }
    }
    return false;
}

double SceneLayer::texture(double x, double y) const {
    double v = base;
    for (std::size_t k = 0; k < amp.size(); ++k) v += amp[k] * std::sin(freq_x[k] * x + freq_y[k] * y + phase[k]);
    return std::clamp(v, 0.0, 1.0);
}

SynthScene render_scene(std::vector<SceneLayer> layers, int w, int h) {
    if (layers.empty() || layers[0].shape != SceneLayer::Shape::full)
        throw std::domain_error("render_scene: layer 0 must be a full-frame background");
    for (const auto& l : layers)
        if (!(l.disparity.b < 1.0)) throw std::domain_error("render_scene: horizontal slope must be below 1");

    SynthScene s;
    s.left = PixelGrid(w, h, 1);
    s.right = PixelGrid(w, h, 1);
    s.d_gt = DisparityMap(w, h, 0.0);
    s.occluded = PixelGrid(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int li = top_layer_left(layers, x, y);
            const double d = layers[li].disparity.at(x, y);
            s.left.at(x, y) = layers[li].texture(x, y);
            s.d_gt.at(x, y) = d;

            double xl = 0.0;
            const int ri = top_layer_right(layers, x, y, xl);
            s.right.at(x, y) = layers[ri].texture(xl, y);

            const double xr = x - d;
            double unused = 0.0;
            const bool visible = xr >= 0.0 && top_layer_right(layers, xr, y, unused) == li;
            s.occluded.at(x, y) = visible ? 0.0 : 1.0;
        }
    s.layers = std::move(layers);
    return s;
}

SynthScene synth_scene(std::uint64_t seed, int w, int h, double d_max, const SynthOptions& options) {
    if (w < 8 || h < 8) throw std::domain_error("synth_scene: image must be at least 8x8");
    if (!(d_max >= 1.0 && d_max < w / 4.0)) throw std::domain_error("synth_scene: need 1 <= d_max < w/4");
    if (options.min_layers < 1 || options.max_layers < options.min_layers)
        throw std::domain_error("synth_scene: bad layer count range");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count = std::uniform_int_distribution<int>(options.min_layers, options.max_layers)(rng);

    // Disparities increase with layer index so painting order matches depth order.
    std::vector<double> levels(count);
    levels[0] = unit(rng) * 0.3 * d_max;
    for (int i = 1; i < count; ++i) levels[i] = levels[0] + unit(rng) * (d_max - levels[0]);
    std::sort(levels.begin() + 1, levels.end());

    std::vector<SceneLayer> layers;
    for (int i = 0; i < count; ++i) {
        SceneLayer l = random_texture(rng);
        if (i > 0) {
            l.shape = unit(rng) < 0.5 ? SceneLayer::Shape::rectangle : SceneLayer::Shape::ellipse;
            l.rx = (0.08 + 0.22 * unit(rng)) * w;
            l.ry = (0.08 + 0.22 * unit(rng)) * h;
            l.cx = unit(rng) * (w - 1);
            l.cy = unit(rng) * (h - 1);
        }
        const double lo = i == 0 ? 0.0 : 0.5;
        DisparityPlane p{levels[i], 0.0, 0.0};
        if (unit(rng) < options.slope_probability) {
            // Slopes sized so the plane stays within [lo, d_max] over the extent.
            const double span_x = i == 0 ? w : 2.0 * l.rx;
            const double span_y = i == 0 ? h : 2.0 * l.ry;
            const double room = std::min(p.a - lo, d_max - p.a);
            p.b = (unit(rng) * 2.0 - 1.0) * room / span_x;
            p.c = (unit(rng) * 2.0 - 1.0) * room / span_y;
            const double ox = i == 0 ? 0.5 * (w - 1) : l.cx, oy = i == 0 ? 0.5 * (h - 1) : l.cy;
            p.a -= p.b * ox + p.c * oy;
        } else if (options.integer_constant_layers) {
            p.a = std::clamp(std::round(p.a), i == 0 ? 0.0 : 1.0, std::floor(d_max));
        }
        l.disparity = p;
        layers.push_back(std::move(l));
    }
    return render_scene(std::move(layers), w, h);
}

SynthScene synth_scene_unbalanced(std::uint64_t seed, int w, int h, double d_max, int kappa,
                                  const SynthOptions& options) {
    if (kappa < 1) throw std::domain_error("synth_scene_unbalanced: kappa must be >= 1");
    if (w % kappa || h % kappa) throw std::domain_error("synth_scene_unbalanced: size must be divisible by kappa");
    SynthScene s = synth_scene(seed, w, h, d_max, options);
    if (kappa > 1) s.right = resize_bilinear(s.right, w / kappa, h / kappa);
    return s;
}

}  // namespace dispref
