#pragma once

#include <cstdint>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

/// Planar disparity a + b x + c y in left-image pixels.
struct DisparityPlane {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double at(double x, double y) const { return a + b * x + c * y; }
};

/// One textured surface. Layer 0 is the full-frame background; later layers
/// are painted over earlier ones in both views.
struct SceneLayer {
    enum class Shape { full, rectangle, ellipse };
    Shape shape = Shape::full;
    double cx = 0.0, cy = 0.0;  // center (left frame)
    double rx = 0.0, ry = 0.0;  // half extents
    DisparityPlane disparity;
    // Texture: sum of oriented sinusoids plus a brightness offset.
    std::vector<double> freq_x, freq_y, phase, amp;
    double base = 0.5;

    bool contains(double x, double y) const;
    double texture(double x, double y) const;
};

struct SynthOptions {
    int min_layers = 3;
    int max_layers = 8;
    /// Probability that a layer gets a non-zero slope.
    double slope_probability = 0.4;
    /// Draw constant layer disparities on integers. Sloped layers are
    /// continuous either way.
    bool integer_constant_layers = true;
};

struct SynthScene {
    PixelGrid left;
    PixelGrid right;
    DisparityMap d_gt;  // dense, left frame, left pixels
    /// 1 where the left pixel is not visible in the right view (or falls out of frame).
    PixelGrid occluded;
    std::vector<SceneLayer> layers;
};

/// Renders a layered scene with disparities in [0, d_max]. Requires d_max < w / 4.
/// Deterministic in seed.
SynthScene synth_scene(std::uint64_t seed, int w, int h, double d_max, const SynthOptions& options = {});

/// Renders the given layers at w x h (used by synth_scene and tests).
SynthScene render_scene(std::vector<SceneLayer> layers, int w, int h);

/// Unbalanced variant: the right view is rendered at w x h and bilinearly
/// downsampled by kappa. left, d_gt and occluded stay at w x h.
SynthScene synth_scene_unbalanced(std::uint64_t seed, int w, int h, double d_max, int kappa,
                                  const SynthOptions& options = {});

}  // namespace dispref
