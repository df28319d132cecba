#pragma once

#include <span>
#include <vector>

#include "dispref/autodiff/tensor.hpp"
#include "dispref/core/grid.hpp"

namespace dispref::ad {

// Shape conventions: dense activations are [N, F]; feature maps are [C, H, W]
// (batch of one). All ops throw std::domain_error on shape mismatch.

/// [M, K] x [K, N] -> [M, N].
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul_scalar(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

/// Adds b[F] to every row of x[N, F], or b[C] to every channel of x[C, H, W].
Tensor add_bias(const Tensor& x, const Tensor& b);

Tensor sine(const Tensor& x);
Tensor tanh(const Tensor& x);
/// Rounds to the nearest multiple of 2^-bits; the gradient passes straight through.
Tensor snap(const Tensor& x, int bits);
Tensor relu(const Tensor& x);
Tensor abs(const Tensor& x);
/// Natural log; inputs must be positive.
Tensor log(const Tensor& x);

/// Shift-normalized softmax along `axis`.
Tensor softmax(const Tensor& x, int axis);
Tensor log_softmax(const Tensor& x, int axis);

/// Scalar reductions over all elements; the result has shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Concatenation along `axis`; all other extents must agree.
Tensor concat(const std::vector<Tensor>& parts, int axis);

/// x[C, H, W] (*) w[O, C, k, k] + b[O]; b may be undefined.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding);

/// Nearest 2x upsampling of x[C, H, W] cropped to [C, out_h, out_w]
/// (out_h <= 2H, out_w <= 2W). Source index is floor(i / 2).
Tensor upsample_nearest2x(const Tensor& x, int out_h, int out_w);

/// Bilinear samples of x[C, H, W] at coordinates given in x's pixel frame.
/// Returns [N, C]. Coordinates must lie within [0, W-1] x [0, H-1].
Tensor sample_bilinear(const Tensor& x, std::span<const ContinuousCoord> coords);

/// [C, H, W] view of a grid (channel-interleaved -> planar).
Tensor from_grid(const PixelGrid& grid);
PixelGrid to_grid(const Tensor& chw);

}  // namespace dispref::ad
