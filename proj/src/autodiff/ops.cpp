#include "dispref/autodiff/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dispref::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require(bool cond, const std::string& what) {
    if (!cond) throw std::domain_error(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(),
            std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

ConstMapMat cmap(std::span<const double> s, Eigen::Index rows, Eigen::Index cols) {
    return ConstMapMat(s.data(), rows, cols);
}

MapMat mmap(std::span<double> s, Eigen::Index rows, Eigen::Index cols) { return MapMat(s.data(), rows, cols); }

// Elementwise unary op with derivative expressed through input and output.
template <typename F, typename DF>
Tensor unary(const Tensor& x, F f, DF df) {
    std::vector<double> out(x.numel());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
    Tensor result = Tensor::from_op(x.shape(), std::move(out), {x}, nullptr);
    if (result.requires_grad()) {
        Node* self = result.node();
        result.node()->backward = [x, self, df](std::span<const double> g) {
            auto gx = x.grad_buffer();
            auto xv = x.values();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(xv[i], self->value[i]);
        };
    }
    return result;
}

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t len = 1;
    std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, int axis) {
    const int rank = static_cast<int>(shape.size());
    if (axis < 0) axis += rank;
    require(axis >= 0 && axis < rank, "axis out of range for shape " + shape_string(shape));
    AxisSplit s;
    for (int i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (int i = axis + 1; i < rank; ++i) s.inner *= shape[i];
    return s;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
            "matmul: incompatible shapes " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<std::size_t>(m) * n);
    mmap(out, m, n).noalias() = cmap(a.values(), m, k) * cmap(b.values(), k, n);
    return Tensor::from_op({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g) {
        auto gm = cmap(g, m, n);
        if (a.requires_grad()) mmap(a.grad_buffer(), m, k).noalias() += gm * cmap(b.values(), k, n).transpose();
        if (b.requires_grad()) mmap(b.grad_buffer(), k, n).noalias() += cmap(a.values(), m, k).transpose() * gm;
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        for (const Tensor* t : {&a, &b}) {
            if (!t->requires_grad()) continue;
            auto gt = t->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        if (a.requires_grad()) {
            auto ga = a.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (b.requires_grad()) {
            auto gb = b.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [a, b](std::span<const double> g) {
        if (a.requires_grad()) {
            auto ga = a.grad_buffer();
            auto bv = b.values();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (b.requires_grad()) {
            auto gb = b.grad_buffer();
            auto av = a.values();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Tensor mul_scalar(const Tensor& a, double s) {
    return unary(a, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary(a, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    require(b.rank() == 1, "add_bias: bias must be rank 1");
    std::size_t groups, group_len, stride;
    if (x.rank() == 2) {
        require(x.dim(1) == b.dim(0), "add_bias: feature count mismatch");
        // Bias index varies fastest.
        groups = x.dim(0);
        group_len = x.dim(1);
        stride = 1;
    } else if (x.rank() == 3) {
        require(x.dim(0) == b.dim(0), "add_bias: channel count mismatch");
        groups = x.dim(0);
        group_len = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
        stride = 0;
    } else {
        throw std::domain_error("add_bias: expected rank 2 or 3 input");
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    auto bv = b.values();
    if (stride == 1) {
        for (std::size_t r = 0; r < groups; ++r)
            for (std::size_t f = 0; f < group_len; ++f) out[r * group_len + f] += bv[f];
    } else {
        for (std::size_t c = 0; c < groups; ++c)
            for (std::size_t i = 0; i < group_len; ++i) out[c * group_len + i] += bv[c];
    }
    return Tensor::from_op(x.shape(), std::move(out), {x, b},
                           [x, b, groups, group_len, stride](std::span<const double> g) {
        if (x.requires_grad()) {
            auto gx = x.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (b.requires_grad()) {
            auto gb = b.grad_buffer();
            if (stride == 1) {
                for (std::size_t r = 0; r < groups; ++r)
                    for (std::size_t f = 0; f < group_len; ++f) gb[f] += g[r * group_len + f];
            } else {
                for (std::size_t c = 0; c < groups; ++c) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < group_len; ++i) acc += g[c * group_len + i];
                    gb[c] += acc;
                }
            }
        }
    });
}

Tensor sine(const Tensor& x) {
    return unary(x, [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor tanh(const Tensor& x) {
    return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor snap(const Tensor& x, int bits) {
    require(bits >= 0 && bits <= 52, "snap: bits must be in [0, 52]");
    return unary(x, [bits](double v) { return std::ldexp(std::round(std::ldexp(v, bits)), -bits); },
                 [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
    return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& x) {
    return unary(x, [](double v) { return std::abs(v); },
                 [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor log(const Tensor& x) {
    for (double v : x.values()) require(v > 0.0, "log: non-positive input");
    return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor softmax(const Tensor& x, int axis) {
    const AxisSplit s = split_axis(x.shape(), axis);
    std::vector<double> out(x.numel());
    auto xv = x.values();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.len * s.inner + i;
            double mx = xv[base];
            for (std::size_t k = 1; k < s.len; ++k) mx = std::max(mx, xv[base + k * s.inner]);
            double z = 0.0;
            for (std::size_t k = 0; k < s.len; ++k) z += out[base + k * s.inner] = std::exp(xv[base + k * s.inner] - mx);
            for (std::size_t k = 0; k < s.len; ++k) out[base + k * s.inner] /= z;
        }
    }
    Tensor result = Tensor::from_op(x.shape(), std::move(out), {x}, nullptr);
    if (result.requires_grad()) {
        Node* self = result.node();
        self->backward = [x, self, s](std::span<const double> g) {
            auto gx = x.grad_buffer();
            const auto& y = self->value;
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t i = 0; i < s.inner; ++i) {
                    const std::size_t base = o * s.len * s.inner + i;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < s.len; ++k) dot += g[base + k * s.inner] * y[base + k * s.inner];
                    for (std::size_t k = 0; k < s.len; ++k) {
                        const std::size_t j = base + k * s.inner;
                        gx[j] += y[j] * (g[j] - dot);
                    }
                }
            }
        };
    }
    return result;
}

Tensor log_softmax(const Tensor& x, int axis) {
    const AxisSplit s = split_axis(x.shape(), axis);
    std::vector<double> out(x.numel());
    auto xv = x.values();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.len * s.inner + i;
            double mx = xv[base];
            for (std::size_t k = 1; k < s.len; ++k) mx = std::max(mx, xv[base + k * s.inner]);
            double z = 0.0;
            for (std::size_t k = 0; k < s.len; ++k) z += std::exp(xv[base + k * s.inner] - mx);
            const double lse = mx + std::log(z);
            for (std::size_t k = 0; k < s.len; ++k) out[base + k * s.inner] = xv[base + k * s.inner] - lse;
        }
    }
    Tensor result = Tensor::from_op(x.shape(), std::move(out), {x}, nullptr);
    if (result.requires_grad()) {
        Node* self = result.node();
        self->backward = [x, self, s](std::span<const double> g) {
            auto gx = x.grad_buffer();
            const auto& y = self->value;
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t i = 0; i < s.inner; ++i) {
                    const std::size_t base = o * s.len * s.inner + i;
                    double gsum = 0.0;
                    for (std::size_t k = 0; k < s.len; ++k) gsum += g[base + k * s.inner];
                    for (std::size_t k = 0; k < s.len; ++k) {
                        const std::size_t j = base + k * s.inner;
                        gx[j] += g[j] - std::exp(y[j]) * gsum;
                    }
                }
            }
        };
    }
    return result;
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return Tensor::from_op({1}, {acc}, {x}, [x](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (double& v : gx) v += g[0];
    });
}

Tensor mean(const Tensor& x) {
    const double n = static_cast<double>(x.numel());
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return Tensor::from_op({1}, {acc / n}, {x}, [x, n](std::span<const double> g) {
        auto gx = x.grad_buffer();
        const double gv = g[0] / n;
        for (double& v : gx) v += gv;
    });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    require(!parts.empty(), "concat: no inputs");
    Shape shape = parts.front().shape();
    const int rank = static_cast<int>(shape.size());
    if (axis < 0) axis += rank;
    require(axis >= 0 && axis < rank, "concat: axis out of range");
    int total = 0;
    for (const Tensor& p : parts) {
        require(static_cast<int>(p.rank()) == rank, "concat: rank mismatch");
        for (int i = 0; i < rank; ++i)
            if (i != axis) require(p.dim(i) == shape[i], "concat: extent mismatch on a non-concat axis");
        total += p.dim(axis);
    }
    shape[axis] = total;
    const AxisSplit whole = split_axis(shape, axis);

    std::vector<double> out(shape_numel(shape));
    std::vector<std::size_t> widths;  // per-part contiguous chunk per outer index
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const Tensor& p : parts) {
        const std::size_t chunk = static_cast<std::size_t>(p.dim(axis)) * whole.inner;
        auto pv = p.values();
        for (std::size_t o = 0; o < whole.outer; ++o)
            std::copy_n(pv.begin() + o * chunk, chunk, out.begin() + o * whole.len * whole.inner + offset);
        widths.push_back(chunk);
        offsets.push_back(offset);
        offset += chunk;
    }
    return Tensor::from_op(std::move(shape), std::move(out), parts,
                           [parts, widths, offsets, whole](std::span<const double> g) {
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (!parts[k].requires_grad()) continue;
            auto gp = parts[k].grad_buffer();
            for (std::size_t o = 0; o < whole.outer; ++o) {
                const double* src = g.data() + o * whole.len * whole.inner + offsets[k];
                double* dst = gp.data() + o * widths[k];
                for (std::size_t i = 0; i < widths[k]; ++i) dst[i] += src[i];
            }
        }
    });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding) {
    require(x.rank() == 3 && w.rank() == 4, "conv2d: expected x[C,H,W] and w[O,C,k,k]");
    require(w.dim(1) == x.dim(0), "conv2d: input channel mismatch");
    require(w.dim(2) == w.dim(3), "conv2d: kernel must be square");
    require(stride >= 1 && padding >= 0, "conv2d: bad stride/padding");
    const int c_in = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int c_out = w.dim(0), k = w.dim(2);
    require(h + 2 * padding >= k && wd + 2 * padding >= k, "conv2d: kernel larger than padded input");
    const int ho = (h + 2 * padding - k) / stride + 1;
    const int wo = (wd + 2 * padding - k) / stride + 1;
    const int patch = c_in * k * k;
    const int npix = ho * wo;
    if (b.defined()) require(b.rank() == 1 && b.dim(0) == c_out, "conv2d: bias shape mismatch");

    // 1x1 stride-1 convolutions use the input directly as the column matrix.
    const bool pointwise = k == 1 && stride == 1 && padding == 0;
    std::vector<double> cols;
    if (!pointwise) {
        cols.assign(static_cast<std::size_t>(patch) * npix, 0.0);
        auto xv = x.values();
        for (int c = 0; c < c_in; ++c)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    double* row = cols.data() + static_cast<std::size_t>((c * k + ky) * k + kx) * npix;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        const double* src = xv.data() + (static_cast<std::size_t>(c) * h + iy) * wd;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride - padding + kx;
                            if (ix >= 0 && ix < wd) row[oy * wo + ox] = src[ix];
                        }
                    }
                }
    }
    std::span<const double> colv = pointwise ? x.values() : std::span<const double>(cols);

    std::vector<double> out(static_cast<std::size_t>(c_out) * npix);
    auto om = mmap(out, c_out, npix);
    om.noalias() = cmap(w.values(), c_out, patch) * cmap(colv, patch, npix);
    if (b.defined()) {
        auto bv = b.values();
        for (int o = 0; o < c_out; ++o) om.row(o).array() += bv[o];
    }

    return Tensor::from_op({c_out, ho, wo}, std::move(out), {x, w, b},
                           [x, w, b, cols = std::move(cols), pointwise, c_in, h, wd, c_out, k, ho, wo, patch, npix,
                            stride, padding](std::span<const double> g) {
        auto gm = cmap(g, c_out, npix);
        std::span<const double> colv = pointwise ? x.values() : std::span<const double>(cols);
        if (w.requires_grad()) mmap(w.grad_buffer(), c_out, patch).noalias() += gm * cmap(colv, patch, npix).transpose();
        if (b.defined() && b.requires_grad()) {
            auto gb = b.grad_buffer();
            // Plain loop: Eigen's vectorized sum peels by alignment, which breaks run-to-run determinism.
            for (int o = 0; o < c_out; ++o)
                gb[o] += std::accumulate(g.begin() + o * npix, g.begin() + (o + 1) * npix, 0.0);
        }
        if (!x.requires_grad()) return;
        if (pointwise) {
            mmap(x.grad_buffer(), c_in, npix).noalias() += cmap(w.values(), c_out, patch).transpose() * gm;
            return;
        }
        RowMat dcols = cmap(w.values(), c_out, patch).transpose() * gm;
        auto gx = x.grad_buffer();
        for (int c = 0; c < c_in; ++c)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const double* row = dcols.data() + static_cast<std::size_t>((c * k + ky) * k + kx) * npix;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        double* dst = gx.data() + (static_cast<std::size_t>(c) * h + iy) * wd;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride - padding + kx;
                            if (ix >= 0 && ix < wd) dst[ix] += row[oy * wo + ox];
                        }
                    }
                }
    });
}

Tensor upsample_nearest2x(const Tensor& x, int out_h, int out_w) {
    require(x.rank() == 3, "upsample_nearest2x: expected [C,H,W]");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    require(out_h >= 1 && out_w >= 1 && out_h <= 2 * h && out_w <= 2 * w,
            "upsample_nearest2x: output must fit within twice the input size");
    std::vector<double> out(static_cast<std::size_t>(c) * out_h * out_w);
    auto xv = x.values();
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < out_h; ++y)
            for (int xx = 0; xx < out_w; ++xx)
                out[(static_cast<std::size_t>(ch) * out_h + y) * out_w + xx] =
                    xv[(static_cast<std::size_t>(ch) * h + y / 2) * w + xx / 2];
    return Tensor::from_op({c, out_h, out_w}, std::move(out), {x}, [x, c, h, w, out_h, out_w](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < out_h; ++y)
                for (int xx = 0; xx < out_w; ++xx)
                    gx[(static_cast<std::size_t>(ch) * h + y / 2) * w + xx / 2] +=
                        g[(static_cast<std::size_t>(ch) * out_h + y) * out_w + xx];
    });
}

Tensor sample_bilinear(const Tensor& x, std::span<const ContinuousCoord> coords) {
    require(x.rank() == 3, "sample_bilinear: expected [C,H,W]");
    require(!coords.empty(), "sample_bilinear: no coordinates");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int n = static_cast<int>(coords.size());

    struct Tap {
        std::size_t i00, i01, i10, i11;  // offsets inside one channel plane
        double w00, w01, w10, w11;
    };
    std::vector<Tap> taps(n);
    constexpr double slack = 1e-9;
    for (int p = 0; p < n; ++p) {
        const double cx = coords[p].x, cy = coords[p].y;
        require(cx >= -slack && cx <= w - 1 + slack && cy >= -slack && cy <= h - 1 + slack,
                "sample_bilinear: coordinate out of bounds");
        const double px = std::clamp(cx, 0.0, static_cast<double>(w - 1));
        const double py = std::clamp(cy, 0.0, static_cast<double>(h - 1));
        const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double fx = px - x0, fy = py - y0;
        taps[p] = {static_cast<std::size_t>(y0) * w + x0, static_cast<std::size_t>(y0) * w + x1,
                   static_cast<std::size_t>(y1) * w + x0, static_cast<std::size_t>(y1) * w + x1,
                   (1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    }
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<double> out(static_cast<std::size_t>(n) * c);
    auto xv = x.values();
    for (int p = 0; p < n; ++p) {
        const Tap& t = taps[p];
        for (int ch = 0; ch < c; ++ch) {
            const double* pl = xv.data() + ch * plane;
            out[static_cast<std::size_t>(p) * c + ch] =
                t.w00 * pl[t.i00] + t.w01 * pl[t.i01] + t.w10 * pl[t.i10] + t.w11 * pl[t.i11];
        }
    }
    return Tensor::from_op({n, c}, std::move(out), {x}, [x, taps = std::move(taps), n, c, plane](std::span<const double> g) {
        auto gx = x.grad_buffer();
        for (int p = 0; p < n; ++p) {
            const Tap& t = taps[p];
            for (int ch = 0; ch < c; ++ch) {
                const double gv = g[static_cast<std::size_t>(p) * c + ch];
                double* pl = gx.data() + ch * plane;
                pl[t.i00] += t.w00 * gv;
                pl[t.i01] += t.w01 * gv;
                pl[t.i10] += t.w10 * gv;
                pl[t.i11] += t.w11 * gv;
            }
        }
    });
}

Tensor from_grid(const PixelGrid& grid) {
    const int c = grid.channels(), h = grid.height(), w = grid.width();
    std::vector<double> v(grid.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) v[(static_cast<std::size_t>(ch) * h + y) * w + x] = grid.at(x, y, ch);
    return Tensor::constant({c, h, w}, std::move(v));
}

PixelGrid to_grid(const Tensor& chw) {
    require(chw.rank() == 3, "to_grid: expected [C,H,W]");
    const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
    PixelGrid out(w, h, c);
    auto v = chw.values();
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(x, y, ch) = v[(static_cast<std::size_t>(ch) * h + y) * w + x];
    return out;
}

}  // namespace dispref::ad
