#include "dispref/train/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dispref/autodiff/ops.hpp"

namespace dispref {

std::vector<double> gaussian_target(double d_star, double sigma, int d_bins) {
    if (d_bins < 1) throw std::domain_error("gaussian_target: need at least one bin");
    if (!(sigma > 0.0)) throw std::domain_error("gaussian_target: sigma must be positive");
    if (!(d_star >= 0.0 && d_star <= d_bins - 1))
        throw std::domain_error("gaussian_target: d_star " + std::to_string(d_star) + " outside [0, " +
                                std::to_string(d_bins - 1) + "]");
    const double nearest = std::round(d_star) - d_star;
    std::vector<double> w(d_bins);
    double total = 0.0;
    for (int d = 0; d < d_bins; ++d) {
        const double diff = d - d_star;
        w[d] = std::exp(-(diff * diff - nearest * nearest) / (2.0 * sigma * sigma));
        total += w[d];
    }
    for (double& v : w) v /= total;
    return w;
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

RefinementLoss refinement_loss(const ad::Tensor& logits, const ad::Tensor& offset, std::span<const double> d_star,
                               double sigma) {
    if (logits.rank() != 2 || offset.rank() != 2 || offset.dim(1) != 1 || offset.dim(0) != logits.dim(0) ||
        static_cast<int>(d_star.size()) != logits.dim(0))
        throw std::domain_error("refinement_loss: expected logits [N,B], offset [N,1] and N targets");
    const int n = logits.dim(0), bins = logits.dim(1);

    std::vector<double> target(static_cast<std::size_t>(n) * bins);
    std::vector<double> residual(n), mask(n);
    LossBreakdown br;
    auto lv = logits.values();
    for (int i = 0; i < n; ++i) {
        const auto t = gaussian_target(d_star[i], sigma, bins);
        std::copy(t.begin(), t.end(), target.begin() + static_cast<std::ptrdiff_t>(i) * bins);
        br.target_entropy += entropy(t);
        const double* row = lv.data() + static_cast<std::size_t>(i) * bins;
        const int arg = static_cast<int>(std::max_element(row, row + bins) - row);
        residual[i] = d_star[i] - arg;
        mask[i] = std::abs(residual[i]) <= 1.0 ? 1.0 : 0.0;
        if (mask[i] == 0.0) br.masked_fraction += 1.0;
    }

    const ad::Tensor log_p = ad::log_softmax(logits, 1);
    const ad::Tensor ce = ad::mul_scalar(ad::sum(ad::mul(ad::Tensor::constant({n, bins}, std::move(target)), log_p)),
                                         -1.0 / n);
    // Multiplying by the mask keeps masked points at exactly zero, gradient included.
    const ad::Tensor off = ad::mul_scalar(
        ad::sum(ad::mul(ad::abs(ad::sub(offset, ad::Tensor::constant({n, 1}, residual))),
                        ad::Tensor::constant({n, 1}, mask))),
        1.0 / n);

    RefinementLoss out;
    out.total = ad::add(ce, off);
    br.ce_term = ce.item();
    br.offset_term = off.item();
    br.total = out.total.item();
    br.masked_fraction /= n;
    br.target_entropy /= n;
    out.breakdown = br;
    return out;
}

LossBreakdown refinement_loss(std::span<const double> logits, double offset, double d_star, double sigma) {
    ad::NoGradGuard no_grad;
    const int bins = static_cast<int>(logits.size());
    const double ds[] = {d_star};
    return refinement_loss(ad::Tensor::constant({1, bins}, std::vector<double>(logits.begin(), logits.end())),
                           ad::Tensor::constant({1, 1}, {offset}), ds, sigma)
        .breakdown;
}

RefinementLoss l1_regression_loss(const ad::Tensor& regression, std::span<const double> d_star, double max_disp) {
    if (regression.rank() != 2 || regression.dim(1) != 1 || static_cast<int>(d_star.size()) != regression.dim(0))
        throw std::domain_error("l1_regression_loss: expected regression [N,1] and N targets");
    const int n = regression.dim(0);
    RefinementLoss out;
    out.total = ad::mul_scalar(
        ad::sum(ad::abs(ad::sub(ad::mul_scalar(regression, max_disp),
                                ad::Tensor::constant({n, 1}, std::vector<double>(d_star.begin(), d_star.end()))))),
        1.0 / n);
    out.breakdown.offset_term = out.total.item();
    out.breakdown.total = out.breakdown.offset_term;
    return out;
}

}  // namespace dispref
