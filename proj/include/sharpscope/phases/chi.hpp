#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sharpscope/numkit/savgol.hpp"
#include "sharpscope/phases/saturation.hpp"

namespace sharpscope::phases {

struct ChiFilterParams {
    int window = 9;
    int polyorder = 3;
    /// Points above this c are dropped before differentiation (fluctuations
    /// near the divergent phase); unset keeps the whole curve.
    std::optional<double> c_max_analysis;
};

/// chi = -d/dc of the averaged normalized sharpness, chi' = -d^2/dc^2, and
/// c_crit = argmax of chi' on the window interior.
struct ChiCurves {
    std::vector<double> c;
    std::vector<double> smoothed;   // Savitzky-Golay deriv-0 of the mean curve
    std::vector<double> chi;
    std::vector<double> chi_prime;
    double c_crit = 0.0;
    ChiFilterParams filter;
};

/// The curve is sampled uniformly in x = log2(c); the filter differentiates
/// in x and the chain rule converts to d/dc:
///   dmu/dc   = mu_x / (c ln2)
///   d2mu/dc2 = (mu_xx / ln2 - mu_x) / (c^2 ln2).
inline ChiCurves extract_c_crit(const SaturationCurve& curve, const ChiFilterParams& filter = {}) {
    if (curve.total_seeds < 2)
        throw contract_error("extract_c_crit: need a curve averaged over >= 2 seeds");

    std::vector<double> xs, cs, mu;
    for (std::size_t i = 0; i < curve.c.size(); ++i) {
        if (filter.c_max_analysis && curve.c[i] > *filter.c_max_analysis) break;
        xs.push_back(curve.exponent[i]);
        cs.push_back(curve.c[i]);
        mu.push_back(curve.mean[i]);
    }
    const int n = static_cast<int>(mu.size());
    if (n < filter.window)
        throw contract_error("extract_c_crit: fewer points (" + std::to_string(n) +
                             ") than the filter window");
    for (int i = 1; i < n; ++i)
        if (std::abs((xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(i - 1)]) -
                     (xs[1] - xs[0])) > 1e-9)
            throw contract_error("extract_c_crit: curve is not uniform in log2(c)");

    const double range = *std::max_element(mu.begin(), mu.end()) -
                         *std::min_element(mu.begin(), mu.end());
    if (range <= 1e-12)
        throw contract_error("extract_c_crit: no interior maximum (flat curve)");

    const double hx = xs[1] - xs[0];
    auto s0 = numkit::savitzky_golay(mu, filter.window, filter.polyorder, 0, hx);
    auto d1 = numkit::savitzky_golay(mu, filter.window, filter.polyorder, 1, hx);
    auto d2 = numkit::savitzky_golay(mu, filter.window, filter.polyorder, 2, hx);

    ChiCurves out;
    out.filter = filter;
    out.c = cs;
    out.smoothed = std::move(s0);
    out.chi.resize(static_cast<std::size_t>(n));
    out.chi_prime.resize(static_cast<std::size_t>(n));
    constexpr double ln2 = std::numbers::ln2;
    for (int i = 0; i < n; ++i) {
        const double c = cs[static_cast<std::size_t>(i)];
        const double mu_x = d1[static_cast<std::size_t>(i)];
        const double mu_xx = d2[static_cast<std::size_t>(i)];
        out.chi[static_cast<std::size_t>(i)] = -mu_x / (c * ln2);
        out.chi_prime[static_cast<std::size_t>(i)] = -(mu_xx / ln2 - mu_x) / (c * c * ln2);
    }

    // argmax of chi' away from the one-sided filter zones at both ends
    const int half = filter.window / 2;
    const int lo = half, hi = n - 1 - half;
    if (lo > hi) throw contract_error("extract_c_crit: interior is empty");
    int best = lo;
    for (int i = lo + 1; i <= hi; ++i)
        if (out.chi_prime[static_cast<std::size_t>(i)] >
            out.chi_prime[static_cast<std::size_t>(best)])
            best = i;
    out.c_crit = cs[static_cast<std::size_t>(best)];
    return out;
}

}  // namespace sharpscope::phases
