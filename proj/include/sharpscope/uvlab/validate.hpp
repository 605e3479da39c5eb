#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sharpscope/uvlab/closed_forms.hpp"

namespace sharpscope::uvlab {

/// One closed-form-vs-Monte-Carlo comparison. Rows with gated == false are
/// informational: the expected-Frobenius-change formula substitutes
/// <L0><L1/L0 - 1> for <L1 - L0>, so its z-score measures that covariance
/// gap rather than sampling noise.
struct ValidationRow {
    std::string formula;
    int width = 0;
    double k = 0.0;  // 0 when not k-dependent
    double closed_form = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double z = 0.0;
    bool gated = true;
};

struct ValidateConfig {
    std::vector<int> widths{1, 2, 4, 8, 16};
    std::vector<double> ks{0.5, 1.0, 2.0, 3.0, 3.9};
    long samples = 1000000;
    std::uint64_t seed = 1;
    /// Test hook: multiply the named closed form by 1.05 to check that the
    /// validator actually fails when a constant is wrong.
    std::string corrupt;
};

namespace detail {

class MeanAccumulator {
public:
    void add(double x) {
        sum_ += x;
        sumsq_ += x * x;
        ++n_;
    }
    double mean() const { return sum_ / static_cast<double>(n_); }
    double se() const {
        const double m = mean();
        const double var = std::max(0.0, sumsq_ / static_cast<double>(n_) - m * m);
        return std::sqrt(var / static_cast<double>(n_));
    }

private:
    double sum_ = 0.0;
    double sumsq_ = 0.0;
    long n_ = 0;
};

inline ValidationRow make_row(const std::string& formula, int width, double k, double closed,
                              const MeanAccumulator& acc, bool gated, const std::string& corrupt) {
    ValidationRow row;
    row.formula = formula;
    row.width = width;
    row.k = k;
    row.closed_form = formula == corrupt ? 1.05 * closed : closed;
    row.mc_mean = acc.mean();
    row.mc_se = acc.se();
    row.z = row.mc_se > 0.0 ? (row.mc_mean - row.closed_form) / row.mc_se
                            : (row.mc_mean == row.closed_form ? 0.0 : 1e300);
    row.gated = gated;
    return row;
}

}  // namespace detail

/// Stream the Monte Carlo over initializations for every width, comparing the
/// Gaussian moments, Eq.-7 loss ratios, and the (informational) Frobenius
/// change against their closed forms.
inline std::vector<ValidationRow> run_uv_validation(const ValidateConfig& cfg) {
    if (cfg.samples < 10000) throw config_error("uv-validate: need at least 1e4 samples");
    std::vector<ValidationRow> rows;

    for (int w : cfg.widths) {
        numkit::SeededRng rng = numkit::SeededRng(cfg.seed).derive(static_cast<std::uint64_t>(w));
        detail::MeanAccumulator f_sq, trh, m2, m4, m42;
        std::vector<detail::MeanAccumulator> ratio(cfg.ks.size());
        std::vector<detail::MeanAccumulator> frob(cfg.ks.size());

        const double wd = static_cast<double>(w);
        for (long s = 0; s < cfg.samples; ++s) {
            auto state = models::init_uv(w, rng);
            const auto r = models::uv_reduce(state);
            const double f2 = r.f * r.f;
            const double tr2 = r.trH * r.trH;
            f_sq.add(f2);
            trh.add(r.trH);
            m2.add(f2 / tr2);
            m4.add(f2 * f2 / (tr2 * tr2));
            m42.add(f2 * f2 / tr2);
            for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
                const double k = cfg.ks[i];
                const double factor = 1.0 - k + k * k / wd * (f2 / tr2);
                const double loss_ratio = factor * factor;
                ratio[i].add(loss_ratio);
                const double kk4 = k * (k - 4.0) / wd;
                const double delta_frob = kk4 * (kk4 * (f2 * f2 / tr2) + 2.0 * f2) +
                                          4.0 * (1.0 + 2.0 / wd) * (0.5 * f2) * (loss_ratio - 1.0);
                frob[i].add(delta_frob);
            }
        }

        const auto moments = uv_moments(w);
        rows.push_back(detail::make_row("f0_sq", w, 0.0, 1.0, f_sq, true, cfg.corrupt));
        rows.push_back(detail::make_row("trH0", w, 0.0, 2.0, trh, true, cfg.corrupt));
        rows.push_back(detail::make_row("m2", w, 0.0, moments.m2, m2, true, cfg.corrupt));
        rows.push_back(detail::make_row("m4", w, 0.0, moments.m4, m4, true, cfg.corrupt));
        rows.push_back(detail::make_row("m42", w, 0.0, moments.m42, m42, true, cfg.corrupt));
        for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
            const double k = cfg.ks[i];
            rows.push_back(detail::make_row("loss_ratio", w, k,
                                            uv_expected_first_step_loss_ratio(k, w), ratio[i],
                                            true, cfg.corrupt));
            rows.push_back(detail::make_row("frobenius_change", w, k,
                                            uv_expected_frobenius_change(k, w), frob[i], false,
                                            cfg.corrupt));
        }
    }
    return rows;
}

inline bool validation_passes(const std::vector<ValidationRow>& rows, double z_threshold = 4.0) {
    for (const auto& row : rows)
        if (row.gated && std::abs(row.z) > z_threshold) return false;
    return true;
}

}  // namespace sharpscope::uvlab
