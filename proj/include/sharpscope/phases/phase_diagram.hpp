#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "sharpscope/numkit/polyfit.hpp"
#include "sharpscope/phases/scan.hpp"

namespace sharpscope::phases {

/// Mean and 25/75% quantiles of one critical constant over the seeds of a
/// (d, w) cell.
struct ConstantStat {
    std::optional<double> mean;
    std::optional<double> q25;
    std::optional<double> q75;
    long defined = 0;
};

struct PhaseDiagramRow {
    int d = 0;
    int w = 0;
    double dw = 0.0;
    long seeds = 0;
    ConstantStat c_loss, c_sharp, c_max, c_barrier;
    bool flagged = false;  // too few defined seeds, or quantiles fail to bracket the mean
};

struct PhaseDiagram {
    std::vector<PhaseDiagramRow> rows;  // sorted by d/w
    // Degree-2 least-squares coefficients (constant term first) of
    // log2(mean constant) against d/w, over unflagged rows.
    std::map<std::string, std::vector<double>> fits;
};

namespace detail {

/// Linear-interpolation quantile on sorted data (numpy default convention).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw contract_error("quantile of empty set");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

inline ConstantStat stat_of(std::vector<double> values) {
    ConstantStat s;
    s.defined = static_cast<long>(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.q25 = quantile_sorted(values, 0.25);
    s.q75 = quantile_sorted(values, 0.75);
    return s;
}

inline bool brackets_mean(const ConstantStat& s) {
    if (!s.mean) return true;
    return *s.q25 <= *s.mean + 1e-12 && *s.mean <= *s.q75 + 1e-12;
}

}  // namespace detail

/// Group per-seed constants by (d, w), compute means and quantiles, and fit
/// log2(mean) vs d/w with a degree-2 polynomial per constant.
inline PhaseDiagram assemble_phase_diagram(const std::vector<CriticalConstants>& runs,
                                           long min_seeds = 3) {
    std::map<std::pair<int, int>, std::vector<const CriticalConstants*>> cells;
    for (const auto& run : runs) cells[{run.d, run.w}].push_back(&run);

    PhaseDiagram diagram;
    for (const auto& [key, cell] : cells) {
        PhaseDiagramRow row;
        row.d = key.first;
        row.w = key.second;
        row.dw = static_cast<double>(key.first) / key.second;
        row.seeds = static_cast<long>(cell.size());

        auto collect = [&cell](std::optional<double> CriticalConstants::* member) {
            std::vector<double> values;
            for (const auto* run : cell)
                if (run->*member) values.push_back(*(run->*member));
            return values;
        };
        row.c_loss = detail::stat_of(collect(&CriticalConstants::c_loss));
        row.c_sharp = detail::stat_of(collect(&CriticalConstants::c_sharp));
        row.c_max = detail::stat_of(collect(&CriticalConstants::c_max));
        row.c_barrier = detail::stat_of(collect(&CriticalConstants::c_barrier));

        row.flagged = row.c_loss.defined < min_seeds || row.c_max.defined < min_seeds ||
                      !detail::brackets_mean(row.c_loss) || !detail::brackets_mean(row.c_sharp) ||
                      !detail::brackets_mean(row.c_max);
        diagram.rows.push_back(row);
    }
    std::sort(diagram.rows.begin(), diagram.rows.end(),
              [](const PhaseDiagramRow& a, const PhaseDiagramRow& b) { return a.dw < b.dw; });

    auto fit_constant = [&diagram](const char* name, ConstantStat PhaseDiagramRow::* member) {
        std::vector<double> xs, ys;
        for (const auto& row : diagram.rows) {
            if (row.flagged) continue;
            const ConstantStat& stat = row.*member;
            if (!stat.mean || !(*stat.mean > 0.0)) continue;
            xs.push_back(row.dw);
            ys.push_back(std::log2(*stat.mean));
        }
        if (xs.size() < 2) return;
        const int degree = std::min<int>(2, static_cast<int>(xs.size()) - 1);
        diagram.fits[name] = numkit::polyfit(xs, ys, degree);
    };
    fit_constant("c_loss", &PhaseDiagramRow::c_loss);
    fit_constant("c_sharp", &PhaseDiagramRow::c_sharp);
    fit_constant("c_max", &PhaseDiagramRow::c_max);
    fit_constant("c_barrier", &PhaseDiagramRow::c_barrier);
    return diagram;
}

}  // namespace sharpscope::phases
