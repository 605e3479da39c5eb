#pragma once

#include <cmath>
#include <vector>

#include "sharpscope/errors.hpp"

namespace sharpscope::phases {

/// Learning-rate constant grid c = 2^x, uniform in x (default step 0.1).
struct CGrid {
    double x0 = 0.0;
    double step = 0.1;
    int count = 0;

    static CGrid from_range(double x0, double x_max, double step = 0.1) {
        if (!(step > 0.0)) throw config_error("CGrid: step must be positive");
        if (x_max < x0) throw config_error("CGrid: x_max below x0");
        CGrid g;
        g.x0 = x0;
        g.step = step;
        g.count = static_cast<int>(std::floor((x_max - x0) / step + 1e-9)) + 1;
        return g;
    }

    double exponent(int i) const { return x0 + step * i; }
    double value(int i) const { return std::exp2(exponent(i)); }

    std::vector<double> values() const {
        std::vector<double> out(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = value(i);
        return out;
    }
};

}  // namespace sharpscope::phases
