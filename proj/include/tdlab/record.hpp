#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdlab/error.hpp"

namespace tdlab {

/// How a trajectory is reduced to the per-run sweep metric.
enum class Reduction { Final, TailMean, Mean };

inline Reduction parse_reduction(std::string_view name) {
    if (name == "final")
        return Reduction::Final;
    if (name == "tail")
        return Reduction::TailMean;
    if (name == "mean")
        return Reduction::Mean;
    throw Error(Errc::InvalidConfig, "unknown reduction '" + std::string(name) + "'");
}

inline std::string_view to_string(Reduction r) {
    switch (r) {
    case Reduction::Final: return "final";
    case Reduction::TailMean: return "tail";
    case Reduction::Mean: return "mean";
    }
    return "?";
}

/// Per-iteration metric of one run. For evaluation runs `metric` holds the
/// loss at t = 0..T; for control runs it holds the trailing-window mean
/// reward after each step. After a divergence the last finite value is
/// carried to the horizon.
struct RunRecord {
    std::uint64_t seed = 0;
    std::vector<double> metric;
    bool diverged = false;
    long truncation_index = -1;  ///< first step whose update was non-finite
    double max_trace_norm = 0.0;

    // control runs only
    std::vector<double> rewards;
    std::vector<double> omega_hat;

    double reduce(Reduction r, std::size_t tail = 500) const {
        if (metric.empty())
            return 0.0;
        switch (r) {
        case Reduction::Final:
            return metric.back();
        case Reduction::TailMean: {
            const std::size_t k = std::min(tail, metric.size());
            double s = 0.0;
            for (std::size_t i = metric.size() - k; i < metric.size(); ++i)
                s += metric[i];
            return s / static_cast<double>(k);
        }
        case Reduction::Mean: {
            double s = 0.0;
            for (double m : metric)
                s += m;
            return s / static_cast<double>(metric.size());
        }
        }
        return metric.back();
    }
};

} // namespace tdlab
