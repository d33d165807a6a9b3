#pragma once

#include <map>
#include <optional>

#include <Eigen/Dense>

#include "windfleet/dpgmm.hpp"
#include "windfleet/farm.hpp"

namespace windfleet {

using LabelGrid = Grid<int>;

/// One synchronous pass replacing each label with the modal label of its up
/// to eight present neighbors. A tie for the mode keeps the cell's label.
inline LabelGrid smooth_labels(const LabelGrid& in) {
    LabelGrid out = in;
    for (int r = 1; r <= in.rows(); ++r) {
        for (int c = 1; c <= in.columns(); ++c) {
            const auto& self = in.at({r, c});
            if (!self) continue;
            std::map<int, int> votes;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 1 || rr > in.rows() || cc < 1 || cc > in.columns()) continue;
                    if (const auto& v = in.at({rr, cc})) ++votes[*v];
                }
            if (votes.empty()) continue;
            int best_label = 0, best_count = -1;
            bool tie = false;
            for (const auto& [label, count] : votes) {
                if (count > best_count) {
                    best_label = label;
                    best_count = count;
                    tie = false;
                } else if (count == best_count) {
                    tie = true;
                }
            }
            if (!tie) out.at({r, c}) = best_label;
        }
    }
    return out;
}

struct TimestampZones {
    MixtureModel model;
    LabelGrid raw;
    LabelGrid smoothed;
};

/// Clusters first-alarm times with a one-dimensional mixture and smooths the
/// labels over the farm grid. Labels are renumbered so that group 0 holds the
/// earliest component mean.
inline TimestampZones cluster_timestamps(const Grid<double>& times, DpgmmOptions opt) {
    std::vector<TurbineId> ids;
    std::vector<double> values;
    for (int r = 1; r <= times.rows(); ++r)
        for (int c = 1; c <= times.columns(); ++c)
            if (const auto& t = times.at({r, c})) {
                ids.push_back({r, c});
                values.push_back(*t);
            }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = values[i];

    TimestampZones out;
    out.model = fit_dpgmm(x, opt);
    const auto assignment = assign(out.model, x);

    std::vector<int> order(out.model.components.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return out.model.components[static_cast<std::size_t>(a)].mean(0) <
               out.model.components[static_cast<std::size_t>(b)].mean(0);
    });
    std::vector<int> rank(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

    out.raw = LabelGrid(times.rows(), times.columns());
    for (std::size_t i = 0; i < ids.size(); ++i) out.raw.at(ids[i]) = rank[static_cast<std::size_t>(assignment.labels[i])];
    out.smoothed = smooth_labels(out.raw);
    return out;
}

}  // namespace windfleet
