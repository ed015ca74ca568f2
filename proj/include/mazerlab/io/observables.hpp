// observables.hpp - atomic observables aggregated over photon sectors.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mazerlab/errors.hpp"
#include "mazerlab/propagator.hpp"

namespace mazerlab::io {

// Sector-weighted time series. P_e + P_g equals the norm at every stamp.
struct ObservableSeries {
    std::vector<double> t;
    std::vector<double> p_e;
    std::vector<double> p_g;
    std::vector<double> inversion;
    std::vector<double> norm;

    std::size_t size() const noexcept { return t.size(); }
};

// W(t) = sum_n w_n W_n(t) and likewise for P_e, P_g and the norm. All
// trajectories must share the same time stamps.
inline ObservableSeries aggregate_inversion(const std::vector<std::vector<ObservableRecord>>& trajectories,
                                            const std::vector<double>& weights) {
    if (trajectories.empty()) throw InvalidParameter("trajectories", "at least one sector trajectory required");
    if (trajectories.size() != weights.size())
        throw InvalidParameter("weights", "one weight per sector trajectory required");
    const auto& ref = trajectories.front();
    for (std::size_t s = 1; s < trajectories.size(); ++s) {
        const auto& tr = trajectories[s];
        if (tr.size() != ref.size())
            throw InvalidParameter("trajectories", "sector trajectories have different numbers of time stamps");
        for (std::size_t i = 0; i < tr.size(); ++i)
            if (std::abs(tr[i].t - ref[i].t) > 1e-12 * std::max(1.0, std::abs(ref[i].t)))
                throw InvalidParameter("trajectories", "sector trajectories do not share a time grid");
    }

    ObservableSeries out;
    out.t.reserve(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        double pe = 0, pg = 0, w = 0;
        for (std::size_t s = 0; s < trajectories.size(); ++s) {
            const auto& r = trajectories[s][i];
            pe += weights[s] * r.p_e;
            pg += weights[s] * r.p_g;
            w += weights[s] * r.inversion;
        }
        out.t.push_back(ref[i].t);
        out.p_e.push_back(pe);
        out.p_g.push_back(pg);
        out.norm.push_back(pe + pg);
        out.inversion.push_back(w);
    }
    return out;
}

}  // namespace mazerlab::io
