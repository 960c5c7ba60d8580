#pragma once

#include <cmath>
#include <functional>

#include "neuroplan/cae.hpp"
#include "neuroplan/nn.hpp"

// Central-difference gradient oracle. The loss closure must be a
// deterministic function of the model (dropout masks pinned by the caller).
namespace neuroplan::test {

struct FdReport {
    double max_rel_err = 0.0;
    int params = 0;
};

inline FdReport fd_compare(MlpModel model, const Gradients& analytic,
                           const std::function<double(const MlpModel&)>& loss,
                           double h = 1e-5) {
    // collect |analytic|, |fd| and the worst deviation, normalized by the
    // gradient's own scale
    double scale = 0.0;
    double worst_abs = 0.0;
    int params = 0;

    auto probe = [&](double& param, double grad) {
        const double keep = param;
        param = keep + h;
        const double up = loss(model);
        param = keep - h;
        const double down = loss(model);
        param = keep;
        const double fd = (up - down) / (2.0 * h);
        scale = std::max({scale, std::abs(fd), std::abs(grad)});
        worst_abs = std::max(worst_abs, std::abs(fd - grad));
        ++params;
    };

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        auto& l = model.layers[li];
        for (Eigen::Index r = 0; r < l.W.rows(); ++r)
            for (Eigen::Index c = 0; c < l.W.cols(); ++c)
                probe(l.W(r, c), analytic.dW[li](r, c));
        for (Eigen::Index r = 0; r < l.b.size(); ++r) probe(l.b(r), analytic.db[li](r));
        if (l.has_prelu) probe(l.prelu_slope, analytic.dslope[li]);
    }

    FdReport rep;
    rep.params = params;
    rep.max_rel_err = worst_abs / std::max(scale, 1e-12);
    return rep;
}

// Smallest |pre-activation| across a cached forward; gradient checks stay
// away from the PReLU kink by requiring a margin well above the step h.
inline double min_preact_margin(const ForwardCache& cache) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& z : cache.pre)
        for (Eigen::Index r = 0; r < z.rows(); ++r)
            for (Eigen::Index c = 0; c < z.cols(); ++c)
                margin = std::min(margin, std::abs(z(r, c)));
    return margin;
}

} // namespace neuroplan::test
