#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "fracalc/frac_order.hpp"
#include "fracalc/frac_ops.hpp"
#include "fracalc/grid.hpp"

namespace fracalc {

struct SlobodeckiParams {
    FracOrder order;   // alpha = (m-1) + sigma, sigma in (0,1)
    double p;          // finite exponent >= 1

    SlobodeckiParams(FracOrder order_, double p_) : order(order_), p(p_) {
        if (order.is_integer()) {
            throw std::domain_error("SlobodeckiParams: sigma must lie in (0,1)");
        }
        if (!(p >= 1.0)) {
            throw std::domain_error("SlobodeckiParams: requires p >= 1");
        }
    }
};

/// Double-integral Slobodecki seminorm of order sigma of g = d^(m-1)u/dt^(m-1):
///   ( iint |g(t)-g(s)|^p / |t-s|^(1+sigma p) dt ds )^(1/p),
/// computed as twice the s < t triangle. Cell pairs touching the diagonal use
/// the reconstruction's exact local integral for node-linear data; for
/// cell-constant data the diagonal band is excluded (a lower bound).
double slobodecki_seminorm(const GridFn& u, const SlobodeckiParams& params);

/// Full W^(alpha,p) norm: (||u||^p_(W^(m-1,p)) + seminorm^p)^(1/p) with the
/// same discrete derivative convention as the operator module.
double slobodecki_norm(const GridFn& u, const SlobodeckiParams& params);

/// Operator norm of W_(alpha,p): ||(J^alpha)^(-1) u||_(L^p).
double wap_norm(const GridFn& u, const FracOrder& alpha, const LpExponent& p);

struct EmbeddingScanReport {
    double alpha = 0;
    double epsilon = 0;
    double p = 0;
    std::uint64_t seed = 0;
    std::size_t sample_count = 0;
    std::vector<double> ratios;
    double max_ratio = 0;
};

/// Draws sample_count random grid functions (i.i.d. uniform node values in
/// [-1,1], cell-constant) and reports the ratios
///   ||J^alpha v||_(W^(alpha-eps,p)) / ||v||_(L^p).
/// Deterministic for a fixed seed; samples evaluate in parallel.
EmbeddingScanReport embedding_scan(const FracOrder& alpha, double epsilon,
                                   double p, std::size_t sample_count,
                                   const MeshPtr& mesh, std::uint64_t seed);

nlohmann::json to_json(const EmbeddingScanReport& report);

} // namespace fracalc
