#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fracalc/frac_order.hpp"
#include "fracalc/grid.hpp"

namespace fracalc {

enum class Side { Left, Right };

/// Product-integration weights for the fractional integral of order alpha on
/// a mesh: the kernel (t-s)^(alpha-1)/Gamma(alpha) is integrated exactly
/// against the reconstruction named by `basis`.
///
/// Coefficients are indexed by node. For the CellConstant basis the
/// coefficient at node j is the value on the cell left of node j (right of
/// node j for Side::Right); node 0 (node N) never contributes. For the
/// NodeLinear basis every node carries a hat-function coefficient.
///
/// Left-sided weights are causal: weight(i, j) == 0 for j > i, and on a
/// uniform mesh with the CellConstant basis weight(i, j) depends on i - j
/// only, which is exploited for O(N) weight storage.
class ConvolutionWeights {
public:
    ConvolutionWeights(MeshPtr mesh, FracOrder order,
                       Convention basis, Side side = Side::Left);

    const Mesh& mesh() const { return *mesh_; }
    const FracOrder& order() const { return order_; }
    Convention basis() const { return basis_; }
    Side side() const { return side_; }

    /// Adds the contributions of every coefficient to output node i.
    /// `out` must have node_count entries; untouched entries are not zeroed.
    void accumulate_row(std::size_t i, std::span<double> out) const;

    /// Single entry W[i][j] (coefficient j's weight at output node i).
    double weight(std::size_t i, std::size_t j) const;

    /// (J^alpha v)(t_i) at every node for the given coefficient vector.
    std::vector<double> apply(std::span<const double> coeffs) const;

private:
    MeshPtr mesh_;
    FracOrder order_;
    Convention basis_;
    Side side_;
    double inv_gamma_a1_;      // 1/Gamma(alpha+1)
    double inv_gamma_a_;       // 1/Gamma(alpha)
    bool uniform_;
    double h_;                 // cell width on uniform meshes
    std::vector<double> pow_a_;   // n^alpha,   uniform fast path
    std::vector<double> pow_a1_;  // n^(alpha+1), uniform fast path (NodeLinear)

    void fill_pow(std::size_t i, std::span<double> d, double exponent,
                  const std::vector<double>& table) const;
};

/// Left-sided fractional integral J^alpha (product integration of v's
/// reconstruction). Output carries node samples of the continuous image
/// (NodeLinear convention).
GridFn frac_integral_left(const GridFn& v, const FracOrder& alpha);

/// Right-sided fractional integral over (t, T), mirrored scheme.
GridFn frac_integral_right(const GridFn& v, const FracOrder& alpha);

/// Time reflection t -> T - t. Requires a symmetric (uniform) mesh.
/// NodeLinear functions reverse their node values; CellConstant functions
/// reverse their cell payloads (node 0 keeps the duplicate-first-cell rule).
GridFn reflect(const GridFn& v);

/// Backward differences divided by cell widths; value at node j is the
/// derivative on the cell left of node j (CellConstant output).
GridFn discrete_derivative(const GridFn& v);

/// Caputo derivative J^(1-alpha)(dv/ds) for 0 < alpha < 1 and node-linear v.
GridFn caputo(const GridFn& v, const FracOrder& alpha);

/// Riemann-Liouville derivative: m-fold discrete derivative of J^(1-sigma)v,
/// alpha = (m-1) + sigma with sigma in (0,1). Values at nodes below m repeat
/// the first defined node; meaningful from t_m on. Rejects integer alpha.
GridFn riemann_liouville(const GridFn& v, const FracOrder& alpha);

/// Discrete inverse of J^alpha: solves the lower-triangular system
/// (discrete J^alpha in the CellConstant basis) w = u by forward
/// substitution. Exact inverse of frac_integral_left on CellConstant inputs.
GridFn invert_frac_integral(const GridFn& u, const FracOrder& alpha);

/// Default threshold for the three-level refinement ratio test: two
/// consecutive ratios ||w_{2N}||/||w_N|| above it flag divergence. Chosen to
/// separate t^(-alpha) data with alpha*p >= 1 (doubling ratio
/// 2^((alpha*p-1)/p), e.g. ~1.12 for alpha=0.5, p=3) from convergent cases,
/// whose measured ratios stay below ~1.03 on the calibration grids.
inline constexpr double kMembershipRatioThreshold = 1.07;

/// Refinement-ratio diagnostic for membership of u in W_{alpha,p}: computes
/// ||(J^alpha)^{-1} u||_{L^p} on `levels` successive refinements of `base`
/// and flags divergence when the last two ratios exceed the threshold.
struct MembershipReport {
    std::vector<std::size_t> mesh_cells;
    std::vector<double> norms;
    std::vector<double> ratios;
    bool divergent = false;
    double threshold = kMembershipRatioThreshold;
};

MembershipReport membership_test(
    const std::function<GridFn(const MeshPtr&)>& u_on,
    const MeshPtr& base, int levels, const FracOrder& alpha,
    const LpExponent& p, double threshold = kMembershipRatioThreshold);

} // namespace fracalc
