#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracalc/frac_order.hpp"
#include "fracalc/frac_ops.hpp"
#include "fracalc/grid.hpp"

namespace fracalc {

/// Coefficient b(t): either a grid function or the closed form c * t^(-theta),
/// with an integrability tag (L^inf, or L^q with finite q). The closed form is
/// what allows cell-exact integration of the product kernel in the singular
/// coefficient solver.
struct Coefficient {
    enum class Kind { Grid, Power };
    enum class Tag { LInf, Lq };

    Kind kind = Kind::Power;
    std::optional<GridFn> grid;
    double c = 0.0;
    double theta = 0.0;
    Tag tag = Tag::LInf;
    double q = 0.0;

    static Coefficient zero() { return constant(0.0); }
    static Coefficient constant(double value) {
        Coefficient b;
        b.kind = Kind::Power;
        b.c = value;
        b.theta = 0.0;
        b.tag = Tag::LInf;
        return b;
    }
    static Coefficient power_lq(double c, double theta, double q) {
        Coefficient b;
        b.kind = Kind::Power;
        b.c = c;
        b.theta = theta;
        b.tag = Tag::Lq;
        b.q = q;
        return b;
    }
    static Coefficient from_grid(GridFn g) {
        Coefficient b;
        b.kind = Kind::Grid;
        b.grid = std::move(g);
        b.tag = Tag::LInf;
        return b;
    }
};

/// Forcing: a regular grid function, the closed form c * t^(-gamma) with
/// 0 <= gamma < 1, or a Dirac impulse at t0 with a weight.
struct Forcing {
    enum class Kind { None, Grid, Power, Dirac };

    Kind kind = Kind::None;
    std::optional<GridFn> grid;
    double c = 0.0;
    double gamma = 0.0;
    double t0 = 0.0;
    double weight = 0.0;

    static Forcing none() { return Forcing{}; }
    static Forcing from_grid(GridFn f) {
        Forcing fo;
        fo.kind = Kind::Grid;
        fo.grid = std::move(f);
        return fo;
    }
    static Forcing power(double c, double gamma) {
        Forcing fo;
        fo.kind = Kind::Power;
        fo.c = c;
        fo.gamma = gamma;
        return fo;
    }
    static Forcing dirac(double t0, double weight) {
        Forcing fo;
        fo.kind = Kind::Dirac;
        fo.t0 = t0;
        fo.weight = weight;
        return fo;
    }
};

struct MultiTerm {
    FracOrder alpha_k;
    GridFn b_k;
};

/// One initial value problem: order alpha in (0,1), initial value a,
/// coefficient b, optional lower-order terms (alpha_k < alpha), forcing, the
/// mesh to solve on, and the L^p exponent used for residuals and diagnostics.
struct IvpProblem {
    FracOrder alpha;
    double a = 0.0;
    Coefficient b = Coefficient::zero();
    std::vector<MultiTerm> multiterm;
    Forcing forcing = Forcing::none();
    MeshPtr mesh;
    double p = 2.0;
};

struct SolveReport {
    GridFn u;                      // solution
    GridFn v;                      // u - a
    std::optional<GridFn> w;       // multiterm: w = (J^alpha)^{-1}(u-a)
    double residual = 0.0;         // discrete fixed-point residual in L^p
    int iterations = 0;            // 0 for the direct solve
    std::vector<std::string> flags;
    std::optional<double> wap_norm_value;  // singular-coefficient membership norm
    double wap_norm_exponent = 0.0;        // r = pq/(p+q) when the above is set
};

/// Raised when the Theorem-4.3 exponent conditions (q > 1/alpha,
/// p - 1 > 1/(q-1), 1 < p < infinity) fail.
class ExponentGateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Single-term problem with bounded coefficient and regular forcing:
/// direct lower-triangular solve of v = J^alpha(b v) + J^alpha(b a + f).
SolveReport solve_single(const IvpProblem& prob);

/// Multi-term problem: solves for w = (J^alpha)^{-1}(u-a) from
/// w = -sum_k b_k J^(alpha-alpha_k) w + b J^alpha w + b a + f, then u = a + J^alpha w.
SolveReport solve_multiterm(const IvpProblem& prob);

/// L^q coefficient b(t) = c t^(-theta): enforces the exponent gate, solves
/// v = J^alpha(b v) + a J^alpha b with cell-exact product-kernel integration,
/// and reports the W_(alpha,r) membership norm with r = pq/(p+q).
/// With force = true the gate is skipped and the output flagged
/// "outside proven regime".
SolveReport solve_singular_coeff(const IvpProblem& prob, bool force = false);

/// Dirac forcing: uses the representation J_alpha^* delta_t0 =
/// (t-t0)_+^(alpha-1)/Gamma(alpha) as the source, requires alpha*q > 1 with
/// q = p/(p-1).
SolveReport solve_distributional(const IvpProblem& prob);

/// Picard iteration on the same discrete fixed-point equation; verification
/// path for solve_single. Throws on non-convergence.
SolveReport solve_single_picard(const IvpProblem& prob, int max_iter = 400,
                                double tol = 1e-13);

/// Dispatch on the problem's tags (dirac -> distributional, L^q coefficient ->
/// singular, nonempty multiterm -> multiterm, else single).
SolveReport solve(const IvpProblem& prob, bool force = false);

/// Refinement-ratio membership diagnostic for v = u - a in W_(alpha, r):
/// re-solves on `levels` successive refinements and ratio-tests
/// ||(J^alpha)^{-1} v||_(L^r). Grid data is resampled onto the refinements.
MembershipReport solve_membership(const IvpProblem& prob, double r,
                                  int levels = 3, bool force = false);

/// Resamples a grid function onto another mesh over the same horizon
/// (linear interpolation for NodeLinear, containing-cell lookup for
/// CellConstant).
GridFn resample(const GridFn& v, const MeshPtr& target);

IvpProblem ivp_problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IvpProblem& prob);
nlohmann::json report_to_json(const SolveReport& report, const IvpProblem& prob);

} // namespace fracalc
