#include "fracalc/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fracalc/spaces.hpp"
#include "fracalc/special.hpp"

namespace fracalc {

namespace {

constexpr double kDiagTol = 1e-14;

std::vector<double> coefficient_node_values(const Coefficient& b, const MeshPtr& mesh) {
    const std::size_t n = mesh->cells();
    std::vector<double> vals(n + 1);
    if (b.kind == Coefficient::Kind::Grid) {
        GridFn g = *b.grid;
        if (!(g.mesh() == *mesh)) {
            g = resample(g, mesh);
        }
        return g.values();
    }
    if (b.theta != 0.0) {
        throw std::invalid_argument(
            "coefficient: pointwise values need theta == 0 (bounded closed form)");
    }
    std::fill(vals.begin(), vals.end(), b.c);
    return vals;
}

void require_bounded(const Coefficient& b, const char* who) {
    if (b.tag != Coefficient::Tag::LInf) {
        throw std::invalid_argument(std::string(who) + ": coefficient must carry the L^inf tag");
    }
    if (b.kind == Coefficient::Kind::Power && b.theta != 0.0) {
        throw std::invalid_argument(std::string(who) + ": power coefficient with theta != 0 is unbounded");
    }
}

bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// J^alpha applied to the node-linear reconstruction of `vals`.
std::vector<double> apply_linear(const ConvolutionWeights& w,
                                 const std::vector<double>& vals) {
    return w.apply(vals);
}

// Cell averages of c * t^(-gamma), stored in the cell-constant layout.
std::vector<double> power_cell_averages(double c, double gamma, const Mesh& mesh) {
    if (!(gamma < 1.0)) {
        throw std::invalid_argument("forcing: power singularity must have gamma < 1");
    }
    const std::size_t n = mesh.cells();
    std::vector<double> avg(n + 1, 0.0);
    const double e = 1.0 - gamma;
    for (std::size_t j = 1; j <= n; ++j) {
        const double lo = mesh.node(j - 1);
        const double hi = mesh.node(j);
        avg[j] = c * (std::pow(hi, e) - std::pow(lo, e)) / (e * (hi - lo));
    }
    avg[0] = avg[1];
    return avg;
}

// Right-hand side g = J^alpha(b a + f) of the single-term fixed point (v = Kv + g).
std::vector<double> assemble_single_rhs(const IvpProblem& prob,
                                        const ConvolutionWeights& wl,
                                        const std::vector<double>& bvals) {
    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();

    std::vector<double> regular(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) regular[j] = bvals[j] * prob.a;
    if (prob.forcing.kind == Forcing::Kind::Grid) {
        GridFn f = *prob.forcing.grid;
        if (!(f.mesh() == *mesh)) f = resample(f, mesh);
        for (std::size_t j = 0; j <= n; ++j) regular[j] += f[j];
    }

    std::vector<double> g(n + 1, 0.0);
    if (!all_zero(regular)) {
        g = apply_linear(wl, regular);
    }
    if (prob.forcing.kind == Forcing::Kind::Power) {
        ConvolutionWeights wc(mesh, prob.alpha, Convention::CellConstant, Side::Left);
        const auto favg = power_cell_averages(prob.forcing.c, prob.forcing.gamma, *mesh);
        const auto jf = wc.apply(favg);
        for (std::size_t j = 0; j <= n; ++j) g[j] += jf[j];
    }
    return g;
}

void validate_alpha_range(const IvpProblem& prob, const char* who) {
    if (!(prob.alpha.value() < 1.0)) {
        throw std::domain_error(std::string(who) + ": requires 0 < alpha < 1");
    }
    if (!prob.mesh) {
        throw std::invalid_argument(std::string(who) + ": problem carries no mesh");
    }
}

SolveReport finish_single(const IvpProblem& prob, const ConvolutionWeights& wl,
                          const std::vector<double>& bvals,
                          const std::vector<double>& g, std::vector<double> v,
                          int iterations) {
    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();

    // Residual of v = J^alpha(b v) + g in L^p.
    std::vector<double> bv(n + 1);
    for (std::size_t j = 0; j <= n; ++j) bv[j] = bvals[j] * v[j];
    std::vector<double> kv = all_zero(bv) ? std::vector<double>(n + 1, 0.0)
                                          : apply_linear(wl, bv);
    std::vector<double> res(n + 1);
    for (std::size_t j = 0; j <= n; ++j) res[j] = v[j] - kv[j] - g[j];

    GridFn vfn(mesh, std::move(v), Convention::NodeLinear);
    std::vector<double> uvals(vfn.values());
    for (auto& x : uvals) x += prob.a;

    SolveReport report{
        GridFn(mesh, std::move(uvals), Convention::NodeLinear),
        vfn,
        std::nullopt,
        lp_norm(GridFn(mesh, std::move(res), Convention::NodeLinear), prob.p),
        iterations,
        {},
        std::nullopt,
        0.0,
    };
    return report;
}

} // namespace

GridFn resample(const GridFn& v, const MeshPtr& target) {
    const Mesh& src = v.mesh();
    if (std::abs(src.horizon() - target->horizon()) > 1e-12 * src.horizon()) {
        throw std::invalid_argument("resample: meshes cover different horizons");
    }
    const std::size_t n = target->cells();
    std::vector<double> out(n + 1);
    const auto& tn = src.nodes();
    if (v.convention() == Convention::NodeLinear) {
        for (std::size_t j = 0; j <= n; ++j) {
            const double x = std::min(target->node(j), src.horizon());
            auto it = std::upper_bound(tn.begin(), tn.end(), x);
            std::size_t hi = std::min<std::size_t>(tn.size() - 1,
                                                   static_cast<std::size_t>(it - tn.begin()));
            if (hi == 0) hi = 1;
            const std::size_t lo = hi - 1;
            const double lam = (x - tn[lo]) / (tn[hi] - tn[lo]);
            out[j] = (1.0 - lam) * v[lo] + lam * v[hi];
        }
        return GridFn(target, std::move(out), Convention::NodeLinear);
    }
    // Step lookup: value on the source cell containing the target node.
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = std::min(target->node(j), src.horizon());
        auto it = std::lower_bound(tn.begin(), tn.end(), x);
        std::size_t k = static_cast<std::size_t>(it - tn.begin());
        if (k == 0) k = 1;
        out[j] = v[k];
    }
    out[0] = out[1];
    return GridFn(target, std::move(out), Convention::CellConstant);
}

SolveReport solve_single(const IvpProblem& prob) {
    validate_alpha_range(prob, "solve_single");
    if (!prob.multiterm.empty()) {
        throw std::invalid_argument("solve_single: multiterm entries present; use solve_multiterm");
    }
    require_bounded(prob.b, "solve_single");
    if (prob.forcing.kind == Forcing::Kind::Dirac) {
        throw std::invalid_argument("solve_single: dirac forcing needs solve_distributional");
    }

    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();
    ConvolutionWeights wl(mesh, prob.alpha, Convention::NodeLinear, Side::Left);
    const auto bvals = coefficient_node_values(prob.b, mesh);
    const auto g = assemble_single_rhs(prob, wl, bvals);

    std::vector<double> v(n + 1, 0.0);
    if (all_zero(bvals)) {
        v = g;
    } else {
        std::vector<double> row(n + 1);
        v[0] = g[0];
        for (std::size_t i = 1; i <= n; ++i) {
            std::fill(row.begin(), row.begin() + i + 1, 0.0);
            wl.accumulate_row(i, row);
            double acc = g[i];
            for (std::size_t k = 0; k < i; ++k) acc += row[k] * bvals[k] * v[k];
            const double diag = 1.0 - row[i] * bvals[i];
            if (std::abs(diag) < kDiagTol) {
                throw std::runtime_error("solve_single: singular diagonal");
            }
            v[i] = acc / diag;
        }
    }
    return finish_single(prob, wl, bvals, g, std::move(v), 0);
}

SolveReport solve_single_picard(const IvpProblem& prob, int max_iter, double tol) {
    validate_alpha_range(prob, "solve_single_picard");
    require_bounded(prob.b, "solve_single_picard");
    if (prob.forcing.kind == Forcing::Kind::Dirac) {
        throw std::invalid_argument("solve_single_picard: dirac forcing not supported");
    }

    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();
    ConvolutionWeights wl(mesh, prob.alpha, Convention::NodeLinear, Side::Left);
    const auto bvals = coefficient_node_values(prob.b, mesh);
    const auto g = assemble_single_rhs(prob, wl, bvals);

    std::vector<double> v = g;
    std::vector<double> bv(n + 1);
    int iterations = 0;
    for (; iterations < max_iter; ++iterations) {
        for (std::size_t j = 0; j <= n; ++j) bv[j] = bvals[j] * v[j];
        auto next = apply_linear(wl, bv);
        double diff = 0.0, scale = 1.0;
        for (std::size_t j = 0; j <= n; ++j) {
            next[j] += g[j];
            diff = std::max(diff, std::abs(next[j] - v[j]));
            scale = std::max(scale, std::abs(next[j]));
        }
        v = std::move(next);
        if (diff <= tol * scale) {
            return finish_single(prob, wl, bvals, g, std::move(v), iterations + 1);
        }
    }
    throw std::runtime_error("solve_single_picard: fixed-point iteration did not converge");
}

SolveReport solve_multiterm(const IvpProblem& prob) {
    validate_alpha_range(prob, "solve_multiterm");
    require_bounded(prob.b, "solve_multiterm");
    if (prob.forcing.kind == Forcing::Kind::Power ||
        prob.forcing.kind == Forcing::Kind::Dirac) {
        throw std::invalid_argument("solve_multiterm: forcing must be a regular grid function");
    }
    double prev = 0.0;
    for (const auto& term : prob.multiterm) {
        const double ak = term.alpha_k.value();
        if (!(ak > prev) || !(ak < prob.alpha.value())) {
            throw std::invalid_argument(
                "solve_multiterm: orders must satisfy 0 < alpha_1 < ... < alpha_K < alpha");
        }
        prev = ak;
    }

    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();
    const auto bvals = coefficient_node_values(prob.b, mesh);

    std::vector<std::vector<double>> bk_vals;
    std::vector<ConvolutionWeights> wk;
    wk.reserve(prob.multiterm.size());
    for (const auto& term : prob.multiterm) {
        bk_vals.push_back(coefficient_node_values(Coefficient::from_grid(term.b_k), mesh));
        wk.emplace_back(mesh, FracOrder(prob.alpha.value() - term.alpha_k.value()),
                        Convention::NodeLinear, Side::Left);
    }
    ConvolutionWeights wa(mesh, prob.alpha, Convention::NodeLinear, Side::Left);

    std::vector<double> rhs(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) rhs[j] = bvals[j] * prob.a;
    if (prob.forcing.kind == Forcing::Kind::Grid) {
        GridFn f = *prob.forcing.grid;
        if (!(f.mesh() == *mesh)) f = resample(f, mesh);
        for (std::size_t j = 0; j <= n; ++j) rhs[j] += f[j];
    }

    // Combined kernel row: M[i][.] = b(t_i) A_alpha[i][.] - sum_k b_k(t_i) A_k[i][.]
    std::vector<double> w(n + 1, 0.0);
    std::vector<double> row(n + 1), part(n + 1);
    auto build_row = [&](std::size_t i) {
        std::fill(row.begin(), row.begin() + i + 1, 0.0);
        std::fill(part.begin(), part.begin() + i + 1, 0.0);
        wa.accumulate_row(i, part);
        for (std::size_t j = 0; j <= i; ++j) row[j] += bvals[i] * part[j];
        for (std::size_t k = 0; k < wk.size(); ++k) {
            std::fill(part.begin(), part.begin() + i + 1, 0.0);
            wk[k].accumulate_row(i, part);
            for (std::size_t j = 0; j <= i; ++j) row[j] -= bk_vals[k][i] * part[j];
        }
    };

    w[0] = rhs[0];
    for (std::size_t i = 1; i <= n; ++i) {
        build_row(i);
        double acc = rhs[i];
        for (std::size_t j = 0; j < i; ++j) acc += row[j] * w[j];
        const double diag = 1.0 - row[i];
        if (std::abs(diag) < kDiagTol) {
            throw std::runtime_error("solve_multiterm: singular diagonal");
        }
        w[i] = acc / diag;
    }

    // Residual of w = Mw + rhs in L^p.
    std::vector<double> res(n + 1, 0.0);
    res[0] = w[0] - rhs[0];
    for (std::size_t i = 1; i <= n; ++i) {
        build_row(i);
        double acc = rhs[i];
        for (std::size_t j = 0; j <= i; ++j) acc += row[j] * w[j];
        res[i] = w[i] - acc;
    }

    auto vvals = wa.apply(w);
    std::vector<double> uvals(vvals);
    for (auto& x : uvals) x += prob.a;

    SolveReport report{
        GridFn(mesh, std::move(uvals), Convention::NodeLinear),
        GridFn(mesh, std::move(vvals), Convention::NodeLinear),
        GridFn(mesh, std::move(w), Convention::NodeLinear),
        lp_norm(GridFn(mesh, std::move(res), Convention::NodeLinear), prob.p),
        0,
        {},
        std::nullopt,
        0.0,
    };
    return report;
}

namespace {

// Rows of v -> J^alpha(c t^(-theta) v) for node-linear v: the double-power
// kernel (t_i - s)^(alpha-1) s^(-theta) is integrated exactly against the hat
// functions via incomplete beta differences.
class SingularKernelRows {
public:
    SingularKernelRows(const MeshPtr& mesh, double alpha, double c, double theta)
        : mesh_(mesh), alpha_(alpha), c_(c), theta_(theta) {
        b1_ = std::exp(log_gamma(1.0 - theta) + log_gamma(alpha)
                       - log_gamma(1.0 - theta + alpha));
        b2_ = std::exp(log_gamma(2.0 - theta) + log_gamma(alpha)
                       - log_gamma(2.0 - theta + alpha));
        inv_gamma_a_ = 1.0 / gamma_fn(alpha);
    }

    // Fills row i (adds contributions to out[0..i]).
    void accumulate_row(std::size_t i, std::vector<double>& out) const {
        if (i == 0) return;
        const auto& t = mesh_->nodes();
        const double ti = t[i];
        const double mu1 = 1.0 - theta_;
        const double mu2 = 2.0 - theta_;
        const double s1 = std::pow(ti, alpha_ - theta_) * b1_;
        const double s2 = std::pow(ti, alpha_ + 1.0 - theta_) * b2_;
        double prev1 = 0.0, prev2 = 0.0;
        for (std::size_t cidx = 0; cidx < i; ++cidx) {
            const double x = t[cidx + 1] / ti;
            const double cur1 = (cidx + 1 == i) ? 1.0 : incomplete_beta(mu1, alpha_, x);
            const double cur2 = (cidx + 1 == i) ? 1.0 : incomplete_beta(mu2, alpha_, x);
            const double p0 = s1 * (cur1 - prev1);
            const double q1 = s2 * (cur2 - prev2);
            prev1 = cur1;
            prev2 = cur2;
            const double h = t[cidx + 1] - t[cidx];
            const double p1 = q1 - t[cidx] * p0;
            out[cidx] += c_ * (p0 - p1 / h) * inv_gamma_a_;
            out[cidx + 1] += c_ * (p1 / h) * inv_gamma_a_;
        }
    }

private:
    MeshPtr mesh_;
    double alpha_, c_, theta_;
    double b1_, b2_;       // complete beta values B(1-theta, alpha), B(2-theta, alpha)
    double inv_gamma_a_;
};

} // namespace

SolveReport solve_singular_coeff(const IvpProblem& prob, bool force) {
    validate_alpha_range(prob, "solve_singular_coeff");
    if (prob.b.kind != Coefficient::Kind::Power || prob.b.tag != Coefficient::Tag::Lq) {
        throw std::invalid_argument(
            "solve_singular_coeff: coefficient must be the closed form c t^(-theta) with an L^q tag");
    }
    if (prob.forcing.kind != Forcing::Kind::None) {
        throw std::invalid_argument("solve_singular_coeff: forcing term not admitted");
    }
    const double alpha = prob.alpha.value();
    const double p = prob.p;
    const double q = prob.b.q;
    const double theta = prob.b.theta;
    if (!(theta >= 0.0) || !(theta < 1.0) || !(theta * q < 1.0)) {
        throw std::invalid_argument(
            "solve_singular_coeff: need 0 <= theta < 1 and theta*q < 1 so that b lies in L^q");
    }

    std::vector<std::string> flags;
    const bool gate_ok = (p > 1.0) && std::isfinite(p)
                         && (q > 1.0) && (q > 1.0 / alpha)
                         && (p - 1.0 > 1.0 / (q - 1.0));
    if (!gate_ok) {
        if (!force) {
            throw ExponentGateError(
                "solve_singular_coeff: exponent conditions fail "
                "(need 1 < p < inf, q > 1/alpha, p-1 > 1/(q-1))");
        }
        flags.push_back("outside proven regime");
    }

    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();
    SingularKernelRows rows(mesh, alpha, prob.b.c, theta);

    // g = a J^alpha b, exact: a c Gamma(1-theta)/Gamma(1+alpha-theta) t^(alpha-theta).
    const double coeff = prob.a * prob.b.c * power_rule(-theta, prob.alpha);
    std::vector<double> g(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        g[j] = coeff * std::pow(mesh->node(j), alpha - theta);
    }

    const bool cache_rows = n <= 2048;
    std::vector<std::vector<double>> cache;
    if (cache_rows) cache.resize(n + 1);

    std::vector<double> v(n + 1, 0.0);
    std::vector<double> row(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(row.begin(), row.begin() + i + 1, 0.0);
        rows.accumulate_row(i, row);
        if (cache_rows) cache[i].assign(row.begin(), row.begin() + i + 1);
        double acc = g[i];
        for (std::size_t j = 0; j < i; ++j) acc += row[j] * v[j];
        const double diag = 1.0 - row[i];
        if (std::abs(diag) < kDiagTol) {
            throw std::runtime_error("solve_singular_coeff: singular diagonal");
        }
        v[i] = acc / diag;
    }

    std::vector<double> res(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double* r;
        if (cache_rows) {
            r = cache[i].data();
        } else {
            std::fill(row.begin(), row.begin() + i + 1, 0.0);
            rows.accumulate_row(i, row);
            r = row.data();
        }
        double acc = g[i];
        for (std::size_t j = 0; j <= i; ++j) acc += r[j] * v[j];
        res[i] = v[i] - acc;
    }

    const double r_exp = p * q / (p + q);
    GridFn vfn(mesh, std::move(v), Convention::NodeLinear);
    const double wap_value = wap_norm(vfn, prob.alpha, LpExponent::finite(r_exp));
    std::vector<double> uvals(vfn.values());
    for (auto& x : uvals) x += prob.a;

    SolveReport report{
        GridFn(mesh, std::move(uvals), Convention::NodeLinear),
        vfn,
        std::nullopt,
        lp_norm(GridFn(mesh, std::move(res), Convention::NodeLinear), prob.p),
        0,
        std::move(flags),
        wap_value,
        r_exp,
    };
    return report;
}

SolveReport solve_distributional(const IvpProblem& prob) {
    validate_alpha_range(prob, "solve_distributional");
    require_bounded(prob.b, "solve_distributional");
    if (prob.forcing.kind != Forcing::Kind::Dirac) {
        throw std::invalid_argument("solve_distributional: forcing must be a Dirac impulse");
    }
    const double alpha = prob.alpha.value();
    const double p = prob.p;
    std::vector<std::string> flags;
    if (p > 1.0) {
        const double q = p / (p - 1.0);
        if (!(alpha * q > 1.0)) {
            throw std::domain_error(
                "solve_distributional: duality pairing undefined (requires alpha*q > 1 with q = p/(p-1))");
        }
    } else {
        // p = 1 gives q = inf, so alpha*q > 1 holds, but the uniqueness proof
        // assumed 1 < p < inf.
        flags.push_back("outside proven regime");
    }

    const MeshPtr& mesh = prob.mesh;
    const std::size_t n = mesh->cells();
    const double T = mesh->horizon();
    double t0 = prob.forcing.t0;
    if (!(t0 >= 0.0) || !(t0 <= T)) {
        throw std::invalid_argument("solve_distributional: t0 must lie in [0, T]");
    }
    // Snap to the nearest node when within rounding distance.
    for (std::size_t j = 0; j <= n; ++j) {
        if (std::abs(mesh->node(j) - t0) <= 1e-12 * T) {
            if (mesh->node(j) != t0) flags.push_back("t0 snapped to nearest node");
            t0 = mesh->node(j);
            break;
        }
    }

    const double weight = prob.forcing.weight;
    const double inv_ga = 1.0 / gamma_fn(alpha);

    // Source: J_alpha^* delta_t0 = (t - t0)_+^(alpha-1)/Gamma(alpha), sampled
    // pointwise at nodes ( zero at and before t0 ).
    std::vector<double> gsing(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        const double d = mesh->node(j) - t0;
        if (d > 0.0) gsing[j] = weight * std::pow(d, alpha - 1.0) * inv_ga;
    }

    const auto bvals = coefficient_node_values(prob.b, mesh);
    ConvolutionWeights wl(mesh, prob.alpha, Convention::NodeLinear, Side::Left);

    // g = J^alpha(b a) + J^alpha(b gsing); the singular product is integrated
    // cell-exactly via the double-power kernel (incomplete beta differences),
    // with b taken cell-constant.
    std::vector<double> g(n + 1, 0.0);
    {
        std::vector<double> ba(n + 1);
        for (std::size_t j = 0; j <= n; ++j) ba[j] = bvals[j] * prob.a;
        if (!all_zero(ba)) g = apply_linear(wl, ba);
    }
    if (weight != 0.0 && !all_zero(bvals)) {
        const double inv_ga2 = inv_ga * inv_ga;
        const double baa = std::exp(2.0 * log_gamma(alpha) - log_gamma(2.0 * alpha));
        for (std::size_t i = 1; i <= n; ++i) {
            const double ti = mesh->node(i);
            if (!(ti > t0)) continue;
            const double span = ti - t0;
            double acc = 0.0;
            double prev = 0.0;
            for (std::size_t c = 0; c < i; ++c) {
                const double hi_node = mesh->node(c + 1);
                if (!(hi_node > t0)) continue;
                const double x = std::min(1.0, (hi_node - t0) / span);
                const double cur = (c + 1 == i) ? 1.0 : incomplete_beta(alpha, alpha, x);
                acc += bvals[c + 1] * (cur - prev);
                prev = cur;
            }
            g[i] += weight * std::pow(span, 2.0 * alpha - 1.0) * baa * acc * inv_ga2;
        }
    }

    // Regular part: wreg = J^alpha(b wreg) + g.
    std::vector<double> wreg(n + 1, 0.0);
    if (!all_zero(bvals)) {
        std::vector<double> row(n + 1);
        wreg[0] = g[0];
        for (std::size_t i = 1; i <= n; ++i) {
            std::fill(row.begin(), row.begin() + i + 1, 0.0);
            wl.accumulate_row(i, row);
            double acc = g[i];
            for (std::size_t k = 0; k < i; ++k) acc += row[k] * bvals[k] * wreg[k];
            const double diag = 1.0 - row[i] * bvals[i];
            if (std::abs(diag) < kDiagTol) {
                throw std::runtime_error("solve_distributional: singular diagonal");
            }
            wreg[i] = acc / diag;
        }
    } else {
        wreg = g;
    }

    // Residual of the regular part.
    std::vector<double> bw(n + 1);
    for (std::size_t j = 0; j <= n; ++j) bw[j] = bvals[j] * wreg[j];
    const auto kw = all_zero(bw) ? std::vector<double>(n + 1, 0.0) : apply_linear(wl, bw);
    std::vector<double> res(n + 1);
    for (std::size_t j = 0; j <= n; ++j) res[j] = wreg[j] - kw[j] - g[j];

    std::vector<double> vvals(n + 1);
    for (std::size_t j = 0; j <= n; ++j) vvals[j] = wreg[j] + gsing[j];
    std::vector<double> uvals(vvals);
    for (auto& x : uvals) x += prob.a;

    SolveReport report{
        GridFn(mesh, std::move(uvals), Convention::NodeLinear),
        GridFn(mesh, std::move(vvals), Convention::NodeLinear),
        std::nullopt,
        lp_norm(GridFn(mesh, std::move(res), Convention::NodeLinear), prob.p),
        0,
        std::move(flags),
        std::nullopt,
        0.0,
    };
    return report;
}

SolveReport solve(const IvpProblem& prob, bool force) {
    if (prob.forcing.kind == Forcing::Kind::Dirac) {
        return solve_distributional(prob);
    }
    if (prob.b.tag == Coefficient::Tag::Lq) {
        return solve_singular_coeff(prob, force);
    }
    if (!prob.multiterm.empty()) {
        return solve_multiterm(prob);
    }
    return solve_single(prob);
}

MembershipReport solve_membership(const IvpProblem& prob, double r, int levels,
                                  bool force) {
    if (levels < 3) {
        throw std::invalid_argument("solve_membership: need at least three levels");
    }
    MembershipReport report;
    report.threshold = kMembershipRatioThreshold;
    MeshPtr mesh = prob.mesh;
    for (int k = 0; k < levels; ++k) {
        IvpProblem scaled = prob;
        scaled.mesh = mesh;
        if (scaled.b.kind == Coefficient::Kind::Grid) {
            scaled.b.grid = resample(*scaled.b.grid, mesh);
        }
        if (scaled.forcing.kind == Forcing::Kind::Grid) {
            scaled.forcing.grid = resample(*scaled.forcing.grid, mesh);
        }
        for (auto& term : scaled.multiterm) {
            term.b_k = resample(term.b_k, mesh);
        }
        SolveReport sr = solve(scaled, force);
        report.mesh_cells.push_back(mesh->cells());
        report.norms.push_back(
            lp_norm(invert_frac_integral(sr.v, prob.alpha), LpExponent::finite(r)));
        if (k + 1 < levels) mesh = refine(mesh, 2);
    }
    for (std::size_t k = 1; k < report.norms.size(); ++k) {
        report.ratios.push_back(report.norms[k] / report.norms[k - 1]);
    }
    const std::size_t nr = report.ratios.size();
    report.divergent = nr >= 2 && report.ratios[nr - 1] > report.threshold
                       && report.ratios[nr - 2] > report.threshold;
    return report;
}

namespace {

GridFn grid_values_from_json(const nlohmann::json& j, const MeshPtr& mesh,
                             Convention conv) {
    if (j.is_number()) {
        return GridFn::constant(mesh, j.get<double>(), conv);
    }
    if (j.is_array()) {
        auto values = j.get<std::vector<double>>();
        if (values.size() != mesh->node_count()) {
            throw std::invalid_argument("problem JSON: grid values do not match the mesh");
        }
        if (conv == Convention::CellConstant && values.size() > 1) values[0] = values[1];
        return GridFn(mesh, std::move(values), conv);
    }
    throw std::invalid_argument("problem JSON: expected a number or an array of node values");
}

Coefficient coefficient_from_json(const nlohmann::json& j, const MeshPtr& mesh) {
    if (j.is_null()) return Coefficient::zero();
    if (j.is_number()) return Coefficient::constant(j.get<double>());

    const std::string kind = j.value("kind", std::string("power"));
    Coefficient b;
    if (kind == "grid") {
        b = Coefficient::from_grid(
            grid_values_from_json(j.at("values"), mesh, Convention::NodeLinear));
    } else if (kind == "power") {
        b.kind = Coefficient::Kind::Power;
        b.c = j.value("c", 0.0);
        b.theta = j.value("theta", 0.0);
    } else {
        throw std::invalid_argument("problem JSON: unknown coefficient kind '" + kind + "'");
    }
    if (j.contains("tag")) {
        const auto& tag = j.at("tag");
        if (tag.is_string() && tag.get<std::string>() == "Linf") {
            b.tag = Coefficient::Tag::LInf;
        } else if (tag.is_object() && tag.contains("Lq")) {
            b.tag = Coefficient::Tag::Lq;
            b.q = tag.at("Lq").get<double>();
        } else {
            throw std::invalid_argument("problem JSON: coefficient tag must be \"Linf\" or {\"Lq\": q}");
        }
    }
    return b;
}

Forcing forcing_from_json(const nlohmann::json& j, const MeshPtr& mesh) {
    if (j.is_null()) return Forcing::none();
    const std::string kind = j.value("kind", std::string(""));
    if (kind == "grid") {
        return Forcing::from_grid(
            grid_values_from_json(j.at("values"), mesh, Convention::NodeLinear));
    }
    if (kind == "power") {
        return Forcing::power(j.value("c", 1.0), j.at("gamma").get<double>());
    }
    if (kind == "dirac") {
        return Forcing::dirac(j.at("t0").get<double>(), j.value("weight", 1.0));
    }
    throw std::invalid_argument("problem JSON: forcing kind must be grid, power or dirac");
}

} // namespace

IvpProblem ivp_problem_from_json(const nlohmann::json& j) {
    if (!j.contains("alpha") || !j.contains("mesh")) {
        throw std::invalid_argument("problem JSON: requires fields alpha and mesh");
    }
    MeshPtr mesh = mesh_from_json(j.at("mesh"));
    IvpProblem prob{FracOrder(j.at("alpha").get<double>()),
                    j.value("a", 0.0),
                    Coefficient::zero(),
                    {},
                    Forcing::none(),
                    mesh,
                    j.value("p", 2.0)};
    if (j.contains("b")) prob.b = coefficient_from_json(j.at("b"), mesh);
    if (j.contains("forcing")) prob.forcing = forcing_from_json(j.at("forcing"), mesh);
    if (j.contains("multiterm")) {
        for (const auto& term : j.at("multiterm")) {
            prob.multiterm.push_back(MultiTerm{
                FracOrder(term.at("alpha_k").get<double>()),
                grid_values_from_json(term.at("b_k"), mesh, Convention::NodeLinear)});
        }
    }
    return prob;
}

nlohmann::json to_json(const IvpProblem& prob) {
    nlohmann::json j;
    j["alpha"] = prob.alpha.value();
    j["a"] = prob.a;
    j["p"] = prob.p;
    j["mesh"] = to_json(*prob.mesh);

    nlohmann::json b;
    if (prob.b.kind == Coefficient::Kind::Grid) {
        b["kind"] = "grid";
        b["values"] = prob.b.grid->values();
    } else {
        b["kind"] = "power";
        b["c"] = prob.b.c;
        b["theta"] = prob.b.theta;
    }
    if (prob.b.tag == Coefficient::Tag::LInf) {
        b["tag"] = "Linf";
    } else {
        b["tag"] = nlohmann::json{{"Lq", prob.b.q}};
    }
    j["b"] = b;

    switch (prob.forcing.kind) {
        case Forcing::Kind::None:
            break;
        case Forcing::Kind::Grid:
            j["forcing"] = {{"kind", "grid"}, {"values", prob.forcing.grid->values()}};
            break;
        case Forcing::Kind::Power:
            j["forcing"] = {{"kind", "power"}, {"c", prob.forcing.c}, {"gamma", prob.forcing.gamma}};
            break;
        case Forcing::Kind::Dirac:
            j["forcing"] = {{"kind", "dirac"}, {"t0", prob.forcing.t0}, {"weight", prob.forcing.weight}};
            break;
    }

    if (!prob.multiterm.empty()) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& term : prob.multiterm) {
            terms.push_back({{"alpha_k", term.alpha_k.value()},
                             {"b_k", term.b_k.values()}});
        }
        j["multiterm"] = terms;
    }
    return j;
}

nlohmann::json report_to_json(const SolveReport& report, const IvpProblem& prob) {
    nlohmann::json j;
    j["residual"] = report.residual;
    j["iterations"] = report.iterations;
    j["flags"] = report.flags;
    if (report.wap_norm_value) {
        j["wap_norm"] = {{"r", report.wap_norm_exponent}, {"value", *report.wap_norm_value}};
    }
    j["config"] = to_json(prob);
    return j;
}

} // namespace fracalc
