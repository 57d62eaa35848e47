#include "fracalc/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fracalc/frac_ops.hpp"
#include "fracalc/ivp.hpp"
#include "fracalc/special.hpp"

namespace fracalc {

GridFn random_step(const MeshPtr& mesh, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(mesh->node_count());
    for (auto& x : v) x = uni(rng);
    v[0] = v[1];
    return GridFn(mesh, std::move(v), Convention::CellConstant);
}

GridFn smoothed_random(const MeshPtr& mesh, std::uint64_t seed) {
    GridFn step = random_step(mesh, seed);
    GridFn smooth = frac_integral_left(step, FracOrder(1.0));
    const double scale = max_norm(smooth);
    if (scale > 0.0) smooth = (1.0 / scale) * smooth;
    return smooth;
}

S1S2 s1_s2_decomposition(const GridFn& u, const FracOrder& alpha) {
    if (u.convention() != Convention::NodeLinear) {
        throw std::invalid_argument("s1_s2_decomposition: requires node-linear u");
    }
    const double a = alpha.value();
    if (!(a < 1.0)) {
        throw std::domain_error("s1_s2_decomposition: requires 0 < alpha < 1");
    }
    if (std::abs(u[0]) > 1e-12 * std::max(1.0, max_norm(u))) {
        throw std::domain_error("s1_s2_decomposition: hypothesis u(0) = 0 fails");
    }

    const MeshPtr& mesh = u.mesh_ptr();
    const std::size_t n = mesh->cells();
    const auto& t = mesh->nodes();
    const double inv_g1a = 1.0 / gamma_fn(1.0 - a);

    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double ti = t[i];
        const double ui = u[i];
        s2[i] = std::pow(ti, -a) * ui * inv_g1a;

        // sum over cells [t_c, t_{c+1}] of the exact integral of
        // (t_i - s)^(-a-1) (u(s) - u(t_i)); on each cell u(s) - u(t_i) =
        // d - m*(t_i - s) with d the cell's chord extended to t_i.
        double acc = 0.0;
        for (std::size_t c = 0; c < i; ++c) {
            const double h = t[c + 1] - t[c];
            const double m = (u[c + 1] - u[c]) / h;
            const double ta = ti - t[c];
            const double tb = ti - t[c + 1];
            const double m_term = (std::pow(ta, 1.0 - a) - std::pow(tb, 1.0 - a))
                                  / (1.0 - a);
            acc -= m * m_term;
            if (c + 1 < i) {
                // Skip for the last cell: there d = 0 exactly (the chord
                // passes through u(t_i)) while tb^(-a) diverges.
                const double d = u[c] + m * ta - ui;
                acc += (d / a) * (std::pow(tb, -a) - std::pow(ta, -a));
            }
        }
        s1[i] = -a * inv_g1a * acc;
    }

    GridFn lhs = discrete_derivative(frac_integral_left(u, FracOrder(1.0 - a)))
                     .with_convention(Convention::NodeLinear);
    std::vector<double> lhs_vals = lhs.values();
    lhs_vals[0] = 0.0;

    return S1S2{GridFn(mesh, std::move(s1), Convention::NodeLinear),
                GridFn(mesh, std::move(s2), Convention::NodeLinear),
                GridFn(mesh, std::move(lhs_vals), Convention::NodeLinear)};
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b,
                    std::size_t from) {
    double m = 0.0;
    for (std::size_t j = from; j < a.size(); ++j) {
        m = std::max(m, std::abs(a[j] - b[j]));
    }
    return m;
}

std::size_t first_node_at_or_after(const Mesh& mesh, double t) {
    std::size_t j = 0;
    while (j < mesh.cells() && mesh.node(j) < t) ++j;
    return j;
}

// --- study targets ----------------------------------------------------------

double err_frac_integral_ones(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn ones = GridFn::constant(mesh, 1.0, Convention::CellConstant);
    GridFn img = frac_integral_left(ones, FracOrder(0.5));
    const double coeff = power_rule(0.0, FracOrder(0.5));
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        err = std::max(err, std::abs(img[j] - coeff * std::sqrt(mesh->node(j))));
    }
    return err;
}

double err_frac_integral_power(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn v = GridFn::sample(mesh, [](double t) { return std::sqrt(t); },
                              Convention::CellConstant);
    GridFn img = frac_integral_left(v, FracOrder(0.5));
    const double coeff = power_rule(0.5, FracOrder(0.5));
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        err = std::max(err, std::abs(img[j] - coeff * mesh->node(j)));
    }
    return err;
}

double err_section1(std::size_t n, bool graded) {
    const double alpha = 0.6, gamma = 0.3, a = 1.0;
    MeshPtr mesh = graded ? Mesh::graded(n, 1.0, 1.0 / gamma) : Mesh::uniform(n, 1.0);
    IvpProblem prob{FracOrder(alpha), a, Coefficient::zero(), {},
                    Forcing::power(1.0, gamma), mesh, 2.0};
    SolveReport rep = solve_single(prob);
    const double coeff = gamma_fn(1.0 - gamma) / gamma_fn(alpha - gamma + 1.0);
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        const double exact = coeff * std::pow(mesh->node(j), alpha - gamma) + a;
        err = std::max(err, std::abs(rep.u[j] - exact));
    }
    return err;
}

double err_inversion_roundtrip(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn w = random_step(mesh, 20240u + n);
    GridFn back = invert_frac_integral(frac_integral_left(w, FracOrder(0.5)),
                                       FracOrder(0.5));
    return max_abs_diff(w.values(), back.values(), 0);
}

double err_semigroup(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn v = smoothed_random(mesh, 42);
    GridFn lhs = frac_integral_left(frac_integral_left(v, FracOrder(0.4)),
                                    FracOrder(0.3));
    GridFn rhs = frac_integral_left(v, FracOrder(0.7));
    return max_abs_diff(lhs.values(), rhs.values(), 0) / max_norm(v);
}

double err_rl_inversion(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn v = GridFn::sample(mesh, [](double t) { return 1.0 + t - 0.5 * t * t; },
                              Convention::NodeLinear);
    GridFn rl = riemann_liouville(frac_integral_left(v, FracOrder(0.5)),
                                  FracOrder(0.5));
    const std::size_t from = first_node_at_or_after(*mesh, 0.1);
    return max_abs_diff(rl.values(), v.values(), from);
}

double err_reconstruction(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn u = GridFn::sample(mesh, [](double t) { return std::pow(t, 0.8); },
                              Convention::NodeLinear);
    GridFn inner = discrete_derivative(frac_integral_left(u, FracOrder(0.5)));
    GridFn rec = frac_integral_left(inner, FracOrder(0.5));
    const std::size_t from = first_node_at_or_after(*mesh, 0.1);
    return max_abs_diff(rec.values(), u.values(), from);
}

double err_s1s2(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    GridFn u = GridFn::sample(mesh, [](double t) { return t; }, Convention::NodeLinear);
    S1S2 dec = s1_s2_decomposition(u, FracOrder(0.5));
    double err = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        err = std::max(err, std::abs(dec.lhs[j] - dec.s1[j] - dec.s2[j]));
    }
    return err;
}

double err_ml_constant_coeff(std::size_t n) {
    auto mesh = Mesh::uniform(n, 1.0);
    IvpProblem prob{FracOrder(0.5), 1.0, Coefficient::constant(1.0), {},
                    Forcing::none(), mesh, 2.0};
    SolveReport rep = solve_single(prob);
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        const double exact = mittag_leffler(FracOrder(0.5), std::sqrt(mesh->node(j)));
        err = std::max(err, std::abs(rep.u[j] - exact));
    }
    return err;
}

using TargetFn = std::function<double(std::size_t)>;

const std::map<std::string, TargetFn>& target_registry() {
    static const std::map<std::string, TargetFn> registry = {
        {"frac_integral_ones", err_frac_integral_ones},
        {"frac_integral_power", err_frac_integral_power},
        {"section1_uniform", [](std::size_t n) { return err_section1(n, false); }},
        {"section1_graded", [](std::size_t n) { return err_section1(n, true); }},
        {"inversion_roundtrip", err_inversion_roundtrip},
        {"semigroup", err_semigroup},
        {"rl_inversion", err_rl_inversion},
        {"reconstruction", err_reconstruction},
        {"s1s2", err_s1s2},
        {"ml_constant_coeff", err_ml_constant_coeff},
    };
    return registry;
}

// Least-squares slope of log(err) vs log(N); returns the order (negated
// slope). Drops the coarsest point when its residual exceeds 3x the fit RMS.
double fit_order(const std::vector<std::size_t>& sizes,
                 const std::vector<double>& errors) {
    auto slope = [](const std::vector<double>& xs, const std::vector<double>& ys,
                    std::vector<double>* residuals) {
        const std::size_t n = xs.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double denom = n * sxx - sx * sx;
        const double b = (n * sxy - sx * sy) / denom;
        const double a = (sy - b * sx) / n;
        if (residuals) {
            residuals->resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                (*residuals)[i] = ys[i] - (a + b * xs[i]);
            }
        }
        return b;
    };

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        xs.push_back(std::log(static_cast<double>(sizes[i])));
        ys.push_back(std::log(std::max(errors[i], 1e-300)));
    }
    std::vector<double> residuals;
    double b = slope(xs, ys, &residuals);
    if (xs.size() >= 4) {
        double rms = 0.0;
        for (double r : residuals) rms += r * r;
        rms = std::sqrt(rms / residuals.size());
        if (rms > 0.0 && std::abs(residuals.front()) > 3.0 * rms) {
            xs.erase(xs.begin());
            ys.erase(ys.begin());
            b = slope(xs, ys, nullptr);
        }
    }
    return -b;
}

} // namespace

std::vector<std::string> study_targets() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : target_registry()) names.push_back(name);
    return names;
}

ConvergenceStudy convergence_study(const std::string& target,
                                   const std::vector<std::size_t>& mesh_sizes) {
    const auto& registry = target_registry();
    auto it = registry.find(target);
    if (it == registry.end()) {
        throw std::invalid_argument("convergence_study: no oracle registered for '" + target + "'");
    }
    if (mesh_sizes.size() < 3) {
        throw std::invalid_argument("convergence_study: need at least three mesh sizes");
    }
    for (std::size_t i = 1; i < mesh_sizes.size(); ++i) {
        if (mesh_sizes[i] <= mesh_sizes[i - 1]) {
            throw std::invalid_argument("convergence_study: mesh sizes must increase strictly");
        }
    }

    ConvergenceStudy study;
    study.target = target;
    study.mesh_sizes = mesh_sizes;
    study.errors.resize(mesh_sizes.size());
    for (std::size_t i = 0; i < mesh_sizes.size(); ++i) {
        study.errors[i] = it->second(mesh_sizes[i]);
    }

    double max_err = 0.0;
    for (double e : study.errors) max_err = std::max(max_err, e);
    if (max_err <= 1e-12) {
        study.exact = true;
        study.estimated_order = std::numeric_limits<double>::quiet_NaN();
    } else {
        study.estimated_order = fit_order(study.mesh_sizes, study.errors);
    }
    return study;
}

nlohmann::json to_json(const ConvergenceStudy& study) {
    nlohmann::json j;
    j["target"] = study.target;
    j["mesh_sizes"] = study.mesh_sizes;
    j["errors"] = study.errors;
    if (study.exact) {
        j["estimated_order"] = "exact";
    } else {
        j["estimated_order"] = study.estimated_order;
    }
    return j;
}

std::string study_to_csv(const ConvergenceStudy& study) {
    std::ostringstream os;
    os << "N,error,order_estimate\n";
    char buf[64];
    for (std::size_t i = 0; i < study.mesh_sizes.size(); ++i) {
        os << study.mesh_sizes[i] << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", study.errors[i]);
        os << buf << ',';
        if (study.exact) {
            os << "exact";
        } else if (i > 0 && study.errors[i] > 0 && study.errors[i - 1] > 0) {
            const double local =
                std::log(study.errors[i - 1] / study.errors[i])
                / std::log(static_cast<double>(study.mesh_sizes[i])
                           / static_cast<double>(study.mesh_sizes[i - 1]));
            std::snprintf(buf, sizeof(buf), "%.6g", local);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

IdentityReport identity_suite(std::uint64_t seed, std::size_t cells,
                              const ToleranceProfile& profile) {
    IdentityReport report;
    report.seed = seed;
    report.cells = cells;
    auto mesh = Mesh::uniform(cells, 1.0);

    auto add = [&](const std::string& name, double discrepancy, double tolerance) {
        report.entries.push_back(
            IdentityResult{name, discrepancy, tolerance, discrepancy <= tolerance});
    };

    // Semigroup J^a J^b v = J^(a+b) v on a smoothed random input.
    {
        GridFn v = smoothed_random(mesh, seed);
        const double scale = max_norm(v);
        double worst = 0.0;
        const double pairs[2][2] = {{0.3, 0.4}, {0.3, 0.7}};
        for (const auto& ab : pairs) {
            GridFn lhs = frac_integral_left(frac_integral_left(v, FracOrder(ab[1])),
                                            FracOrder(ab[0]));
            GridFn rhs = frac_integral_left(v, FracOrder(ab[0] + ab[1]));
            worst = std::max(worst, max_abs_diff(lhs.values(), rhs.values(), 0) / scale);
        }
        add("semigroup", worst, profile.semigroup);
    }

    // Reflection J_a v = tau J^a tau v, both reconstructions.
    {
        const FracOrder a(0.6);
        GridFn vc = random_step(mesh, seed + 1);
        GridFn vl = smoothed_random(mesh, seed + 2);
        double worst = 0.0;
        for (const GridFn* v : {&vc, &vl}) {
            GridFn direct = frac_integral_right(*v, a);
            GridFn mirrored = reflect(frac_integral_left(reflect(*v), a));
            worst = std::max(worst,
                             max_abs_diff(direct.values(), mirrored.values(), 0));
        }
        add("reflection", worst, profile.reflection);
    }

    // Commutation D(J^g v) = J^g(D v) for v with v(0) = 0, measured relative
    // to ||dv/dt|| (the scale controlling both sides).
    {
        GridFn v = smoothed_random(mesh, seed + 3);
        const FracOrder g(0.5);
        GridFn dv = discrete_derivative(v);
        GridFn lhs = discrete_derivative(frac_integral_left(v, g));
        GridFn rhs = frac_integral_left(dv, g);
        add("commutation",
            max_abs_diff(lhs.values(), rhs.values(), 1) / max_norm(dv),
            profile.commutation);
    }

    // Riemann-Liouville inversion D^a J^a v = v on the interior.
    {
        GridFn v = smoothed_random(mesh, seed + 4);
        const FracOrder a(0.5);
        GridFn rl = riemann_liouville(frac_integral_left(v, a), a);
        const std::size_t from = first_node_at_or_after(*mesh, 0.1);
        add("rl_inversion", max_abs_diff(rl.values(), v.values(), from),
            profile.rl_inversion);
    }

    // Reconstruction J^a(d/dt J^(1-a) u) = u for u = t^(a+0.3).
    {
        const FracOrder a(0.5);
        GridFn u = GridFn::sample(mesh, [&](double t) { return std::pow(t, a.value() + 0.3); },
                                  Convention::NodeLinear);
        GridFn rec = frac_integral_left(
            discrete_derivative(frac_integral_left(u, FracOrder(1.0 - a.value()))), a);
        const std::size_t from = first_node_at_or_after(*mesh, 0.1);
        add("reconstruction", max_abs_diff(rec.values(), u.values(), from),
            profile.reconstruction);
    }

    report.all_pass = true;
    for (const auto& entry : report.entries) report.all_pass &= entry.pass;
    return report;
}

nlohmann::json to_json(const IdentityReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["N"] = report.cells;
    j["all_pass"] = report.all_pass;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : report.entries) {
        entries.push_back({{"name", entry.name},
                           {"discrepancy", entry.discrepancy},
                           {"tolerance", entry.tolerance},
                           {"pass", entry.pass}});
    }
    j["entries"] = entries;
    return j;
}

std::string to_text(const IdentityReport& report) {
    std::ostringstream os;
    os << "identity suite  seed=" << report.seed << "  N=" << report.cells << "\n";
    char buf[128];
    for (const auto& entry : report.entries) {
        std::snprintf(buf, sizeof(buf), "  %-16s %-5s  discrepancy=%-12.4g tolerance=%g\n",
                      entry.name.c_str(), entry.pass ? "pass" : "FAIL",
                      entry.discrepancy, entry.tolerance);
        os << buf;
    }
    os << (report.all_pass ? "all identities pass" : "FAILURES present") << "\n";
    return os.str();
}

} // namespace fracalc
