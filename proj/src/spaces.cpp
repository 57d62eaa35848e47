#include "fracalc/spaces.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fracalc/parallel.hpp"

#include <cstdlib>
#include <thread>

namespace fracalc {

std::size_t thread_budget() {
    if (const char* env = std::getenv("FRACALC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

double slobodecki_seminorm(const GridFn& u, const SlobodeckiParams& params) {
    const double p = params.p;
    const double sigma = params.order.sigma();
    const int m = params.order.m();

    GridFn g = u;
    for (int k = 1; k < m; ++k) {
        g = discrete_derivative(g);
    }

    const Mesh& mesh = g.mesh();
    const std::size_t n = mesh.cells();
    const bool linear = g.convention() == Convention::NodeLinear;

    // Cell midpoints and midpoint values of the reconstruction.
    std::vector<double> mid(n), gmid(n), slope(n);
    for (std::size_t c = 0; c < n; ++c) {
        mid[c] = 0.5 * (mesh.node(c) + mesh.node(c + 1));
        if (linear) {
            gmid[c] = 0.5 * (g[c] + g[c + 1]);
            slope[c] = (g[c + 1] - g[c]) / mesh.cell_width(c);
        } else {
            gmid[c] = g[c + 1];
            slope[c] = 0.0;
        }
    }

    double acc = 0.0;
    // Twice the s < t triangle: ordered cell pairs j < i, midpoint rule.
    // For cell-constant data the adjacent band |i-j| <= 1 is excluded.
    const std::size_t band = linear ? 1 : 2;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + band <= i; ++j) {
            const double diff = std::abs(gmid[i] - gmid[j]);
            const double dist = mid[i] - mid[j];
            acc += 2.0 * std::pow(diff, p) * std::pow(dist, -1.0 - sigma * p)
                   * mesh.cell_width(i) * mesh.cell_width(j);
        }
    }
    if (linear) {
        // Same-cell pairs exactly: |g(t)-g(s)| = |slope| |t-s| makes the
        // integrand |slope|^p (t-s)^lambda with lambda = p(1-sigma)-1 > -1.
        const double lambda = p * (1.0 - sigma) - 1.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double h = mesh.cell_width(c);
            acc += 2.0 * std::pow(std::abs(slope[c]), p)
                   * std::pow(h, lambda + 2.0) / ((lambda + 1.0) * (lambda + 2.0));
        }
        // Adjacent pairs by midpoint rule (bounded integrand).
        for (std::size_t i = 1; i < n; ++i) {
            const std::size_t j = i - 1;
            const double diff = std::abs(gmid[i] - gmid[j]);
            const double dist = mid[i] - mid[j];
            acc += 2.0 * std::pow(diff, p) * std::pow(dist, -1.0 - sigma * p)
                   * mesh.cell_width(i) * mesh.cell_width(j);
        }
    }
    return std::pow(acc, 1.0 / p);
}

double slobodecki_norm(const GridFn& u, const SlobodeckiParams& params) {
    const double p = params.p;
    const int m = params.order.m();

    // ||u||_(W^(m-1,p)): L^p norms of u and its discrete derivatives, summed
    // per the W^(1,p) convention, raised to p in the Slobodecki composite.
    double wm = 0.0;
    GridFn g = u;
    for (int k = 0; k < m; ++k) {
        wm += lp_norm(g, p);
        if (k + 1 < m) g = discrete_derivative(g);
    }

    const double semi = slobodecki_seminorm(u, params);
    return std::pow(std::pow(wm, p) + std::pow(semi, p), 1.0 / p);
}

double wap_norm(const GridFn& u, const FracOrder& alpha, const LpExponent& p) {
    return lp_norm(invert_frac_integral(u, alpha), p);
}

EmbeddingScanReport embedding_scan(const FracOrder& alpha, double epsilon,
                                   double p, std::size_t sample_count,
                                   const MeshPtr& mesh, std::uint64_t seed) {
    if (!(epsilon > 0.0) || !(epsilon < alpha.value())) {
        throw std::domain_error("embedding_scan: requires 0 < epsilon < alpha");
    }
    if (sample_count < 1) {
        throw std::domain_error("embedding_scan: requires at least one sample");
    }

    // Draw every sample up front so the report is a pure function of the seed.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::vector<double>> samples(sample_count);
    for (auto& values : samples) {
        values.resize(mesh->node_count());
        for (auto& x : values) x = uni(rng);
        values[0] = values[1];
    }

    EmbeddingScanReport report;
    report.alpha = alpha.value();
    report.epsilon = epsilon;
    report.p = p;
    report.seed = seed;
    report.sample_count = sample_count;
    report.ratios.resize(sample_count);

    const SlobodeckiParams target(FracOrder(alpha.value() - epsilon), p);
    parallel_for(sample_count, [&](std::size_t k) {
        GridFn v(mesh, samples[k], Convention::CellConstant);
        const double denom = lp_norm(v, p);
        const GridFn image = frac_integral_left(v, alpha);
        report.ratios[k] = slobodecki_norm(image, target) / denom;
    });

    report.max_ratio = 0.0;
    for (double r : report.ratios) {
        if (!std::isfinite(r) || r <= 0.0) {
            throw std::runtime_error("embedding_scan: non-finite ratio");
        }
        report.max_ratio = std::max(report.max_ratio, r);
    }
    return report;
}

nlohmann::json to_json(const EmbeddingScanReport& report) {
    nlohmann::json j;
    j["alpha"] = report.alpha;
    j["epsilon"] = report.epsilon;
    j["p"] = report.p;
    j["seed"] = report.seed;
    j["sample_count"] = report.sample_count;
    j["ratios"] = report.ratios;
    j["max_ratio"] = report.max_ratio;
    return j;
}

} // namespace fracalc
