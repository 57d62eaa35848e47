#include "fracalc/frac_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fracalc/special.hpp"

namespace fracalc {

ConvolutionWeights::ConvolutionWeights(MeshPtr mesh, FracOrder order,
                                       Convention basis, Side side)
    : mesh_(std::move(mesh)), order_(order), basis_(basis), side_(side) {
    if (!mesh_) {
        throw std::invalid_argument("ConvolutionWeights: null mesh");
    }
    const double a = order_.value();
    inv_gamma_a1_ = 1.0 / gamma_fn(a + 1.0);
    inv_gamma_a_ = 1.0 / gamma_fn(a);
    uniform_ = mesh_->kind() == Mesh::Kind::Uniform;
    h_ = uniform_ ? mesh_->cell_width(0) : 0.0;
    if (uniform_) {
        const std::size_t n = mesh_->cells();
        pow_a_.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            pow_a_[k] = std::pow(static_cast<double>(k) * h_, a);
        }
        if (basis_ == Convention::NodeLinear) {
            pow_a1_.resize(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                pow_a1_[k] = std::pow(static_cast<double>(k) * h_, a + 1.0);
            }
        }
    }
}

namespace {

thread_local std::vector<double> tl_pow_a;
thread_local std::vector<double> tl_pow_a1;

} // namespace

// Fills d[k] = |t_i - t_k|^exponent for the k-range relevant to output i.
void ConvolutionWeights::fill_pow(std::size_t i, std::span<double> d,
                                  double exponent,
                                  const std::vector<double>& table) const {
    const auto& t = mesh_->nodes();
    const std::size_t n = mesh_->cells();
    if (side_ == Side::Left) {
        if (uniform_ && !table.empty()) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = table[i - k];
        } else {
            const double ti = t[i];
            for (std::size_t k = 0; k < i; ++k) d[k] = std::pow(ti - t[k], exponent);
            d[i] = 0.0;
        }
    } else {
        if (uniform_ && !table.empty()) {
            for (std::size_t k = i; k <= n; ++k) d[k] = table[k - i];
        } else {
            const double ti = t[i];
            d[i] = 0.0;
            for (std::size_t k = i + 1; k <= n; ++k) d[k] = std::pow(t[k] - ti, exponent);
        }
    }
}

void ConvolutionWeights::accumulate_row(std::size_t i, std::span<double> out) const {
    const auto& t = mesh_->nodes();
    const std::size_t n = mesh_->cells();
    const double a = order_.value();

    if (side_ == Side::Left && i == 0) return;
    if (side_ == Side::Right && i == n) return;

    auto& d = tl_pow_a;
    d.resize(n + 1);
    fill_pow(i, d, a, pow_a_);

    if (basis_ == Convention::CellConstant) {
        if (side_ == Side::Left) {
            for (std::size_t j = 1; j <= i; ++j) {
                out[j] += (d[j - 1] - d[j]) * inv_gamma_a1_;
            }
        } else {
            for (std::size_t j = i + 1; j <= n; ++j) {
                out[j] += (d[j] - d[j - 1]) * inv_gamma_a1_;
            }
        }
        return;
    }

    auto& f = tl_pow_a1;
    f.resize(n + 1);
    fill_pow(i, f, a + 1.0, pow_a1_);

    if (side_ == Side::Left) {
        for (std::size_t c = 0; c < i; ++c) {
            const double h = t[c + 1] - t[c];
            const double i0 = (d[c] - d[c + 1]) / a;
            const double i1 = (-h * d[c + 1] + (f[c] - f[c + 1]) / (a + 1.0)) / a;
            out[c] += (i0 - i1 / h) * inv_gamma_a_;
            out[c + 1] += (i1 / h) * inv_gamma_a_;
        }
    } else {
        for (std::size_t c = i; c < n; ++c) {
            const double h = t[c + 1] - t[c];
            const double i0 = (d[c + 1] - d[c]) / a;
            const double i1 = (h * d[c + 1] - (f[c + 1] - f[c]) / (a + 1.0)) / a;
            out[c] += (i0 - i1 / h) * inv_gamma_a_;
            out[c + 1] += (i1 / h) * inv_gamma_a_;
        }
    }
}

double ConvolutionWeights::weight(std::size_t i, std::size_t j) const {
    std::vector<double> row(mesh_->node_count(), 0.0);
    accumulate_row(i, row);
    return row[j];
}

std::vector<double> ConvolutionWeights::apply(std::span<const double> coeffs) const {
    const std::size_t n = mesh_->cells();
    if (coeffs.size() != n + 1) {
        throw std::invalid_argument("ConvolutionWeights::apply: coefficient size mismatch");
    }
    std::vector<double> out(n + 1, 0.0);
    std::vector<double> row(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        accumulate_row(i, row);
        double acc = 0.0;
        if (side_ == Side::Left) {
            for (std::size_t j = 0; j <= i; ++j) acc += row[j] * coeffs[j];
        } else {
            for (std::size_t j = i; j <= n; ++j) acc += row[j] * coeffs[j];
        }
        out[i] = acc;
    }
    return out;
}

GridFn frac_integral_left(const GridFn& v, const FracOrder& alpha) {
    ConvolutionWeights w(v.mesh_ptr(), alpha, v.convention(), Side::Left);
    return GridFn(v.mesh_ptr(), w.apply(v.values()), Convention::NodeLinear);
}

GridFn frac_integral_right(const GridFn& v, const FracOrder& alpha) {
    ConvolutionWeights w(v.mesh_ptr(), alpha, v.convention(), Side::Right);
    return GridFn(v.mesh_ptr(), w.apply(v.values()), Convention::NodeLinear);
}

GridFn reflect(const GridFn& v) {
    if (!v.mesh().symmetric()) {
        throw std::invalid_argument("reflect: mesh is not symmetric under t -> T-t");
    }
    const std::size_t n = v.mesh().cells();
    std::vector<double> r(n + 1);
    if (v.convention() == Convention::NodeLinear) {
        for (std::size_t j = 0; j <= n; ++j) r[j] = v[n - j];
    } else {
        // Reverse the cell payload: cell k of the reflection is cell N-k+1.
        for (std::size_t j = 1; j <= n; ++j) r[j] = v[n - j + 1];
        r[0] = r[1];
    }
    return v.with_values(std::move(r));
}

GridFn discrete_derivative(const GridFn& v) {
    const Mesh& mesh = v.mesh();
    const std::size_t n = mesh.cells();
    std::vector<double> d(n + 1);
    for (std::size_t j = 1; j <= n; ++j) {
        d[j] = (v[j] - v[j - 1]) / mesh.cell_width(j - 1);
    }
    d[0] = d[1];
    return GridFn(v.mesh_ptr(), std::move(d), Convention::CellConstant);
}

GridFn caputo(const GridFn& v, const FracOrder& alpha) {
    if (v.convention() != Convention::NodeLinear) {
        throw std::invalid_argument("caputo: requires a node-linear input");
    }
    if (!(alpha.value() < 1.0)) {
        throw std::domain_error("caputo: requires 0 < alpha < 1");
    }
    return frac_integral_left(discrete_derivative(v), FracOrder(1.0 - alpha.value()));
}

GridFn riemann_liouville(const GridFn& v, const FracOrder& alpha) {
    if (alpha.is_integer()) {
        throw std::domain_error("riemann_liouville: integer order not admitted");
    }
    GridFn y = frac_integral_left(v, FracOrder(1.0 - alpha.sigma()));
    for (int k = 0; k < alpha.m(); ++k) {
        y = discrete_derivative(y);
    }
    return y;
}

GridFn invert_frac_integral(const GridFn& u, const FracOrder& alpha) {
    ConvolutionWeights weights(u.mesh_ptr(), alpha, Convention::CellConstant, Side::Left);
    const std::size_t n = u.mesh().cells();
    std::vector<double> w(n + 1, 0.0);
    std::vector<double> row(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        weights.accumulate_row(i, row);
        double acc = u[i];
        for (std::size_t j = 1; j < i; ++j) acc -= row[j] * w[j];
        w[i] = acc / row[i];
    }
    w[0] = n >= 1 ? w[1] : 0.0;
    return GridFn(u.mesh_ptr(), std::move(w), Convention::CellConstant);
}

MembershipReport membership_test(
    const std::function<GridFn(const MeshPtr&)>& u_on,
    const MeshPtr& base, int levels, const FracOrder& alpha,
    const LpExponent& p, double threshold) {
    if (levels < 3) {
        throw std::invalid_argument("membership_test: need at least three levels");
    }
    MembershipReport report;
    report.threshold = threshold;
    MeshPtr mesh = base;
    for (int k = 0; k < levels; ++k) {
        GridFn u = u_on(mesh);
        GridFn w = invert_frac_integral(u, alpha);
        report.mesh_cells.push_back(mesh->cells());
        report.norms.push_back(lp_norm(w, p));
        if (k + 1 < levels) mesh = refine(mesh, 2);
    }
    for (std::size_t k = 1; k < report.norms.size(); ++k) {
        report.ratios.push_back(report.norms[k] / report.norms[k - 1]);
    }
    const std::size_t r = report.ratios.size();
    report.divergent = r >= 2 && report.ratios[r - 1] > threshold
                       && report.ratios[r - 2] > threshold;
    return report;
}

} // namespace fracalc
