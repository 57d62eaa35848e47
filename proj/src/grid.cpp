#include "fracalc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fracalc {

Mesh::Mesh(Kind kind, std::size_t cells, double T, double r)
    : kind_(kind), T_(T), r_(r) {
    if (cells < 1) {
        throw std::invalid_argument("Mesh: need at least one cell");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw std::invalid_argument("Mesh: horizon T must be positive and finite");
    }
    if (kind == Kind::Graded && !(r >= 1.0)) {
        throw std::invalid_argument("Mesh: grading exponent must satisfy r >= 1");
    }
    nodes_.resize(cells + 1);
    const double n = static_cast<double>(cells);
    for (std::size_t j = 0; j <= cells; ++j) {
        const double frac = static_cast<double>(j) / n;
        nodes_[j] = (kind == Kind::Uniform) ? T * frac : T * std::pow(frac, r);
    }
    nodes_[0] = 0.0;
    nodes_[cells] = T;
    for (std::size_t j = 0; j + 1 <= cells; ++j) {
        if (!(nodes_[j] < nodes_[j + 1])) {
            throw std::invalid_argument("Mesh: nodes must be strictly increasing");
        }
    }
}

std::shared_ptr<const Mesh> Mesh::uniform(std::size_t cells, double T) {
    return std::shared_ptr<const Mesh>(new Mesh(Kind::Uniform, cells, T, 1.0));
}

std::shared_ptr<const Mesh> Mesh::graded(std::size_t cells, double T, double exponent) {
    return std::shared_ptr<const Mesh>(new Mesh(Kind::Graded, cells, T, exponent));
}

MeshPtr refine(const Mesh& mesh, int factor) {
    if (factor < 2) {
        throw std::invalid_argument("refine: factor must be >= 2");
    }
    const std::size_t cells = mesh.cells() * static_cast<std::size_t>(factor);
    if (mesh.kind() == Mesh::Kind::Uniform) {
        return Mesh::uniform(cells, mesh.horizon());
    }
    return Mesh::graded(cells, mesh.horizon(), mesh.grading());
}

MeshPtr refine(const MeshPtr& mesh, int factor) { return refine(*mesh, factor); }

GridFn::GridFn(MeshPtr mesh, std::vector<double> values, Convention convention)
    : mesh_(std::move(mesh)), values_(std::move(values)), convention_(convention) {
    if (!mesh_) {
        throw std::invalid_argument("GridFn: null mesh");
    }
    if (values_.size() != mesh_->node_count()) {
        throw std::invalid_argument("GridFn: values must have one entry per node");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("GridFn: values must be finite");
        }
    }
}

GridFn GridFn::zeros(MeshPtr mesh, Convention convention) {
    std::vector<double> v(mesh->node_count(), 0.0);
    return GridFn(std::move(mesh), std::move(v), convention);
}

GridFn GridFn::constant(MeshPtr mesh, double c, Convention convention) {
    std::vector<double> v(mesh->node_count(), c);
    return GridFn(std::move(mesh), std::move(v), convention);
}

bool GridFn::same_mesh(const GridFn& other) const {
    return mesh_ == other.mesh_ || *mesh_ == *other.mesh_;
}

namespace {

void require_compatible(const GridFn& a, const GridFn& b) {
    if (!a.same_mesh(b)) {
        throw std::invalid_argument("GridFn: operands live on different meshes");
    }
    if (a.convention() != b.convention()) {
        throw std::invalid_argument("GridFn: mixing reconstruction conventions");
    }
}

} // namespace

GridFn operator+(const GridFn& a, const GridFn& b) {
    require_compatible(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] + b[j];
    return a.with_values(std::move(v));
}

GridFn operator-(const GridFn& a, const GridFn& b) {
    require_compatible(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] - b[j];
    return a.with_values(std::move(v));
}

GridFn operator*(double c, const GridFn& a) {
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = c * a[j];
    return a.with_values(std::move(v));
}

LpExponent LpExponent::finite(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::domain_error("LpExponent: requires p >= 1");
    }
    return LpExponent(p, false);
}

LpExponent LpExponent::infinity() { return LpExponent(0.0, true); }

double LpExponent::value() const {
    if (infinite_) {
        throw std::logic_error("LpExponent: infinite exponent has no finite value");
    }
    return p_;
}

double max_norm(const GridFn& v) {
    double m = 0.0;
    for (double x : v.values()) m = std::max(m, std::abs(x));
    return m;
}

double lp_norm(const GridFn& v, const LpExponent& p) {
    if (p.is_infinite()) {
        return max_norm(v);
    }
    const double pe = p.value();
    const Mesh& mesh = v.mesh();
    const std::size_t n = mesh.cells();
    double acc = 0.0;
    if (v.convention() == Convention::CellConstant) {
        for (std::size_t j = 1; j <= n; ++j) {
            acc += mesh.cell_width(j - 1) * std::pow(std::abs(v[j]), pe);
        }
    } else {
        for (std::size_t j = 0; j <= n; ++j) {
            double w = 0.0;
            if (j > 0) w += 0.5 * mesh.cell_width(j - 1);
            if (j < n) w += 0.5 * mesh.cell_width(j);
            acc += w * std::pow(std::abs(v[j]), pe);
        }
    }
    return std::pow(acc, 1.0 / pe);
}

double lp_norm(const GridFn& v, double p) { return lp_norm(v, LpExponent::finite(p)); }

namespace {

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

void write_csv(const GridFn& v, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t j = 0; j < v.size(); ++j) {
        out << fmt_double(v.mesh().node(j)) << ',' << fmt_double(v[j]) << '\n';
    }
}

std::string to_csv(const GridFn& v) {
    std::ostringstream os;
    write_csv(v, os);
    return os.str();
}

nlohmann::json to_json(const Mesh& mesh) {
    nlohmann::json j;
    j["T"] = mesh.horizon();
    if (mesh.kind() == Mesh::Kind::Uniform) {
        j["kind"] = "uniform";
    } else {
        j["kind"] = "graded";
        j["r"] = mesh.grading();
    }
    j["N"] = mesh.cells();
    return j;
}

MeshPtr mesh_from_json(const nlohmann::json& j) {
    if (!j.contains("N") || !j.contains("T")) {
        throw std::invalid_argument("mesh JSON: requires fields N and T");
    }
    const std::size_t cells = j.at("N").get<std::size_t>();
    const double T = j.at("T").get<double>();
    std::string kind = j.value("kind", std::string("uniform"));
    if (kind == "uniform") {
        return Mesh::uniform(cells, T);
    }
    if (kind == "graded") {
        if (!j.contains("r")) {
            throw std::invalid_argument("mesh JSON: graded mesh requires exponent r");
        }
        return Mesh::graded(cells, T, j.at("r").get<double>());
    }
    throw std::invalid_argument("mesh JSON: unknown kind '" + kind + "'");
}

nlohmann::json to_json(const GridFn& v) {
    nlohmann::json j;
    j["T"] = v.mesh().horizon();
    j["kind"] = v.mesh().kind() == Mesh::Kind::Uniform ? "uniform" : "graded";
    if (v.mesh().kind() == Mesh::Kind::Graded) {
        j["r"] = v.mesh().grading();
    }
    j["convention"] = v.convention() == Convention::CellConstant ? "cell" : "linear";
    j["nodes"] = v.mesh().nodes();
    j["values"] = v.values();
    return j;
}

GridFn grid_fn_from_json(const nlohmann::json& j) {
    const double T = j.at("T").get<double>();
    const std::string kind = j.value("kind", std::string("uniform"));
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() < 2) {
        throw std::invalid_argument("grid fn JSON: need at least two values");
    }
    const std::size_t cells = values.size() - 1;
    MeshPtr mesh;
    if (kind == "uniform") {
        mesh = Mesh::uniform(cells, T);
    } else if (kind == "graded") {
        mesh = Mesh::graded(cells, T, j.at("r").get<double>());
    } else {
        throw std::invalid_argument("grid fn JSON: unknown kind '" + kind + "'");
    }
    const std::string conv = j.value("convention", std::string("linear"));
    return GridFn(std::move(mesh), values,
                  conv == "cell" ? Convention::CellConstant : Convention::NodeLinear);
}

} // namespace fracalc
