#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracalc {

/// A partition of [0, T]: t_0 = 0 < t_1 < ... < t_N = T.
/// Uniform meshes have t_j = T*j/N; graded meshes t_j = T*(j/N)^r with r >= 1.
/// Nodes are always computed from the defining formula, so refine(m, k) twice
/// with factor 2 reproduces refine(m, 4) node for node.
class Mesh {
public:
    enum class Kind { Uniform, Graded };

    static std::shared_ptr<const Mesh> uniform(std::size_t cells, double T);
    static std::shared_ptr<const Mesh> graded(std::size_t cells, double T, double exponent);

    Kind kind() const { return kind_; }
    double horizon() const { return T_; }
    double grading() const { return r_; }

    std::size_t cells() const { return nodes_.size() - 1; }
    std::size_t node_count() const { return nodes_.size(); }
    double node(std::size_t j) const { return nodes_[j]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double cell_width(std::size_t j) const { return nodes_[j + 1] - nodes_[j]; }

    bool symmetric() const { return kind_ == Kind::Uniform; }

    bool operator==(const Mesh& other) const {
        return kind_ == other.kind_ && T_ == other.T_ && r_ == other.r_
               && nodes_.size() == other.nodes_.size();
    }

private:
    Mesh(Kind kind, std::size_t cells, double T, double r);

    Kind kind_;
    double T_;
    double r_;
    std::vector<double> nodes_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Same-kind refinement with `factor` times as many cells.
MeshPtr refine(const Mesh& mesh, int factor);
MeshPtr refine(const MeshPtr& mesh, int factor);

/// Reconstruction convention a GridFn carries. Operators integrate the
/// reconstruction exactly, so the two conventions are not interchangeable:
///  - CellConstant: the value stored at node j is the function's value on the
///    cell (t_{j-1}, t_j]; the node-0 entry duplicates the first cell value.
///  - NodeLinear: values are node samples joined by linear interpolation.
enum class Convention { CellConstant, NodeLinear };

/// A real-valued function sampled on a Mesh. Immutable after construction.
class GridFn {
public:
    GridFn(MeshPtr mesh, std::vector<double> values, Convention convention);

    /// Samples a callable at the nodes (NodeLinear) or takes per-cell values
    /// from the callable at the right endpoint (CellConstant).
    template <typename F>
    static GridFn sample(MeshPtr mesh, F&& f, Convention convention) {
        std::vector<double> v(mesh->node_count());
        for (std::size_t j = 0; j < v.size(); ++j) {
            v[j] = f(mesh->node(j));
        }
        if (convention == Convention::CellConstant && v.size() > 1) {
            v[0] = v[1];
        }
        return GridFn(std::move(mesh), std::move(v), convention);
    }

    static GridFn zeros(MeshPtr mesh, Convention convention);
    static GridFn constant(MeshPtr mesh, double c, Convention convention);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    Convention convention() const { return convention_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }
    const std::vector<double>& values() const { return values_; }

    /// Same underlying mesh (pointer identity or structural equality).
    bool same_mesh(const GridFn& other) const;

    GridFn with_values(std::vector<double> values) const {
        return GridFn(mesh_, std::move(values), convention_);
    }
    GridFn with_convention(Convention convention) const {
        return GridFn(mesh_, values_, convention);
    }

    friend GridFn operator+(const GridFn& a, const GridFn& b);
    friend GridFn operator-(const GridFn& a, const GridFn& b);
    friend GridFn operator*(double c, const GridFn& a);

private:
    MeshPtr mesh_;
    std::vector<double> values_;
    Convention convention_;
};

/// L^p exponent: finite p >= 1 or infinity.
class LpExponent {
public:
    static LpExponent finite(double p);
    static LpExponent infinity();

    bool is_infinite() const { return infinite_; }
    double value() const;

private:
    LpExponent(double p, bool inf) : p_(p), infinite_(inf) {}
    double p_;
    bool infinite_;
};

/// Discrete L^p norm with composite quadrature weights matching the
/// reconstruction convention (cell widths for CellConstant, trapezoidal
/// weights for NodeLinear). p = infinity returns max_j |v_j|.
double lp_norm(const GridFn& v, const LpExponent& p);
double lp_norm(const GridFn& v, double p);
double max_norm(const GridFn& v);

/// CSV with header "t,value"; one row per node.
void write_csv(const GridFn& v, std::ostream& out);
std::string to_csv(const GridFn& v);

nlohmann::json to_json(const GridFn& v);
GridFn grid_fn_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Mesh& mesh);
MeshPtr mesh_from_json(const nlohmann::json& j);

} // namespace fracalc
