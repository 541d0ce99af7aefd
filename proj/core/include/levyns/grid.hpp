#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace levyns {

enum class Boundary { Periodic, Dirichlet };

using Point = std::array<double, 3>;

/// Uniform tensor grid on the unit torus (Periodic, nodes at i/res) or the
/// closed unit box (Dirichlet, nodes at i/(res-1) including the boundary).
/// Quadrature is the trapezoidal rule; nodes are ordered x-fastest.
class Grid {
public:
    Grid(int dim, int res, Boundary boundary);

    int dim() const noexcept { return dim_; }
    int res() const noexcept { return res_; }
    Boundary boundary() const noexcept { return boundary_; }
    bool periodic() const noexcept { return boundary_ == Boundary::Periodic; }
    std::size_t node_count() const noexcept { return nodes_; }
    double spacing() const noexcept { return h_; }

    std::span<const double> weights() const noexcept { return weights_; }
    double total_weight() const noexcept;

    std::array<int, 3> index(std::size_t node) const noexcept;
    std::size_t node(int i, int j = 0, int k = 0) const noexcept;
    Point coord(std::size_t node) const noexcept;
    bool on_boundary(std::size_t node) const noexcept;

    bool operator==(const Grid& other) const noexcept {
        return dim_ == other.dim_ && res_ == other.res_ && boundary_ == other.boundary_;
    }

private:
    int dim_;
    int res_;
    Boundary boundary_;
    std::size_t nodes_;
    double h_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, int res, Boundary boundary);

/// Scalar (components == 1) or vector samples at the nodes of a grid.
/// Layout is node-major: values[node * components + c].
struct GridField {
    GridPtr grid;
    int components = 1;
    std::vector<double> values;

    GridField() = default;
    GridField(GridPtr g, int comps, double fill = 0.0);

    std::size_t node_count() const noexcept { return grid ? grid->node_count() : 0; }
    double& at(std::size_t node, int c = 0) { return values[node * components + c]; }
    double at(std::size_t node, int c = 0) const { return values[node * components + c]; }

    GridField& operator+=(const GridField& o);
    GridField& operator*=(double s);
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double s, GridField a);

/// Throws UsageError unless both fields live on equal grids with the same
/// component count.
void require_compatible(const GridField& a, const GridField& b, const char* where);

/// Trapezoidal L2 norm, summing over components.
double l2_norm(const GridField& a);

/// Pointwise map over each node's component vector.
template <class Fn>
GridField map_pointwise(const GridField& u, Fn&& fn) {
    GridField out(u.grid, u.components);
    const int c = u.components;
    for (std::size_t i = 0; i < u.node_count(); ++i) {
        fn(std::span<const double>(u.values.data() + i * c, c),
           std::span<double>(out.values.data() + i * c, c));
    }
    return out;
}

} // namespace levyns
