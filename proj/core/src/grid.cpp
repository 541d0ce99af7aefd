#include "levyns/grid.hpp"

#include "levyns/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace levyns {

Grid::Grid(int dim, int res, Boundary boundary)
    : dim_(dim), res_(res), boundary_(boundary) {
    if (dim != 2 && dim != 3) {
        throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    }
    if (res < 3) {
        throw ConfigError("grid resolution must be at least 3 nodes per axis");
    }
    nodes_ = 1;
    for (int d = 0; d < dim; ++d) nodes_ *= static_cast<std::size_t>(res);
    h_ = periodic() ? 1.0 / res : 1.0 / (res - 1);

    std::vector<double> axis(res, h_);
    if (!periodic()) {
        axis.front() *= 0.5;
        axis.back() *= 0.5;
    }
    weights_.resize(nodes_);
    for (std::size_t n = 0; n < nodes_; ++n) {
        const auto idx = index(n);
        double w = 1.0;
        for (int d = 0; d < dim_; ++d) w *= axis[idx[d]];
        weights_[n] = w;
    }
}

double Grid::total_weight() const noexcept {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

std::array<int, 3> Grid::index(std::size_t node) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < dim_; ++d) {
        idx[d] = static_cast<int>(node % res_);
        node /= res_;
    }
    return idx;
}

std::size_t Grid::node(int i, int j, int k) const noexcept {
    const auto r = static_cast<std::size_t>(res_);
    return static_cast<std::size_t>(i) + r * (static_cast<std::size_t>(j) + r * static_cast<std::size_t>(k));
}

Point Grid::coord(std::size_t node) const noexcept {
    const auto idx = index(node);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) x[d] = idx[d] * h_;
    return x;
}

bool Grid::on_boundary(std::size_t node) const noexcept {
    if (periodic()) return false;
    const auto idx = index(node);
    for (int d = 0; d < dim_; ++d) {
        if (idx[d] == 0 || idx[d] == res_ - 1) return true;
    }
    return false;
}

GridPtr make_grid(int dim, int res, Boundary boundary) {
    return std::make_shared<const Grid>(dim, res, boundary);
}

GridField::GridField(GridPtr g, int comps, double fill)
    : grid(std::move(g)), components(comps), values(grid->node_count() * comps, fill) {}

GridField& GridField::operator+=(const GridField& o) {
    require_compatible(*this, o, "GridField::operator+=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

GridField& GridField::operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }

GridField operator-(GridField a, const GridField& b) {
    require_compatible(a, b, "GridField::operator-");
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
    return a;
}

GridField operator*(double s, GridField a) { return a *= s; }

void require_compatible(const GridField& a, const GridField& b, const char* where) {
    if (!a.grid || !b.grid || !(*a.grid == *b.grid)) {
        throw UsageError(std::string(where) + ": fields live on different grids");
    }
    if (a.components != b.components) {
        throw UsageError(std::string(where) + ": component count mismatch");
    }
}

double l2_norm(const GridField& a) {
    const auto w = a.grid->weights();
    double s = 0.0;
    for (std::size_t n = 0; n < a.node_count(); ++n) {
        double v2 = 0.0;
        for (int c = 0; c < a.components; ++c) v2 += a.at(n, c) * a.at(n, c);
        s += w[n] * v2;
    }
    return std::sqrt(s);
}

} // namespace levyns
