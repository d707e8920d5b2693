#include "pbetc/numerics.hpp"

#include <algorithm>

namespace pbetc {

Grid::Grid(Index n_nodes) : n_(n_nodes), dx_(0.0) {
    if (n_nodes < 3) throw Error(ErrorCode::InvalidGrid, "a grid needs at least 3 nodes");
    dx_ = 1.0 / static_cast<double>(n_nodes - 1);
}

Grid Grid::from_nodes(const Eigen::Ref<const Eigen::VectorXd>& nodes, double tol) {
    Grid g(nodes.size());
    for (Index i = 0; i < nodes.size(); ++i) {
        if (std::abs(nodes(i) - g.node(i)) > tol)
            throw Error(ErrorCode::InvalidGrid,
                        "nodes are not the uniform grid on [0,1] (node " + std::to_string(i) + ")");
    }
    return g;
}

Eigen::VectorXd Grid::nodes() const {
    Eigen::VectorXd x(n_);
    for (Index i = 0; i < n_; ++i) x(i) = node(i);
    return x;
}

Index Grid::refinement_to(const Grid& fine) const noexcept {
    const Index a = n_ - 1;
    const Index b = fine.n_ - 1;
    if (b < a || b % a != 0) return 0;
    return b / a;
}

void require_same_grid(const Grid& a, const Grid& b, const std::string& what) {
    if (!(a == b))
        throw Error(ErrorCode::GridMismatch, what + ": grids differ (" + std::to_string(a.size()) +
                                                 " vs " + std::to_string(b.size()) + " nodes)");
}

SpatialProfile::SpatialProfile(Grid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw Error(ErrorCode::GridMismatch, "profile length does not match grid");
    if (!values_.allFinite()) throw Error(ErrorCode::ValidationError, "profile has non-finite entries");
}

SpatialProfile SpatialProfile::constant(const Grid& grid, double value) {
    return SpatialProfile(grid, Eigen::VectorXd::Constant(grid.size(), value));
}

double trapezoid_integral(const SpatialProfile& p) { return trapezoid(p.values(), p.grid().dx()); }

double l2_norm_sq(const SpatialProfile& p) {
    return trapezoid(p.values().cwiseAbs2(), p.grid().dx());
}

double l2_norm(const SpatialProfile& p) { return std::sqrt(l2_norm_sq(p)); }

SpatialProfile central_derivative(const SpatialProfile& p, int order) {
    return SpatialProfile(p.grid(), central_derivative(p.values(), p.grid().dx(), order));
}

namespace {

// Cell index and local coordinate of x.
std::pair<Index, double> locate(const Grid& g, double x) {
    const double s = std::clamp(x, 0.0, 1.0) / g.dx();
    Index i = static_cast<Index>(std::floor(s));
    i = std::clamp<Index>(i, 0, g.size() - 2);
    return {i, s - static_cast<double>(i)};
}

}  // namespace

double interpolate_linear(const SpatialProfile& p, double x) {
    const auto [i, f] = locate(p.grid(), x);
    const auto& v = p.values();
    return (1.0 - f) * v(i) + f * v(i + 1);
}

double cumulative_integral(const SpatialProfile& p, double x) {
    const auto [i, f] = locate(p.grid(), x);
    const auto& v = p.values();
    const double dx = p.grid().dx();
    double acc = 0.0;
    for (Index j = 0; j < i; ++j) acc += 0.5 * dx * (v(j) + v(j + 1));
    // partial cell: integral of the linear segment over [0, f*dx]
    acc += dx * f * (v(i) + 0.5 * f * (v(i + 1) - v(i)));
    return acc;
}

SpatialProfile resample(const SpatialProfile& p, const Grid& target) {
    if (p.grid() == target) return p;
    return SpatialProfile::sample(target, [&](double x) { return interpolate_linear(p, x); });
}

}  // namespace pbetc
