#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pbetc/error.hpp"

namespace pbetc {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform grid on [0,1]. Nodes are i/(n-1), so both endpoints are exact.
class Grid {
public:
    explicit Grid(Index n_nodes);

    /// Accepts an explicit node list only if it is the uniform grid on [0,1].
    static Grid from_nodes(const Eigen::Ref<const Eigen::VectorXd>& nodes, double tol = 1e-9);

    Index size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double node(Index i) const noexcept { return static_cast<double>(i) / static_cast<double>(n_ - 1); }
    Eigen::VectorXd nodes() const;

    /// Grid with `factor` sub-intervals per interval of this one.
    Grid refined(Index factor) const { return Grid((n_ - 1) * factor + 1); }
    /// Integer r with fine = this refined by r, or 0 when the grids do not nest.
    Index refinement_to(const Grid& fine) const noexcept;

    bool operator==(const Grid& other) const noexcept { return n_ == other.n_; }

private:
    Index n_;
    double dx_;
};

void require_same_grid(const Grid& a, const Grid& b, const std::string& what);

/// Scalar field sampled on a Grid.
class SpatialProfile {
public:
    SpatialProfile(Grid grid, Eigen::VectorXd values);

    template <typename F>
    static SpatialProfile sample(const Grid& grid, F&& f) {
        Eigen::VectorXd v(grid.size());
        for (Index i = 0; i < grid.size(); ++i) v(i) = f(grid.node(i));
        return SpatialProfile(grid, std::move(v));
    }
    static SpatialProfile constant(const Grid& grid, double value);

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.size(); }
    double operator[](Index i) const { return values_(i); }
    double front() const { return values_(0); }
    double back() const { return values_(values_.size() - 1); }
    double max() const { return values_.maxCoeff(); }

    bool operator==(const SpatialProfile& other) const {
        return grid_ == other.grid_ && values_ == other.values_;
    }

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

// ---------------------------------------------------------------------------
// Expression-level kernels. These take any Eigen vector expression so callers
// can write e.g. trapezoid(k.cwiseProduct(u), dx) without temporaries.

template <typename Scalar>
VectorX<Scalar> trapezoid_weights(Index n, Scalar dx) {
    VectorX<Scalar> w = VectorX<Scalar>::Constant(n, dx);
    w(0) = dx / Scalar(2);
    w(n - 1) = dx / Scalar(2);
    return w;
}

/// Trapezoid weights with third-order Gregory end corrections (3/8, 7/6, 23/24
/// at each end), exact for cubics. Falls back to the plain rule below 7 nodes.
template <typename Scalar>
VectorX<Scalar> gregory_weights(Index n, Scalar dx) {
    if (n < 7) return trapezoid_weights<Scalar>(n, dx);
    VectorX<Scalar> w = VectorX<Scalar>::Constant(n, dx);
    const Scalar ends[3] = {Scalar(3) / Scalar(8), Scalar(7) / Scalar(6), Scalar(23) / Scalar(24)};
    for (Index k = 0; k < 3; ++k) {
        w(k) = ends[k] * dx;
        w(n - 1 - k) = ends[k] * dx;
    }
    return w;
}

template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar dx) {
    using Scalar = typename Derived::Scalar;
    const Index n = v.size();
    if (n < 2) return Scalar(0);
    const auto& e = v.derived().eval();
    return dx * ((e(0) + e(n - 1)) / Scalar(2) + e.segment(1, n - 2).sum());
}

/// Second-order differences: central inside, one-sided at both ends.
template <typename Derived>
VectorX<typename Derived::Scalar> central_derivative(const Eigen::MatrixBase<Derived>& v,
                                                     typename Derived::Scalar dx, int order) {
    using Scalar = typename Derived::Scalar;
    const Index n = v.size();
    if (n < 5) throw Error(ErrorCode::InvalidGrid, "central_derivative needs at least 5 nodes");
    const VectorX<Scalar> p = v.derived();
    VectorX<Scalar> out(n);
    if (order == 1) {
        const Scalar s = Scalar(1) / (Scalar(2) * dx);
        out.segment(1, n - 2) = (p.tail(n - 2) - p.head(n - 2)) * s;
        out(0) = (Scalar(-3) * p(0) + Scalar(4) * p(1) - p(2)) * s;
        out(n - 1) = (Scalar(3) * p(n - 1) - Scalar(4) * p(n - 2) + p(n - 3)) * s;
    } else if (order == 2) {
        const Scalar s = Scalar(1) / (dx * dx);
        out.segment(1, n - 2) = (p.tail(n - 2) - Scalar(2) * p.segment(1, n - 2) + p.head(n - 2)) * s;
        out(0) = (Scalar(2) * p(0) - Scalar(5) * p(1) + Scalar(4) * p(2) - p(3)) * s;
        out(n - 1) = (Scalar(2) * p(n - 1) - Scalar(5) * p(n - 2) + Scalar(4) * p(n - 3) - p(n - 4)) * s;
    } else {
        throw Error(ErrorCode::InvalidGrid, "central_derivative order must be 1 or 2");
    }
    return out;
}

/// Thomas algorithm. lower(i) multiplies x(i-1) and upper(i) multiplies x(i+1);
/// lower(0) and upper(n-1) are ignored.
template <typename Scalar>
VectorX<Scalar> solve_tridiagonal(const Eigen::Ref<const VectorX<Scalar>>& lower,
                                  const Eigen::Ref<const VectorX<Scalar>>& diag,
                                  const Eigen::Ref<const VectorX<Scalar>>& upper,
                                  const Eigen::Ref<const VectorX<Scalar>>& rhs) {
    using std::abs;
    const Index n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw Error(ErrorCode::GridMismatch, "tridiagonal band lengths differ");
    VectorX<Scalar> c(n), x(n);
    Scalar pivot = diag(0);
    if (abs(pivot) < Scalar(1e-14)) throw Error(ErrorCode::ZeroPivot, "pivot at row 0");
    c(0) = upper(0) / pivot;
    x(0) = rhs(0) / pivot;
    for (Index i = 1; i < n; ++i) {
        pivot = diag(i) - lower(i) * c(i - 1);
        if (abs(pivot) < Scalar(1e-14))
            throw Error(ErrorCode::ZeroPivot, "pivot at row " + std::to_string(i));
        c(i) = (i + 1 < n) ? upper(i) / pivot : Scalar(0);
        x(i) = (rhs(i) - lower(i) * x(i - 1)) / pivot;
    }
    for (Index i = n - 2; i >= 0; --i) x(i) -= c(i) * x(i + 1);
    return x;
}

// ---------------------------------------------------------------------------
// Profile-level wrappers.

double trapezoid_integral(const SpatialProfile& p);
double l2_norm_sq(const SpatialProfile& p);
double l2_norm(const SpatialProfile& p);
SpatialProfile central_derivative(const SpatialProfile& p, int order);

/// Piecewise-linear interpolant of p at x in [0,1].
double interpolate_linear(const SpatialProfile& p, double x);

/// Exact integral over [0,x] of the piecewise-linear interpolant of p.
double cumulative_integral(const SpatialProfile& p, double x);

/// Resample p onto another grid by linear interpolation (exact at nested nodes).
SpatialProfile resample(const SpatialProfile& p, const Grid& target);

}  // namespace pbetc
