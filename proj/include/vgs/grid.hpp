#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "vgs/errors.hpp"

namespace vgs {

template <typename Scalar>
using FieldT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Field = FieldT<double>;

/// Uniform cell-centered grid on (0, length).
template <typename Scalar = double>
class GridT {
public:
    GridT(Eigen::Index n_cells, Scalar length) : n_cells_(n_cells), length_(length) {
        if (n_cells < 4) throw ContractViolation("grid: n_cells must be >= 4");
        if (!(length > Scalar(0))) throw ContractViolation("grid: length must be positive");
    }

    Eigen::Index n_cells() const noexcept { return n_cells_; }
    Scalar length() const noexcept { return length_; }
    Scalar dx() const noexcept { return length_ / Scalar(n_cells_); }

    Scalar center(Eigen::Index i) const noexcept { return (Scalar(i) + Scalar(0.5)) * dx(); }

    FieldT<Scalar> centers() const {
        FieldT<Scalar> x(n_cells_);
        for (Eigen::Index i = 0; i < n_cells_; ++i) x[i] = center(i);
        return x;
    }

    bool operator==(const GridT&) const = default;

private:
    Eigen::Index n_cells_;
    Scalar length_;
};

using Grid = GridT<double>;

template <typename Scalar, typename Derived>
void check_shape(const Eigen::MatrixBase<Derived>& field, const GridT<Scalar>& grid,
                 const char* who) {
    if (field.size() != grid.n_cells())
        throw ContractViolation(std::string(who) + ": field length " +
                                std::to_string(field.size()) + " does not match grid (" +
                                std::to_string(grid.n_cells()) + " cells)");
}

/// Second-order Laplacian with reflecting ghost cells (zero flux at both ends).
template <typename Scalar, typename Derived>
FieldT<Scalar> laplacian_neumann(const Eigen::MatrixBase<Derived>& f, const GridT<Scalar>& grid) {
    check_shape(f, grid, "laplacian_neumann");
    const Eigen::Index n = grid.n_cells();
    const Scalar inv_dx2 = Scalar(1) / (grid.dx() * grid.dx());
    FieldT<Scalar> out(n);
    out[0] = (f[1] - f[0]) * inv_dx2;
    for (Eigen::Index i = 1; i + 1 < n; ++i)
        out[i] = (f[i - 1] - Scalar(2) * f[i] + f[i + 1]) * inv_dx2;
    out[n - 1] = (f[n - 2] - f[n - 1]) * inv_dx2;
    return out;
}

/// Midpoint rule: dx * sum(f).
template <typename Scalar, typename Derived>
Scalar integrate(const Eigen::MatrixBase<Derived>& f, const GridT<Scalar>& grid) {
    check_shape(f, grid, "integrate");
    return grid.dx() * f.sum();
}

/// Linear interpolation between cell centers; constant extrapolation past the end centers.
template <typename Scalar, typename Derived>
Scalar sample_at(const Eigen::MatrixBase<Derived>& f, const GridT<Scalar>& grid, Scalar x) {
    check_shape(f, grid, "sample_at");
    const Scalar s = x / grid.dx() - Scalar(0.5);
    if (s <= Scalar(0)) return f[0];
    const Eigen::Index last = grid.n_cells() - 1;
    if (s >= Scalar(last)) return f[last];
    const auto i = static_cast<Eigen::Index>(s);
    const Scalar w = s - Scalar(i);
    return (Scalar(1) - w) * f[i] + w * f[i + 1];
}

}  // namespace vgs
