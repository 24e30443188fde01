#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace acns {

/// Error in problem setup (bad grid, bad parameters). CLI maps this to exit code 2.
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Node placement of a discrete scalar field on the MAC grid.
/// Cell-centered values, or values on faces normal to a coordinate axis.
enum class Loc : int { Cell = -1, FaceX = 0, FaceY = 1, FaceZ = 2 };

inline int face_axis(Loc l) { return static_cast<int>(l); }
inline Loc face_loc(int axis) { return static_cast<Loc>(axis); }

/// Uniform staggered (MAC) grid on an axis-aligned box.
/// Pressure lives at cell centers, velocity component k on faces normal to axis k.
struct MacGrid {
    int dim = 2;
    std::array<int, 3> n{1, 1, 1};          // cells per axis (1 on unused axes)
    std::array<double, 3> origin{0, 0, 0};
    std::array<double, 3> length{1, 1, 1};
    std::array<double, 3> h{1, 1, 1};

    MacGrid() = default;
    MacGrid(int dim_, std::array<int, 3> cells,
            std::array<double, 3> origin_ = {0, 0, 0},
            std::array<double, 3> length_ = {1, 1, 1})
        : dim(dim_), n(cells), origin(origin_), length(length_) {
        if (dim != 2 && dim != 3) throw SpecError("MacGrid: dim must be 2 or 3");
        for (int a = dim; a < 3; ++a) { n[a] = 1; length[a] = 1.0; }
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 2) throw SpecError("MacGrid: need at least 2 cells per axis");
            if (length[a] <= 0) throw SpecError("MacGrid: box extent must be positive");
        }
        for (int a = 0; a < 3; ++a) h[a] = length[a] / n[a];
    }

    static MacGrid unit(int dim_, int nx) {
        return MacGrid(dim_, {nx, nx, nx});
    }

    /// Number of (non-ghost) nodes of a field at `l` along `axis`.
    int nnodes(Loc l, int axis) const {
        if (axis >= dim) return 1;
        return (face_axis(l) == axis) ? n[axis] + 1 : n[axis];
    }

    /// Coordinate of node index i along `axis` for a field at `l`.
    double coord(Loc l, int axis, int i) const {
        if (face_axis(l) == axis) return origin[axis] + i * h[axis];
        return origin[axis] + (i + 0.5) * h[axis];
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= h[a];
        return v;
    }

    bool same_as(const MacGrid& o) const {
        return dim == o.dim && n == o.n && origin == o.origin && length == o.length;
    }
};

/// Dirichlet trace callable: value at a boundary point (x,y,z) and time t.
/// An empty function means homogeneous data.
using BoundaryFn = std::function<double(double, double, double, double)>;

/// Scalar field on the MAC grid with one ghost layer per side on every active axis.
/// Keeps its own copy of the (small, immutable) grid descriptor.
class ScalarField {
public:
    ScalarField(const MacGrid& g, Loc loc) : g_(g), loc_(loc) {
        for (int a = 0; a < 3; ++a) {
            nn_[a] = g.nnodes(loc, a);
            alloc_[a] = (a < g.dim) ? nn_[a] + 2 : 1;
            gofs_[a] = (a < g.dim) ? 1 : 0;
        }
        stride_[0] = 1;
        stride_[1] = alloc_[0];
        stride_[2] = alloc_[0] * alloc_[1];
        a_.assign(static_cast<size_t>(alloc_[0]) * alloc_[1] * alloc_[2], 0.0);
    }

    const MacGrid& grid() const { return g_; }
    Loc loc() const { return loc_; }
    int nn(int axis) const { return nn_[axis]; }
    int stride(int axis) const { return stride_[axis]; }

    /// Index valid on [-1, nn(axis)] per active axis (ghosts included).
    double& operator()(int i, int j, int k = 0) {
        return a_[idx(i, j, k)];
    }
    double operator()(int i, int j, int k = 0) const {
        return a_[idx(i, j, k)];
    }

    size_t idx(int i, int j, int k) const {
        return static_cast<size_t>(i + gofs_[0]) +
               static_cast<size_t>(j + gofs_[1]) * stride_[1] +
               static_cast<size_t>(k + gofs_[2]) * stride_[2];
    }

    double coord(int axis, int i) const { return g_.coord(loc_, axis, i); }

    std::vector<double>& raw() { return a_; }
    const std::vector<double>& raw() const { return a_; }

    void fill(double v) { std::fill(a_.begin(), a_.end(), v); }

    /// Visit every non-ghost node.
    template <class F>
    void for_nodes(F&& f) const {
        for (int k = 0; k < nn_[2]; ++k)
            for (int j = 0; j < nn_[1]; ++j)
                for (int i = 0; i < nn_[0]; ++i) f(i, j, k);
    }

    bool compatible(const ScalarField& o) const {
        return loc_ == o.loc_ && g_.same_as(o.g_);
    }

private:
    MacGrid g_;
    Loc loc_;
    std::array<int, 3> nn_{}, alloc_{}, stride_{}, gofs_{};
    std::vector<double> a_;
};

/// dim face-located components sharing one grid.
class VelocityField {
public:
    explicit VelocityField(const MacGrid& g) {
        for (int k = 0; k < g.dim; ++k) comps_.emplace_back(g, face_loc(k));
    }
    int dim() const { return static_cast<int>(comps_.size()); }
    ScalarField& operator[](int k) { return comps_[k]; }
    const ScalarField& operator[](int k) const { return comps_[k]; }
    const MacGrid& grid() const { return comps_[0].grid(); }

    void fill(double v) {
        for (auto& c : comps_) c.fill(v);
    }

private:
    std::vector<ScalarField> comps_;
};

/// Per-component Dirichlet traces; empty entries mean homogeneous.
struct VelocityBC {
    std::array<BoundaryFn, 3> comp{};
    const BoundaryFn& operator[](int k) const { return comp[k]; }
};

// elementwise helpers (same grid and location required)

inline void axpy(double a, const ScalarField& x, ScalarField& y) {
    const auto& xr = x.raw();
    auto& yr = y.raw();
    for (size_t i = 0; i < yr.size(); ++i) yr[i] += a * xr[i];
}

inline void scale(ScalarField& x, double a) {
    for (auto& v : x.raw()) v *= a;
}

inline void copy_into(const ScalarField& x, ScalarField& y) { y.raw() = x.raw(); }

inline void axpy(double a, const VelocityField& x, VelocityField& y) {
    for (int k = 0; k < y.dim(); ++k) axpy(a, x[k], y[k]);
}

inline void copy_into(const VelocityField& x, VelocityField& y) {
    for (int k = 0; k < y.dim(); ++k) copy_into(x[k], y[k]);
}

} // namespace acns
