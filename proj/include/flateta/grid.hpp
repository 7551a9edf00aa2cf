#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace flateta {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Flat torus T^dim = (R / 2*pi*Z)^dim sampled on a uniform periodic grid
// with `resolution` points per axis. Only odd dimensions 1 and 3 are
// supported; the resolution must be even so that spectral differentiation
// has a symmetric wavenumber set.
struct GridManifold {
    int dim = 0;
    int resolution = 0;

    int points() const {
        int n = 1;
        for (int a = 0; a < dim; ++a) n *= resolution;
        return n;
    }
    double spacing() const { return kTwoPi / resolution; }

    // cell volume of the product grid, used by the trapezoid rule
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing();
        return v;
    }

    // flat index <-> per-axis indices (axis 0 fastest)
    int index(const std::array<int, 3>& c) const {
        int idx = 0;
        for (int a = dim - 1; a >= 0; --a) idx = idx * resolution + c[a];
        return idx;
    }
    std::array<int, 3> coords(int idx) const {
        std::array<int, 3> c{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            c[a] = idx % resolution;
            idx /= resolution;
        }
        return c;
    }
    double theta(int axis_index) const { return axis_index * spacing(); }

    friend bool operator==(const GridManifold& x, const GridManifold& y) {
        return x.dim == y.dim && x.resolution == y.resolution;
    }
};

GridManifold make_torus_grid(int dim, int resolution);

// Dense spectral differentiation matrix for a periodic grid of even size N
// (period 2*pi). Row-major N*N storage. Exact for trigonometric polynomials
// below the Nyquist wavenumber; the Nyquist derivative is set to zero.
std::vector<double> spectral_derivative_matrix(int n);

// Nodes and weights of an n-point Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace flateta
