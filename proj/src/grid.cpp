#include "flateta/grid.hpp"

#include <cmath>

namespace flateta {

GridManifold make_torus_grid(int dim, int resolution) {
    if (dim % 2 == 0)
        throw std::invalid_argument("make_torus_grid: even-dimensional manifold");
    if (dim != 1 && dim != 3)
        throw std::invalid_argument("make_torus_grid: unsupported dimension (expected 1 or 3)");
    if (resolution < 4 || resolution % 2 != 0)
        throw std::invalid_argument("make_torus_grid: resolution must be even and >= 4");
    return GridManifold{dim, resolution};
}

std::vector<double> spectral_derivative_matrix(int n) {
    // D[j][k] = 0.5 * (-1)^(j-k) * cot((j-k)*h/2), j != k, with h = 2*pi/n.
    // Antisymmetric circulant; rows and columns sum to zero, so the trapezoid
    // rule annihilates every derivative (discrete Stokes).
    std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
    const double h = kTwoPi / n;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            const int m = j - k;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            d[static_cast<size_t>(j) * n + k] = 0.5 * sgn / std::tan(0.5 * m * h);
        }
    }
    return d;
}

void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double z1, pp;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::fabs(z - z1) > 1e-15);
        nodes[i] = xm - xl * z;
        nodes[n - 1 - i] = xm + xl * z;
        weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

}  // namespace flateta
