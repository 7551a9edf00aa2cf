#include "flateta/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace flateta {

Matrix expm(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    // Pade [6/6] numerator coefficients; the denominator uses them with
    // alternating signs.
    static const double c[7] = {1.0,        1.0 / 2.0,    5.0 / 44.0, 1.0 / 66.0,
                                1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};

    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm = std::max(nrm, a.row(i).cwiseAbs().sum());
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const Matrix as = a / std::pow(2.0, s);

    Matrix num = Matrix::Identity(n, n) * c[6];
    Matrix den = Matrix::Identity(n, n) * c[6];
    for (int k = 5; k >= 0; --k) {
        num = as * num + Matrix::Identity(n, n) * c[k];
        den = (-as) * den + Matrix::Identity(n, n) * c[k];
    }
    Matrix r = den.partialPivLu().solve(num);
    for (int k = 0; k < s; ++k) r = r * r;
    return r;
}

bool is_hermitian(const Matrix& a, double tol) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double hermitian_min_eigenvalue(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace flateta
