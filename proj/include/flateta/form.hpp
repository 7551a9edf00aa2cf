#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flateta/grid.hpp"

namespace flateta {

using MatMap = Eigen::Map<Eigen::MatrixXcd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXcd>;

// Matrix-valued differential form on a periodic grid, graded by degree.
// Components are indexed by an axis bitmask (strictly increasing multi-index);
// a missing component is zero. Forms of rank 1 act as scalar forms and
// broadcast against any fiber rank under the wedge product.
class Form {
public:
    Form() = default;
    Form(const GridManifold& m, int rank);

    const GridManifold& manifold() const { return mani_; }
    int rank() const { return rank_; }
    bool is_scalar() const { return rank_ == 1; }
    int mask_count() const { return 1 << mani_.dim; }

    bool has_component(int mask) const;
    std::vector<cplx>& component(int mask);           // allocates on demand
    const std::vector<cplx>* component_if(int mask) const;

    MatMap at(int mask, int point);
    ConstMatMap at(int mask, int point) const;

    Form& operator+=(const Form& o);
    Form& operator-=(const Form& o);
    Form& operator*=(cplx s);

    // largest |entry| over all components
    double max_abs() const;
    // true when every populated component has degree in `degrees_mod_2`
    bool pure_parity(int parity) const;

private:
    GridManifold mani_{};
    int rank_ = 0;
    std::vector<std::vector<cplx>> comp_;  // size 2^dim, possibly empty slots
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator*(cplx s, Form a);
Form operator*(double s, Form a);

// graded wedge with matrix multiplication in the fiber; degrees above the
// manifold dimension drop out structurally
Form wedge(const Form& a, const Form& b);
inline Form operator*(const Form& a, const Form& b) { return wedge(a, b); }

// exterior derivative by spectral differentiation along each axis
Form exterior_d(const Form& a);

// fiber trace first, then trapezoid integration of the top-degree coefficient
cplx integrate_top(const Form& a);

// periods against the harmonic cycle basis: S^1 -> [circle period];
// T^3 -> [against dtheta2^dtheta3, dtheta3^dtheta1, dtheta1^dtheta2, top]
using PairingVector = std::vector<cplx>;
PairingVector pair_cycles(const Form& a);

// exponential of an even form: the degree-0 matrix part goes through
// scaling-and-squaring, the nilpotent part through the terminating series
Form form_exp(const Form& a);

Form trace_form(const Form& a);
Form adjoint_form(const Form& a);  // pointwise conjugate transpose

Form identity_form(const GridManifold& m, int rank);
Form constant_form(const GridManifold& m, const Eigen::MatrixXcd& value, int mask = 0);
Form basis_one_form(const GridManifold& m, int axis);

}  // namespace flateta
