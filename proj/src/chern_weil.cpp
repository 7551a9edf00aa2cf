#include "flateta/chern_weil.hpp"

#include <bit>
#include <cmath>

namespace flateta {

cplx sqrt_two_pi_i(SqrtBranch b) {
    const double root = std::sqrt(kTwoPi);
    const cplx principal = root * std::polar(1.0, kPi / 4.0);
    return b == SqrtBranch::principal ? principal : -principal;
}

cplx phi_factor(int degree, SqrtBranch b) {
    return std::pow(sqrt_two_pi_i(b), cplx(-degree, 0.0));
}

Form phi_normalize(Form a, SqrtBranch b) {
    for (int mask = 0; mask < a.mask_count(); ++mask) {
        if (!a.has_component(mask)) continue;
        const int deg = std::popcount(static_cast<unsigned>(mask));
        const cplx f = phi_factor(deg, b);
        auto& c = a.component(mask);
        for (auto& v : c) v *= f;
    }
    return a;
}

CurvatureInput make_curvature_input(Form two_form, double tol) {
    for (int mask = 0; mask < two_form.mask_count(); ++mask) {
        if (!two_form.has_component(mask)) continue;
        if (std::popcount(static_cast<unsigned>(mask)) != 2)
            throw std::invalid_argument("make_curvature_input: component of degree != 2");
    }
    // antisymmetry in the frame indices (plain transpose, the frame is real)
    double worst = 0.0;
    for (int mask = 0; mask < two_form.mask_count(); ++mask) {
        if (!two_form.has_component(mask)) continue;
        for (int p = 0; p < two_form.manifold().points(); ++p) {
            auto m = two_form.at(mask, p);
            worst = std::max(worst, (m + m.transpose()).cwiseAbs().maxCoeff());
        }
    }
    if (worst > tol)
        throw std::invalid_argument("make_curvature_input: frame antisymmetry violated");
    return CurvatureInput{std::move(two_form)};
}

Form a_hat_form(const CurvatureInput& r, SqrtBranch b) {
    const GridManifold& m = r.two_form.manifold();
    const Form r2 = wedge(r.two_form, r.two_form);
    const Form r4 = wedge(r2, r2);
    const Form t2 = phi_normalize(trace_form(r2), b);
    const Form t4 = phi_normalize(trace_form(r4), b);
    return a_hat_expansion(identity_form(m, 1), t2, t4);
}

}  // namespace flateta
