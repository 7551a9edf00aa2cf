#include "flateta/form.hpp"

#include <bit>
#include <cmath>

#include "flateta/linalg.hpp"

namespace flateta {

namespace {

int popcount(int mask) { return std::popcount(static_cast<unsigned>(mask)); }

// parity of the permutation sorting the concatenation (A, B) of two disjoint
// index sets: one inversion per pair a in A, b in B with a > b
int wedge_sign(int mask_a, int mask_b) {
    int inversions = 0;
    for (int b = 0; b < 8; ++b) {
        if (!(mask_b & (1 << b))) continue;
        for (int a = b + 1; a < 8; ++a)
            if (mask_a & (1 << a)) ++inversions;
    }
    return (inversions % 2 == 0) ? 1 : -1;
}

void require_same_manifold(const Form& a, const Form& b, const char* who) {
    if (!(a.manifold() == b.manifold()))
        throw std::invalid_argument(std::string(who) + ": manifold mismatch");
}

}  // namespace

Form::Form(const GridManifold& m, int rank) : mani_(m), rank_(rank) {
    if (rank < 1) throw std::invalid_argument("Form: rank must be positive");
    comp_.resize(static_cast<size_t>(1) << m.dim);
}

bool Form::has_component(int mask) const {
    return mask >= 0 && mask < mask_count() && !comp_[mask].empty();
}

std::vector<cplx>& Form::component(int mask) {
    if (mask < 0 || mask >= mask_count())
        throw std::invalid_argument("Form::component: bad axis mask");
    auto& c = comp_[mask];
    if (c.empty()) c.assign(static_cast<size_t>(mani_.points()) * rank_ * rank_, cplx(0.0));
    return c;
}

const std::vector<cplx>* Form::component_if(int mask) const {
    if (mask < 0 || mask >= mask_count() || comp_[mask].empty()) return nullptr;
    return &comp_[mask];
}

MatMap Form::at(int mask, int point) {
    auto& c = component(mask);
    return MatMap(c.data() + static_cast<size_t>(point) * rank_ * rank_, rank_, rank_);
}

ConstMatMap Form::at(int mask, int point) const {
    const auto* c = component_if(mask);
    if (!c) {
        // read-only zero block for absent components
        static const std::vector<cplx> zero_block(64, cplx(0.0));
        if (static_cast<size_t>(rank_) * rank_ > zero_block.size())
            throw std::logic_error("Form::at: absent component with fiber rank > 8");
        return ConstMatMap(zero_block.data(), rank_, rank_);
    }
    return ConstMatMap(c->data() + static_cast<size_t>(point) * rank_ * rank_, rank_, rank_);
}

Form& Form::operator+=(const Form& o) {
    require_same_manifold(*this, o, "Form::operator+=");
    if (rank_ != o.rank_) throw std::invalid_argument("Form::operator+=: rank mismatch");
    for (int mask = 0; mask < mask_count(); ++mask) {
        const auto* oc = o.component_if(mask);
        if (!oc) continue;
        auto& c = component(mask);
        for (size_t i = 0; i < c.size(); ++i) c[i] += (*oc)[i];
    }
    return *this;
}

Form& Form::operator-=(const Form& o) {
    require_same_manifold(*this, o, "Form::operator-=");
    if (rank_ != o.rank_) throw std::invalid_argument("Form::operator-=: rank mismatch");
    for (int mask = 0; mask < mask_count(); ++mask) {
        const auto* oc = o.component_if(mask);
        if (!oc) continue;
        auto& c = component(mask);
        for (size_t i = 0; i < c.size(); ++i) c[i] -= (*oc)[i];
    }
    return *this;
}

Form& Form::operator*=(cplx s) {
    for (auto& c : comp_)
        for (auto& v : c) v *= s;
    return *this;
}

double Form::max_abs() const {
    double m = 0.0;
    for (const auto& c : comp_)
        for (const auto& v : c) m = std::max(m, std::abs(v));
    return m;
}

bool Form::pure_parity(int parity) const {
    for (int mask = 0; mask < mask_count(); ++mask) {
        if (!has_component(mask) || popcount(mask) % 2 == parity % 2) continue;
        for (const auto& v : comp_[mask])
            if (v != cplx(0.0)) return false;
    }
    return true;
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator*(cplx s, Form a) { return a *= s; }
Form operator*(double s, Form a) { return a *= cplx(s); }

Form wedge(const Form& a, const Form& b) {
    require_same_manifold(a, b, "wedge");
    if (a.rank() != b.rank() && !a.is_scalar() && !b.is_scalar())
        throw std::invalid_argument("wedge: rank mismatch");
    const int rank = a.is_scalar() ? b.rank() : a.rank();
    const int npts = a.manifold().points();
    Form out(a.manifold(), rank);

    for (int ma = 0; ma < a.mask_count(); ++ma) {
        if (!a.has_component(ma)) continue;
        for (int mb = 0; mb < b.mask_count(); ++mb) {
            if (!b.has_component(mb) || (ma & mb)) continue;
            const double sgn = wedge_sign(ma, mb);
            const int mask = ma | mb;
            out.component(mask);
            for (int p = 0; p < npts; ++p) {
                auto dst = out.at(mask, p);
                const auto lhs = a.at(ma, p);
                const auto rhs = b.at(mb, p);
                if (a.is_scalar() && !b.is_scalar())
                    dst.noalias() += sgn * lhs(0, 0) * rhs;
                else if (b.is_scalar() && !a.is_scalar())
                    dst.noalias() += sgn * rhs(0, 0) * lhs;
                else
                    dst.noalias() += sgn * lhs * rhs;
            }
        }
    }
    return out;
}

Form exterior_d(const Form& a) {
    const GridManifold& m = a.manifold();
    const int n = m.resolution;
    const int npts = m.points();
    const auto deriv = spectral_derivative_matrix(n);
    Form out(m, a.rank());

    int stride = 1;
    for (int axis = 0; axis < m.dim; ++axis, stride *= n) {
        const int bit = 1 << axis;
        for (int mask = 0; mask < a.mask_count(); ++mask) {
            if (!a.has_component(mask) || (mask & bit)) continue;
            // sign from sorting dtheta_axis into the multi-index
            const double sgn = (popcount(mask & (bit - 1)) % 2 == 0) ? 1.0 : -1.0;
            const int target = mask | bit;
            out.component(target);
            const int block = a.rank() * a.rank();
            const auto& src = *a.component_if(mask);
            auto& dst = out.component(target);
            for (int p = 0; p < npts; ++p) {
                const int c = (p / stride) % n;
                const int base = p - c * stride;
                const double* drow = deriv.data() + static_cast<size_t>(c) * n;
                for (int j = 0; j < n; ++j) {
                    const double w = sgn * drow[j];
                    if (w == 0.0) continue;
                    const size_t sp = static_cast<size_t>(base + j * stride) * block;
                    const size_t dp = static_cast<size_t>(p) * block;
                    for (int e = 0; e < block; ++e) dst[dp + e] += w * src[sp + e];
                }
            }
        }
    }
    return out;
}

cplx integrate_top(const Form& a) {
    const GridManifold& m = a.manifold();
    const int top = a.mask_count() - 1;
    if (!a.has_component(top)) return cplx(0.0);
    cplx sum(0.0);
    for (int p = 0; p < m.points(); ++p) sum += a.at(top, p).trace();
    return sum * m.cell_volume();
}

PairingVector pair_cycles(const Form& a) {
    const GridManifold& m = a.manifold();
    if (m.dim == 1) return {integrate_top(a)};
    // T^3: pair the degree-1 part against the dual 2-cycles, then the top part
    PairingVector out;
    const int pairs[3][2] = {{1, 2}, {2, 0}, {0, 1}};
    for (const auto& pr : pairs) {
        Form dual = wedge(basis_one_form(m, pr[0]), basis_one_form(m, pr[1]));
        out.push_back(integrate_top(wedge(a, dual)));
    }
    out.push_back(integrate_top(a));
    return out;
}

Form form_exp(const Form& a) {
    if (!a.pure_parity(0))
        throw std::invalid_argument("form_exp: odd-degree component present");
    const GridManifold& m = a.manifold();
    const int npts = m.points();

    // nilpotent (positive even degree) part
    Form nil(m, a.rank());
    bool has_nil = false;
    for (int mask = 1; mask < a.mask_count(); ++mask) {
        if (!a.has_component(mask)) continue;
        nil.component(mask) = *a.component_if(mask);
        has_nil = true;
    }

    Form series = identity_form(m, a.rank());
    if (has_nil) {
        Form power = nil;
        double fact = 1.0;
        for (int k = 1; 2 * k <= m.dim; ++k) {
            fact *= k;
            series += (1.0 / fact) * power;
            if (2 * (k + 1) <= m.dim) power = wedge(power, nil);
        }
    }

    if (!a.has_component(0)) return series;

    Form zero_part(m, a.rank());
    auto& dst = zero_part.component(0);
    (void)dst;
    for (int p = 0; p < npts; ++p) zero_part.at(0, p) = expm(Eigen::MatrixXcd(a.at(0, p)));
    return wedge(zero_part, series);
}

Form trace_form(const Form& a) {
    Form out(a.manifold(), 1);
    for (int mask = 0; mask < a.mask_count(); ++mask) {
        if (!a.has_component(mask)) continue;
        out.component(mask);
        for (int p = 0; p < a.manifold().points(); ++p) out.at(mask, p)(0, 0) = a.at(mask, p).trace();
    }
    return out;
}

Form adjoint_form(const Form& a) {
    Form out(a.manifold(), a.rank());
    for (int mask = 0; mask < a.mask_count(); ++mask) {
        if (!a.has_component(mask)) continue;
        out.component(mask);
        for (int p = 0; p < a.manifold().points(); ++p)
            out.at(mask, p) = a.at(mask, p).adjoint();
    }
    return out;
}

Form identity_form(const GridManifold& m, int rank) {
    return constant_form(m, Eigen::MatrixXcd::Identity(rank, rank));
}

Form constant_form(const GridManifold& m, const Eigen::MatrixXcd& value, int mask) {
    if (value.rows() != value.cols())
        throw std::invalid_argument("constant_form: non-square matrix");
    Form out(m, static_cast<int>(value.rows()));
    out.component(mask);
    for (int p = 0; p < m.points(); ++p) out.at(mask, p) = value;
    return out;
}

Form basis_one_form(const GridManifold& m, int axis) {
    if (axis < 0 || axis >= m.dim) throw std::invalid_argument("basis_one_form: bad axis");
    return constant_form(m, Eigen::MatrixXcd::Identity(1, 1), 1 << axis);
}

}  // namespace flateta
