#include "flateta/chern.hpp"

#include <cmath>
#include <numeric>

namespace flateta {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return b;
}

}  // namespace

Form chern_character(const Connection& conn, SqrtBranch b) {
    const Form f = curvature(conn);
    return phi_normalize(trace_form(form_exp(cplx(-1.0) * f)), b);
}

Form odd_chern_form(const Form& omega, int j) {
    const GridManifold& m = omega.manifold();
    if (2 * j + 1 > m.dim) return Form(m, 1);
    Form power = omega;
    for (int i = 1; i < 2 * j + 1; ++i) power = wedge(power, omega);
    const cplx two_pi_i_pow = std::pow(cplx(0.0, kTwoPi), cplx(-j, 0.0));
    const double two_pow = std::pow(2.0, -(2.0 * j + 1.0));
    return (two_pi_i_pow * two_pow) * trace_form(power);
}

cplx a_coeff(int j, cplx r) {
    if (j < 0) throw std::invalid_argument("a_coeff: negative index");
    const cplx r2 = r * r;
    cplx sum(0.0);
    cplx r2k(1.0);
    for (int k = 0; k <= j; ++k) {
        sum += binomial(j, k) * r2k / (2.0 * k + 1.0);
        r2k *= r2;
    }
    return sum;
}

ACoeffTable ACoeffTable::build(int max_index) {
    ACoeffTable t;
    t.max_index = max_index;
    t.coeff.resize(max_index + 1);
    for (int j = 0; j <= max_index; ++j) {
        t.coeff[j].resize(j + 1);
        for (int k = 0; k <= j; ++k) t.coeff[j][k] = binomial(j, k) / (2.0 * k + 1.0);
    }
    return t;
}

cplx ACoeffTable::eval(int j, cplx r) const {
    if (j < 0 || j > max_index) throw std::out_of_range("ACoeffTable::eval: index out of range");
    const cplx r2 = r * r;
    cplx sum(0.0);
    for (int k = j; k >= 0; --k) sum = sum * r2 + coeff[j][k];
    return sum;
}

Rational Rational::of(long long n, long long d) {
    if (d == 0) throw std::invalid_argument("Rational: zero denominator");
    Rational r{n, d};
    if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
    }
    const __int128 g = gcd128(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

Rational Rational::operator+(const Rational& o) const {
    Rational r{num * o.den + o.num * den, den * o.den};
    const __int128 g = gcd128(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

Rational Rational::operator*(const Rational& o) const {
    Rational r{num * o.num, den * o.den};
    const __int128 g = gcd128(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

bool Rational::operator==(const Rational& o) const { return num == o.num && den == o.den; }

double Rational::to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string Rational::str() const {
    auto print128 = [](__int128 v) {
        if (v == 0) return std::string("0");
        std::string s;
        bool neg = v < 0;
        if (neg) v = -v;
        while (v > 0) {
            s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        return neg ? "-" + s : s;
    };
    return print128(num) + "/" + print128(den);
}

Rational a_coeff_at_i_exact(int j) {
    Rational sum = Rational::of(0);
    long long binom = 1;
    for (int k = 0; k <= j; ++k) {
        const long long signed_binom = (k % 2 == 0) ? binom : -binom;
        sum = sum + Rational::of(signed_binom, 2LL * k + 1);
        binom = binom * (j - k) / (k + 1);
    }
    return sum;
}

Rational wallis_ratio_exact(int j) {
    Rational prod = Rational::of(1);
    for (int m = 1; m <= j; ++m) prod = prod * Rational::of(2LL * m, 2LL * m + 1);
    return prod;
}

Form cs_transgression_path(const ConnectionPath& path, int steps, SqrtBranch b) {
    if (steps < 2) throw std::invalid_argument("cs_transgression_path: need at least 2 nodes");
    std::vector<double> nodes, weights;
    gauss_legendre(steps, 0.0, 1.0, nodes, weights);

    Form accum;
    bool first = true;
    for (int i = 0; i < steps; ++i) {
        const Form a = path.coeff(nodes[i]);
        const Form adot = path.coeff_dot(nodes[i]);
        const Form f_t = exterior_d(a) + wedge(a, a);
        const Form integrand = trace_form(wedge(adot, form_exp(cplx(-1.0) * f_t)));
        if (first) {
            accum = weights[i] * integrand;
            first = false;
        } else {
            accum += weights[i] * integrand;
        }
    }
    const cplx prefactor = -1.0 / sqrt_two_pi_i(b);
    return prefactor * phi_normalize(std::move(accum), b);
}

Form cs_transgression(const Connection& conn0, const Connection& conn1, int steps, SqrtBranch b) {
    if (!(conn0.mani == conn1.mani) || conn0.rank != conn1.rank)
        throw std::invalid_argument("cs_transgression: shape mismatch");
    const Form a0 = conn0.coeff;
    const Form diff = conn1.coeff - conn0.coeff;
    ConnectionPath path{
        [&](double t) { return a0 + cplx(t) * diff; },
        [&](double) { return diff; },
    };
    return cs_transgression_path(path, steps, b);
}

Form cs_series(const Form& omega, cplx r) {
    const GridManifold& m = omega.manifold();
    Form out(m, 1);
    double factorial = 1.0;
    for (int j = 0; 2 * j + 1 <= m.dim; ++j) {
        if (j > 0) factorial *= j;
        out += (-(r / kTwoPi) * a_coeff(j, r) / factorial) * odd_chern_form(omega, j);
    }
    return out;
}

DefectPrediction defect_rhs(const Form& ahat, const Form& ch_e, const Form& omega, cplx r) {
    const GridManifold& m = omega.manifold();
    DefectPrediction pred;
    pred.r = r;
    pred.value = cplx(0.0);
    double factorial = 1.0;
    for (int j = 0; 2 * j + 1 <= m.dim; ++j) {
        if (j > 0) factorial *= j;
        const Form cj = odd_chern_form(omega, j);
        const cplx period = integrate_top(wedge(wedge(ahat, ch_e), cj));
        const cplx term = -(r / kTwoPi) * (a_coeff(j, r) / factorial) * period;
        pred.per_j.push_back(term);
        pred.value += term;
    }
    return pred;
}

double imaginary_eta_prediction(const Form& ahat, const Form& ch_e, const Form& omega) {
    const GridManifold& m = omega.manifold();
    double sum = 0.0;
    double factorial = 1.0;
    for (int j = 0; 2 * j + 1 <= m.dim; ++j) {
        if (j > 0) factorial *= j;
        const Form cj = odd_chern_form(omega, j);
        const cplx period = integrate_top(wedge(wedge(ahat, ch_e), cj));
        const double weight = wallis_ratio_exact(j).to_double() / factorial;
        sum += weight * period.real();
    }
    return -sum / kTwoPi;
}

}  // namespace flateta
