#ifndef SN_KERNELS_HPP
#define SN_KERNELS_HPP

// Scalar special functions: stable N(0,1) pdf/cdf, the zeta_m family
// (derivatives of log(2*Phi)), half-normal cumulants, and the regularized
// incomplete gamma used for chi-square probabilities.

#include <cmath>
#include <limits>

#include "sn/types.hpp"

namespace sn {

template <typename Scalar = double>
inline constexpr Scalar sqrt_2pi() {
    return Scalar(2.5066282746310005024157652848110);
}
template <typename Scalar = double>
inline constexpr Scalar sqrt_2_over_pi() {
    return Scalar(0.79788456080286535587989211986876);
}

template <typename Scalar>
Scalar norm_pdf(Scalar x) {
    return std::exp(Scalar(-0.5) * x * x) / sqrt_2pi<Scalar>();
}

// Phi via erfc keeps full relative accuracy down to the underflow limit
// (x ~ -37.5); the zeta functions switch to a continued fraction before that.
template <typename Scalar>
Scalar norm_cdf(Scalar x) {
    return Scalar(0.5) * std::erfc(-x / std::sqrt(Scalar(2)));
}

// Lower-tail normal quantile, algorithm AS 241 (PPND16).
template <typename Scalar>
Scalar norm_quantile(Scalar p) {
    if (!(p > Scalar(0) && p < Scalar(1)))
        throw DomainError("norm_quantile: p must be in (0,1)");
    const Scalar q = p - Scalar(0.5);
    if (std::abs(q) <= Scalar(0.425)) {
        const Scalar r = Scalar(0.180625) - q * q;
        return q *
               (((((((Scalar(2.5090809287301226727e+3) * r + Scalar(3.3430575583588128105e+4)) * r +
                     Scalar(6.7265770927008700853e+4)) * r + Scalar(4.5921953931549871457e+4)) * r +
                   Scalar(1.3731693765509461125e+4)) * r + Scalar(1.9715909503065514427e+3)) * r +
                 Scalar(1.3314166789178437745e+2)) * r + Scalar(3.3871328727963666080e0)) /
               (((((((Scalar(5.2264952788528545610e+3) * r + Scalar(2.8729085735721942674e+4)) * r +
                     Scalar(3.9307895800092710610e+4)) * r + Scalar(2.1213794301586595867e+4)) * r +
                   Scalar(5.3941960214247511077e+3)) * r + Scalar(6.8718700749205790830e+2)) * r +
                 Scalar(4.2313330701600911252e+1)) * r + Scalar(1));
    }
    Scalar r = q < Scalar(0) ? p : Scalar(1) - p;
    r = std::sqrt(-std::log(r));
    Scalar val;
    if (r <= Scalar(5)) {
        r -= Scalar(1.6);
        val = (((((((Scalar(7.74545014278341407640e-4) * r + Scalar(2.27238449892691845833e-2)) * r +
                    Scalar(2.41780725177450611770e-1)) * r + Scalar(1.27045825245236838258e0)) * r +
                  Scalar(3.64784832476320460504e0)) * r + Scalar(5.76949722146069140550e0)) * r +
                Scalar(4.63033784615654529590e0)) * r + Scalar(1.42343711074968357734e0)) /
              (((((((Scalar(1.05075007164441684324e-9) * r + Scalar(5.47593808499534494600e-4)) * r +
                    Scalar(1.51986665636164571966e-2)) * r + Scalar(1.48103976427480074590e-1)) * r +
                  Scalar(6.89767334985100004550e-1)) * r + Scalar(1.67638483018380384940e0)) * r +
                Scalar(2.05319162663775882187e0)) * r + Scalar(1));
    } else {
        r -= Scalar(5);
        val = (((((((Scalar(2.01033439929228813265e-7) * r + Scalar(2.71155556874348757815e-5)) * r +
                    Scalar(1.24266094738807843860e-3)) * r + Scalar(2.65321895265761230930e-2)) * r +
                  Scalar(2.96560571828504891230e-1)) * r + Scalar(1.78482653991729133580e0)) * r +
                Scalar(5.46378491116411436990e0)) * r + Scalar(6.65790464350110377720e0)) /
              (((((((Scalar(2.04426310338993978564e-15) * r + Scalar(1.42151175831644588870e-7)) * r +
                    Scalar(1.84631831751005468180e-5)) * r + Scalar(7.86869131145613259100e-4)) * r +
                  Scalar(1.48753612908506148525e-2)) * r + Scalar(1.36929880922735805310e-1)) * r +
                Scalar(5.99832206555887937690e-1)) * r + Scalar(1));
    }
    return q < Scalar(0) ? -val : val;
}

namespace detail {

// Continued-fraction levels for the Mills ratio at t = -x > 0:
//   E_m = t + m / E_{m+1},   Phi(x)/phi(x) = 1/E_1.
// Evaluated by downward recurrence from an asymptotic seed; the recurrence
// is strongly contractive for t >= 5.
template <typename Scalar>
struct MillsLevels {
    Scalar e1, e2, e3, e4, e5;
};

template <typename Scalar>
MillsLevels<Scalar> mills_levels(Scalar t) {
    constexpr int start = 128;
    Scalar e = (t + std::sqrt(t * t + Scalar(4 * (start + 1)))) / Scalar(2);
    MillsLevels<Scalar> lv{};
    for (int m = start; m >= 1; --m) {
        e = t + Scalar(m) / e;
        if (m == 5) lv.e5 = e;
        if (m == 4) lv.e4 = e;
        if (m == 3) lv.e3 = e;
        if (m == 2) lv.e2 = e;
        if (m == 1) lv.e1 = e;
    }
    return lv;
}

// zeta_0..zeta_4 at a single point through the cancellation-free cascade.
// Identities used (all terms O(t), no subtractive loss):
//   zeta1        = E1
//   zeta1 + x    = 1/E2
//   1 + zeta2    = (2*E2 - E3) / (E2^2 * E3),  2*E2 - E3 = t + 4/E3 - 3/E4
//   zeta3        = 2*E1*(3*E3 - 2*E4) / (E2^2 * E3^2 * E4),
//                  3*E3 - 2*E4 = t + 9/E4 - 8/E5
template <typename Scalar>
void zeta_tail(Scalar x, Scalar out[5]) {
    const Scalar t = -x;
    const auto lv = mills_levels(t);
    const Scalar log2 = Scalar(0.69314718055994530941723212145818);
    out[0] = log2 - Scalar(0.5) * t * t - std::log(sqrt_2pi<Scalar>()) - std::log(lv.e1);
    const Scalar z1 = lv.e1;
    const Scalar m1 = Scalar(1) / lv.e2;  // zeta1 + x
    const Scalar z2 = -lv.e1 / lv.e2;
    const Scalar two_e2_m_e3 = t + Scalar(4) / lv.e3 - Scalar(3) / lv.e4;
    const Scalar one_plus_z2 = two_e2_m_e3 / (lv.e2 * lv.e2 * lv.e3);
    const Scalar three_e3_m_2e4 = t + Scalar(9) / lv.e4 - Scalar(8) / lv.e5;
    const Scalar z3 = Scalar(2) * lv.e1 * three_e3_m_2e4 /
                      (lv.e2 * lv.e2 * lv.e3 * lv.e3 * lv.e4);
    const Scalar z4 = -z3 * (z1 + m1) + Scalar(2) * (lv.e1 / lv.e2) * one_plus_z2;
    out[1] = z1;
    out[2] = z2;
    out[3] = z3;
    out[4] = z4;
}

template <typename Scalar>
void zeta_direct(Scalar x, Scalar out[5]) {
    const Scalar Phi = norm_cdf(x);
    const Scalar phi = norm_pdf(x);
    const Scalar z1 = phi / Phi;
    const Scalar z2 = -z1 * (x + z1);
    const Scalar z3 = -z2 * (x + z1) - z1 * (Scalar(1) + z2);
    const Scalar z4 = -z3 * (x + Scalar(2) * z1) - Scalar(2) * z2 * (Scalar(1) + z2);
    out[0] = std::log(std::erfc(-x / std::sqrt(Scalar(2))));  // log(2*Phi(x))
    out[1] = z1;
    out[2] = z2;
    out[3] = z3;
    out[4] = z4;
}

template <typename Scalar>
void zeta_all(Scalar x, Scalar out[5]) {
    if (x <= Scalar(-5))
        zeta_tail(x, out);
    else
        zeta_direct(x, out);
}

}  // namespace detail

// m-th derivative of zeta_0(x) = log(2*Phi(x)); m in {0,..,4}.
template <typename Scalar>
Scalar zeta(int m, Scalar x) {
    if (m < 0 || m > 4) throw DomainError("zeta: order must be in 0..4");
    Scalar v[5];
    detail::zeta_all(x, v);
    return v[m];
}

// Cumulants of |N(0,1)|.  kappa_m = zeta_m(0) for m = 1,3,4; the second
// cumulant picks up the extra 1 from the t^2/2 term of the generating
// function, kappa_2 = 1 + zeta_2(0).
template <typename Scalar = double>
Scalar half_normal_cumulant(int m) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    switch (m) {
        case 1: return sqrt_2_over_pi<Scalar>();
        case 2: return Scalar(1) - Scalar(2) / pi;
        case 3: return sqrt_2_over_pi<Scalar>() * (Scalar(4) / pi - Scalar(1));
        case 4: return Scalar(4) * (Scalar(2) - Scalar(6) / pi) / pi;
        default: throw DomainError("half_normal_cumulant: m must be in 1..4");
    }
}

// Regularized lower incomplete gamma P(a,x): series for x < a+1, Lentz
// continued fraction otherwise.
template <typename Scalar>
Scalar gamma_p(Scalar a, Scalar x) {
    if (x < Scalar(0) || a <= Scalar(0)) throw DomainError("gamma_p: bad arguments");
    if (x == Scalar(0)) return Scalar(0);
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar lg = std::lgamma(a);
    if (x < a + Scalar(1)) {
        Scalar ap = a, sum = Scalar(1) / a, del = sum;
        for (int i = 0; i < 1000; ++i) {
            ap += Scalar(1);
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
    Scalar b = x + Scalar(1) - a, c = Scalar(1) / tiny, d = Scalar(1) / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const Scalar an = -Scalar(i) * (Scalar(i) - a);
        b += Scalar(2);
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = Scalar(1) / d;
        const Scalar del = d * c;
        h *= del;
        if (std::abs(del - Scalar(1)) < eps) break;
    }
    return Scalar(1) - std::exp(-x + a * std::log(x) - lg) * h;
}

template <typename Scalar>
Scalar chi2_cdf(Scalar x, Scalar dof) {
    if (x <= Scalar(0)) return Scalar(0);
    return gamma_p(dof / Scalar(2), x / Scalar(2));
}

template <typename Scalar>
Scalar chi2_quantile(Scalar p, Scalar dof) {
    if (!(p >= Scalar(0) && p < Scalar(1))) throw DomainError("chi2_quantile: p in [0,1)");
    if (p == Scalar(0)) return Scalar(0);
    Scalar lo = Scalar(0), hi = dof + Scalar(10);
    while (chi2_cdf(hi, dof) < p) hi *= Scalar(2);
    for (int i = 0; i < 200; ++i) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        (chi2_cdf(mid, dof) < p ? lo : hi) = mid;
        if (hi - lo < Scalar(1e-13) * (Scalar(1) + hi)) break;
    }
    return Scalar(0.5) * (lo + hi);
}

}  // namespace sn

#endif
