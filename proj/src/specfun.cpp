#include "tlsnl/specfun.hpp"

#include <cmath>

namespace tlsnl {

namespace {

using cd = std::complex<double>;

constexpr double kShiftRadius = 12.0;

// B_2k for k = 1..6
constexpr double kBernoulli[6] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0,
                                  -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};

cd digamma_asymptotic(cd w) {
    const cd w2inv = 1.0 / (w * w);
    cd pow = w2inv;
    cd sum = 0.0;
    for (int k = 1; k <= 6; ++k) {
        sum += kBernoulli[k - 1] / (2.0 * k) * pow;
        pow *= w2inv;
    }
    return std::log(w) - 0.5 / w - sum;
}

cd trigamma_asymptotic(cd w) {
    const cd winv = 1.0 / w;
    const cd w2inv = winv * winv;
    cd pow = w2inv * winv;
    cd sum = 0.0;
    for (int k = 1; k <= 6; ++k) {
        sum += kBernoulli[k - 1] * pow;
        pow *= w2inv;
    }
    return winv + 0.5 * w2inv + sum;
}

}  // namespace

DigammaEval digamma_half_line(double v) {
    const double a = std::fabs(v);
    cd z(0.5, a);
    cd acc = 0.0;
    while (std::abs(z) < kShiftRadius) {
        acc += 1.0 / z;
        z += 1.0;
    }
    const cd psi = digamma_asymptotic(z) - acc;
    return {psi.real(), v < 0.0 ? -psi.imag() : psi.imag()};
}

std::complex<double> trigamma_half_line(double v) {
    const double a = std::fabs(v);
    cd z(0.5, a);
    cd acc = 0.0;
    while (std::abs(z) < kShiftRadius) {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    const cd t = trigamma_asymptotic(z) + acc;
    return v < 0.0 ? std::conj(t) : t;
}

}  // namespace tlsnl
