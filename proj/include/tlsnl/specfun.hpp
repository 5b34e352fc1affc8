#pragma once

#include <complex>

namespace tlsnl {

struct DigammaEval {
    double re_psi;
    double im_psi;
};

// Psi(1/2 + i v)
DigammaEval digamma_half_line(double v);

// Psi'(1/2 + i v)
std::complex<double> trigamma_half_line(double v);

}  // namespace tlsnl
