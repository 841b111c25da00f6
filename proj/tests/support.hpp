#pragma once

#include "decompound/spaces.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace testing_support {

/// Mean and standard error of a sample of complex values, per component.
struct ComplexMoments {
    std::complex<double> mean;
    double se_re = 0.0;
    double se_im = 0.0;
};

inline ComplexMoments moments(const std::vector<std::complex<double>>& v)
{
    const double n = static_cast<double>(v.size());
    std::complex<double> s = 0.0;
    double sr = 0.0, si = 0.0;
    for (const auto& z : v) {
        s += z;
        sr += z.real() * z.real();
        si += z.imag() * z.imag();
    }
    ComplexMoments out;
    out.mean = s / n;
    out.se_re = std::sqrt(std::max(0.0, sr / n - out.mean.real() * out.mean.real()) / (n - 1));
    out.se_im = std::sqrt(std::max(0.0, si / n - out.mean.imag() * out.mean.imag()) / (n - 1));
    return out;
}

/// |a - b| within k standard errors per component (with a tiny absolute floor).
inline bool within_se(const ComplexMoments& m, std::complex<double> target, double k)
{
    return std::abs(m.mean.real() - target.real()) <= k * m.se_re + 1e-12 &&
           std::abs(m.mean.imag() - target.imag()) <= k * m.se_im + 1e-12;
}

}  // namespace testing_support
