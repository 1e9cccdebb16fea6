#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace isospec {

// Fourth-order quadrature on a uniform grid for scalars and Eigen objects.
//
// Each cell [x_i, x_{i+1}] is integrated exactly for the cubic through the four
// nearest nodes: h/24 (-f[i-1] + 13 f[i] + 13 f[i+1] - f[i+2]) in the interior,
// one-sided cubics in the first and last cells. Unlike a running composite
// Simpson sum, every node sees the same rule, so the running integral has a
// smooth error and can be differenced without an even/odd sawtooth.

template <class T>
std::vector<T> running_integral(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 4) throw std::invalid_argument("running_integral needs at least 4 samples");
    const double w = h / 24.0;
    std::vector<T> out(n);
    out[0] = T(f[0] * 0.0);
    out[1] = T((9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) * w);
    for (std::size_t i = 1; i + 2 < n; ++i) {
        out[i + 1] = T(out[i] + (-1.0 * f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) * w);
    }
    out[n - 1] = T(out[n - 2] + (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) * w);
    return out;
}

template <class T>
T integral(const std::vector<T>& f, double h) {
    return running_integral(f, h).back();
}

}  // namespace isospec
