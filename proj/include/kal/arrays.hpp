// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace kal {

// Dense rank-3 array, index (a, i, j) with a fastest-varying last.
struct Tensor3 {
    int n0 = 0, n1 = 0, n2 = 0;
    std::vector<double> a;

    Tensor3() = default;
    Tensor3(int d0, int d1, int d2) : n0(d0), n1(d1), n2(d2), a(static_cast<size_t>(d0) * d1 * d2, 0.0) {}

    double& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * n1 + j) * n2 + k]; }
    double operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * n1 + j) * n2 + k]; }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

// Dense rank-4 array on a d-dimensional space.
struct Tensor4 {
    int d = 0;
    std::vector<double> a;

    Tensor4() = default;
    explicit Tensor4(int dim) : d(dim), a(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

    size_t index(int i, int j, int k, int l) const
    {
        return ((static_cast<size_t>(i) * d + j) * d + k) * d + l;
    }
    double& operator()(int i, int j, int k, int l) { return a[index(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return a[index(i, j, k, l)]; }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

// Multilinear evaluation T(x, y, z, w) with complex arguments.
template <class V>
std::complex<double> contract4(const Tensor4& t, const V& x, const V& y, const V& z, const V& w)
{
    using C = std::complex<double>;
    const int d = t.d;
    C total = 0.0;
    for (int i = 0; i < d; ++i) {
        const C xi = x[i];
        if (xi == C(0.0)) continue;
        for (int j = 0; j < d; ++j) {
            const C xy = xi * C(y[j]);
            if (xy == C(0.0)) continue;
            for (int k = 0; k < d; ++k) {
                const C xyz = xy * C(z[k]);
                if (xyz == C(0.0)) continue;
                const double* row = &t.a[t.index(i, j, k, 0)];
                C s = 0.0;
                for (int l = 0; l < d; ++l) s += row[l] * C(w[l]);
                total += xyz * s;
            }
        }
    }
    return total;
}

}  // namespace kal
