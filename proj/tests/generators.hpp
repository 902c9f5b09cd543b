// SPDX-License-Identifier: MIT
// Seeded generators for property tests. Every case is reproducible from its seed.
#pragma once

#include "kal/immersion.hpp"
#include "kal/tensor_core.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace kal::testgen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline Mat random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0)
{
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = uniform(rng, -scale, scale);
    return m;
}

// Well conditioned SPD matrix: B B^T + I.
inline Mat random_spd(std::mt19937_64& rng, int d)
{
    const Mat b = random_matrix(rng, d, d, 0.7);
    return b * b.transpose() + Mat::Identity(d, d);
}

inline Mat random_orthogonal(std::mt19937_64& rng, int d)
{
    Eigen::HouseholderQR<Mat> qr(random_matrix(rng, d, d));
    return qr.householderQ();
}

// Descending cosines in [0, 1) with pairwise gaps of at least `gap`.
inline std::vector<double> random_cosines(std::mt19937_64& rng, int n, double gap = 0.05)
{
    for (;;) {
        std::vector<double> c(n);
        for (double& x : c) x = uniform(rng, 0.05, 0.95);
        std::sort(c.rbegin(), c.rend());
        bool ok = true;
        for (int a = 0; a + 1 < n; ++a) ok = ok && c[a] - c[a + 1] > gap;
        if (ok) return c;
    }
}

// A g-skew operator whose angle spectrum is exactly `cos`: block diagonal
// c_a J_0 in a g-orthonormal basis rotated by a random orthogonal matrix.
struct SkewCase {
    MetricTensor g;
    Mat a;
    std::vector<double> cos;
};

inline SkewCase random_skew_with_angles(std::mt19937_64& rng, const std::vector<double>& cos)
{
    const int n = static_cast<int>(cos.size());
    const int d = 2 * n;
    MetricTensor g(random_spd(rng, d));
    Mat block = Mat::Zero(d, d);
    for (int a = 0; a < n; ++a) {
        block(2 * a + 1, 2 * a) = cos[a];
        block(2 * a, 2 * a + 1) = -cos[a];
    }
    const Mat q = random_orthogonal(rng, d);
    return {g, g.from_orthonormal(q * block * q.transpose()), cos};
}

inline Vec sample(const ImmersionChart& f, std::mt19937_64& rng) { return f.sampler(rng); }

}  // namespace kal::testgen
