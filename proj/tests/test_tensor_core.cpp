// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/tensor_core.hpp"

#include <doctest.h>

#include <algorithm>

using namespace kal;
using namespace kal::testgen;

namespace {

CMat random_cmat(std::mt19937_64& rng, int m, double scale)
{
    CMat a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = cplx(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
    return a;
}

// A(x) = D + sum_a sin(x_a) B_a + sum_ab x_a x_b C_ab, diagonal at x = 0.
MatrixPath random_path(std::mt19937_64& rng, int m, int r)
{
    CMat d = CMat::Zero(m, m);
    for (int j = 0; j < m; ++j) d(j, j) = cplx(uniform(rng, 0.5, 1.5), uniform(rng, -0.5, 0.5));
    std::vector<CMat> b, c;
    for (int a = 0; a < r; ++a) b.push_back(random_cmat(rng, m, 1.0));
    for (int a = 0; a < r * r; ++a) c.push_back(random_cmat(rng, m, 0.5));
    MatrixPath path;
    path.evaluator = [d, b, c, r](const Vec& x) {
        CMat out = d;
        for (int a = 0; a < r; ++a) out += std::sin(x[a]) * b[a];
        for (int a = 0; a < r; ++a)
            for (int e = 0; e < r; ++e) out += (x[a] * x[e]) * c[a * r + e];
        return out;
    };
    path.base_point = Vec::Zero(r);
    for (int j = 0; j < m; ++j) path.base_diagonal.push_back(d(j, j));
    return path;
}

// Scalar oracle: central differences of t -> det A(p + t u + s v), step 1e-3, fourth order.
cplx det_at(const MatrixPath& path, const Vec& x) { return path.evaluator(x).determinant(); }

cplx scalar_first(const MatrixPath& path, const Vec& u)
{
    const double h = 1e-3;
    const Vec& p = path.base_point;
    return (-det_at(path, p + 2 * h * u) + 8.0 * det_at(path, p + h * u) - 8.0 * det_at(path, p - h * u) +
            det_at(path, p - 2 * h * u)) /
           (12.0 * h);
}

cplx scalar_mixed(const MatrixPath& path, const Vec& u, const Vec& v)
{
    const double h = 1e-3;
    const double w[4] = {-1.0, 8.0, -8.0, 1.0};
    const double o[4] = {2.0, 1.0, -1.0, -2.0};
    cplx acc = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) acc += w[i] * w[j] * det_at(path, path.base_point + o[i] * h * u + o[j] * h * v);
    return acc / (144.0 * h * h);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / (std::abs(b) + 1e-12); }

}  // namespace

TEST_CASE("metric tensor orthonormal frame and operator round trip")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + 2 * (trial % 3);
        MetricTensor g(random_spd(rng, d));
        CHECK(max_abs(g.onb().transpose() * g.components() * g.onb() - Mat::Identity(d, d)) < 1e-12);
        CHECK(max_abs(g.components() * g.inverse() - Mat::Identity(d, d)) < 1e-12);
        const Mat op = random_matrix(rng, d, d);
        CHECK(max_abs(g.from_orthonormal(g.to_orthonormal(op)) - op) < 1e-12);
    }
}

TEST_CASE("metric tensor rejects non-symmetric and indefinite input")
{
    Mat bad(2, 2);
    bad << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(MetricTensor{bad}, GeometryError);
    Mat indef(2, 2);
    indef << 1, 0, 0, -1;
    CHECK_THROWS_AS(MetricTensor{indef}, GeometryError);
}

TEST_CASE("two-form to operator satisfies g(AX, Y) = form(X, Y)")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 4;
        MetricTensor g(random_spd(rng, d));
        Mat b = random_matrix(rng, d, d);
        const Mat form = b - b.transpose();
        const SkewOperator a = two_form_to_operator(form, g);
        CHECK(max_abs(a.a.transpose() * g.components() - form) < 1e-12);
    }
    MetricTensor g(Mat::Identity(2, 2));
    CHECK_THROWS_AS(two_form_to_operator(Mat::Identity(2, 2), g), GeometryError);
}

TEST_CASE("polar decomposition recovers planted angles")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 4;
        const std::vector<double> cos = random_cosines(rng, n);
        const SkewCase c = random_skew_with_angles(rng, cos);
        const PolarParts pp = polar_decompose_skew({c.a, c.g});
        const std::vector<double> got = sorted_angle_spectrum(pp);
        REQUIRE(got.size() == cos.size());
        for (int a = 0; a < n; ++a) CHECK(got[a] == doctest::Approx(cos[a]).epsilon(1e-12));
        const int d = 2 * n;
        // A = J_omega gt, gt self-adjoint and commuting with J_omega, J_omega^2 = -1 at full rank.
        CHECK(max_abs(pp.jomega * pp.gtilde - c.a) < 1e-11);
        CHECK(max_abs(pp.gtilde * pp.jomega - pp.jomega * pp.gtilde) < 1e-11);
        CHECK(max_abs(pp.jomega * pp.jomega + Mat::Identity(d, d)) < 1e-10);
        const Mat gg = c.g.components() * pp.gtilde;
        CHECK(max_abs(gg - gg.transpose()) < 1e-11);
        CHECK(pp.rank == d);
    }
}

TEST_CASE("polar decomposition reports the kernel of a degenerate form")
{
    std::mt19937_64 rng(5);
    const SkewCase c = random_skew_with_angles(rng, {0.8, 0.0});
    const PolarParts pp = polar_decompose_skew({c.a, c.g});
    CHECK(pp.rank == 2);
    REQUIRE(pp.kernel_basis.size() == 2);
    for (const Vec& k : pp.kernel_basis) CHECK((c.a * k).norm() < 1e-10);
    CHECK(pp.cos[1] == 0.0);
}

TEST_CASE("complexified frame has the expected Gram matrix")
{
    std::mt19937_64 rng(3);
    const int n = 2;
    MetricTensor g(random_spd(rng, 2 * n));
    const Mat e = g.onb() * random_orthogonal(rng, 2 * n);
    std::vector<Vec> x = {e.col(0), e.col(2)}, y = {e.col(1), e.col(3)};
    const std::vector<CVec> z = complexify_frame(x, y, g);
    const CMat gram = complexified_gram(z, g);
    // g(Z_a, conj Z_b) = delta_ab / 2 and g(Z_a, Z_b) = 0.
    for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
            const bool paired = (a < n) != (b < n) && (a % n) == (b % n);
            CHECK(std::abs(gram(a, b) - cplx(paired ? 0.5 : 0.0)) < 1e-12);
        }
    x[0] *= 2.0;
    CHECK_THROWS_AS(complexify_frame(x, y, g), GeometryError);
}

TEST_CASE("det path derivatives match scalar finite differences on random 4x4 paths")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int r = 2 + trial % 2;
        const MatrixPath path = random_path(rng, 4, r);
        Vec u(r), v(r);
        for (int a = 0; a < r; ++a) {
            u[a] = uniform(rng, -1, 1);
            v[a] = uniform(rng, -1, 1);
        }
        const DetDerivatives dd = det_path_derivatives(path, u, v);
        CHECK(rel(dd.first, scalar_first(path, u)) < 1e-7);
        CHECK(rel(dd.second, scalar_mixed(path, u, v)) < 1e-7);
        cplx lap = 0.0;
        for (int a = 0; a < r; ++a) lap += scalar_mixed(path, Vec::Unit(r, a), Vec::Unit(r, a));
        CHECK(rel(dd.laplacian, lap) < 1e-7);
    }
}

TEST_CASE("det path derivatives reject a non-diagonal base")
{
    MatrixPath path;
    path.evaluator = [](const Vec&) {
        CMat a = CMat::Identity(2, 2);
        a(0, 1) = 0.3;
        return a;
    };
    path.base_point = Vec::Zero(1);
    CHECK_THROWS_AS(det_path_derivatives(path, Vec::Ones(1), Vec::Ones(1)), GeometryError);
}

TEST_CASE("block skew operator has the block weights as angles")
{
    Mat a = Mat::Zero(4, 4);
    a(1, 0) = 0.5;
    a(0, 1) = -0.5;
    a(3, 2) = 0.25;
    a(2, 3) = -0.25;
    const PolarParts pp = polar_decompose_skew({a, MetricTensor(Mat::Identity(4, 4))});
    CHECK(pp.rank == 4);
    CHECK(pp.cos[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pp.cos[1] == doctest::Approx(0.25).epsilon(1e-14));
}
