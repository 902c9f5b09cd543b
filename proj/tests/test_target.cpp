// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/target.hpp"

#include <doctest.h>

using namespace kal;
using namespace kal::testgen;

namespace {

Vec random_point(std::mt19937_64& rng, int d, double radius)
{
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = uniform(rng, -radius, radius);
    return p;
}

double max_diff(const Tensor4& a, const Tensor4& b)
{
    double m = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

}  // namespace

TEST_CASE("Fubini-Study closed-form curvature matches metric jets")
{
    std::mt19937_64 rng(17);
    for (int m : {1, 2, 3}) {
        const TargetPtr t = make_fubini_study(m, 4.0);
        for (int trial = 0; trial < 5; ++trial) {
            const Vec p = random_point(rng, 2 * m, 0.4);
            CHECK(max_diff(t->curvature(p), t->curvature_from_jets(p)) < 1e-9);
        }
    }
}

TEST_CASE("Fubini-Study Ricci is (m+1)K/2 times the metric")
{
    std::mt19937_64 rng(18);
    for (int m : {1, 2, 3})
        for (double k : {1.0, 4.0}) {
            const TargetPtr t = make_fubini_study(m, k);
            REQUIRE(t->einstein_constant);
            CHECK(*t->einstein_constant == doctest::Approx((m + 1) * k / 2.0));
            const Vec p = random_point(rng, 2 * m, 0.3);
            const Mat g = t->metric(p);
            const Mat ric = ricci_contraction(t->curvature_from_jets(p), g.inverse());
            CHECK(max_abs(ric - (m + 1) * k / 2.0 * g) < 1e-8);
        }
}

TEST_CASE("holomorphic sectional curvature of Fubini-Study is K")
{
    std::mt19937_64 rng(19);
    const double k = 4.0;
    const TargetPtr t = make_fubini_study(2, k);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec p = random_point(rng, 4, 0.4);
        const Vec x = random_point(rng, 4, 1.0);
        const Vec jx = t->j * x;
        const Mat g = t->metric(p);
        const Tensor4 r = t->curvature(p);
        double rxjx = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int e = 0; e < 4; ++e) rxjx += r(a, b, c, e) * x[a] * jx[b] * x[c] * jx[e];
        const double n2 = x.dot(g * x);
        CHECK(rxjx / (n2 * n2) == doctest::Approx(k).epsilon(1e-10));
    }
}

TEST_CASE("catalog targets pass the structural audit")
{
    std::mt19937_64 rng(20);
    for (const std::string id : {"flat-c2", "torus-c2", "cp2-K4", "cp1-K1", "hk-r4", "hk-r8"}) {
        const TargetPtr t = make_target(id);
        std::vector<Vec> pts;
        for (int k = 0; k < 3; ++k) pts.push_back(random_point(rng, t->real_dim(), 0.3));
        const IdentityReport rep = target_audit(*t, pts, 1e-8);
        CAPTURE(id);
        CHECK(rep.verdict == Verdict::Pass);
    }
}

TEST_CASE("unknown target ids are rejected")
{
    CHECK_THROWS(make_target("cp2"));
    CHECK_THROWS(make_target("flat-c0"));
    CHECK_THROWS(make_target("sphere"));
}

TEST_CASE("hyper-Kahler structures from the sphere anticommute iff their axes are orthogonal")
{
    std::mt19937_64 rng(21);
    for (int dim : {4, 8}) {
        const auto [t, hk] = make_hyperkahler_flat(dim);
        const Mat id = Mat::Identity(dim, dim);
        CHECK(max_abs(hk.i * hk.j - hk.k) < 1e-15);
        for (int trial = 0; trial < 20; ++trial) {
            SpherePoint a{uniform(rng, 0, M_PI), uniform(rng, 0, 2 * M_PI)};
            SpherePoint b{uniform(rng, 0, M_PI), uniform(rng, 0, 2 * M_PI)};
            const Mat ja = j_from_sphere(hk, a), jb = j_from_sphere(hk, b);
            CHECK(max_abs(ja * ja + id) < 1e-12);
            // J_a J_b + J_b J_a = -2 <a, b> Id
            const double dot = a.unit_vector().dot(b.unit_vector());
            CHECK(max_abs(ja * jb + jb * ja + 2.0 * dot * id) < 1e-12);
        }
    }
}
