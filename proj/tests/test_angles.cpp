// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/angles.hpp"

#include <doctest.h>

using namespace kal;
using namespace kal::testgen;

TEST_CASE("tilted plane has cos equal to cos(alpha)")
{
    std::mt19937_64 rng(41);
    for (double alpha : {0.3, M_PI / 3.0, 1.2})
        for (int n : {1, 2, 3}) {
            std::ostringstream id;
            id.precision(17);
            id << "tilted-plane?alpha=" << alpha << "&n=" << n;
            const ImmersionPtr f = make_immersion(id.str());
            const AngleData ad = angle_data(*f, f->sampler(rng));
            REQUIRE(ad.n() == n);
            for (double c : ad.cos_spectrum) CHECK(std::abs(c - std::cos(alpha)) < 1e-12);
        }
}

TEST_CASE("conjugate curve cosine follows (1 - k^2 r^(2k-2)) / (1 + k^2 r^(2k-2))")
{
    // |d conj(z)^k / dz| = k r^(k-1); the plane is anti-complex where that exceeds 1.
    std::mt19937_64 rng(42);
    for (int k : {2, 3, 4}) {
        const ImmersionPtr f = make_immersion("conj-curve?k=" + std::to_string(k));
        for (int trial = 0; trial < 10; ++trial) {
            const Vec p = f->sampler(rng);
            const double s = k * std::pow(p.norm(), k - 1);
            const double expect = std::abs((1 - s * s) / (1 + s * s));
            CHECK(std::abs(angle_data(*f, p).cos_spectrum[0] - expect) < 1e-12);
        }
    }
    Vec p(2);
    p << 0.3, 0.0;
    CHECK(std::abs(angle_data(*make_immersion("conj-curve?k=2"), p).cos_spectrum[0] - 8.0 / 17.0) < 1e-10);
}

TEST_CASE("kappa from the spectrum equals the determinant form")
{
    std::mt19937_64 rng(43);
    for (const std::string id : {"conj-curve?k=2", "product-conj", "clifford-cp2?K=4", "lagrangian-graph?eps=0.3",
                                 "torus-graph?eps=0.2&n=2", "rotated-holomorphic?n=2&seed=5", "tilted-torus"}) {
        const ImmersionPtr f = make_immersion(id);
        for (int trial = 0; trial < 5; ++trial) {
            const AngleData ad = angle_data(*f, f->sampler(rng));
            if (!ad.kappa_finite()) continue;
            CAPTURE(id);
            CHECK(std::abs(ad.kappa - ad.kappa_det) < 1e-9);
        }
    }
}

TEST_CASE("angle spectrum is invariant under reparametrization")
{
    // Angles depend on the tangent plane only, so dF -> dF R leaves them fixed.
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 3;
        const Mat df = random_matrix(rng, 4 * n, 2 * n);
        const Mat g = random_spd(rng, 4 * n);
        Mat j = Mat::Zero(4 * n, 4 * n);
        for (int a = 0; a < 2 * n; ++a) {
            j(2 * a + 1, 2 * a) = 1.0;
            j(2 * a, 2 * a + 1) = -1.0;
        }
        // A metric compatible with j: average g over the action of j.
        const Mat gj = 0.5 * (g + j.transpose() * g * j);
        const Mat r = random_matrix(rng, 2 * n, 2 * n) + 3.0 * Mat::Identity(2 * n, 2 * n);
        const AngleData a = angle_data_from(df, gj, j), b = angle_data_from(df * r, gj, j);
        for (int k = 0; k < n; ++k) CHECK(std::abs(a.cos_spectrum[k] - b.cos_spectrum[k]) < 1e-9);
        for (double c : a.cos_spectrum) CHECK((c >= 0.0 && c <= 1.0 + 1e-12));
    }
}

TEST_CASE("classification of points and spectra")
{
    CHECK(classify({1.0, 0.5}).complex_direction);
    CHECK(classify({0.5, 0.0}).lagrangian_direction);
    CHECK(classify({0.4, 0.4}).kind == PointClass::EqualAngles);
    CHECK(classify({0.6, 0.4}).kind == PointClass::Generic);
    CHECK(classify({1.0}).kind == PointClass::Complex);
    CHECK(classify({0.0}).kind == PointClass::Lagrangian);
    CHECK(std::isinf(kappa_of({1.0})));
    CHECK(kappa_of({0.0}) == 0.0);
    CHECK(kappa_of({0.5}) == doctest::Approx(std::log(3.0)));

    Vec p = Vec::Zero(2);
    CHECK(classify_point(*make_immersion("tilted-plane?alpha=0"), p).kind == PointClass::Complex);
    CHECK(classify_point(*make_immersion("tilted-plane?alpha=1.5707963267948966"), p).kind ==
          PointClass::Lagrangian);
    CHECK(classify_point(*make_immersion("tilted-plane?alpha=1&n=2"), Vec::Zero(4)).kind == PointClass::EqualAngles);
}

TEST_CASE("hyper-Kahler complex plane has cos |cos nu| for omega_I")
{
    for (double nu : {0.2, 0.9, 2.0, 2.8})
        for (double phi : {0.0, 1.1, 4.0}) {
            std::ostringstream id;
            id.precision(17);
            id << "hk-complex-plane?nu=" << nu << "&phi=" << phi;
            const ImmersionPtr f = make_immersion(id.str());
            const AngleData ad = angle_data(*f, Vec::Zero(f->domain_dim));
            for (double c : ad.cos_spectrum) CHECK(std::abs(c - std::abs(std::cos(nu))) < 1e-10);
        }
}

TEST_CASE("diagonalizing frame is orthonormal and splits the pullback form")
{
    std::mt19937_64 rng(45);
    for (const std::string id : {"product-conj", "rotated-holomorphic?n=2&seed=11", "torus-graph?eps=0.2&n=2"}) {
        const ImmersionPtr f = make_immersion(id);
        const Vec p = f->sampler(rng);
        const AngleData ad = angle_data(*f, p);
        const DiagonalizingFrame fr = diagonalizing_frame(ad);
        const Mat g = ad.polar.g.components();
        const int n = ad.n();
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                const double d = a == b ? 1.0 : 0.0;
                CHECK(std::abs(fr.x[a].dot(g * fr.x[b]) - d) < 1e-10);
                CHECK(std::abs(fr.y[a].dot(g * fr.y[b]) - d) < 1e-10);
                CHECK(std::abs(fr.x[a].dot(g * fr.y[b])) < 1e-10);
                // pullback form pairs X_a with Y_a only, with weight cos_a.
                const double w = fr.x[a].dot(ad.pullback_form * fr.y[b]);
                CHECK(std::abs(std::abs(w) - (a == b ? fr.cos[a] : 0.0)) < 1e-10);
            }
        }
    }
}

TEST_CASE("graph of a conformal inversion has equal, varying angles")
{
    // du = |x|^-2 Q with Q orthogonal, so g = (1 + |x|^-4) I and both angles agree.
    const ImmersionPtr f = make_immersion("inversion-graph");
    std::mt19937_64 rng(46);
    double lo = 1.0, hi = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec p = f->sampler(rng);
        const double r2 = p.squaredNorm();
        CHECK(max_abs(induced_metric(*f, p) - (1.0 + 1.0 / (r2 * r2)) * Mat::Identity(4, 4)) < 1e-12);
        const AngleData ad = angle_data(*f, p);
        CHECK(std::abs(ad.cos_spectrum[0] - ad.cos_spectrum[1]) < 1e-12);
        lo = std::min(lo, ad.cos_spectrum[0]);
        hi = std::max(hi, ad.cos_spectrum[0]);
    }
    CHECK(hi - lo > 0.1);
}
