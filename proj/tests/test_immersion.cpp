// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/immersion.hpp"

#include <doctest.h>

using namespace kal;

namespace {

double max_diff(const Tensor4& a, const Tensor4& b)
{
    double m = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

const std::vector<std::string> kExamples = {
    "tilted-plane?alpha=1.0&n=2", "conj-curve?k=3", "product-conj", "clifford-cp2?K=4",
    "lagrangian-graph?f=mixed&eps=0.2&n=1", "hk-complex-plane", "torus-graph?eps=0.1&n=1", "holo-torus",
    "tilted-torus", "rotated-holomorphic?n=2&seed=11", "inversion-graph"};

}  // namespace

TEST_CASE("Gauss equation agrees with curvature from metric differences")
{
    std::mt19937_64 rng(31);
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        for (int trial = 0; trial < 2; ++trial) {
            const Vec p = f->sampler(rng);
            const CurvatureData cd = domain_curvature(*f, p);
            CAPTURE(id);
            CHECK(max_diff(cd.rm_fd, cd.rm_gauss) < 1e-6);
        }
    }
}

TEST_CASE("finite-difference jets agree with dual-number jets")
{
    std::mt19937_64 rng(32);
    FdParams fd;
    fd.step = 1e-3;
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        const ImmersionPtr g = with_fd_jets(*f, fd);
        const Vec p = f->sampler(rng);
        const Jets a = evaluate_jets(*f, p, 2), b = evaluate_jets(*g, p, 2);
        CAPTURE(id);
        CHECK((a.value - b.value).norm() < 1e-14);
        CHECK(max_abs(a.first - b.first) < 1e-9);
        double d2 = 0.0;
        for (size_t i = 0; i < a.second.a.size(); ++i) d2 = std::max(d2, std::abs(a.second.a[i] - b.second.a[i]));
        CHECK(d2 < 1e-6);
    }
}

TEST_CASE("induced metric is the pullback of the target metric")
{
    std::mt19937_64 rng(33);
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        const Vec p = f->sampler(rng);
        const PointGeometry pg = first_fundamental(*f, p);
        CHECK(max_abs(pg.g_m.components() - pg.dF.transpose() * pg.g_n * pg.dF) < 1e-12);
        // The normal projector kills tangent vectors and is idempotent.
        CHECK(max_abs(pg.normal_projector * pg.dF) < 1e-10);
        CHECK(max_abs(pg.normal_projector * pg.normal_projector - pg.normal_projector) < 1e-10);
    }
}

TEST_CASE("second fundamental form is normal and symmetric")
{
    std::mt19937_64 rng(34);
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        const Vec p = f->sampler(rng);
        const PointGeometry pg = first_fundamental(*f, p);
        const SecondFundamental sf = second_fundamental(*f, pg);
        const int d = f->domain_dim;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                CHECK((sf.at(i, j, d) - sf.at(j, i, d)).norm() < 1e-12);
                CHECK((pg.dF.transpose() * pg.g_n * sf.at(i, j, d)).norm() < 1e-9);
            }
    }
}

TEST_CASE("complex curves are minimal")
{
    std::mt19937_64 rng(35);
    for (const std::string id : {"conj-curve?k=2", "holo-torus?eps=0", "rotated-holomorphic?n=2&seed=3", "product-conj"}) {
        const ImmersionPtr f = make_immersion(id);
        const Vec p = f->sampler(rng);
        const PointGeometry pg = first_fundamental(*f, p);
        CAPTURE(id);
        CHECK(second_fundamental(*f, pg).mean_curvature.norm() < 1e-10);
    }
}

TEST_CASE("periodic charts close up with their translations")
{
    for (const std::string id : {"torus-graph?eps=0.1&n=1", "holo-torus", "tilted-torus", "lagrangian-graph"}) {
        const ImmersionPtr f = make_immersion(id);
        REQUIRE(f->periodic);
        const Vec p = Vec::Constant(f->domain_dim, 0.37);
        for (int k = 0; k < f->domain_dim; ++k) {
            Vec q = p;
            q[k] += f->periodic->periods[k];
            CHECK((f->eval(q) - f->eval(p) - f->periodic->translations.col(k)).norm() < 1e-12);
        }
    }
}

TEST_CASE("example ids parse, canonicalize and reject junk")
{
    CHECK(make_immersion("conj-curve")->id == "conj-curve?k=2");
    CHECK(make_immersion("tilted-plane?n=2")->n() == 2);
    CHECK_THROWS(make_immersion("conj-curve?k=1"));
    CHECK_THROWS(make_immersion("conj-curve?q=2"));
    CHECK_THROWS(make_immersion("nope"));
    CHECK_THROWS(make_immersion("lagrangian-graph?f=cos"));
    // Round trip through the canonical id.
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        CHECK(make_immersion(f->id)->id == f->id);
    }
}

TEST_CASE("samplers are deterministic in their seed")
{
    for (const std::string& id : kExamples) {
        const ImmersionPtr f = make_immersion(id);
        std::mt19937_64 a(5), b(5);
        CHECK((f->sampler(a) - f->sampler(b)).norm() == 0.0);
    }
}

TEST_CASE("conjugate curve curvature matches the conformal closed form")
{
    // g = lambda delta with lambda = 1 + 4r^2, so K = -lap(log lambda) / (2 lambda) = -8 / lambda^3.
    const ImmersionPtr f = make_immersion("conj-curve?k=2");
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec p = f->sampler(rng);
        const double lambda = 1.0 + 4.0 * p.squaredNorm();
        CHECK(max_abs(induced_metric(*f, p) - lambda * Mat::Identity(2, 2)) < 1e-10);
        const CurvatureData cd = domain_curvature(*f, p);
        const double k = -8.0 / (lambda * lambda * lambda);
        CHECK(std::abs(cd.rm_gauss(0, 1, 0, 1) - k * lambda * lambda) < 1e-6);
        CHECK(std::abs(cd.rm_fd(0, 1, 0, 1) - k * lambda * lambda) < 1e-6);
    }
}
