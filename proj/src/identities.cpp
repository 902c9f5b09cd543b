// SPDX-License-Identifier: MIT
#include "kal/identities.hpp"

#include "kal/parallel.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kal {

namespace {

const cplx kI(0.0, 1.0);

class NotApplicable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& why)
{
    if (!ok) throw NotApplicable(why);
}

// Stencil settings for field calculus; the chart default is order 4.
FdParams field_fd(const ImmersionChart& f) { return f.fd; }

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Hermitian length sqrt(v^H g v) of a complex vector.
double hnorm(const CVec& v, const Mat& g)
{
    return std::sqrt(std::max(0.0, (v.adjoint() * g.cast<cplx>() * v)(0, 0).real()));
}

double gnorm(const Vec& v, const Mat& g) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

struct Base {
    PointGeometry pg;
    SecondFundamental sf;
    AngleData ad;
};

Base base_at(const ImmersionChart& f, const Vec& p)
{
    Base b;
    b.pg = first_fundamental(f, p);
    b.sf = second_fundamental(f, b.pg);
    b.ad = angle_data_from(b.pg.dF, b.pg.g_n, f.target->j);
    return b;
}

void gate_no_complex(const AngleData& ad) { require(!ad.classification.complex_direction, "complex direction present"); }
void gate_no_lagrangian(const AngleData& ad)
{
    require(!ad.classification.lagrangian_direction, "Lagrangian direction present");
}
void gate_equal(const AngleData& ad) { require(ad.classification.spread < kEqualAngleTol, "angles are not equal"); }

double gate_einstein(const ImmersionChart& f)
{
    require(f.target->einstein_constant.has_value(), "target is not Kahler-Einstein");
    return *f.target->einstein_constant;
}

void gate_minimal(const ImmersionChart& f, const Vec& p, const CheckOptions& opt)
{
    require(stencil_mean_curvature(f, p) < opt.minimality_tol, "requires minimal");
}

HyperKahlerTriple gate_hyperkahler(const ImmersionChart& f)
{
    require(f.target->id.rfind("hk-", 0) == 0, "requires a hyper-Kahler target");
    return make_hyperkahler_flat(f.target->real_dim()).second;
}

// Deterministic generator seeded from the bit pattern of the point.
std::mt19937_64 rng_from_point(const Vec& p)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        std::uint64_t bits = 0;
        const double x = p[i];
        std::memcpy(&bits, &x, sizeof bits);
        h = (h ^ bits) * 1099511628211ULL;
    }
    return std::mt19937_64(h);
}

Eigen::Vector3d random_unit3(std::mt19937_64& rng)
{
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double a = 2.0 * M_PI * uniform01(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {z, r * std::cos(a), r * std::sin(a)};
}

SpherePoint sphere_point(const Eigen::Vector3d& v)
{
    return SpherePoint{std::acos(std::clamp(v[0], -1.0, 1.0)), std::atan2(v[2], v[1])};
}

ScalarField mean_cos_field(const ImmersionChart& f, const FrameRecipe& recipe)
{
    return [&f, recipe](const Vec& q) { return mean_of(tracked_cos(f, q, recipe)); };
}

ScalarField kappa_field(const ImmersionChart& f, const FrameRecipe& recipe)
{
    return [&f, recipe](const Vec& q) { return kappa_of(tracked_cos(f, q, recipe)); };
}

MatField pullback_field(const ImmersionChart& f)
{
    return [&f](const Vec& q) { return pullback_form_at(f, q); };
}

MatField jomega_field(const ImmersionChart& f)
{
    return [&f](const Vec& q) { return jomega_form_at(f, q); };
}

CVec second_fundamental_c(const SecondFundamental& sf, const CVec& a, const CVec& b, int d)
{
    const int t = static_cast<int>(sf.nabla_dF.front().size());
    CVec v = CVec::Zero(t);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const cplx w = a[i] * b[j];
            if (w != cplx(0.0)) v += w * sf.at(i, j, d).cast<cplx>();
        }
    return v;
}

Tensor3 triple_of(const Base& b, const Mat& j, int d)
{
    const Mat jdf = j * b.pg.dF;
    Tensor3 tr(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) tr(k, i, l) = b.sf.at(k, i, d).dot(b.pg.g_n * jdf.col(l));
    return tr;
}

// Five lines of the general Laplacian-of-kappa expression at a frame point.
std::array<cplx, 5> delta_kappa_lines(const ImmersionChart& f, const PointGeometry& pg, const FrameCalculus& fc)
{
    const int n = fc.n;
    const TargetGeometry& tg = *f.target;
    const Tensor4 rn = tg.curvature(pg.fp);
    const CMat ric = tg.ricci(pg.fp).cast<cplx>();
    const CMat jc = tg.j.cast<cplx>();
    const CMat dfc = pg.dF.cast<cplx>();
    std::vector<CVec> dfz, jdfz;
    for (int a = 0; a < 2 * n; ++a) {
        dfz.push_back(dfc * fc.zz[a]);
        jdfz.push_back(jc * dfz.back());
    }
    const auto& c = fc.frame.cos;
    std::vector<double> s2(n);
    for (int a = 0; a < n; ++a) s2[a] = 1.0 - c[a] * c[a];
    auto bar = [n](int a) { return FrameCalculus::bar(a, n); };

    std::array<cplx, 5> line{};
    for (int be = 0; be < n; ++be) line[0] += 4.0 * kI * (jdfz[be].transpose() * ric * dfz[bar(be)])(0, 0);
    for (int be = 0; be < n; ++be)
        for (int mu = 0; mu < n; ++mu) {
            const CVec last = jdfz[bar(mu)] + kI * c[mu] * dfz[bar(mu)];
            line[1] += 32.0 / s2[mu] * contract4(rn, dfz[be], dfz[mu], dfz[bar(be)], last).imag();
        }
    for (int be = 0; be < n; ++be)
        for (int mu = 0; mu < n; ++mu)
            for (int rho = 0; rho < n; ++rho) {
                const double w = s2[mu] * s2[rho];
                line[2] -= 64.0 * (c[mu] + c[rho]) / w *
                           (fc.g3(be, mu, bar(rho)) * fc.g3(bar(be), rho, bar(mu))).real();
                line[3] += 32.0 * (c[rho] - c[mu]) / w *
                           (std::norm(fc.g3(be, mu, rho)) + std::norm(fc.g3(bar(be), mu, rho)));
                line[4] += 32.0 * (c[mu] + c[rho]) / s2[mu] *
                           (std::norm(fc.conn(be, mu, rho)) + std::norm(fc.conn(bar(be), mu, rho)));
            }
    return line;
}

// Sum over the frame of R(b, m, conj b, conj m).
cplx holomorphic_trace(const Tensor4& rm, const std::vector<CVec>& z)
{
    cplx s = 0.0;
    for (const CVec& b : z)
        for (const CVec& m : z) s += contract4(rm, b, m, CVec(b.conjugate()), CVec(m.conjugate()));
    return s;
}

using Impl = std::string (*)(const ImmersionChart&, const Vec&, const CheckOptions&, IdentityReport&);

// ---------------------------------------------------------------------------
// First-order identities

std::string chk_ricci_reconstruction(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    const TargetGeometry& tg = *f.target;
    const int t = tg.real_dim();
    const Mat lhs = ricci_contraction(tg.curvature_from_jets(b.pg.fp), b.pg.g_n.inverse());
    const Tensor4 rn = tg.curvature(b.pg.fp);
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const CMat jc = tg.j.cast<cplx>();
    const CMat dfc = b.pg.dF.cast<cplx>();
    CMat rhs = CMat::Zero(t, t);
    for (size_t mu = 0; mu < fr.z.size(); ++mu) {
        const double s2 = 1.0 - fr.cos[mu] * fr.cos[mu];
        const CVec a = dfc * fr.z[mu];
        const CVec w = b.pg.normal_projector.cast<cplx>() * (jc * (dfc * fr.z[mu].conjugate()));
        CMat m = CMat::Zero(t, t);
        for (int u = 0; u < t; ++u)
            for (int v = 0; v < t; ++v) {
                cplx s = 0.0;
                for (int k = 0; k < t; ++k) {
                    if (a[k] == cplx(0.0)) continue;
                    for (int l = 0; l < t; ++l) s += rn(u, v, k, l) * a[k] * w[l];
                }
                m(u, v) = s;
            }
        rhs += (4.0 / s2) * m * jc;
    }
    r.lhs = lhs.norm();
    r.rhs = rhs.norm();
    r.residual_abs = (lhs.cast<cplx>() - rhs).cwiseAbs().maxCoeff();
    r.components["imaginary_part"] = rhs.imag().cwiseAbs().maxCoeff();
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_nabla_pullback(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int d = f.domain_dim;
    const Base b = base_at(f, p);
    const DomainMetric dm = domain_metric(f, p);
    const Tensor3 np = covariant_derivative_02(pullback_field(f), dm, p, field_fd(f));
    const Tensor3 tr = triple_of(b, f.target->j, d);
    double res = 0.0, rhs = 0.0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double v = -tr(k, i, j) + tr(k, j, i);
                rhs = std::max(rhs, std::abs(v));
                res = std::max(res, std::abs(np(k, i, j) - v));
            }
    r.lhs = np.max_abs();
    r.rhs = rhs;
    r.residual_abs = res;
    r.oracle["terms_evaluated"] = 2;
    return {};
}

std::string chk_torsion_lemma(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int d = f.domain_dim;
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    const ConnectionComparison cc = torsion_and_difference(f, p);
    require(!cc.singular, "complex direction present");
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const CMat phic = cc.phi.cast<cplx>();
    auto phi_torsion = [&](const CVec& x, const CVec& y) -> CVec {
        CVec v = CVec::Zero(d);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) v[k] += x[i] * y[j] * cc.torsion(k, i, j);
        return phic * v;
    };
    const int n = static_cast<int>(fr.z.size());
    double res_mixed = 0.0, res_pure = 0.0, lhs = 0.0, rhs = 0.0;
    for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
            const CVec za = fr.z[al], zb = fr.z[be], zbb = fr.z[be].conjugate();
            const CVec l1 = phi_torsion(za, zbb);
            const CVec r1 = kI * (fr.cos[al] + fr.cos[be]) * second_fundamental_c(b.sf, za, zbb, d);
            const CVec l2 = phi_torsion(za, zb);
            const CVec r2 = kI * (fr.cos[al] - fr.cos[be]) * second_fundamental_c(b.sf, za, zb, d);
            res_mixed = std::max(res_mixed, hnorm(l1 - r1, b.pg.g_n));
            res_pure = std::max(res_pure, hnorm(l2 - r2, b.pg.g_n));
            lhs = std::max({lhs, hnorm(l1, b.pg.g_n), hnorm(l2, b.pg.g_n)});
            rhs = std::max({rhs, hnorm(r1, b.pg.g_n), hnorm(r2, b.pg.g_n)});
        }
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual_abs = std::max(res_mixed, res_pure);
    r.components["mixed_type"] = res_mixed;
    r.components["pure_type"] = res_pure;
    r.oracle["terms_evaluated"] = 2;
    return {};
}

std::string chk_grad_logsin(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_complex(b.ad);
    gate_no_lagrangian(b.ad);
    const FrameCalculus fc = frame_calculus(f, p);
    const FrameRecipe recipe = fc.frame.recipe;
    const DomainMetric dm = domain_metric(f, p);
    const ScalarField cbar = mean_cos_field(f, recipe);
    const ScalarField logs2 = [&](const Vec& q) {
        const double c = cbar(q);
        return std::log(1.0 - c * c);
    };
    const Vec grad = field_gradient(logs2, dm, p, field_fd(f));
    const Mat phi = phi_matrix(b.pg.dF, f.target->j, b.ad.pullback_operator.a);
    const Vec lhs = phi * (0.25 * (1.0 - n) * grad);

    const double c = mean_of(b.ad.cos_spectrum);
    const double s2 = 1.0 - c * c;
    CVec acc = CVec::Zero(phi.rows());
    for (int be = 0; be < n; ++be) {
        cplx coeff = 0.0;
        for (int mu = 0; mu < n; ++mu) coeff += fc.g3(mu + n, mu, be) - fc.g3(mu + n, be, mu);
        acc += coeff * (phi.cast<cplx>() * fc.zz[be + n]);
    }
    const Vec rhs = (4.0 * c / s2) * (kI * acc).real();
    r.lhs = gnorm(lhs, b.pg.g_n);
    r.rhs = gnorm(rhs, b.pg.g_n);
    r.residual_abs = gnorm(lhs - rhs, b.pg.g_n);
    r.oracle["terms_evaluated"] = 2;
    return {};
}

std::string chk_codifferential(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_lagrangian(b.ad);
    const FrameRecipe recipe = diagonalizing_frame(b.ad).recipe;
    const DomainMetric dm = domain_metric(f, p);
    const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, p, fd);
    const Vec dp = codifferential_2form(covariant_derivative_02(pullback_field(f), dm, p, fd), dm);
    const Vec dj = codifferential_2form(covariant_derivative_02(jomega_field(f), dm, p, fd), dm);
    const Mat& jw = b.ad.polar.jomega;
    const double c = mean_of(b.ad.cos_spectrum);
    const Vec r1 = (n - 2.0) * (jw * gc);
    const Vec r2 = (n - 1.0) * (jw * gc);
    const double e1 = gnorm(dp - r1, dm.g);
    const double e2 = gnorm(c * dj - r2, dm.g);
    r.lhs = gnorm(dp, dm.g) + gnorm(c * dj, dm.g);
    r.rhs = gnorm(r1, dm.g) + gnorm(r2, dm.g);
    r.residual_abs = std::max(e1, e2);
    r.components["codiff_pullback"] = e1;
    r.components["codiff_jomega"] = e2;
    r.components["codiff_pullback_norm"] = gnorm(dp, dm.g);
    r.components["codiff_jomega_norm"] = gnorm(dj, dm.g);
    r.oracle["terms_evaluated"] = 2;
    return {};
}

std::string chk_norm_split(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_lagrangian(b.ad);
    const FrameRecipe recipe = diagonalizing_frame(b.ad).recipe;
    const DomainMetric dm = domain_metric(f, p);
    const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, p, fd);
    const double np = 2.0 * nabla_form_norm2(covariant_derivative_02(pullback_field(f), dm, p, fd), dm.ginv);
    const double nj = 2.0 * nabla_form_norm2(covariant_derivative_02(jomega_field(f), dm, p, fd), dm.ginv);
    const double c = mean_of(b.ad.cos_spectrum);
    r.lhs = np;
    r.rhs = 2.0 * n * gc.dot(dm.g * gc) + c * c * nj;
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.components["nabla_jomega_norm"] = nj;
    r.oracle["terms_evaluated"] = 2;
    return {};
}

std::string chk_gtilde_derivative(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const int d = f.domain_dim;
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    const FrameCalculus fc = frame_calculus(f, p);
    const FrameRecipe recipe = fc.frame.recipe;
    // Frame components of the bilinear gtilde along the tracked frame field.
    auto field = [&](const Vec& q) -> CMat {
        const AngleData ad = angle_data(f, q);
        const DiagonalizingFrame fr = diagonalizing_frame(ad, &recipe);
        CMat z(d, 2 * n);
        for (int a = 0; a < n; ++a) {
            z.col(a) = fr.z[a];
            z.col(a + n) = fr.z[a].conjugate();
        }
        return z.transpose() * ad.gtilde_2tensor.cast<cplx>() * z;
    };
    const auto dm = fd_partials<CMat>(field, p, field_fd(f));
    const auto& c = fc.frame.cos;
    double res_mixed = 0.0, res_pure = 0.0, lhs = 0.0, rhs = 0.0;
    for (int zi = 0; zi < 2 * n; ++zi) {
        CMat dz = CMat::Zero(2 * n, 2 * n);
        for (int v = 0; v < d; ++v) dz += fc.zz[zi][v] * dm[v];
        for (int mu = 0; mu < n; ++mu)
            for (int ga = 0; ga < n; ++ga) {
                const cplx r1 = kI * fc.g3(zi, mu, ga + n) - kI * fc.g3(zi, ga + n, mu) -
                                (c[mu] - c[ga]) * fc.conn(zi, mu, ga + n);
                const cplx r2 = -kI * fc.g3(zi, mu, ga) + kI * fc.g3(zi, ga, mu) + (c[mu] + c[ga]) * fc.conn(zi, mu, ga);
                res_mixed = std::max(res_mixed, std::abs(dz(mu, ga + n) - r1));
                res_pure = std::max(res_pure, std::abs(dz(mu, ga) - r2));
                lhs = std::max({lhs, std::abs(dz(mu, ga + n)), std::abs(dz(mu, ga))});
                rhs = std::max({rhs, std::abs(r1), std::abs(r2)});
            }
    }
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual_abs = std::max(res_mixed, res_pure);
    r.components["mixed_type"] = res_mixed;
    r.components["pure_type"] = res_pure;
    r.oracle["terms_evaluated"] = 3;
    return {};
}

std::string chk_trace_difference(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const int d = f.domain_dim;
    const FdParams fd = field_fd(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_complex(b.ad);
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const auto dhat = fd_partials<Mat>([&](const Vec& q) { return hat_metric_at(f, q); }, p, fd);
    const Tensor3 hat = christoffel_from_partials(dhat, b.ad.hat_metric.inverse());
    CVec lhs = CVec::Zero(d);
    for (int mu = 0; mu < n; ++mu) {
        const CVec z = fr.z[mu];
        const CVec zb = z.conjugate();
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    lhs[k] += (hat(k, i, j) - b.pg.domain_christoffel(k, i, j)) * zb[i] * z[j];
    }
    const DomainMetric dm = domain_metric(f, p);
    const ScalarField cbar = mean_cos_field(f, fr.recipe);
    const ScalarField logs2 = [&](const Vec& q) {
        const double c = cbar(q);
        return std::log(1.0 - c * c);
    };
    const Vec rhs = 0.25 * (1.0 - n) * field_gradient(logs2, dm, p, fd);
    const Mat& g = b.pg.g_m.components();
    r.lhs = hnorm(lhs, g);
    r.rhs = gnorm(rhs, g);
    r.residual_abs = hnorm(lhs - rhs.cast<cplx>(), g);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

// ---------------------------------------------------------------------------
// Weitzenbock group

struct CurvaturePair {
    Tensor4 fd;      // from metric second differences
    Tensor4 gauss;   // from the second fundamental form
};

CurvaturePair curvature_pair(const ImmersionChart& f, const Vec& p)
{
    const CurvatureData cd = domain_curvature(f, p);
    return {cd.rm_fd, cd.rm_gauss};
}

// The two frame expressions for the curvature term.
std::pair<cplx, cplx> s_term_expressions(const Tensor4& rm_first, const Tensor4& rm_second, const Mat& g,
                                         const DiagonalizingFrame& fr)
{
    const int n = static_cast<int>(fr.z.size());
    const Mat ric = ricci_contraction(rm_first, g.inverse());
    cplx e1 = 0.0, e2 = 0.0;
    for (int mu = 0; mu < n; ++mu) {
        const CVec zm = fr.z[mu], zmb = zm.conjugate();
        const double cm = fr.cos[mu];
        e1 += 4.0 * cm * cm * (zm.transpose() * ric.cast<cplx>() * zmb)(0, 0);
        for (int rho = 0; rho < n; ++rho) {
            const CVec zr = fr.z[rho], zrb = zr.conjugate();
            const double cr = fr.cos[rho];
            e1 += 8.0 * cm * cr * contract4(rm_first, zr, zrb, zm, zmb);
            e2 += 4.0 * (cm + cr) * (cm + cr) * contract4(rm_second, zr, zm, zrb, zmb) +
                  4.0 * (cm - cr) * (cm - cr) * contract4(rm_second, zrb, zm, zr, zmb);
        }
    }
    return {e1, e2};
}

std::string chk_s_term_equality(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const Base b = base_at(f, p);
    const CurvaturePair cp = curvature_pair(f, p);
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const Mat& g = b.pg.g_m.components();
    const auto [e1, e2] = s_term_expressions(cp.gauss, cp.fd, g, fr);
    const double direct = curvature_term(cp.fd, b.ad.pullback_form, g);
    r.lhs = e1.real();
    r.rhs = e2.real();
    r.residual_abs = std::abs(e1 - e2);
    r.components["direct_action"] = direct;
    r.components["direct_minus_first"] = std::abs(direct - e1.real());
    r.oracle["terms_evaluated"] = 4;
    return {};
}

std::string chk_s_term_equal_angle(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    const CurvaturePair cp = curvature_pair(f, p);
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const Mat& g = b.pg.g_m.components();
    const double c = mean_of(b.ad.cos_spectrum);
    r.lhs = curvature_term(cp.fd, b.ad.pullback_form, g);
    const cplx tr = holomorphic_trace(cp.gauss, fr.z);
    r.rhs = 16.0 * c * c * tr.real();
    r.residual_abs = std::abs(r.lhs - 16.0 * c * c * tr);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_weitzenbock(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const FdParams fd = field_fd(f);
    const DomainMetric dm = domain_metric(f, p);
    const ScalarField norm2 = [&](const Vec& q) {
        return form_norm2(pullback_form_at(f, q), MetricTensor(induced_metric(f, q)).inverse());
    };
    const double lhs = 0.5 * field_laplacian(norm2, dm, p, fd);
    const MatField pf = pullback_field(f);
    const Mat form = pf(p);
    const Mat lap = d_codifferential(f, pf, p, fd);
    const double t1 = -form_inner(lap, form, dm.ginv);
    const double t2 = nabla_form_norm2(covariant_derivative_02(pf, dm, p, fd), dm.ginv);
    const double t3 = curvature_term(domain_curvature(f, p).rm_fd, form, dm.g);
    r.lhs = lhs;
    r.rhs = t1 + t2 + t3;
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.components["hodge_term"] = t1;
    r.components["rough_term"] = t2;
    r.components["curvature_term"] = t3;
    r.oracle["terms_evaluated"] = 3;
    return {};
}

std::string chk_isotropic_scalar(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const Base b = base_at(f, p);
    const CurvaturePair cp = curvature_pair(f, p);
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const Mat& g = b.pg.g_m.components();
    auto h = [&](const CVec& u, const CVec& v) { return (u.transpose() * g.cast<cplx>() * v.conjugate())(0, 0); };
    const int n = static_cast<int>(fr.z.size());
    cplx lhs = 0.0;
    for (int rho = 0; rho < n; ++rho)
        for (int mu = 0; mu < n; ++mu) {
            if (rho == mu) continue;
            const CVec z = fr.z[rho], w = fr.z[mu];
            const double area = (h(z, z) * h(w, w)).real() - std::norm(h(z, w));
            lhs += contract4(cp.fd, z, w, CVec(z.conjugate()), CVec(w.conjugate())) / area;
        }
    const cplx rhs = 4.0 * holomorphic_trace(cp.gauss, fr.z);
    r.lhs = lhs.real();
    r.rhs = rhs.real();
    r.residual_abs = std::abs(lhs - rhs);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_codiff_norm(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_lagrangian(b.ad);
    const FrameRecipe recipe = diagonalizing_frame(b.ad).recipe;
    const DomainMetric dm = domain_metric(f, p);
    const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, p, fd);
    const Vec dp = codifferential_2form(covariant_derivative_02(pullback_field(f), dm, p, fd), dm);
    r.lhs = dp.dot(dm.g * dp);
    r.rhs = (n - 2.0) * (n - 2.0) * gc.dot(dm.g * gc);
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_parallel_consequences(const ImmersionChart& f, const Vec& p, const CheckOptions&,
                                      IdentityReport& r)
{
    const int d = f.domain_dim;
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const DomainMetric dm = domain_metric(f, p);
    const MatField pf = pullback_field(f);
    const Tensor3 np = covariant_derivative_02(pf, dm, p, fd);
    require(np.max_abs() <= r.tolerance, "pullback form is not parallel at the point");
    const Base b = base_at(f, p);
    const FrameRecipe recipe = diagonalizing_frame(b.ad).recipe;
    const auto dcos = fd_partials<Vec>(
        [&](const Vec& q) {
            const auto c = tracked_cos(f, q, recipe);
            return Vec(Eigen::Map<const Vec>(c.data(), n));
        },
        p, fd);
    double t1 = 0.0;
    for (const Vec& v : dcos) t1 = std::max(t1, v.cwiseAbs().maxCoeff());
    const Tensor3 tr = triple_of(b, f.target->j, d);
    double t2 = 0.0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) t2 = std::max(t2, std::abs(tr(k, i, j) - tr(k, j, i)));
    const double t3 = max_abs(d_codifferential(f, pf, p, fd));
    r.lhs = std::max({t1, t2, t3});
    r.rhs = 0.0;
    r.residual_abs = r.lhs;
    r.components["angle_gradient"] = t1;
    r.components["triple_asymmetry"] = t2;
    r.components["hodge_laplacian"] = t3;
    r.oracle["terms_evaluated"] = 3;
    return {};
}

// ---------------------------------------------------------------------------
// Laplacian of kappa

double kappa_laplacian(const ImmersionChart& f, const Vec& p, const FrameRecipe& recipe)
{
    const DomainMetric dm = domain_metric(f, p);
    return field_laplacian(kappa_field(f, recipe), dm, p, field_fd(f));
}

std::string chk_delta_kappa_general(const ImmersionChart& f, const Vec& p, const CheckOptions& opt,
                                    IdentityReport& r)
{
    gate_minimal(f, p, opt);
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    const FrameCalculus fc = frame_calculus(f, p);
    r.lhs = kappa_laplacian(f, p, fc.frame.recipe);
    const auto lines = delta_kappa_lines(f, b.pg, fc);
    cplx sum = 0.0;
    for (size_t i = 0; i < lines.size(); ++i) {
        sum += lines[i];
        r.components["line_" + std::to_string(i + 1)] = lines[i].real();
    }
    r.rhs = sum.real();
    r.residual_abs = std::abs(r.lhs - sum);
    r.oracle["terms_evaluated"] = static_cast<double>(lines.size());
    return {};
}

std::string chk_delta_kappa_equal(const ImmersionChart& f, const Vec& p, const CheckOptions& opt,
                                  IdentityReport& r)
{
    const int n = f.n();
    const FdParams fd = field_fd(f);
    gate_minimal(f, p, opt);
    const double ric = gate_einstein(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_complex(b.ad);
    gate_no_lagrangian(b.ad);
    const FrameCalculus fc = frame_calculus(f, p);
    const FrameRecipe& recipe = fc.frame.recipe;
    r.lhs = kappa_laplacian(f, p, recipe);

    const DomainMetric dm = domain_metric(f, p);
    const double c = mean_of(b.ad.cos_spectrum);
    const double s2 = 1.0 - c * c;
    const cplx trace = holomorphic_trace(domain_curvature(f, p).rm_fd, fc.frame.z);
    const double nj = 2.0 * nabla_form_norm2(covariant_derivative_02(jomega_field(f), dm, p, fd), dm.ginv);
    const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, p, fd);
    const double t1 = -2.0 * n * ric;
    const double t2 = 32.0 / s2 * trace.real();
    const double t3 = nj / s2;
    const double t4 = 8.0 * (n - 1.0) * gc.dot(dm.g * gc) / (s2 * s2);
    r.rhs = c * (t1 + t2 + t3 + t4);
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.components["einstein_term"] = c * t1;
    r.components["curvature_term"] = c * t2;
    r.components["jomega_term"] = c * t3;
    r.components["gradient_term"] = c * t4;
    r.oracle["terms_evaluated"] = 4;

    // Internal cross-validation against the general five-line expression.
    cplx general = 0.0;
    for (const cplx& l : delta_kappa_lines(f, b.pg, fc)) general += l;
    const double cross = std::abs(general - r.rhs);
    r.components["general_cross_check"] = cross;
    if (cross > 1e-6) {
        std::ostringstream os;
        os << "general and equal-angle expressions disagree by " << cross;
        return os.str();
    }
    return {};
}

std::string chk_delta_kappa_wolfson(const ImmersionChart& f, const Vec& p, const CheckOptions& opt,
                                    IdentityReport& r)
{
    require(f.n() == 1, "requires a surface (n = 1)");
    gate_minimal(f, p, opt);
    const double ric = gate_einstein(f);
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    gate_no_lagrangian(b.ad);
    r.lhs = kappa_laplacian(f, p, diagonalizing_frame(b.ad).recipe);
    r.rhs = -2.0 * ric * b.ad.cos_spectrum[0];
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_delta_kappa_pluriminimal(const ImmersionChart& f, const Vec& p, const CheckOptions& opt,
                                         IdentityReport& r)
{
    const int d = f.domain_dim;
    gate_minimal(f, p, opt);
    const double ric = gate_einstein(f);
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    gate_no_lagrangian(b.ad);
    // (1,1)-part of the second fundamental form with respect to J_omega.
    const Mat& jw = b.ad.polar.jomega;
    double part11 = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Vec v = b.sf.at(i, j, d);
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) v += jw(k, i) * jw(l, j) * b.sf.at(k, l, d);
            part11 = std::max(part11, 0.5 * gnorm(v, b.pg.g_n));
        }
    r.components["part_11"] = part11;
    require(part11 < opt.minimality_tol, "not pluriminimal");
    r.lhs = kappa_laplacian(f, p, diagonalizing_frame(b.ad).recipe);
    double sc = 0.0;
    for (double c : b.ad.cos_spectrum) sc += c;
    r.rhs = -2.0 * ric * sc;
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_cos2_chain(const ImmersionChart& f, const Vec& p, const CheckOptions& opt, IdentityReport& r)
{
    const int n = f.n();
    const FdParams fd = field_fd(f);
    gate_minimal(f, p, opt);
    const double ric = gate_einstein(f);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    gate_no_complex(b.ad);
    const FrameRecipe recipe = diagonalizing_frame(b.ad).recipe;
    const DomainMetric dm = domain_metric(f, p);
    const ScalarField cos2 = [&](const Vec& q) {
        double s = 0.0;
        for (double c : tracked_cos(f, q, recipe)) s += c * c;
        return s / n;
    };
    r.lhs = n * field_laplacian(cos2, dm, p, fd);
    const double c = mean_of(b.ad.cos_spectrum);
    const double s2 = 1.0 - c * c;
    const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, p, fd);
    const double t1 = -2.0 * n * s2 * c * c * ric;
    const double t2 = 2.0 * curvature_term(domain_curvature(f, p).rm_fd, b.ad.pullback_form, dm.g);
    const double t3 = 2.0 * nabla_form_norm2(covariant_derivative_02(pullback_field(f), dm, p, fd), dm.ginv);
    const double t4 = 4.0 * (n - 2.0) * c * c / s2 * gc.dot(dm.g * gc);
    r.rhs = t1 + t2 + t3 + t4;
    r.residual_abs = std::abs(r.lhs - r.rhs);
    r.components["einstein_term"] = t1;
    r.components["curvature_term"] = t2;
    r.components["rough_term"] = t3;
    r.components["gradient_term"] = t4;
    r.oracle["terms_evaluated"] = 4;
    return {};
}

std::string chk_gauss_holsec(const ImmersionChart& f, const Vec& p, const CheckOptions& opt, IdentityReport& r)
{
    const int n = f.n();
    const int d = f.domain_dim;
    const TargetGeometry& tg = *f.target;
    require(tg.is_flat || tg.model == CurvatureModel::ConstantHolomorphic,
            "target lacks constant holomorphic sectional curvature");
    gate_minimal(f, p, opt);
    const Base b = base_at(f, p);
    gate_equal(b.ad);
    const double k = tg.is_flat ? 0.0 : tg.holomorphic_curvature;
    const DiagonalizingFrame fr = diagonalizing_frame(b.ad);
    const cplx lhs = holomorphic_trace(domain_curvature(f, p).rm_fd, fr.z);
    const double c = mean_of(b.ad.cos_spectrum);
    const double t1 = n * (n - 1.0) / 16.0 * (1.0 - c * c) * k;
    double t2 = 0.0;
    for (int mu = 0; mu < n; ++mu)
        for (int rho = 0; rho < n; ++rho) {
            const CVec v = second_fundamental_c(b.sf, fr.z[mu], CVec(fr.z[rho].conjugate()), d);
            t2 += hnorm(v, b.pg.g_n) * hnorm(v, b.pg.g_n);
        }
    r.lhs = lhs.real();
    r.rhs = t1 - t2;
    r.residual_abs = std::abs(lhs - r.rhs);
    r.components["ambient_term"] = t1;
    r.components["second_fundamental_term"] = t2;
    r.oracle["terms_evaluated"] = 2;
    return {};
}

// ---------------------------------------------------------------------------
// Hyper-Kahler structures

std::string chk_anticommute(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const HyperKahlerTriple tri = gate_hyperkahler(f);
    const int t = f.target->real_dim();
    auto rng = rng_from_point(p);
    const Mat id = Mat::Identity(t, t);
    double res = 0.0, worst_orth = 0.0;
    int iff_violations = 0;
    for (int k = 0; k < 10; ++k) {
        const Eigen::Vector3d a = random_unit3(rng);
        Eigen::Vector3d bv = random_unit3(rng);
        if (k % 2 == 0) bv = (bv - bv.dot(a) * a).normalized();
        const Mat ja = j_from_sphere(tri, sphere_point(a));
        const Mat jb = j_from_sphere(tri, sphere_point(bv));
        const Mat anti = ja * jb + jb * ja;
        const double ab = a.dot(bv);
        res = std::max(res, max_abs(anti + 2.0 * ab * id));
        const bool orth = std::abs(ab) < 1e-12;
        const bool anticommute = max_abs(anti) < 1e-12;
        if (orth != anticommute) ++iff_violations;
        if (orth) worst_orth = std::max(worst_orth, max_abs(anti));
    }
    r.lhs = res;
    r.rhs = 0.0;
    r.residual_abs = std::max(res, static_cast<double>(iff_violations));
    r.components["iff_violations"] = iff_violations;
    r.components["orthogonal_pair_anticommutator"] = worst_orth;
    r.oracle["terms_evaluated"] = 1;
    return {};
}

struct HkPlane {
    HyperKahlerTriple tri;
    PointGeometry pg;
    Eigen::Vector3d axis;
};

HkPlane hk_plane(const ImmersionChart& f, const Vec& p)
{
    HkPlane h;
    h.tri = gate_hyperkahler(f);
    require(f.id.rfind("hk-complex-plane", 0) == 0 && f.params.count("nu") && f.params.count("phi"),
            "requires a quaternionic complex plane");
    h.pg = first_fundamental(f, p);
    h.axis = SpherePoint{f.params.at("nu"), f.params.at("phi")}.unit_vector();
    // The plane must split as two orthogonal quaternionic lines H_X and H_Y.
    const Mat& g = h.pg.g_n;
    const Vec x = h.pg.dF.col(0), y = h.pg.dF.col(2);
    const Mat ops[4] = {Mat::Identity(g.rows(), g.cols()), h.tri.i, h.tri.j, h.tri.k};
    double cross = 0.0;
    for (const Mat& a : ops)
        for (const Mat& b : ops) cross = std::max(cross, std::abs((a * x).dot(g * (b * y))));
    require(cross < 1e-12, "quaternionic lines of the plane are not orthogonal");
    return h;
}

std::string chk_angle_between(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const HkPlane h = hk_plane(f, p);
    auto rng = rng_from_point(p);
    double res = 0.0, spread = 0.0;
    for (int k = 0; k < 10; ++k) {
        const Eigen::Vector3d w = random_unit3(rng);
        const AngleData ad = angle_data_from(h.pg.dF, h.pg.g_n, j_from_sphere(h.tri, sphere_point(w)));
        const double expect = std::abs(h.axis.dot(w));
        for (double c : ad.cos_spectrum) res = std::max(res, std::abs(c - expect));
        spread = std::max(spread, ad.classification.spread);
    }
    r.lhs = res;
    r.rhs = 0.0;
    r.residual_abs = res;
    r.components["angle_spread"] = spread;
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_complex_plane_angles(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const HkPlane h = hk_plane(f, p);
    const double cnu = std::cos(f.params.at("nu"));
    const AngleData adi = angle_data_from(h.pg.dF, h.pg.g_n, h.tri.i);
    const AngleData adn = angle_data_from(h.pg.dF, h.pg.g_n, j_from_sphere(h.tri, SpherePoint{f.params.at("nu"), f.params.at("phi")}));
    const double op_res = max_abs(adi.pullback_operator.a - cnu * adn.pullback_operator.a);
    double spec = 0.0;
    for (double c : adi.cos_spectrum) spec = std::max(spec, std::abs(c - std::abs(cnu)));
    r.lhs = max_abs(adi.pullback_operator.a);
    r.rhs = std::abs(cnu) * max_abs(adn.pullback_operator.a);
    r.residual_abs = std::max(op_res, spec);
    r.components["operator_residual"] = op_res;
    r.components["spectrum_residual"] = spec;
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_normal_bundle(const ImmersionChart& f, const Vec& p, const CheckOptions&, IdentityReport& r)
{
    const Base b = base_at(f, p);
    gate_no_complex(b.ad);
    gate_no_lagrangian(b.ad);
    const NormalBundleAngles nb = normal_bundle_angles(f, p);
    double spec = 0.0;
    for (size_t a = 0; a < nb.cos_spectrum.size(); ++a)
        spec = std::max(spec, std::abs(nb.cos_spectrum[a] - b.ad.cos_spectrum[a]));
    r.lhs = mean_of(nb.cos_spectrum);
    r.rhs = mean_of(b.ad.cos_spectrum);
    r.residual_abs = std::max({spec, nb.phi_j_residual, nb.basis_residual});
    r.components["spectrum"] = spec;
    r.components["intertwining"] = nb.phi_j_residual;
    r.components["basis"] = nb.basis_residual;
    r.oracle["terms_evaluated"] = 2;
    return {};
}

// ---------------------------------------------------------------------------
// Quadrature over the fundamental domain

struct Integrals {
    double lhs = 0.0, rhs = 0.0;
};

using Integrand = std::function<Integrals(const Vec&)>;

// Periodic trapezoid rule on the fundamental domain, weighted by the volume density.
Integrals integrate(const ImmersionChart& f, int per_dim, const Integrand& fn)
{
    const int d = f.domain_dim;
    const Vec& periods = f.periodic->periods;
    int total = 1;
    for (int k = 0; k < d; ++k) total *= per_dim;
    std::vector<Integrals> vals(total);
    parallel_for(total, [&](int idx) {
        Vec q(d);
        int rest = idx;
        for (int k = 0; k < d; ++k) {
            q[k] = periods[k] * (rest % per_dim) / per_dim;
            rest /= per_dim;
        }
        const double vol = std::sqrt(induced_metric(f, q).determinant());
        Integrals v = fn(q);
        v.lhs *= vol;
        v.rhs *= vol;
        vals[idx] = v;
    });
    double cell = 1.0;
    for (int k = 0; k < d; ++k) cell *= periods[k] / per_dim;
    Integrals out;
    for (const Integrals& v : vals) {
        out.lhs += v.lhs * cell;
        out.rhs += v.rhs * cell;
    }
    return out;
}

void require_periodic(const ImmersionChart& f)
{
    require(f.periodic.has_value(), "requires a periodic immersion");
}

// Evaluates at the base grid and its refinement; the residual is taken on the finer grid.
void finish_quadrature(const ImmersionChart& f, const CheckOptions& opt, const Integrand& fn, IdentityReport& r)
{
    const int base = quadrature_points_per_dim(opt.grid, f.domain_dim);
    const Integrals coarse = integrate(f, base, fn);
    const Integrals fine = integrate(f, 2 * base, fn);
    const double d1 = std::abs(coarse.lhs - coarse.rhs);
    const double d2 = std::abs(fine.lhs - fine.rhs);
    r.lhs = fine.lhs;
    r.rhs = fine.rhs;
    r.residual_abs = d2;
    r.points.clear();
    r.oracle["grid_coarse"] = base;
    r.oracle["grid_fine"] = 2 * base;
    r.components["residual_coarse"] = d1;
    r.components["residual_fine"] = d2;
    r.components["refinement_converged"] = (d2 <= d1 / 4.0 || d2 < 1e-12) ? 1.0 : 0.0;
}

std::string chk_integral_weitzenbock(const ImmersionChart& f, const Vec&, const CheckOptions& opt,
                                     IdentityReport& r)
{
    require_periodic(f);
    const int d = f.domain_dim;
    const FdParams fd = field_fd(f);
    const Integrand fn = [&f, fd, d](const Vec& q) {
        const DomainMetric dm = domain_metric(f, q);
        const MatField pf = pullback_field(f);
        const Tensor3 np = covariant_derivative_02(pf, dm, q, fd);
        const Vec dp = codifferential_2form(np, dm);
        const PointGeometry pg = first_fundamental(f, q);
        const SecondFundamental sf = second_fundamental(f, pg);
        const Tensor4 rm = gauss_curvature(pullback_curvature(f.target->curvature(pg.fp), pg.dF), sf, pg.g_n, d);
        Integrals v;
        v.lhs = nabla_form_norm2(np, dm.ginv) + curvature_term(rm, pf(q), dm.g);
        v.rhs = dp.dot(dm.g * dp);
        return v;
    };
    finish_quadrature(f, opt, fn, r);
    r.oracle["terms_evaluated"] = 3;
    return {};
}

// Shared gates for the integral identities with equal angles: every grid point
// of the refined grid must be minimal with equal angles.
void gate_grid_equal_minimal(const ImmersionChart& f, const CheckOptions& opt, bool forbid_complex)
{
    const int per = 2 * quadrature_points_per_dim(opt.grid, f.domain_dim);
    const int d = f.domain_dim;
    int total = 1;
    for (int k = 0; k < d; ++k) total *= per;
    std::vector<int> status(total, 0);
    parallel_for(total, [&](int idx) {
        Vec q(d);
        int rest = idx;
        for (int k = 0; k < d; ++k) {
            q[k] = f.periodic->periods[k] * (rest % per) / per;
            rest /= per;
        }
        const PointGeometry pg = first_fundamental(f, q);
        const SecondFundamental sf = second_fundamental(f, pg);
        const AngleData ad = angle_data_from(pg.dF, pg.g_n, f.target->j);
        if (std::sqrt(sf.mean_curvature.dot(pg.g_n * sf.mean_curvature)) >= opt.minimality_tol) status[idx] = 1;
        else if (ad.classification.spread >= kEqualAngleTol) status[idx] = 2;
        else if (forbid_complex && ad.classification.complex_direction) status[idx] = 3;
    });
    for (int s : status) {
        require(s != 1, "requires minimal");
        require(s != 2, "angles are not equal on the grid");
        require(s != 3, "complex point on the grid");
    }
}

std::string chk_integral_n2(const ImmersionChart& f, const Vec&, const CheckOptions& opt, IdentityReport& r)
{
    require_periodic(f);
    require(f.n() == 2, "requires n = 2");
    const double ric = gate_einstein(f);
    gate_grid_equal_minimal(f, opt, false);
    const int n = f.n();
    const Integrand fn = [&f, ric, n](const Vec& q) {
        const double c = mean_of(angle_data(f, q).cos_spectrum);
        return Integrals{n * ric * (1.0 - c * c) * c * c, 0.0};
    };
    finish_quadrature(f, opt, fn, r);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

std::string chk_integral_n3(const ImmersionChart& f, const Vec&, const CheckOptions& opt, IdentityReport& r)
{
    require_periodic(f);
    require(f.n() >= 3, "requires n >= 3");
    const double ric = gate_einstein(f);
    gate_grid_equal_minimal(f, opt, true);
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const Integrand fn = [&f, ric, n, fd](const Vec& q) {
        const AngleData ad = angle_data(f, q);
        const FrameRecipe recipe = diagonalizing_frame(ad).recipe;
        const double c = mean_of(ad.cos_spectrum);
        const double s2 = 1.0 - c * c;
        const DomainMetric dm = domain_metric(f, q);
        const Vec gc = field_gradient(mean_cos_field(f, recipe), dm, q, fd);
        const double cot2 = c * c / s2;
        return Integrals{n * ric * s2 * c * c, (n - 2.0) * (n - 2.0 + 2.0 * cot2) * gc.dot(dm.g * gc)};
    };
    finish_quadrature(f, opt, fn, r);
    r.oracle["terms_evaluated"] = 1;
    return {};
}

// ---------------------------------------------------------------------------

struct Entry {
    CheckSpec spec;
    Impl impl;
};

const std::vector<Entry>& entries()
{
    using G = CheckGroup;
    static const std::vector<Entry> table = {
        {{"ricci-reconstruction", G::FirstOrder,
          "target Ricci tensor equals the frame sum of 4/sin^2 R(U, JV, dF(mu), (J dF(conj mu))^perp)",
          "Ricci contraction of the curvature rebuilt from metric jets", "closed-form curvature contracted over the frame",
          1e-6, 1, true, false},
         chk_ricci_reconstruction},
        {{"nabla-pullback", G::FirstOrder,
          "covariant derivative of the pullback form equals -g(B(Z,X), J dF Y) + g(B(Z,Y), J dF X)",
          "finite-difference covariant derivative of the pullback form", "second fundamental form against J dF", 1e-7, 2},
         chk_nabla_pullback},
        {{"torsion-lemma", G::FirstOrder,
          "Phi(T'(Z_a, conj Z_b)) = i(cos_a + cos_b) B(Z_a, conj Z_b) and Phi(T'(Z_a, Z_b)) = i(cos_a - cos_b) B(Z_a, Z_b)",
          "torsion of the connection transported through Phi, by finite differences",
          "second fundamental form in the diagonalizing frame", 1e-7, 2, true, false},
         chk_torsion_lemma},
        {{"grad-logsin", G::FirstOrder,
          "Phi((1-n)/4 grad log sin^2) = 4 cos / sin^2 Re(i sum (g(conj mu, mu, b) - g(conj mu, b, mu)) Phi(conj b))",
          "finite-difference gradient of log sin^2 mapped by Phi", "frame triples of the second fundamental form", 1e-6,
          2, true, true},
         chk_grad_logsin},
        {{"codifferential", G::FirstOrder,
          "delta of the pullback form is (n-2) J_omega grad cos and cos delta J_omega is (n-1) J_omega grad cos",
          "finite-difference codifferentials of the pullback form and of J_omega",
          "finite-difference gradient of the common cosine", 1e-7, 2, false, true},
         chk_codifferential},
        {{"norm-split", G::FirstOrder,
          "|nabla pullback|^2 = 2n |grad cos|^2 + cos^2 |nabla J_omega|^2 with operator norms",
          "finite-difference covariant derivative of the pullback form",
          "gradient of the cosine and covariant derivative of J_omega", 1e-6, 2, false, true},
         chk_norm_split},
        {{"gtilde-derivative", G::FirstOrder,
          "derivative of the frame components of gtilde in terms of frame triples and connection coefficients",
          "finite differences of gtilde along the tracked frame field",
          "frame triples and covariant derivatives of the frame", 1e-7, 3, true, false},
         chk_gtilde_derivative},
        {{"trace-difference", G::FirstOrder,
          "sum over the frame of (hat nabla - nabla)(conj mu, mu) = (1-n)/4 grad log sin^2",
          "Christoffel symbols of the hat metric minus those of the induced metric",
          "finite-difference gradient of log sin^2", 1e-7, 1, true, false},
         chk_trace_difference},
        {{"s-term-equality", G::Weitzenbock,
          "the Ricci-plus-holomorphic expression and the squared-sum expression of the curvature term agree",
          "Ricci and curvature of the Gauss equation", "curvature from metric second differences", 1e-6, 4},
         chk_s_term_equality},
        {{"s-term-equal-angle", G::Weitzenbock,
          "with equal angles the curvature term is 16 cos^2 sum R(rho, mu, conj rho, conj mu)",
          "curvature operator on 2-forms applied to the pullback form", "holomorphic trace of the Gauss curvature", 1e-6,
          1},
         chk_s_term_equal_angle},
        {{"weitzenbock", G::Weitzenbock,
          "half the Laplacian of |pullback|^2 = -<Hodge Laplacian, pullback> + |nabla pullback|^2 + curvature term",
          "finite-difference Laplacian of the pointwise norm", "d delta, rough derivative and curvature action", 1e-5,
          3},
         chk_weitzenbock},
        {{"isotropic-scalar", G::Weitzenbock,
          "normalized isotropic sectional curvatures sum to 4 sum R(rho, mu, conj rho, conj mu)",
          "isotropic sectional curvatures from metric second differences", "holomorphic trace of the Gauss curvature",
          1e-8, 1},
         chk_isotropic_scalar},
        {{"codiff-norm", G::Weitzenbock, "|delta pullback|^2 = (n-2)^2 |grad cos|^2",
          "finite-difference codifferential of the pullback form", "finite-difference gradient of the cosine", 1e-6, 1, false, true},
         chk_codiff_norm},
        {{"parallel-consequences", G::Weitzenbock,
          "a parallel pullback form has constant angles, a symmetric triple and is harmonic",
          "angle gradients, triple asymmetry and d delta of the pullback form", "zero", 1e-8, 3},
         chk_parallel_consequences},
        {{"delta-kappa-general", G::DeltaKappa,
          "Laplacian of kappa equals the five-line frame expression for minimal immersions without complex directions",
          "finite-difference Laplacian of the tracked kappa field",
          "Ricci, ambient curvature, triples and connection coefficients in the frame", 1e-4, 5, true, false},
         chk_delta_kappa_general},
        {{"delta-kappa-equal", G::DeltaKappa,
          "Laplacian of kappa = cos(-2nR + 32/sin^2 sum R^M + |nabla J_omega|^2/sin^2 + 8(n-1)|grad cos|^2/sin^4)",
          "finite-difference Laplacian of the tracked kappa field",
          "intrinsic curvature, covariant derivative of J_omega and cosine gradient", 1e-5, 4, true, true},
         chk_delta_kappa_equal},
        {{"delta-kappa-wolfson", G::DeltaKappa, "for minimal surfaces the Laplacian of kappa is -2R cos",
          "finite-difference Laplacian of kappa", "Einstein constant times the cosine", 1e-5, 1, true, true},
         chk_delta_kappa_wolfson},
        {{"delta-kappa-pluriminimal", G::DeltaKappa,
          "for pluriminimal immersions the Laplacian of kappa is -2R times the sum of cosines",
          "finite-difference Laplacian of kappa", "Einstein constant times the cosine sum", 1e-6, 1, true, true},
         chk_delta_kappa_pluriminimal},
        {{"cos2-chain", G::DeltaKappa,
          "n Laplacian cos^2 = -2n sin^2 cos^2 R + 2 curvature term + 2|nabla pullback|^2 + 4(n-2) cot^2 |grad cos|^2",
          "finite-difference Laplacian of the mean squared cosine",
          "curvature action, rough derivative and cosine gradient", 1e-5, 4, true, false},
         chk_cos2_chain},
        {{"gauss-holsec", G::DeltaKappa,
          "sum R^M(mu, rho, conj mu, conj rho) = n(n-1)/16 sin^2 K - sum |B(mu, conj rho)|^2",
          "intrinsic curvature from metric second differences", "holomorphic curvature and second fundamental form",
          1e-6, 2},
         chk_gauss_holsec},
        {{"anticommute-criterion", G::HyperKahler,
          "two structures of the sphere anticommute exactly when their axes are orthogonal",
          "anticommutator of the two structures", "-2 times the inner product of the axes", 1e-12, 1},
         chk_anticommute},
        {{"angle-between-structures", G::HyperKahler,
          "a plane complex for one structure has cos = |<axis, axis'>| for any other",
          "angle spectrum of the plane for a random structure", "inner product of the sphere axes", 1e-10, 1},
         chk_angle_between},
        {{"complex-plane-angles", G::HyperKahler,
          "the pullback of omega_I to a J_{nu phi} complex plane is cos(nu) J_{nu phi}",
          "pullback operator of omega_I", "cos(nu) times the pullback operator of omega_{nu phi}", 1e-10, 1},
         chk_complex_plane_angles},
        {{"normal-bundle-angles", G::HyperKahler,
          "the normal bundle has the same angles and Phi J_omega = -J_NM Phi",
          "polar decomposition of the Kahler form restricted to the normal bundle", "angles of the tangent plane", 1e-8,
          2, true, true},
         chk_normal_bundle},
        {{"integral-weitzenbock", G::Quadrature,
          "integral of |nabla pullback|^2 plus curvature term equals integral of |delta pullback|^2",
          "trapezoid quadrature of rough and curvature terms", "trapezoid quadrature of the codifferential norm", 1e-4,
          3},
         chk_integral_weitzenbock},
        {{"integral-n2", G::Quadrature, "for n = 2 the integral of n R sin^2 cos^2 vanishes",
          "trapezoid quadrature of n R sin^2 cos^2", "zero", 1e-8, 1},
         chk_integral_n2},
        {{"integral-n3", G::Quadrature,
          "for n >= 3 the integral of n R sin^2 cos^2 equals the integral of (n-2)(n-2+2cot^2)|grad cos|^2",
          "trapezoid quadrature of n R sin^2 cos^2", "trapezoid quadrature of the gradient term", 1e-8, 1},
         chk_integral_n3},
    };
    return table;
}

}  // namespace

const char* check_group_name(CheckGroup g)
{
    switch (g) {
    case CheckGroup::FirstOrder: return "first-order";
    case CheckGroup::Weitzenbock: return "weitzenbock";
    case CheckGroup::DeltaKappa: return "delta-kappa";
    case CheckGroup::HyperKahler: return "hyper-kahler";
    default: return "quadrature";
    }
}

const std::vector<CheckSpec>& check_registry()
{
    static const std::vector<CheckSpec> specs = [] {
        std::vector<CheckSpec> v;
        for (const Entry& e : entries()) v.push_back(e.spec);
        return v;
    }();
    return specs;
}

const CheckSpec& find_check(const std::string& id)
{
    for (const CheckSpec& s : check_registry())
        if (s.id == id) return s;
    throw std::invalid_argument("unknown check id: " + id);
}

bool glob_match(const std::string& pat, const std::string& text)
{
    // Iterative matcher with single-star backtracking.
    size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pat.size() && (pat[p] == '?' || pat[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

std::vector<std::string> match_checks(const std::string& pattern)
{
    std::vector<std::string> out;
    for (const CheckSpec& s : check_registry())
        if (glob_match(pattern, s.id)) out.push_back(s.id);
    return out;
}

int quadrature_points_per_dim(int grid, int d)
{
    int n = grid;
    if (d >= 6) n = grid / 32;
    else if (d >= 4) n = grid / 8;
    return std::max(2, n);
}

double stencil_mean_curvature(const ImmersionChart& f, const Vec& p)
{
    const FdParams fd = field_fd(f);
    auto h_at = [&](const Vec& q) {
        const PointGeometry pg = first_fundamental(f, q);
        const SecondFundamental sf = second_fundamental(f, pg);
        return std::sqrt(std::max(0.0, sf.mean_curvature.dot(pg.g_n * sf.mean_curvature)));
    };
    double worst = h_at(p);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double h = fd_step(fd, p[k]);
        for (int off : {-2, -1, 1, 2}) {
            Vec q = p;
            q[k] += off * h;
            worst = std::max(worst, h_at(q));
        }
    }
    return worst;
}

IdentityReport run_check(const std::string& id, const ImmersionChart& f, const Vec& p, const CheckOptions& opt)
{
    const CheckSpec& spec = find_check(id);
    Impl impl = nullptr;
    for (const Entry& e : entries())
        if (e.spec.id == id) impl = e.impl;

    IdentityReport r;
    r.check_id = id;
    r.example = f.id;
    r.points = {p};
    r.tolerance = opt.tolerance.value_or(spec.tolerance);
    r.oracle["fd_step"] = f.fd.step;
    r.oracle["fd_order"] = f.fd.order;
    r.oracle["richardson"] = f.fd.richardson;
    r.oracle["jets_by_differences"] = f.mode == JetMode::FiniteDifference ? 1.0 : 0.0;
    r.oracle["term_count"] = spec.term_count;
    try {
        const std::string forced = impl(f, p, opt, r);
        r.finish();
        if (!forced.empty()) {
            r.verdict = Verdict::Fail;
            r.reason = forced;
        }
    } catch (const NotApplicable& e) {
        r.skip(e.what());
    } catch (const AngleCrossing& e) {
        r.skip(e.what());
    } catch (const GeometryError& e) {
        r.verdict = Verdict::Fail;
        r.reason = e.what();
    }
    return r;
}

}  // namespace kal
