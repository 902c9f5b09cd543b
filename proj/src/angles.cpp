// SPDX-License-Identifier: MIT
#include "kal/angles.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stencil settings for field calculus; the chart default is order 4.
FdParams field_fd(const ImmersionChart& f) { return f.fd; }

struct Clusters {
    std::vector<int> start, size;
    std::vector<bool> kernel;
};

// Groups a descending spectrum. Exact zeros (already thresholded by the
// polar decomposition) form their own cluster.
Clusters cluster_spectrum(const std::vector<double>& c, double tol)
{
    Clusters out;
    const int n = static_cast<int>(c.size());
    for (int a = 0; a < n; ++a) {
        const bool zero = c[a] == 0.0;
        const bool fresh = a == 0 || zero != out.kernel.back() ||
                           (!zero && c[a - 1] - c[a] > tol);
        if (fresh) {
            out.start.push_back(a);
            out.size.push_back(1);
            out.kernel.push_back(zero);
        } else {
            ++out.size.back();
        }
    }
    return out;
}

void require_layout(const Clusters& cl, const FrameRecipe& base)
{
    if (cl.size == base.cluster_pairs && cl.kernel == base.cluster_kernel) return;
    // Locate the first pair index where the layouts disagree.
    std::vector<int> label_now, label_base;
    for (size_t c = 0; c < cl.size.size(); ++c) label_now.insert(label_now.end(), cl.size[c], static_cast<int>(c));
    for (size_t c = 0; c < base.cluster_pairs.size(); ++c)
        label_base.insert(label_base.end(), base.cluster_pairs[c], static_cast<int>(c));
    size_t a = 0;
    while (a + 1 < label_now.size() && a + 1 < label_base.size() &&
           (label_now[a + 1] == label_now[a]) == (label_base[a + 1] == label_base[a]))
        ++a;
    std::ostringstream os;
    os << "angle crossing between pairs " << a << " and " << a + 1;
    throw AngleCrossing(os.str());
}

// Gram–Schmidt against already accepted vectors, applied twice for stability.
Vec orthogonalize(Vec v, const std::vector<Vec>& accepted, const MetricTensor& g)
{
    for (int pass = 0; pass < 2; ++pass)
        for (const Vec& a : accepted) v -= g.inner(a, v) * a;
    return v;
}

Tensor3 christoffel_of(const std::vector<Mat>& dg, const Mat& ginv)
{
    const int d = static_cast<int>(ginv.rows());
    Tensor3 gam(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int l = 0; l < d; ++l) s += ginv(k, l) * (dg[i](l, j) + dg[j](i, l) - dg[l](i, j));
                gam(k, i, j) = 0.5 * s;
            }
    return gam;
}

}  // namespace

const char* point_class_name(PointClass c)
{
    switch (c) {
    case PointClass::Complex: return "complex";
    case PointClass::Lagrangian: return "lagrangian";
    case PointClass::EqualAngles: return "equal-angles";
    default: return "generic";
    }
}

Classification classify(const std::vector<double>& c, double tol)
{
    Classification out;
    if (c.empty()) return out;
    double lo = c.front(), hi = c.front();
    bool all_complex = true, all_lag = true;
    for (double v : c) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (v > 1.0 - tol) out.complex_direction = true;
        else all_complex = false;
        if (v < tol) out.lagrangian_direction = true;
        else all_lag = false;
    }
    out.spread = hi - lo;
    if (all_complex) out.kind = PointClass::Complex;
    else if (all_lag) out.kind = PointClass::Lagrangian;
    else if (out.spread < tol) out.kind = PointClass::EqualAngles;
    else out.kind = PointClass::Generic;
    return out;
}

double kappa_of(const std::vector<double>& c)
{
    double k = 0.0;
    for (double v : c) {
        if (v >= 1.0) return kInf;
        k += std::log((1.0 + v) / (1.0 - v));
    }
    return k;
}

AngleData angle_data_from(const Mat& dF, const Mat& g_n, const Mat& j)
{
    const MetricTensor gm(dF.transpose() * g_n * dF);
    AngleData ad;
    Mat form = (j * dF).transpose() * g_n * dF;
    form = 0.5 * (form - form.transpose()).eval();
    ad.pullback_form = form;
    ad.pullback_operator = two_form_to_operator(form, gm);
    ad.polar = polar_decompose_skew(ad.pullback_operator);
    ad.cos_spectrum = ad.polar.cos;
    // Roundoff may push a complex direction slightly above one.
    for (double& c : ad.cos_spectrum) c = std::min(c, 1.0);
    ad.kappa = kappa_of(ad.cos_spectrum);
    const Mat& G = gm.components();
    ad.gtilde_2tensor = G * ad.polar.gtilde;
    ad.gtilde_2tensor = 0.5 * (ad.gtilde_2tensor + ad.gtilde_2tensor.transpose()).eval();
    const Mat& A = ad.pullback_operator.a;
    ad.hat_metric = G - A.transpose() * G * A;
    ad.hat_metric = 0.5 * (ad.hat_metric + ad.hat_metric.transpose()).eval();
    const double dp = (G + ad.gtilde_2tensor).determinant();
    const double dm = (G - ad.gtilde_2tensor).determinant();
    ad.kappa_det = (dm > 0.0 && std::isfinite(ad.kappa)) ? 0.5 * std::log(dp / dm) : kInf;
    ad.classification = classify(ad.cos_spectrum);
    return ad;
}

AngleData angle_data(const ImmersionChart& f, const Vec& p)
{
    const Jets jt = evaluate_jets(f, p, 1);
    return angle_data_from(jt.first, f.target->metric(jt.value), f.target->j);
}

Classification classify_point(const ImmersionChart& f, const Vec& p, double tol)
{
    return classify(angle_data(f, p).cos_spectrum, tol);
}

DiagonalizingFrame diagonalizing_frame(const AngleData& ad, const FrameRecipe* reuse)
{
    const PolarParts& pp = ad.polar;
    const MetricTensor& g = pp.g;
    const int d = g.dim();
    const Clusters cl = cluster_spectrum(ad.cos_spectrum, kEqualAngleTol);
    if (reuse) require_layout(cl, *reuse);

    DiagonalizingFrame fr;
    fr.recipe.cluster_pairs = cl.size;
    fr.recipe.cluster_kernel = cl.kernel;
    std::vector<Vec> accepted;
    size_t seed_pos = 0;

    auto choose = [&](const Mat& proj) -> Vec {
        if (reuse) {
            if (seed_pos >= reuse->seeds.size()) throw AngleCrossing("frame recipe has too few seeds");
            const int i = reuse->seeds[seed_pos++];
            const Vec e = Vec::Unit(d, i);
            Vec v = orthogonalize(proj * e, accepted, g);
            const double nv = std::sqrt(g.inner(v, v));
            if (nv <= 1e-6 * std::sqrt(g.inner(e, e)))
                throw AngleCrossing("frame seed " + std::to_string(i) + " degenerates near the base point");
            fr.recipe.seeds.push_back(i);
            return v / nv;
        }
        for (double rel : {0.25, 1e-6})
            for (int i = 0; i < d; ++i) {
                const Vec e = Vec::Unit(d, i);
                Vec v = orthogonalize(proj * e, accepted, g);
                const double nv = std::sqrt(g.inner(v, v));
                if (nv > rel * std::sqrt(g.inner(e, e))) {
                    fr.recipe.seeds.push_back(i);
                    return v / nv;
                }
            }
        throw GeometryError("no canonical vector survives projection onto an angle cluster");
    };

    for (size_t c = 0; c < cl.size.size(); ++c) {
        CMat pon = CMat::Zero(d, d);
        for (int k = 2 * cl.start[c]; k < 2 * (cl.start[c] + cl.size[c]); ++k)
            pon += pp.hvecs.col(k) * pp.hvecs.col(k).adjoint();
        const Mat proj = g.from_orthonormal(pon.real());
        for (int a = 0; a < cl.size[c]; ++a) {
            Vec x = choose(proj);
            accepted.push_back(x);
            Vec y;
            if (cl.kernel[c]) {
                y = choose(proj);
            } else {
                y = pp.jomega * x;
                y /= std::sqrt(g.inner(y, y));
            }
            accepted.push_back(y);
            fr.x.push_back(x);
            fr.y.push_back(y);
            fr.cos.push_back(ad.cos_spectrum[cl.start[c] + a]);
            if (!cl.kernel[c]) ++fr.nonzero_pairs;
        }
    }
    fr.z = complexify_frame(fr.x, fr.y, g);
    const Mat& G = g.components();
    fr.jtilde = Mat::Zero(d, d);
    for (size_t a = 0; a < fr.x.size(); ++a)
        fr.jtilde += fr.y[a] * (G * fr.x[a]).transpose() - fr.x[a] * (G * fr.y[a]).transpose();
    return fr;
}

DiagonalizingFrame diagonalizing_frame(const ImmersionChart& f, const Vec& p)
{
    return diagonalizing_frame(angle_data(f, p));
}

std::vector<double> tracked_cos(const ImmersionChart& f, const Vec& q, const FrameRecipe& base)
{
    const AngleData ad = angle_data(f, q);
    require_layout(cluster_spectrum(ad.cos_spectrum, kEqualAngleTol), base);
    return ad.cos_spectrum;
}

// ---------------------------------------------------------------------------

Mat phi_matrix(const Mat& dF, const Mat& j, const Mat& pullback_op) { return j * dF - dF * pullback_op; }

namespace {

Mat phi_at(const ImmersionChart& f, const Vec& q)
{
    const Jets jt = evaluate_jets(f, q, 1);
    const AngleData ad = angle_data_from(jt.first, f.target->metric(jt.value), f.target->j);
    return phi_matrix(jt.first, f.target->j, ad.pullback_operator.a);
}

}  // namespace

ConnectionComparison phi_and_hat(const ImmersionChart& f, const Vec& p)
{
    const Jets jt = evaluate_jets(f, p, 1);
    const Mat gn = f.target->metric(jt.value);
    const AngleData ad = angle_data_from(jt.first, gn, f.target->j);
    ConnectionComparison cc;
    cc.phi = phi_matrix(jt.first, f.target->j, ad.pullback_operator.a);
    cc.hat_metric = ad.hat_metric;
    cc.isometry_residual = max_abs(cc.phi.transpose() * gn * cc.phi - ad.hat_metric);
    const Eigen::SelfAdjointEigenSolver<Mat> es(ad.hat_metric);
    const double scale = 1.0 + max_abs(ad.polar.g.components());
    cc.singular = es.eigenvalues().minCoeff() <= 1e-10 * scale;
    return cc;
}

ConnectionComparison torsion_and_difference(const ImmersionChart& f, const Vec& p)
{
    ConnectionComparison cc = phi_and_hat(f, p);
    if (cc.singular) return cc;
    const int d = f.domain_dim;
    const FdParams fd = field_fd(f);
    const PointGeometry pg = first_fundamental(f, p);
    const SecondFundamental sf = second_fundamental(f, pg);
    const AngleData ad = angle_data_from(pg.dF, pg.g_n, f.target->j);
    const Mat& A = ad.pullback_operator.a;
    const Mat hinv = cc.hat_metric.inverse();
    const Mat& gn = pg.g_n;
    auto phi_inverse = [&](const Vec& v) -> Vec { return hinv * (cc.phi.transpose() * gn * v); };

    const auto dphi = fd_partials<Mat>([&](const Vec& q) { return phi_at(f, q); }, p, fd);
    const auto dhat = fd_partials<Mat>([&](const Vec& q) { return hat_metric_at(f, q); }, p, fd);
    cc.hat_christoffel = christoffel_of(dhat, hinv);

    const int t = f.target->real_dim();
    cc.prime_christoffel = Tensor3(d, d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Vec v = dphi[i].col(j);
            for (int c = 0; c < t; ++c)
                for (int e = 0; e < t; ++e)
                    for (int h = 0; h < t; ++h)
                        v[c] += pg.target_christoffel(c, e, h) * pg.dF(e, i) * cc.phi(h, j);
            const Vec k = phi_inverse(pg.normal_projector * v);
            for (int l = 0; l < d; ++l) cc.prime_christoffel(l, i, j) = k[l];
        }

    cc.torsion = Tensor3(d, d, d);
    cc.s_prime = Tensor3(d, d, d);
    double split = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            // Closed form: Phi(T'(X, Y)) = -B(X, AY) + B(Y, AX).
            Vec rhs = Vec::Zero(t);
            for (int l = 0; l < d; ++l) rhs += -A(l, j) * sf.at(i, l, d) + A(l, i) * sf.at(j, l, d);
            const Vec tf = phi_inverse(rhs);
            for (int k = 0; k < d; ++k) {
                const double tk = cc.prime_christoffel(k, i, j) - cc.prime_christoffel(k, j, i);
                cc.torsion(k, i, j) = tk;
                cc.s_prime(k, i, j) = cc.prime_christoffel(k, i, j) - cc.hat_christoffel(k, i, j);
                split = std::max(split, std::abs(tk - tf[k]));
            }
        }
    cc.torsion_split_residual = split;

    // Trace identity in a hat-orthonormal frame, written with the inverse hat metric.
    const Mat& H = cc.hat_metric;
    double trace_res = 0.0;
    for (int l = 0; l < d; ++l) {
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (hinv(i, j) == 0.0) continue;
                for (int k = 0; k < d; ++k) {
                    lhs += hinv(i, j) * cc.s_prime(k, i, j) * H(k, l);
                    rhs -= hinv(i, j) * cc.torsion(k, i, l) * H(k, j);
                }
            }
        trace_res = std::max(trace_res, std::abs(lhs - rhs));
    }
    cc.lemma_trace_residual = trace_res;
    return cc;
}

// ---------------------------------------------------------------------------

DomainMetric domain_metric(const ImmersionChart& f, const Vec& p)
{
    DomainMetric dm;
    dm.g = induced_metric(f, p);
    dm.ginv = MetricTensor(dm.g).inverse();
    dm.christoffel = domain_christoffel(f, p, field_fd(f));
    return dm;
}

Vec field_gradient(const ScalarField& phi, const DomainMetric& dm, const Vec& p, const FdParams& fd)
{
    const auto dphi = fd_partials<double>(phi, p, fd);
    return dm.ginv * Eigen::Map<const Vec>(dphi.data(), static_cast<Eigen::Index>(dphi.size()));
}

double field_laplacian(const ScalarField& phi, const DomainMetric& dm, const Vec& p, const FdParams& fd)
{
    const int d = static_cast<int>(p.size());
    const auto dphi = fd_partials<double>(phi, p, fd);
    const auto hess = fd_hessian<double>(phi, p, fd);
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double h = hess[static_cast<size_t>(i) * d + j];
            for (int k = 0; k < d; ++k) h -= dm.christoffel(k, i, j) * dphi[k];
            s += dm.ginv(i, j) * h;
        }
    return s;
}

Tensor3 covariant_derivative_02(const MatField& t, const DomainMetric& dm, const Vec& p, const FdParams& fd)
{
    const int d = static_cast<int>(p.size());
    const Mat t0 = t(p);
    const auto dt = fd_partials<Mat>(t, p, fd);
    Tensor3 out(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = dt[k](i, j);
                for (int l = 0; l < d; ++l)
                    s -= dm.christoffel(l, k, i) * t0(l, j) + dm.christoffel(l, k, j) * t0(i, l);
                out(k, i, j) = s;
            }
    return out;
}

Tensor3 covariant_derivative_11(const MatField& a, const DomainMetric& dm, const Vec& p, const FdParams& fd)
{
    const int d = static_cast<int>(p.size());
    const Mat a0 = a(p);
    const auto da = fd_partials<Mat>(a, p, fd);
    Tensor3 out(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = da[k](i, j);
                for (int c = 0; c < d; ++c)
                    s += dm.christoffel(i, k, c) * a0(c, j) - dm.christoffel(c, k, j) * a0(i, c);
                out(k, i, j) = s;
            }
    return out;
}

namespace {

Vec codifferential_lowered(const Tensor3& nf, const Mat& ginv)
{
    const int d = nf.n0;
    Vec out = Vec::Zero(d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i) out[j] -= ginv(k, i) * nf(k, i, j);
    return out;
}

}  // namespace

Vec codifferential_2form(const Tensor3& nabla_form, const DomainMetric& dm)
{
    return dm.ginv * codifferential_lowered(nabla_form, dm.ginv);
}

Mat d_codifferential(const ImmersionChart& f, const MatField& form, const Vec& p, const FdParams& fd)
{
    const int d = static_cast<int>(p.size());
    auto delta = [&](const Vec& q) -> Vec {
        const DomainMetric dm = domain_metric(f, q);
        return codifferential_lowered(covariant_derivative_02(form, dm, q, fd), dm.ginv);
    };
    const auto dd = fd_partials<Vec>(delta, p, fd);
    Mat out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = dd[i][j] - dd[j][i];
    return out;
}

double form_inner(const Mat& a, const Mat& b, const Mat& ginv)
{
    return 0.5 * (ginv * a * ginv * b.transpose()).trace();
}

double form_norm2(const Mat& form, const Mat& ginv) { return form_inner(form, form, ginv); }

double nabla_form_norm2(const Tensor3& nf, const Mat& ginv)
{
    const int d = nf.n0;
    double s = 0.0;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            if (ginv(k, l) == 0.0) continue;
            Mat a(d, d), b(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    a(i, j) = nf(k, i, j);
                    b(i, j) = nf(l, i, j);
                }
            s += ginv(k, l) * form_inner(a, b, ginv);
        }
    return s;
}

double nabla_operator_norm2(const Tensor3& na, const Mat& g, const Mat& ginv)
{
    const int d = na.n0;
    double s = 0.0;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            if (ginv(k, l) == 0.0) continue;
            Mat a(d, d), b(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    a(i, j) = na(k, i, j);
                    b(i, j) = na(l, i, j);
                }
            s += ginv(k, l) * (a.transpose() * g * b * ginv).trace();
        }
    return s;
}

Mat pullback_form_at(const ImmersionChart& f, const Vec& q) { return angle_data(f, q).pullback_form; }

Mat jomega_form_at(const ImmersionChart& f, const Vec& q)
{
    const AngleData ad = angle_data(f, q);
    if (ad.polar.rank < f.domain_dim) throw GeometryError("J_omega is undefined at a point with a Lagrangian direction");
    return ad.polar.jomega.transpose() * ad.polar.g.components();
}

Mat hat_metric_at(const ImmersionChart& f, const Vec& q) { return angle_data(f, q).hat_metric; }

AngleFieldDerivatives angle_field_derivatives(const ImmersionChart& f, const Vec& p)
{
    const int d = f.domain_dim;
    const int n = f.n();
    const FdParams fd = field_fd(f);
    const AngleData ad = angle_data(f, p);
    const FrameRecipe recipe = diagonalizing_frame(ad).recipe;
    const DomainMetric dm = domain_metric(f, p);

    AngleFieldDerivatives out;
    auto cos_field = [&](const Vec& q) -> Vec {
        const auto c = tracked_cos(f, q, recipe);
        return Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    };
    const auto dcos = fd_partials<Vec>(cos_field, p, fd);
    for (int a = 0; a < n; ++a) {
        Vec grad(d);
        for (int k = 0; k < d; ++k) grad[k] = dcos[k][a];
        out.grad_cos.push_back(dm.ginv * grad);
    }

    if (ad.kappa_finite()) {
        ScalarField kappa = [&](const Vec& q) { return kappa_of(tracked_cos(f, q, recipe)); };
        out.grad_kappa = field_gradient(kappa, dm, p, fd);
        out.laplace_kappa = field_laplacian(kappa, dm, p, fd);
    } else {
        out.laplace_kappa = kNaN;
    }
    ScalarField cos2 = [&](const Vec& q) {
        double s = 0.0;
        for (double c : tracked_cos(f, q, recipe)) s += c * c;
        return s / n;
    };
    out.laplace_cos2 = field_laplacian(cos2, dm, p, fd);

    const MatField pform = [&](const Vec& q) { return pullback_form_at(f, q); };
    const Tensor3 np = covariant_derivative_02(pform, dm, p, fd);
    out.nabla_pullback_norm = 2.0 * nabla_form_norm2(np, dm.ginv);
    out.codiff_pullback = codifferential_2form(np, dm);
    double closed = 0.0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) closed = std::max(closed, std::abs(np(k, i, j) + np(i, j, k) + np(j, k, i)));
    out.closedness_residual = closed;
    out.hodge_laplacian_pullback = d_codifferential(f, pform, p, fd);

    if (ad.polar.rank == d) {
        const MatField jform = [&](const Vec& q) { return jomega_form_at(f, q); };
        const Tensor3 nj = covariant_derivative_02(jform, dm, p, fd);
        out.nabla_jomega_norm = 2.0 * nabla_form_norm2(nj, dm.ginv);
        out.codiff_jomega = codifferential_2form(nj, dm);
    } else {
        out.nabla_jomega_norm = kNaN;
    }
    return out;
}

// ---------------------------------------------------------------------------

NormalBundleAngles normal_bundle_angles(const ImmersionChart& f, const Vec& p)
{
    const PointGeometry pg = first_fundamental(f, p);
    const int t = f.target->real_dim();
    const int d = f.domain_dim;
    const MetricTensor gn(pg.g_n);
    // Projector in g_N-orthonormal coordinates is symmetric; its unit eigenspace is NM.
    const Mat q = gn.to_orthonormal(pg.normal_projector);
    const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
    const int r = t - d;
    Mat basis(t, r);
    for (int a = 0; a < r; ++a) basis.col(a) = gn.onb() * es.eigenvectors().col(t - 1 - a);

    NormalBundleAngles out;
    out.basis = basis;
    const Mat& J = f.target->j;
    Mat omega = (J * basis).transpose() * pg.g_n * basis;
    omega = 0.5 * (omega - omega.transpose()).eval();
    const MetricTensor id(Mat::Identity(r, r));
    const PolarParts np = polar_decompose_skew(two_form_to_operator(omega, id));
    out.cos_spectrum = np.cos;

    const AngleData ad = angle_data_from(pg.dF, pg.g_n, J);
    if (ad.polar.rank < d || ad.classification.complex_direction) return out;
    const Mat phi = phi_matrix(pg.dF, J, ad.pullback_operator.a);
    // J_NM acting on target vectors through the NM basis coordinates.
    const Mat jnm = basis * np.jomega * basis.transpose() * pg.g_n;
    out.phi_j_residual = max_abs(phi * ad.polar.jomega + jnm * phi);

    // U = Phi(Y / s), V = Phi(X / s) should be orthonormal and diagonalize omega_NM.
    const DiagonalizingFrame fr = diagonalizing_frame(ad);
    const int n = f.n();
    std::vector<Vec> w;
    for (int a = 0; a < n; ++a) w.push_back(phi * fr.y[a] / std::sqrt(1.0 - fr.cos[a] * fr.cos[a]));
    for (int a = 0; a < n; ++a) w.push_back(phi * fr.x[a] / std::sqrt(1.0 - fr.cos[a] * fr.cos[a]));
    double res = 0.0;
    for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
            const double gram = w[a].dot(pg.g_n * w[b]);
            res = std::max(res, std::abs(gram - (a == b ? 1.0 : 0.0)));
            const double om = (J * w[a]).dot(pg.g_n * w[b]);
            double expect = 0.0;
            if (b == a + n) expect = std::copysign(fr.cos[a], om);
            if (a == b + n) expect = std::copysign(fr.cos[b], om);
            res = std::max(res, std::abs(om - expect));
        }
    out.basis_residual = res;
    return out;
}

}  // namespace kal

namespace kal {

cplx FrameCalculus::g3(const CVec& a, const CVec& b, const CVec& c) const
{
    cplx s = 0.0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i) {
            const cplx ab = a[k] * b[i];
            if (ab == cplx(0.0)) continue;
            for (int j = 0; j < d; ++j) s += ab * c[j] * triple(k, i, j);
        }
    return s;
}

cplx FrameCalculus::conn(const CVec& a, int b, const CVec& c) const
{
    const CVec u = nabla_z[b] * a;
    return (u.transpose() * (g.cast<cplx>() * c))(0, 0);
}

Tensor3 christoffel_from_partials(const std::vector<Mat>& dg, const Mat& ginv) { return christoffel_of(dg, ginv); }

Mat curvature_operator_on_forms(const Tensor4& rm, const Mat& xi, const Mat& g)
{
    const int d = rm.d;
    const Mat ginv = g.inverse();
    // rop[i*d + a] = matrix of u -> R(d_i, d_a) u, column u.
    std::vector<Mat> rop(static_cast<size_t>(d) * d, Mat::Zero(d, d));
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) {
            Mat& m = rop[static_cast<size_t>(i) * d + a];
            for (int u = 0; u < d; ++u)
                for (int l = 0; l < d; ++l) {
                    double s = 0.0;
                    for (int w = 0; w < d; ++w) s += ginv(l, w) * rm(i, a, u, w);
                    m(l, u) = s;
                }
        }
    // Rbar(d_i, d_a) xi (u, v) as a matrix in (u, v).
    auto rbar = [&](int i, int a) -> Mat {
        const Mat& m = rop[static_cast<size_t>(i) * d + a];
        return -(m.transpose() * xi) - xi * m;
    };
    Mat out = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (ginv(i, j) == 0.0) continue;
            for (int x = 0; x < d; ++x) {
                const Mat rx = rbar(i, x);
                for (int y = 0; y < d; ++y) out(x, y) += ginv(i, j) * (-rx(j, y) + rbar(i, y)(j, x));
            }
        }
    return out;
}

double curvature_term(const Tensor4& rm, const Mat& form, const Mat& g)
{
    return form_inner(curvature_operator_on_forms(rm, form, g), form, g.inverse());
}

FrameCalculus frame_calculus(const ImmersionChart& f, const Vec& p)
{
    FrameCalculus fc;
    fc.d = f.domain_dim;
    fc.n = f.n();
    const int d = fc.d, n = fc.n;
    const PointGeometry pg = first_fundamental(f, p);
    const SecondFundamental sf = second_fundamental(f, pg);
    fc.g = pg.g_m.components();
    const AngleData ad = angle_data_from(pg.dF, pg.g_n, f.target->j);
    fc.frame = diagonalizing_frame(ad);
    for (int a = 0; a < n; ++a) fc.zz.push_back(fc.frame.z[a]);
    for (int a = 0; a < n; ++a) fc.zz.push_back(fc.frame.z[a].conjugate());

    const Mat jdf = f.target->j * pg.dF;
    fc.triple = Tensor3(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) fc.triple(k, i, j) = sf.at(k, i, d).dot(pg.g_n * jdf.col(j));

    const FrameRecipe recipe = fc.frame.recipe;
    auto field = [&](const Vec& q) -> Mat {
        const DiagonalizingFrame fr = diagonalizing_frame(angle_data(f, q), &recipe);
        Mat m(d, 2 * n);
        for (int a = 0; a < n; ++a) {
            m.col(a) = fr.x[a];
            m.col(n + a) = fr.y[a];
        }
        return m;
    };
    FdParams fd = f.fd;
    const auto dm = fd_partials<Mat>(field, p, fd);
    const Mat m0 = field(p);
    std::vector<Mat> nab(2 * n, Mat(d, d));  // real frame vectors
    for (int a = 0; a < 2 * n; ++a)
        for (int v = 0; v < d; ++v) {
            Vec w = dm[v].col(a);
            for (int k = 0; k < d; ++k)
                for (int j = 0; j < d; ++j) w[k] += pg.domain_christoffel(k, v, j) * m0(j, a);
            nab[a].col(v) = w;
        }
    const cplx I(0.0, 1.0);
    for (int a = 0; a < n; ++a) {
        const CMat za = 0.5 * (nab[a].cast<cplx>() - I * nab[n + a].cast<cplx>());
        fc.nabla_z.push_back(za);
    }
    for (int a = 0; a < n; ++a) fc.nabla_z.push_back(fc.nabla_z[a].conjugate());
    return fc;
}

}  // namespace kal
