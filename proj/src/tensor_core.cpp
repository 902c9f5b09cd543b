// SPDX-License-Identifier: MIT
#include "kal/tensor_core.hpp"

#include <algorithm>
#include <numeric>

namespace kal {

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

MetricTensor::MetricTensor(const Mat& g)
{
    if (g.rows() != g.cols() || g.rows() == 0) throw GeometryError("metric must be a non-empty square matrix");
    const double scale = 1.0 + max_abs(g);
    if (max_abs(g - g.transpose()) > 1e-10 * scale) throw GeometryError("metric is not symmetric");
    g_ = 0.5 * (g + g.transpose());
    Eigen::LLT<Mat> llt(g_);
    if (llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite");
    l_ = llt.matrixL();
    if (l_.diagonal().minCoeff() <= 1e-14 * std::sqrt(scale)) throw GeometryError("metric is not positive definite");
    const int d = dim();
    ginv_ = llt.solve(Mat::Identity(d, d));
    ginv_ = 0.5 * (ginv_ + ginv_.transpose()).eval();
    // onb = L^{-T}
    onb_ = l_.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(d, d));
}

Mat MetricTensor::to_orthonormal(const Mat& op) const
{
    // A_on = L^T A L^{-T}
    return l_.transpose() * op * onb_;
}

Mat MetricTensor::from_orthonormal(const Mat& op_on) const { return onb_ * op_on * l_.transpose(); }

SkewOperator two_form_to_operator(const Mat& form, const MetricTensor& g)
{
    if (form.rows() != g.dim() || form.cols() != g.dim()) throw GeometryError("form and metric dimensions differ");
    if (max_abs(form + form.transpose()) > 1e-10 * (1.0 + max_abs(form)))
        throw GeometryError("form is not antisymmetric");
    // g(AX, Y) = form(X, Y)  =>  A^T G = form  =>  A = G^{-1} form^T.
    Mat a = g.inverse() * form.transpose();
    return {a, g};
}

PolarParts polar_decompose_skew(const SkewOperator& op)
{
    const MetricTensor& g = op.g;
    const int d = g.dim();
    if (d % 2 != 0) throw GeometryError("skew operator dimension must be even");
    Mat aon = g.to_orthonormal(op.a);
    if (max_abs(aon + aon.transpose()) > 1e-9 * (1.0 + max_abs(aon)))
        throw GeometryError("operator is not skew-adjoint against its metric");
    aon = 0.5 * (aon - aon.transpose()).eval();

    CMat h = cplx(0.0, 1.0) * aon.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    if (es.info() != Eigen::Success) throw GeometryError("hermitian eigensolver did not converge");

    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (std::abs(ev[a]) != std::abs(ev[b])) return std::abs(ev[a]) > std::abs(ev[b]);
        return ev[a] > ev[b];
    });

    PolarParts out;
    out.g = g;
    out.hvals.resize(d);
    out.hvecs.resize(d, d);
    for (int k = 0; k < d; ++k) {
        out.hvals[k] = ev[idx[k]];
        out.hvecs.col(k) = es.eigenvectors().col(idx[k]);
    }
    const double largest = d > 0 ? std::abs(out.hvals[0]) : 0.0;
    out.kernel_threshold = kKernelRel * (largest + 1.0);

    for (int a = 0; a < d / 2; ++a) {
        double x = std::abs(out.hvals[2 * a]);
        double y = std::abs(out.hvals[2 * a + 1]);
        if (std::abs(x - y) > kPairTolerance * (1.0 + x))
            throw GeometryError("unpaired eigenvalue in angle spectrum: " + std::to_string(x) + " vs " +
                                std::to_string(y));
        double c = 0.5 * (x + y);
        out.cos.push_back(c < out.kernel_threshold ? 0.0 : c);
    }

    CMat gt = CMat::Zero(d, d), jo = CMat::Zero(d, d), pk = CMat::Zero(d, d);
    int rank = 0;
    for (int k = 0; k < d; ++k) {
        const double lam = out.hvals[k];
        CVec v = out.hvecs.col(k);
        if (std::abs(lam) < out.kernel_threshold) {
            pk += v * v.adjoint();
            continue;
        }
        ++rank;
        gt += std::abs(lam) * v * v.adjoint();
        jo += cplx(0.0, lam > 0 ? -1.0 : 1.0) * v * v.adjoint();
    }
    out.rank = rank;
    out.gtilde = g.from_orthonormal(gt.real());
    out.jomega = g.from_orthonormal(jo.real());

    if (rank < d) {
        Eigen::SelfAdjointEigenSolver<Mat> ks(0.5 * (pk.real() + pk.real().transpose()));
        for (int k = d - 1; k >= 0 && static_cast<int>(out.kernel_basis.size()) < d - rank; --k)
            out.kernel_basis.push_back(g.onb() * ks.eigenvectors().col(k));
    }
    return out;
}

std::vector<double> sorted_angle_spectrum(const PolarParts& parts) { return parts.cos; }

DetDerivatives det_path_derivatives(const MatrixPath& path, const Vec& z, const Vec& w, const FdParams& fd)
{
    const CMat a0 = path.evaluator(path.base_point);
    const int m = static_cast<int>(a0.rows());
    if (a0.cols() != m) throw GeometryError("matrix path must be square");
    const double scale = 1.0 + a0.cwiseAbs().maxCoeff();
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            if (j != k && std::abs(a0(j, k)) > 1e-12 * scale) throw GeometryError("matrix path is not diagonal at base");
    std::vector<cplx> lam(m);
    for (int j = 0; j < m; ++j) lam[j] = a0(j, j);

    const auto dA = fd_partials<CMat>(path.evaluator, path.base_point, fd);
    const auto hA = fd_hessian<CMat>(path.evaluator, path.base_point, fd);
    const int r = static_cast<int>(path.base_point.size());

    auto dir = [&](const Vec& v) {
        CMat out = CMat::Zero(m, m);
        for (int a = 0; a < r; ++a) out += v[a] * dA[a];
        return out;
    };
    auto hess = [&](const Vec& u, const Vec& v) {
        CMat out = CMat::Zero(m, m);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) out += (u[a] * v[b]) * hA[static_cast<size_t>(a) * r + b];
        return out;
    };
    auto prod_except = [&](int j, int k) {
        cplx p = 1.0;
        for (int s = 0; s < m; ++s)
            if (s != j && s != k) p *= lam[s];
        return p;
    };
    auto second_form = [&](const Vec& u, const Vec& v) {
        const CMat du = dir(u), dv = dir(v), huv = hess(u, v);
        cplx s = 0.0;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                if (j == k) continue;
                // 2x2 minor with rows built from column j at u and column k at v
                cplx minor = du(j, j) * dv(k, k) - du(k, j) * dv(j, k);
                s += prod_except(j, k) * minor;
            }
        for (int j = 0; j < m; ++j) s += prod_except(j, j) * huv(j, j);
        return s;
    };

    DetDerivatives out;
    const CMat dz = dir(z);
    out.first = 0.0;
    for (int j = 0; j < m; ++j) out.first += prod_except(j, j) * dz(j, j);
    out.second = second_form(z, w);
    out.laplacian = 0.0;
    for (int a = 0; a < r; ++a) out.laplacian += second_form(Vec::Unit(r, a), Vec::Unit(r, a));
    return out;
}

std::vector<CVec> complexify_frame(const std::vector<Vec>& x, const std::vector<Vec>& y, const MetricTensor& g)
{
    if (x.size() != y.size()) throw GeometryError("frame must come in pairs");
    const int n = static_cast<int>(x.size());
    std::vector<Vec> all;
    for (int a = 0; a < n; ++a) all.push_back(x[a]);
    for (int a = 0; a < n; ++a) all.push_back(y[a]);
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = 0; j < all.size(); ++j) {
            double target = i == j ? 1.0 : 0.0;
            if (std::abs(g.inner(all[i], all[j]) - target) > 1e-10)
                throw GeometryError("frame is not g-orthonormal");
        }
    std::vector<CVec> z;
    for (int a = 0; a < n; ++a) z.push_back(0.5 * (x[a].cast<cplx>() - cplx(0.0, 1.0) * y[a].cast<cplx>()));
    return z;
}

CMat complexified_gram(const std::vector<CVec>& z, const MetricTensor& g)
{
    const int n = static_cast<int>(z.size());
    std::vector<CVec> all = z;
    for (int a = 0; a < n; ++a) all.push_back(z[a].conjugate());
    CMat out(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) out(i, j) = bilinear(all[i], all[j], g.components());
    return out;
}

}  // namespace kal
