// SPDX-License-Identifier: MIT
#pragma once

#include "kal/fd.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

inline constexpr double kPairTolerance = 1e-8;

// Relative kernel threshold: |eigenvalue| < kKernelRel * (largest + 1) counts as zero.
inline constexpr double kKernelRel = 1e-9;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Symmetric positive-definite bilinear form with a cached Cholesky factor
// G = L L^T. Columns of onb() are g-orthonormal.
class MetricTensor {
public:
    MetricTensor() = default;
    explicit MetricTensor(const Mat& g);

    int dim() const { return static_cast<int>(g_.rows()); }
    const Mat& components() const { return g_; }
    const Mat& inverse() const { return ginv_; }
    const Mat& chol_lower() const { return l_; }
    const Mat& onb() const { return onb_; }

    double inner(const Vec& x, const Vec& y) const { return x.dot(g_ * y); }
    // Operator in g-orthonormal coordinates and back.
    Mat to_orthonormal(const Mat& op) const;
    Mat from_orthonormal(const Mat& op_on) const;

private:
    Mat g_, ginv_, l_, onb_;
};

struct SkewOperator {
    Mat a;
    MetricTensor g;
};

struct PolarParts {
    Mat gtilde;                   // positive semidefinite, g-self-adjoint
    Mat jomega;                   // partial isometry, zero on the kernel
    std::vector<Vec> kernel_basis;
    int rank = 0;
    std::vector<double> cos;      // n values, descending, from the paired spectrum
    MetricTensor g;
    // Eigen data of the Hermitian matrix i*A in g-orthonormal coordinates,
    // sorted by |value| descending.
    Eigen::VectorXd hvals;
    CMat hvecs;
    double kernel_threshold = 0.0;
};

struct MatrixPath {
    std::function<CMat(const Vec&)> evaluator;
    Vec base_point;
    std::vector<cplx> base_diagonal;
};

struct DetDerivatives {
    cplx first;
    cplx second;
    cplx laplacian;
};

SkewOperator two_form_to_operator(const Mat& form, const MetricTensor& g);
PolarParts polar_decompose_skew(const SkewOperator& a);
std::vector<double> sorted_angle_spectrum(const PolarParts& parts);
DetDerivatives det_path_derivatives(const MatrixPath& path, const Vec& z, const Vec& w, const FdParams& fd = {});
std::vector<CVec> complexify_frame(const std::vector<Vec>& x, const std::vector<Vec>& y, const MetricTensor& g);

// Complex-bilinear (not hermitian) extension of g.
inline cplx bilinear(const CVec& u, const CVec& v, const Mat& g) { return u.transpose() * g.cast<cplx>() * v; }

// Full complexified Gram matrix of {Z_1..Z_n, conj Z_1..conj Z_n}.
CMat complexified_gram(const std::vector<CVec>& z, const MetricTensor& g);

double max_abs(const Mat& m);

}  // namespace kal
