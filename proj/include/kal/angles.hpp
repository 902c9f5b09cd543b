// SPDX-License-Identifier: MIT
#pragma once

#include "kal/immersion.hpp"
#include "kal/tensor_core.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace kal {

inline constexpr double kEqualAngleTol = 1e-7;

enum class PointClass { Complex, Lagrangian, EqualAngles, Generic };
const char* point_class_name(PointClass c);

struct Classification {
    PointClass kind = PointClass::Generic;
    bool complex_direction = false;     // some cos > 1 - tol
    bool lagrangian_direction = false;  // some cos < tol
    double spread = 0.0;                // max cos - min cos
};

Classification classify(const std::vector<double>& cos_desc, double tol = kEqualAngleTol);

// Sum of log((1+c)/(1-c)); +infinity when some c reaches 1.
double kappa_of(const std::vector<double>& cos_desc);

struct AngleData {
    Mat pullback_form;            // form(e_i, e_j) = g(J dF e_i, dF e_j)
    SkewOperator pullback_operator;
    PolarParts polar;
    std::vector<double> cos_spectrum;   // descending
    double kappa = 0.0;                 // +inf at a complex direction
    double kappa_det = 0.0;             // half log det(g_M + gt) / det(g_M - gt)
    Mat gtilde_2tensor;                 // g_M(gt X, Y)
    Mat hat_metric;                     // g_M - g_M(A., A.)
    Classification classification;

    int n() const { return static_cast<int>(cos_spectrum.size()); }
    bool kappa_finite() const { return std::isfinite(kappa); }
};

AngleData angle_data_from(const Mat& dF, const Mat& g_n, const Mat& j);
AngleData angle_data(const ImmersionChart& f, const Vec& p);
Classification classify_point(const ImmersionChart& f, const Vec& p, double tol = kEqualAngleTol);

// Raised when the angle cluster structure changes between a base point and
// a stencil point.
class AngleCrossing : public GeometryError {
public:
    using GeometryError::GeometryError;
};

// Cluster layout of the spectrum plus the canonical basis indices used to
// seed each frame vector. Reusing a recipe at nearby points gives a smooth
// frame field as long as the layout is unchanged.
struct FrameRecipe {
    std::vector<int> cluster_pairs;   // pairs per cluster, in spectrum order
    std::vector<bool> cluster_kernel; // true for the zero-angle cluster
    std::vector<int> seeds;           // canonical index per generated vector
    bool valid() const { return !cluster_pairs.empty(); }
};

struct DiagonalizingFrame {
    std::vector<Vec> x, y;
    std::vector<CVec> z;          // (X - iY)/2
    std::vector<double> cos;      // per pair
    int nonzero_pairs = 0;        // k
    Mat jtilde;                   // J_omega on the complement of the kernel, X -> Y on kernel pairs
    FrameRecipe recipe;
};

DiagonalizingFrame diagonalizing_frame(const AngleData& ad, const FrameRecipe* reuse = nullptr);
DiagonalizingFrame diagonalizing_frame(const ImmersionChart& f, const Vec& p);

struct ConnectionComparison {
    Mat phi;                  // column i = Phi(d_i)
    Mat hat_metric;
    bool singular = false;
    double isometry_residual = 0.0;
    Tensor3 torsion;          // (k, i, j): T'(d_i, d_j) = T^k_ij d_k
    Tensor3 s_prime;          // (k, i, j)
    Tensor3 hat_christoffel;  // (k, i, j)
    Tensor3 prime_christoffel;
    double lemma_trace_residual = 0.0;   // trace identity between S' and T'
    double torsion_split_residual = 0.0; // |T' - (S'_ij - S'_ji)|
};

// Phi = J dF - dF A evaluated from first jets at q.
Mat phi_matrix(const Mat& dF, const Mat& j, const Mat& pullback_op);
ConnectionComparison phi_and_hat(const ImmersionChart& f, const Vec& p);
ConnectionComparison torsion_and_difference(const ImmersionChart& f, const Vec& p);

// ---------------------------------------------------------------------------
// Field calculus on the domain by finite differences of pointwise recomputation.

using ScalarField = std::function<double(const Vec&)>;
using MatField = std::function<Mat(const Vec&)>;

struct DomainMetric {
    Mat g;
    Mat ginv;
    Tensor3 christoffel;  // (k, i, j)
};
DomainMetric domain_metric(const ImmersionChart& f, const Vec& p);

Vec field_gradient(const ScalarField& phi, const DomainMetric& dm, const Vec& p, const FdParams& fd);
double field_laplacian(const ScalarField& phi, const DomainMetric& dm, const Vec& p, const FdParams& fd);
// (nabla_k T)_ij for a (0,2) tensor field.
Tensor3 covariant_derivative_02(const MatField& t, const DomainMetric& dm, const Vec& p, const FdParams& fd);
// (nabla_k A)^a_b for a (1,1) tensor field.
Tensor3 covariant_derivative_11(const MatField& a, const DomainMetric& dm, const Vec& p, const FdParams& fd);
// delta xi (X) = -sum_s nabla_{e_s} xi(e_s, X), returned as a vector (raised index).
Vec codifferential_2form(const Tensor3& nabla_form, const DomainMetric& dm);
// (d delta xi) for a closed 2-form field, by nested differences.
Mat d_codifferential(const ImmersionChart& f, const MatField& form, const Vec& p, const FdParams& fd);

Tensor3 christoffel_from_partials(const std::vector<Mat>& dg, const Mat& ginv);

// <S xi, xi> in the 2-form convention, with
//   Rbar(X, Y) xi (u, v) = -xi(R(X, Y) u, v) - xi(u, R(X, Y) v)
//   S xi (X, Y) = sum_i -Rbar(e_i, X) xi (e_i, Y) + Rbar(e_i, Y) xi (e_i, X).
double curvature_term(const Tensor4& rm, const Mat& form, const Mat& g);
Mat curvature_operator_on_forms(const Tensor4& rm, const Mat& form, const Mat& g);

// Squared norms with explicit conventions.
double form_norm2(const Mat& form, const Mat& ginv);              // sum_{i<j}
double form_inner(const Mat& a, const Mat& b, const Mat& ginv);   // sum_{i<j}
double nabla_form_norm2(const Tensor3& nf, const Mat& ginv);      // 2-form convention
double nabla_operator_norm2(const Tensor3& na, const Mat& g, const Mat& ginv);  // Hilbert–Schmidt

// Cos spectrum at q, rejecting a change of cluster layout relative to the base.
std::vector<double> tracked_cos(const ImmersionChart& f, const Vec& q, const FrameRecipe& base);

struct AngleFieldDerivatives {
    std::vector<Vec> grad_cos;      // per pair, raised
    Vec grad_kappa;
    double laplace_kappa = 0.0;
    double laplace_cos2 = 0.0;      // of sum of cos^2 / n
    double nabla_pullback_norm = 0.0;   // operator convention
    double nabla_jomega_norm = 0.0;     // operator convention, NaN without J_omega
    Vec codiff_pullback;
    Vec codiff_jomega;              // empty without J_omega
    Mat hodge_laplacian_pullback;
    double closedness_residual = 0.0;   // max |d F*omega|
};

AngleFieldDerivatives angle_field_derivatives(const ImmersionChart& f, const Vec& p);

// Pointwise fields used by the identity checks.
Mat pullback_form_at(const ImmersionChart& f, const Vec& q);
Mat jomega_form_at(const ImmersionChart& f, const Vec& q);   // g_M(J_omega X, Y)
Mat hat_metric_at(const ImmersionChart& f, const Vec& q);

struct NormalBundleAngles {
    std::vector<double> cos_spectrum;
    Mat basis;                   // g-orthonormal columns spanning NM
    double phi_j_residual = std::numeric_limits<double>::quiet_NaN();  // |Phi J_omega + J_NM Phi|
    double basis_residual = std::numeric_limits<double>::quiet_NaN();  // the basis Phi(X_a)/sin, Phi(Y_a)/sin diagonalizes omega_NM
};

NormalBundleAngles normal_bundle_angles(const ImmersionChart& f, const Vec& p);

// Complexified frame field around p with its covariant derivatives and the
// second-fundamental-form triple. Frame indices 0..n-1 are Z_a, n..2n-1 their
// conjugates.
struct FrameCalculus {
    int n = 0, d = 0;
    DiagonalizingFrame frame;
    Mat g;
    std::vector<CVec> zz;
    std::vector<CMat> nabla_z;   // column v: covariant derivative of zz[a] along d_v
    Tensor3 triple;              // (k, i, j) = g_N(nabla dF(d_k, d_i), J dF(d_j))

    static int bar(int a, int n) { return a < n ? a + n : a - n; }
    // g(nabla_A dF(B), J dF(C)).
    cplx g3(int a, int b, int c) const { return g3(zz[a], zz[b], zz[c]); }
    cplx g3(const CVec& a, const CVec& b, const CVec& c) const;
    // <nabla_A B, C>, complex bilinear; B is always a frame index.
    cplx conn(int a, int b, int c) const { return conn(zz[a], b, zz[c]); }
    cplx conn(const CVec& a, int b, const CVec& c) const;
};

FrameCalculus frame_calculus(const ImmersionChart& f, const Vec& p);

}  // namespace kal
