// SPDX-License-Identifier: MIT
#pragma once

#include "kal/arrays.hpp"
#include "kal/dual.hpp"
#include "kal/identity_report.hpp"
#include "kal/tensor_core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kal {

template <class T>
using MetricFn = std::function<void(const T* p, T* g)>;

struct MetricJet {
    Mat g;
    std::vector<Mat> dg;    // dg[k] = d/dp_k g
    std::vector<Mat> d2g;   // d2g[k*D + l]
};

enum class CurvatureModel { Flat, ConstantHolomorphic };

// Kähler target in a single chart. All catalog targets have a complex
// structure with constant components in chart coordinates.
class TargetGeometry {
public:
    std::string id;
    int complex_dim = 0;
    Mat j;                                  // J^a_b, constant in the chart
    CurvatureModel model = CurvatureModel::Flat;
    double holomorphic_curvature = 0.0;     // K for ConstantHolomorphic
    std::optional<double> einstein_constant;
    bool is_flat = true;
    std::optional<Mat> lattice;             // columns span the torus lattice
    double chart_radius = 0.0;              // 0 means unbounded
    MetricFn<double> metric0;
    MetricFn<D1> metric1;
    MetricFn<D2> metric2;

    int real_dim() const { return 2 * complex_dim; }
    bool in_chart(const Vec& p) const { return chart_radius <= 0.0 || p.norm() < chart_radius; }
    void require_chart(const Vec& p) const;

    Mat metric(const Vec& p) const;
    MetricJet metric_jet(const Vec& p, int order) const;
    Tensor3 christoffel(const Vec& p) const;                  // (a, b, c) = Gamma^a_bc
    Tensor3 christoffel_from(const MetricJet& jet) const;
    Tensor4 curvature(const Vec& p) const;                    // closed form, R(X,Y,X,Y) = sectional curvature
    Tensor4 curvature_from_jets(const Vec& p) const;          // from metric second derivatives
    Mat ricci(const Vec& p) const;
    Mat kahler_form(const Vec& p) const { return j.transpose() * metric(p); }
};

using TargetPtr = std::shared_ptr<const TargetGeometry>;

// Ricci(U, V) = sum_ij g^ij R(d_i, U, d_j, V).
Mat ricci_contraction(const Tensor4& r, const Mat& ginv);
// Curvature (same sign) from metric, first and second derivatives.
Tensor4 curvature_from_metric_jet(const MetricJet& jet);

struct SpherePoint {
    double nu = 0.0;
    double phi = 0.0;
    Eigen::Vector3d unit_vector() const
    {
        return {std::cos(nu), std::sin(nu) * std::cos(phi), std::sin(nu) * std::sin(phi)};
    }
};

struct HyperKahlerTriple {
    Mat i, j, k;
};

TargetPtr make_flat_kahler(int m, std::optional<Mat> lattice = std::nullopt);
TargetPtr make_fubini_study(int m, double k);
std::pair<TargetPtr, HyperKahlerTriple> make_hyperkahler_flat(int real_dim);
Mat j_from_sphere(const HyperKahlerTriple& triple, const SpherePoint& s);
// Flat target with the same metric and a different constant complex structure.
TargetPtr with_complex_structure(const TargetGeometry& t, const Mat& j, const std::string& id);

TargetPtr make_target(const std::string& id);
std::vector<std::string> target_catalog();

IdentityReport target_audit(const TargetGeometry& t, const std::vector<Vec>& points, double tol);

}  // namespace kal
