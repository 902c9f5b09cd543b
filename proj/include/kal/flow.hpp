// SPDX-License-Identifier: MIT
#pragma once

#include "kal/immersion.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kal {

// Vertex samples of a periodic immersion into a flat complex torus. Vertex
// (i_0, ..., i_{d-1}) sits at x_k = i_k * spacing_k; stepping past the last
// vertex in direction k wraps to index 0 and adds translations.col(k).
struct DiscreteImmersion {
    TargetPtr target;
    std::vector<int> shape;
    Vec spacing;
    Mat translations;          // t x d
    Eigen::MatrixXi winding;   // translations in lattice units
    Mat positions;             // t x vertex_count

    int dim() const { return static_cast<int>(shape.size()); }
    int vertex_count() const;
    double cell_measure() const;   // product of spacings
    // Position of vertex index + offset, unwrapped across the boundary.
    Vec position(const std::vector<int>& index) const;
};

// Throws GeometryError for an aperiodic chart or a non-flat target.
DiscreteImmersion discretize(const ImmersionChart& f, int per_dim);

struct VolumeGradient {
    double volume = 0.0;
    Mat gradient;   // t x vertex_count, exact derivative of the discrete volume
};

// Each cell uses edge-averaged tangents A and contributes sqrt(det A^T A) times the cell measure.
VolumeGradient volume_and_gradient(const DiscreteImmersion& d);

// Sum over cells of the Pfaffian of A^T J^T A times the cell measure. For d = 2
// this is the exact integral of omega over the bilinear cell patches, hence a
// homotopy invariant of the discrete surface.
double class_integral(const DiscreteImmersion& d);

struct VertexStats {
    double min_cos = 0.0, mean_cos = 0.0, max_cos = 0.0;
    double kappa_integral = 0.0;       // +inf once a vertex is complex
    double max_mean_curvature = 0.0;   // max |gradient| per unit volume
};

// Angles from central-difference jets at the vertices.
VertexStats vertex_stats(const DiscreteImmersion& d, const Mat& gradient);

struct FlowParams {
    std::optional<double> step_size;   // default 0.1 * min spacing^2
    int max_steps = 2000;
    double stop_grad_norm = 1e-8;      // on max mean curvature
};

struct FlowRow {
    int step = 0;
    double volume = 0.0;
    double grad_norm = 0.0;
    double max_mean_curvature = 0.0;
    double min_cos = 0.0, mean_cos = 0.0, max_cos = 0.0;
    double kappa_integral = 0.0;
    double class_integral = 0.0;
    double step_size = 0.0;
};

enum class FlowStatus { Converged, MaxSteps, Diverged };
const char* flow_status_name(FlowStatus s);

struct FlowTrace {
    std::vector<FlowRow> rows;   // row 0 is the initial state
    FlowStatus status = FlowStatus::MaxSteps;
    std::string message;
    DiscreteImmersion final_state;
};

// Explicit descent x <- x - tau * gradient / cell_measure. A step that raises
// the volume is retried at half the step; a second consecutive rise aborts.
FlowTrace run_flow(DiscreteImmersion d, const FlowParams& params = {});

enum class LimitClass { Lagrangian, Complex, ConstantAngle, Undetermined };
const char* limit_class_name(LimitClass c);

struct DichotomyReport {
    LimitClass limit_class = LimitClass::Undetermined;
    std::optional<double> angle;       // common angle in radians for ConstantAngle
    std::map<std::string, double> evidence;
    std::string label = "empirical probe";
};

DichotomyReport dichotomy_report(const FlowTrace& trace, double threshold = 1e-4);

}  // namespace kal
