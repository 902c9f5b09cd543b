// SPDX-License-Identifier: MIT
#pragma once

#include "kal/angles.hpp"
#include "kal/flow.hpp"
#include "kal/identities.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kal {

inline constexpr const char* kVersion = "0.1.0";

// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string checks = "*";     // glob over check ids
    std::string example;
    int points = 5;
    std::uint64_t seed = 1;
    std::optional<double> tolerance;
    std::optional<double> fd_step;
    int fd_order = 4;
    int grid = 64;
};

struct RunReport {
    RunConfig config;
    FdParams fd;
    std::map<std::string, double> tolerances;   // effective, per selected check
    std::vector<IdentityReport> results;        // registry order, then point order
    int pass = 0, fail = 0, skipped = 0;
};

// Validates every id before computing. Points come from the example sampler
// seeded with config.seed; a point on an excluded locus is resampled up to
// 100 times from a stream derived from (seed, check, point).
RunReport run_catalog(const RunConfig& config);

// Byte-stable renderings: sorted keys, floats as %.12e, non-finite values as strings.
std::string render_json(const RunReport& report);
std::string render_csv(const RunReport& report);
std::string render_table(const RunReport& report);

std::string render_flow_json(const std::string& example, int grid, const FlowTrace& trace,
                             const DichotomyReport& verdict);
std::string render_flow_csv(const FlowTrace& trace);
std::string render_angles_json(const std::string& example, const Vec& p, const AngleData& ad);

// Shared float formatting for reports.
std::string format_double(double x);

}  // namespace kal
