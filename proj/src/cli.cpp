// SPDX-License-Identifier: MIT
#include "kal/cli.hpp"

#include "kal/angles.hpp"
#include "kal/flow.hpp"
#include "kal/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace kal {

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

// Opens the output before any computation so an unwritable path is a config error.
std::unique_ptr<std::ofstream> open_output(const std::string& path)
{
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*f) throw ConfigError("cannot write " + path);
    return f;
}

void emit(const std::string& text, std::ofstream* file, std::ostream& out)
{
    if (file) {
        *file << text;
        file->flush();
        if (!*file) throw ConfigError("write failed");
    } else {
        out << text;
    }
}

Vec parse_point(const std::string& s)
{
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("bad coordinate '" + tok + "' in --at");
        }
    }
    return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ImmersionPtr example_or_config_error(const std::string& id)
{
    try {
        return make_immersion(id);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

std::string catalog_text()
{
    std::ostringstream os;
    os << "examples:\n";
    for (const std::string& e : immersion_catalog()) os << "  " << e << "\n";
    os << "targets:\n";
    for (const std::string& t : target_catalog()) os << "  " << t << "\n";
    os << "checks:\n";
    for (const CheckSpec& s : check_registry())
        os << "  " << s.id << "  [" << check_group_name(s.group) << ", tol " << format_double(s.tolerance) << "]\n";
    return os.str();
}

std::string angles_text(const ImmersionChart& f, const Vec& p)
{
    if (p.size() != f.domain_dim)
        throw ConfigError("--at needs " + std::to_string(f.domain_dim) + " coordinates for " + f.id);
    return render_angles_json(f.id, p, angle_data(f, p));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Kahler angle identity lab"};
    app.require_subcommand(1);

    auto* catalog = app.add_subcommand("catalog", "List examples, targets and checks");
    catalog->add_subcommand("list", "Print the catalog");
    catalog->require_subcommand(1);

    RunConfig cfg;
    std::string out_path, format = "json";
    std::optional<double> tol, fd_step;
    auto* verify = app.add_subcommand("verify", "Run identity checks on an example");
    verify->add_option("--checks", cfg.checks, "Glob over check ids")->required();
    verify->add_option("--example", cfg.example, "Example id with parameters")->required();
    verify->add_option("--points", cfg.points, "Sample points per check");
    verify->add_option("--seed", cfg.seed, "Sampling seed");
    verify->add_option("--tol", tol, "Tolerance override");
    verify->add_option("--fd-step", fd_step, "Finite-difference step");
    verify->add_option("--fd-order", cfg.fd_order, "Stencil order (2 or 4)");
    verify->add_option("--grid", cfg.grid, "Quadrature points per direction");
    verify->add_option("--out", out_path, "Output path (stdout when absent)");
    verify->add_option("--format", format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));

    std::string angles_example, at;
    auto* angles = app.add_subcommand("angles", "Kahler angles at a point");
    angles->add_option("--example", angles_example)->required();
    angles->add_option("--at", at, "Comma separated coordinates")->required();

    std::string flow_example, flow_out, flow_format = "json";
    std::optional<double> eps, step_size;
    int grid = 32, steps = 2000;
    auto* flow = app.add_subcommand("flow", "Discrete volume descent on a periodic example");
    flow->add_option("--example", flow_example)->required();
    flow->add_option("--eps", eps, "Perturbation size");
    flow->add_option("--grid", grid, "Vertices per direction");
    flow->add_option("--steps", steps, "Maximum number of steps");
    flow->add_option("--step-size", step_size, "Initial step size");
    flow->add_option("--out", flow_out, "Output path (stdout when absent)");
    flow->add_option("--format", flow_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (catalog->parsed()) {
            out << catalog_text();
            return 0;
        }
        if (verify->parsed()) {
            cfg.tolerance = tol;
            cfg.fd_step = fd_step;
            // Validate ids before opening or computing anything.
            if (match_checks(cfg.checks).empty()) throw ConfigError("no check matches '" + cfg.checks + "'");
            example_or_config_error(cfg.example);
            auto file = open_output(out_path);
            const RunReport rep = run_catalog(cfg);
            const std::string text = format == "csv" ? render_csv(rep) : format == "table" ? render_table(rep)
                                                                                              : render_json(rep);
            emit(text, file.get(), out);
            if (file)
                out << "pass " << rep.pass << ", fail " << rep.fail << ", skipped " << rep.skipped << " -> " << out_path
                    << "\n";
            return rep.fail > 0 ? kExitFail : 0;
        }
        if (angles->parsed()) {
            const ImmersionPtr f = example_or_config_error(angles_example);
            out << angles_text(*f, parse_point(at));
            return 0;
        }
        if (flow->parsed()) {
            std::string id = flow_example;
            if (eps) {
                std::ostringstream os;
                os.precision(17);
                os << (id.find('?') == std::string::npos ? "?" : "&") << "eps=" << *eps;
                id += os.str();
            }
            const ImmersionPtr f = example_or_config_error(id);
            if (!f->periodic || !f->target->is_flat) throw ConfigError(f->id + " is not a periodic map into a flat torus");
            if (grid < 2) throw ConfigError("--grid must be at least 2");
            if (steps < 0) throw ConfigError("--steps must be non-negative");
            auto file = open_output(flow_out);
            FlowParams params;
            params.max_steps = steps;
            params.step_size = step_size;
            const FlowTrace trace = run_flow(discretize(*f, grid), params);
            const DichotomyReport verdict = dichotomy_report(trace);
            emit(flow_format == "csv" ? render_flow_csv(trace) : render_flow_json(f->id, grid, trace, verdict),
                 file.get(), out);
            if (file)
                out << flow_status_name(trace.status) << ", limit " << limit_class_name(verdict.limit_class) << " ("
                    << verdict.label << ") -> " << flow_out << "\n";
            return trace.status == FlowStatus::Diverged ? kExitFail : 0;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitConfig;
}

}  // namespace kal
