// fracalc: batch front door for the fractional-calculus toolkit.
// Verbs: apply | solve | norm | study | suite, driven by JSON problem files.
// Exit codes: 0 success, 2 validation failure, 3 numerical diagnostic.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracalc/frac_ops.hpp"
#include "fracalc/grid.hpp"
#include "fracalc/ivp.hpp"
#include "fracalc/spaces.hpp"
#include "fracalc/special.hpp"
#include "fracalc/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDiagnostic = 3;

struct Options {
    std::string input;
    std::string out = ".";
    std::string format = "both";
    std::optional<std::uint64_t> seed;
    bool strict = false;
    bool force = false;
};

json load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open input file: " + path);
    }
    json j;
    in >> j;
    return j;
}

// Atomic write: temp file in the target directory, then rename.
void write_artifact(const fs::path& path, const std::string& contents) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write artifact: " + path.string());
        }
        out << contents;
    }
    fs::rename(tmp, path);
}

fs::path artifact_path(const Options& opt, const std::string& verb,
                       const std::string& ext) {
    const fs::path stem = fs::path(opt.input).stem();
    return fs::path(opt.out) / (stem.string() + "." + verb + "." + ext);
}

void emit(const Options& opt, const std::string& verb,
          const std::string& csv, const json& sidecar) {
    if ((opt.format == "csv" || opt.format == "both") && !csv.empty()) {
        write_artifact(artifact_path(opt, verb, "csv"), csv);
    }
    if (opt.format == "json" || opt.format == "both") {
        write_artifact(artifact_path(opt, verb, "json"), sidecar.dump(2) + "\n");
    }
}

fracalc::GridFn input_grid_fn(const json& spec, const fracalc::MeshPtr& mesh,
                              fracalc::Convention conv) {
    using fracalc::Convention;
    using fracalc::GridFn;
    if (spec.is_string()) {
        const std::string name = spec.get<std::string>();
        if (name == "ones") return GridFn::constant(mesh, 1.0, conv);
        if (name == "t") {
            return GridFn::sample(mesh, [](double t) { return t; }, conv);
        }
        throw std::invalid_argument("unknown named function '" + name + "'");
    }
    if (spec.is_array()) {
        auto values = spec.get<std::vector<double>>();
        if (values.size() != mesh->node_count()) {
            throw std::invalid_argument("value count does not match the mesh");
        }
        if (conv == Convention::CellConstant && values.size() > 1) values[0] = values[1];
        return GridFn(mesh, std::move(values), conv);
    }
    if (spec.is_object() && spec.value("kind", "") == std::string("power")) {
        const double c = spec.value("c", 1.0);
        const double mu = spec.at("mu").get<double>();
        return GridFn::sample(mesh, [&](double t) {
            if (t > 0.0) return c * std::pow(t, mu);
            return mu == 0.0 ? c : 0.0;
        }, conv);
    }
    throw std::invalid_argument("v must be a name, an array, or a power form");
}

int run_apply(const Options& opt) {
    const json in = load_input(opt.input);
    const auto mesh = fracalc::mesh_from_json(in.at("mesh"));
    const std::string op = in.at("op").get<std::string>();
    const std::string conv_name = in.value("convention", std::string("cell"));
    const fracalc::Convention conv = conv_name == "linear"
                                         ? fracalc::Convention::NodeLinear
                                         : fracalc::Convention::CellConstant;
    fracalc::GridFn v = input_grid_fn(in.at("v"), mesh, conv);

    std::optional<fracalc::GridFn> result;
    if (op == "J") {
        result = fracalc::frac_integral_left(v, fracalc::FracOrder(in.at("alpha").get<double>()));
    } else if (op == "Jr") {
        result = fracalc::frac_integral_right(v, fracalc::FracOrder(in.at("alpha").get<double>()));
    } else if (op == "caputo") {
        result = fracalc::caputo(v, fracalc::FracOrder(in.at("alpha").get<double>()));
    } else if (op == "RL") {
        result = fracalc::riemann_liouville(v, fracalc::FracOrder(in.at("alpha").get<double>()));
    } else if (op == "invert") {
        result = fracalc::invert_frac_integral(v, fracalc::FracOrder(in.at("alpha").get<double>()));
    } else if (op == "reflect") {
        result = fracalc::reflect(v);
    } else {
        throw std::invalid_argument("apply: unknown op '" + op + "'");
    }

    json sidecar;
    sidecar["config"] = in;
    sidecar["result"] = fracalc::to_json(*result);
    emit(opt, "apply", fracalc::to_csv(*result), sidecar);
    return kExitOk;
}

int run_solve(const Options& opt) {
    const json in = load_input(opt.input);
    fracalc::IvpProblem prob = fracalc::ivp_problem_from_json(in);
    fracalc::SolveReport report = fracalc::solve(prob, opt.force);

    std::optional<std::vector<double>> errors;
    if (in.contains("oracle")) {
        const std::string oracle = in.at("oracle").get<std::string>();
        errors.emplace(prob.mesh->node_count());
        if (oracle == "section1") {
            const double gamma = prob.forcing.gamma;
            const double coeff = fracalc::gamma_fn(1.0 - gamma)
                                 / fracalc::gamma_fn(prob.alpha.value() - gamma + 1.0);
            for (std::size_t j = 0; j < errors->size(); ++j) {
                const double exact =
                    coeff * std::pow(prob.mesh->node(j), prob.alpha.value() - gamma) + prob.a;
                (*errors)[j] = std::abs(report.u[j] - exact);
            }
        } else if (oracle == "mittag_leffler") {
            for (std::size_t j = 0; j < errors->size(); ++j) {
                const double exact = prob.a * fracalc::mittag_leffler(
                    prob.alpha, std::pow(prob.mesh->node(j), prob.alpha.value()));
                (*errors)[j] = std::abs(report.u[j] - exact);
            }
        } else {
            throw std::invalid_argument("solve: unknown oracle '" + oracle + "'");
        }
    }

    json sidecar = fracalc::report_to_json(report, prob);
    if (in.contains("membership")) {
        const json& m = in.at("membership");
        const int levels = m.is_object() ? m.value("levels", 3) : 3;
        const double r = m.is_object() && m.contains("r")
                             ? m.at("r").get<double>()
                             : (report.wap_norm_value ? report.wap_norm_exponent : prob.p);
        fracalc::MembershipReport mr = fracalc::solve_membership(prob, r, levels, opt.force);
        sidecar["membership"] = {{"r", r},
                                 {"mesh_cells", mr.mesh_cells},
                                 {"norms", mr.norms},
                                 {"ratios", mr.ratios},
                                 {"threshold", mr.threshold},
                                 {"divergent", mr.divergent}};
        report.flags.push_back(mr.divergent ? "membership: divergent" : "membership: stable");
        sidecar["flags"] = report.flags;
    }
    if (errors) {
        double max_err = 0.0;
        for (double e : *errors) max_err = std::max(max_err, e);
        sidecar["max_error"] = max_err;
    }

    std::ostringstream csv;
    csv << "t,u,v";
    if (errors) csv << ",error";
    csv << '\n';
    char buf[32];
    for (std::size_t j = 0; j < prob.mesh->node_count(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", prob.mesh->node(j));
        csv << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", report.u[j]);
        csv << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", report.v[j]);
        csv << ',' << buf;
        if (errors) {
            std::snprintf(buf, sizeof(buf), "%.17g", (*errors)[j]);
            csv << ',' << buf;
        }
        csv << '\n';
    }
    emit(opt, "solve", csv.str(), sidecar);

    const bool flagged = std::any_of(report.flags.begin(), report.flags.end(),
                                     [](const std::string& f) {
                                         return f.find("divergent") != std::string::npos
                                                || f.find("outside proven regime") != std::string::npos;
                                     });
    return (opt.strict && flagged) ? kExitDiagnostic : kExitOk;
}

int run_norm(const Options& opt) {
    const json in = load_input(opt.input);
    const auto mesh = fracalc::mesh_from_json(in.at("mesh"));
    const std::string which = in.at("norm").get<std::string>();
    const std::string conv_name = in.value("convention", std::string("cell"));
    const fracalc::Convention conv = conv_name == "linear"
                                         ? fracalc::Convention::NodeLinear
                                         : fracalc::Convention::CellConstant;
    fracalc::GridFn v = input_grid_fn(in.at("v"), mesh, conv);

    json sidecar;
    sidecar["config"] = in;
    bool divergent = false;

    if (which == "lp") {
        const double p = in.at("p").get<double>();
        sidecar["value"] = fracalc::lp_norm(v, p);
    } else if (which == "slobodecki") {
        fracalc::SlobodeckiParams params(fracalc::FracOrder(in.at("alpha").get<double>()),
                                         in.at("p").get<double>());
        sidecar["value"] = fracalc::slobodecki_norm(v, params);
        sidecar["seminorm"] = fracalc::slobodecki_seminorm(v, params);
    } else if (which == "wap") {
        const fracalc::FracOrder alpha(in.at("alpha").get<double>());
        const double p = in.at("p").get<double>();
        sidecar["value"] = fracalc::wap_norm(v, alpha, fracalc::LpExponent::finite(p));
        if (in.value("membership", false)) {
            auto mr = fracalc::membership_test(
                [&](const fracalc::MeshPtr& m) { return fracalc::resample(v, m); },
                mesh, in.value("levels", 3), alpha, fracalc::LpExponent::finite(p));
            sidecar["membership"] = {{"mesh_cells", mr.mesh_cells},
                                     {"norms", mr.norms},
                                     {"ratios", mr.ratios},
                                     {"threshold", mr.threshold},
                                     {"divergent", mr.divergent}};
            divergent = mr.divergent;
        }
    } else {
        throw std::invalid_argument("norm: unknown norm '" + which + "'");
    }

    emit(opt, "norm", std::string(), sidecar);
    return (opt.strict && divergent) ? kExitDiagnostic : kExitOk;
}

int run_study(const Options& opt) {
    const json in = load_input(opt.input);
    const std::string target = in.at("target").get<std::string>();

    if (target == "embedding_scan") {
        const auto mesh = fracalc::mesh_from_json(in.at("mesh"));
        const std::uint64_t seed = opt.seed.value_or(in.value("seed", std::uint64_t{1}));
        auto report = fracalc::embedding_scan(
            fracalc::FracOrder(in.at("alpha").get<double>()),
            in.at("epsilon").get<double>(), in.at("p").get<double>(),
            in.value("samples", std::size_t{16}), mesh, seed);
        json sidecar = fracalc::to_json(report);
        sidecar["config"] = in;
        std::ostringstream csv;
        csv << "sample,ratio\n";
        char buf[32];
        for (std::size_t k = 0; k < report.ratios.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", report.ratios[k]);
            csv << k << ',' << buf << '\n';
        }
        emit(opt, "study", csv.str(), sidecar);
        return kExitOk;
    }

    const auto sizes = in.at("mesh_sizes").get<std::vector<std::size_t>>();
    fracalc::ConvergenceStudy study = fracalc::convergence_study(target, sizes);
    json sidecar = fracalc::to_json(study);
    sidecar["config"] = in;
    emit(opt, "study", fracalc::study_to_csv(study), sidecar);
    return kExitOk;
}

int run_suite(const Options& opt) {
    json in;
    if (!opt.input.empty()) in = load_input(opt.input);
    const std::size_t cells =
        in.is_object() ? in.value("N", std::size_t{1024}) : std::size_t{1024};
    const std::uint64_t seed =
        opt.seed.value_or(in.is_object() ? in.value("seed", std::uint64_t{1})
                                         : std::uint64_t{1});

    fracalc::IdentityReport report = fracalc::identity_suite(seed, cells);
    std::cout << fracalc::to_text(report);

    json sidecar = fracalc::to_json(report);
    if (!opt.input.empty()) {
        emit(opt, "suite", std::string(), sidecar);
    } else {
        write_artifact(fs::path(opt.out) / "suite.json", sidecar.dump(2) + "\n");
    }
    return report.all_pass ? kExitOk : kExitDiagnostic;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracalc: fractional integrals, derivatives, norms and IVP solvers"};
    app.require_subcommand(1);

    Options opt;
    std::string verb;
    for (const std::string name : {"apply", "solve", "norm", "study", "suite"}) {
        CLI::App* sub = app.add_subcommand(name);
        auto* input_opt = sub->add_option("--input", opt.input, "JSON problem file");
        if (name != "suite") input_opt->required();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--format", opt.format, "csv|json|both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
        sub->add_option_function<std::uint64_t>(
            "--seed", [&opt](const std::uint64_t& s) { opt.seed = s; }, "random seed");
        sub->add_flag("--strict", opt.strict, "exit 3 on numerical diagnostics");
        sub->add_flag("--force", opt.force, "compute outside the proven exponent regime");
        sub->callback([&verb, name] { verb = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (verb == "apply") return run_apply(opt);
        if (verb == "solve") return run_solve(opt);
        if (verb == "norm") return run_norm(opt);
        if (verb == "study") return run_study(opt);
        if (verb == "suite") return run_suite(opt);
        std::cerr << "unknown verb\n";
        return kExitValidation;
    } catch (const fracalc::ExponentGateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
