// rigidity-lab: validate surface documents, run the local rigidity analysis,
// check analytic derivative tensors against finite differences, and fit
// energy growth exponents along flex trajectories.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rigidity/closure.hpp"
#include "rigidity/energy.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/report.hpp"
#include "rigidity/rigidity_analysis.hpp"
#include "rigidity/surface.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitNotConfiguration = 3;
constexpr int kExitCheckFailed = 4;
constexpr int kExitUnresolvable = 6;
constexpr int kExitUndecided = 10;
constexpr int kExitUsage = 64;

int env_threads() {
    const char* s = std::getenv("RIGIDITY_LAB_THREADS");
    if (!s) return 1;
    const int t = std::atoi(s);
    return t > 0 ? t : 1;
}

struct Common {
    std::string path;
    std::string format = "text";
    double tol_rank = -1.0;
    double tol_config = rigidity::kDefaultTolConfig;
    int kmax = rigidity::kDefaultKMax;
    unsigned long long seed = 2025;
};

rigidity::AnalysisOptions make_options(const Common& c) {
    rigidity::AnalysisOptions o;
    o.kmax = c.kmax;
    o.tol_rank = c.tol_rank;
    o.tol_config = c.tol_config;
    o.seed = c.seed;
    o.threads = env_threads();
    return o;
}

int run_validate(const Common& c) {
    rigidity::Surface s;
    try {
        s = rigidity::load_surface_file(c.path);
    } catch (const rigidity::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const rigidity::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInvariant;
    }
    const rigidity::FoldingState st = rigidity::folding_angles_from_realization(s);
    const rigidity::ConfigCheck chk = rigidity::is_configuration(s, st, c.tol_config);
    if (!chk.ok) {
        std::cerr << "not a configuration: " << chk.detail << "\n";
        return kExitNotConfiguration;
    }
    std::cout << "ok: " << s.vertices.size() << " vertices, " << s.panels.size() << " panels, "
              << s.n_angles << " folding angles, " << s.n_interior_vertices()
              << " interior vertices, " << s.n_cycles() << " cycles; max residual "
              << rigidity::format_number(chk.max_residual) << "\n";
    return kExitOk;
}

int run_analyze(const Common& c) {
    rigidity::Surface s;
    try {
        s = rigidity::load_surface_file(c.path);
    } catch (const rigidity::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const rigidity::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInvariant;
    }
    const rigidity::FoldingState st = rigidity::folding_angles_from_realization(s);
    rigidity::RigidityReport rep;
    try {
        rep = rigidity::classify(s, st, make_options(c));
    } catch (const rigidity::NotAConfiguration& e) {
        std::cerr << "not a configuration: " << e.what() << "\n";
        return kExitNotConfiguration;
    }
    if (c.format == "json")
        std::cout << rigidity::report_to_json(rep).dump(2) << "\n";
    else
        std::cout << rigidity::report_to_text(rep);
    return rep.undecided() ? kExitUndecided : kExitOk;
}

int run_derivs_check(const Common& c, int order, double h) {
    rigidity::Surface s;
    try {
        s = rigidity::load_surface_file(c.path);
    } catch (const rigidity::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const rigidity::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInvariant;
    }
    const rigidity::FoldingState st = rigidity::folding_angles_from_realization(s);
    bool all_pass = true;
    std::cout << "order  h           max_dev      C=dev/h^2    pass\n";
    for (int k = 1; k <= order; ++k) {
        rigidity::SymmetricTensor fd_h = rigidity::fd_oracle(s, st, k, h);
        rigidity::SymmetricTensor fd_h10 = rigidity::fd_oracle(s, st, k, h / 10.0);
        rigidity::SymmetricTensor analytic(k, s.n_angles, s.n_constraints());
        if (k == 1) {
            const rigidity::MatX R = rigidity::rigidity_matrix(s, st, c.tol_config);
            for (int col = 0; col < R.cols(); ++col) analytic.set({col}, R.col(col));
        } else {
            analytic = rigidity::derivative_tensor(s, st, k, c.tol_config);
        }
        auto maxdev = [&](const rigidity::SymmetricTensor& fd) {
            double m = 0.0;
            for (const auto& [key, val] : fd.entries())
                m = std::max(m, (val - analytic.get(key)).cwiseAbs().maxCoeff());
            for (const auto& [key, val] : analytic.entries())
                m = std::max(m, (val - fd.get(key)).cwiseAbs().maxCoeff());
            return m;
        };
        const double dev_h = maxdev(fd_h);
        const double dev_h10 = maxdev(fd_h10);
        // truncation cap C*h^2 plus the k-th order FD roundoff floor eps/(2h)^k
        const double scale = 1.0 + analytic.max_abs();
        auto allowed = [&](double hh) {
            const double floor_k = 32.0 * 2.2e-16 * scale / std::pow(2.0 * hh, k);
            return std::max(100.0 * scale * hh * hh, floor_k);
        };
        const bool pass = dev_h <= allowed(h) && dev_h10 <= allowed(h / 10.0);
        all_pass = all_pass && pass;
        auto line = [&](double hh, double dev) {
            std::printf("%-6d %-11.3e %-12.5e %-12.5e %s\n", k, hh, dev, dev / (hh * hh),
                        pass ? "yes" : "NO");
        };
        line(h, dev_h);
        line(h / 10.0, dev_h10);
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

int run_growth(const Common& c, const std::string& flex_spec, double stress_scale,
               double tmin, double tmax, int npts) {
    rigidity::Surface s;
    try {
        s = rigidity::load_surface_file(c.path);
    } catch (const rigidity::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const rigidity::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInvariant;
    }
    const rigidity::FoldingState st = rigidity::folding_angles_from_realization(s);
    const rigidity::AnalysisOptions opts = make_options(c);

    rigidity::VecX omega = rigidity::VecX::Zero(s.n_constraints());
    double eps = 0.0;
    std::vector<rigidity::TrajectoryJet> jets;
    std::vector<std::string> labels;

    const auto pos = flex_spec.find(':');
    const std::string kind = flex_spec.substr(0, pos);
    const int index = pos == std::string::npos ? -1 : std::atoi(flex_spec.c_str() + pos + 1);

    if (kind == "straight") {
        if (index < 0 || index >= s.n_angles) {
            std::cerr << "usage error: straight:<angle index>\n";
            return kExitUsage;
        }
        rigidity::TrajectoryJet j;
        rigidity::VecX dir = rigidity::VecX::Zero(s.n_angles);
        dir(index) = 1.0;
        j.derivs = {dir};
        jets.push_back(j);
        labels.push_back(flex_spec);
    } else {
        const rigidity::RigidityReport rep = rigidity::classify(s, st, opts);
        if (kind == "null") {
            if (index < 0 || index >= rep.first_order.nullity) {
                std::cerr << "usage error: null:<index> out of range (nullity "
                          << rep.first_order.nullity << ")\n";
                return kExitUsage;
            }
            rigidity::TrajectoryJet j;
            j.derivs = {rep.first_order.null_basis.col(index)};
            jets.push_back(j);
            labels.push_back(flex_spec);
        } else if (kind == "ray") {
            if (!rep.second_order || index < 0 ||
                index >= static_cast<int>(rep.second_order->rays.size())) {
                std::cerr << "usage error: ray:<index> out of range\n";
                return kExitUsage;
            }
            const auto& r = rep.second_order->rays[static_cast<size_t>(index)];
            rigidity::TrajectoryJet j;
            j.derivs = {r.rho1, r.rho2};
            jets.push_back(j);
            labels.push_back(flex_spec);
        } else if (kind == "recursion") {
            if (!rep.recursion) {
                std::cerr << "usage error: no nullity-one recursion certificate\n";
                return kExitUsage;
            }
            jets.push_back(rep.recursion->jet);
            labels.push_back("recursion");
        } else {
            std::cerr << "usage error: unknown flex spec '" << flex_spec << "'\n";
            return kExitUsage;
        }
        if (stress_scale > 0.0 && !rep.selfstresses.empty()) {
            omega = rep.selfstresses[0];
            eps = stress_scale;
        }
    }

    const rigidity::EnergyModel energy = rigidity::build_energy(s, st, omega, eps);
    const std::vector<double> grid = rigidity::log_grid(tmin, tmax, npts);
    bool ok = true;
    std::cout << "trajectory    exponent      fit_residual  points\n";
    for (size_t i = 0; i < jets.size(); ++i) {
        const rigidity::GrowthFit fit = rigidity::growth_probe_jet(energy, jets[i], grid);
        if (!fit.ok) {
            std::cout << labels[i] << ": unresolvable (" << fit.message << ")\n";
            ok = false;
            continue;
        }
        std::printf("%-13s %-13.6f %-13.3e %d\n", labels[i].c_str(), fit.exponent,
                    fit.fit_residual, fit.points_used);
    }
    return ok ? kExitOk : kExitUnresolvable;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"local rigidity analysis for polyhedral surfaces in the folding-angle model"};
    app.require_subcommand(1);

    Common c;
    int order = 2;
    double h = 1e-4;
    std::string flex_spec;
    double stress_scale = 0.0;
    double tmin = 1e-4, tmax = 1e-1;
    int npts = 25;

    auto add_common = [&](CLI::App* sub, bool with_format) {
        sub->add_option("file", c.path, "surface document (JSON)")->required();
        if (with_format)
            sub->add_option("--format", c.format, "output format")
                ->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--tol-rank", c.tol_rank, "absolute SVD rank threshold");
        sub->add_option("--tol-config", c.tol_config, "configuration residual tolerance");
        sub->add_option("--kmax", c.kmax, "highest derivative order")->check(CLI::Range(2, 10));
        sub->add_option("--seed", c.seed, "seed for the multistart searches");
    };

    CLI::App* validate = app.add_subcommand("validate", "validate a surface document");
    add_common(validate, false);

    CLI::App* analyze = app.add_subcommand("analyze", "run the local rigidity tests");
    add_common(analyze, true);

    CLI::App* derivs = app.add_subcommand("derivs-check",
                                          "compare analytic derivative tensors with finite differences");
    derivs->set_help_flag("--help", "print help"); // frees -h for the step option
    add_common(derivs, false);
    derivs->add_option("--order", order, "highest order to check (1..3)");
    derivs->add_option("--h", h, "finite-difference step")->check(CLI::PositiveNumber);

    CLI::App* growth = app.add_subcommand("growth", "fit energy growth exponents along a flex");
    add_common(growth, false);
    growth->add_option("--flex", flex_spec,
                       "trajectory: null:<i> | ray:<i> | recursion | straight:<i>")
        ->required();
    growth->add_option("--stress-scale", stress_scale, "prestress epsilon (0 = unstressed)");
    growth->add_option("--tmin", tmin, "smallest trajectory parameter")->check(CLI::PositiveNumber);
    growth->add_option("--tmax", tmax, "largest trajectory parameter")->check(CLI::PositiveNumber);
    growth->add_option("--npts", npts, "grid size")->check(CLI::Range(3, 1000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(validate)) return run_validate(c);
        if (app.got_subcommand(analyze)) return run_analyze(c);
        if (app.got_subcommand(derivs)) {
            if (order < 1 || order > 3) {
                std::cerr << "usage error: --order must be 1, 2 or 3\n";
                return kExitUsage;
            }
            return run_derivs_check(c, order, h);
        }
        if (app.got_subcommand(growth)) return run_growth(c, flex_spec, stress_scale, tmin, tmax, npts);
    } catch (const rigidity::NotAConfiguration& e) {
        std::cerr << "not a configuration: " << e.what() << "\n";
        return kExitNotConfiguration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;
    }
    return kExitUsage;
}
