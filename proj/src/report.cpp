#include "rigidity/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rigidity {

using nlohmann::ordered_json;

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string symbolic_annotation(double x) {
    struct Named {
        double value;
        const char* name;
    };
    static const double s3 = std::sqrt(3.0);
    static const Named table[] = {
        {0.0, "0"},           {1.0, "1"},           {-1.0, "-1"},
        {0.5, "1/2"},         {-0.5, "-1/2"},       {s3, "sqrt(3)"},
        {-s3, "-sqrt(3)"},    {s3 / 2, "sqrt(3)/2"},{-s3 / 2, "-sqrt(3)/2"},
        {s3 + 1, "sqrt(3)+1"},{s3 - 1, "sqrt(3)-1"},{-(s3 + 1), "-(sqrt(3)+1)"},
        {-(s3 - 1), "-(sqrt(3)-1)"}, {M_PI, "pi"},  {M_PI_2, "pi/2"},
        {2.0, "2"},           {-2.0, "-2"},
    };
    for (const Named& n : table)
        if (std::abs(x - n.value) < 1e-9) return n.name;
    return "";
}

namespace {

ordered_json json_vector(const VecX& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ordered_json json_matrix_cols(const MatX& M) {
    ordered_json a = ordered_json::array();
    for (int c = 0; c < M.cols(); ++c) a.push_back(json_vector(M.col(c)));
    return a;
}

ordered_json annotated(const VecX& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) {
        ordered_json e;
        e["decimal"] = format_number(v(i));
        const std::string sym = symbolic_annotation(v(i));
        if (!sym.empty()) e["symbolic"] = sym;
        a.push_back(e);
    }
    return a;
}

const char* feasibility_name(Feasibility f) {
    switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::infeasible: return "infeasible";
    case Feasibility::undecided: return "undecided";
    default: return "no_selfstress";
    }
}

const char* saddle_name(SaddleVerdict v) {
    switch (v) {
    case SaddleVerdict::saddle: return "saddle";
    case SaddleVerdict::not_saddle: return "not_saddle";
    case SaddleVerdict::indeterminate: return "indeterminate";
    default: return "no_selfstress";
    }
}

const char* second_order_name(SecondOrderVerdict v) {
    switch (v) {
    case SecondOrderVerdict::rigid: return "rigid";
    case SecondOrderVerdict::flexible: return "flexible";
    case SecondOrderVerdict::undecided: return "undecided";
    default: return "not_applicable";
    }
}

const char* sop_name(PrestressOrder2Verdict v) {
    switch (v) {
    case PrestressOrder2Verdict::stable: return "stable";
    case PrestressOrder2Verdict::not_shown: return "not_shown";
    case PrestressOrder2Verdict::undecided: return "undecided";
    default: return "skipped";
    }
}

} // namespace

ordered_json report_verdicts(const RigidityReport& rep) {
    ordered_json v;
    v["first_order_rigid"] = rep.first_order.rigid;
    v["nullity"] = rep.first_order.nullity;
    v["n_selfstresses"] = static_cast<int>(rep.selfstresses.size());
    v["prestress_stable"] =
        rep.prestress ? feasibility_name(rep.prestress->verdict) : "not_run";
    v["saddle"] = rep.saddle ? saddle_name(rep.saddle->verdict) : "not_run";
    v["second_order"] =
        rep.second_order ? second_order_name(rep.second_order->verdict) : "not_run";
    v["second_order_rays"] =
        rep.second_order ? static_cast<int>(rep.second_order->rays.size()) : 0;
    v["second_order_prestress"] =
        rep.second_order_prestress ? sop_name(rep.second_order_prestress->verdict) : "not_run";
    if (rep.recursion) {
        if (rep.recursion->decided)
            v["nullity_one_order"] = rep.recursion->order;
        else
            v["nullity_one_order"] = "flexible<=" + std::to_string(rep.recursion->kmax);
    } else {
        v["nullity_one_order"] = "not_run";
    }
    v["undecided"] = rep.undecided();
    return v;
}

ordered_json report_to_json(const RigidityReport& rep) {
    ordered_json j;
    j["format_version"] = 1;
    j["tool"] = "rigidity-lab";
    ordered_json opts;
    opts["kmax"] = rep.options.kmax;
    opts["tol_rank"] = rep.options.tol_rank;
    opts["tol_config"] = rep.options.tol_config;
    opts["undecided_band"] = rep.options.undecided_band;
    opts["multistarts"] = rep.options.multistarts;
    opts["seed"] = rep.options.seed;
    j["options"] = opts;
    j["n_angles"] = rep.n_rho;
    j["n_constraints"] = rep.n_constraints;
    j["verdicts"] = report_verdicts(rep);

    ordered_json cert;
    cert["null_basis"] = json_matrix_cols(rep.first_order.null_basis);
    ordered_json stresses = ordered_json::array();
    for (const VecX& w : rep.selfstresses) stresses.push_back(json_vector(w));
    cert["selfstress_basis"] = stresses;
    if (rep.prestress) {
        ordered_json p;
        p["verdict"] = feasibility_name(rep.prestress->verdict);
        p["best_lambda_min"] = rep.prestress->best_lambda_min;
        if (rep.prestress->best_w.size()) p["best_w"] = json_vector(rep.prestress->best_w);
        if (rep.prestress->stabilizing_w.size())
            p["stabilizing_w"] = json_vector(rep.prestress->stabilizing_w);
        cert["prestress_search"] = p;
    }
    if (rep.saddle) {
        ordered_json sj;
        sj["verdict"] = saddle_name(rep.saddle->verdict);
        sj["candidates_checked"] = rep.saddle->candidates_checked;
        sj["note"] = rep.saddle->note;
        cert["saddle_test"] = sj;
    }
    if (rep.second_order) {
        ordered_json so;
        so["verdict"] = second_order_name(rep.second_order->verdict);
        so["all_directions_extendable"] = rep.second_order->all_directions_extendable;
        so["note"] = rep.second_order->note;
        ordered_json rays = ordered_json::array();
        for (const SecondOrderRay& r : rep.second_order->rays) {
            ordered_json rj;
            rj["a"] = json_vector(r.a);
            rj["a_annotated"] = annotated(r.a);
            rj["rho1"] = json_vector(r.rho1);
            rj["rho2"] = json_vector(r.rho2);
            rj["max_qform"] = r.max_qform;
            rj["solve_residual"] = r.solve_residual;
            rays.push_back(rj);
        }
        so["rays"] = rays;
        cert["second_order"] = so;
    }
    if (rep.second_order_prestress) {
        ordered_json sp;
        sp["verdict"] = sop_name(rep.second_order_prestress->verdict);
        sp["note"] = rep.second_order_prestress->note;
        if (rep.second_order_prestress->omega.size())
            sp["omega"] = json_vector(rep.second_order_prestress->omega);
        sp["min_quartic"] = rep.second_order_prestress->min_quartic;
        cert["second_order_prestress"] = sp;
    }
    if (rep.recursion) {
        ordered_json rj;
        rj["decided"] = rep.recursion->decided;
        if (rep.recursion->decided) rj["order"] = rep.recursion->order;
        rj["flexible_to_kmax"] = rep.recursion->flexible_to_kmax;
        rj["kmax"] = rep.recursion->kmax;
        rj["aug_ranks"] = rep.recursion->aug_ranks;
        rj["step_residuals"] = rep.recursion->step_residuals;
        ordered_json jet = ordered_json::array();
        for (const VecX& v : rep.recursion->jet.derivs) jet.push_back(json_vector(v));
        rj["jet"] = jet;
        cert["recursion"] = rj;
    }
    ordered_json certs = ordered_json::array();
    for (const FlexCertificate& c : rep.certificates) {
        ordered_json cj;
        cj["kind"] = c.kind;
        cj["j"] = c.j;
        cj["k"] = c.k;
        ordered_json jet = ordered_json::array();
        for (const VecX& v : c.jet.derivs) jet.push_back(json_vector(v));
        cj["jet"] = jet;
        cj["residual_norms"] = c.residual_norms;
        certs.push_back(cj);
    }
    cert["flex_certificates"] = certs;
    j["certificates"] = cert;
    return j;
}

std::string report_to_text(const RigidityReport& rep) {
    std::ostringstream os;
    os << "rigidity-lab analysis\n";
    os << "  angles: " << rep.n_rho << ", constraints: " << rep.n_constraints << "\n";
    const ordered_json v = report_verdicts(rep);
    os << "verdicts:\n";
    for (auto it = v.begin(); it != v.end(); ++it)
        os << "  " << it.key() << ": " << it.value().dump() << "\n";
    if (rep.prestress)
        os << "prestress search: best lambda_min = " << format_number(rep.prestress->best_lambda_min)
           << "\n";
    if (rep.saddle) os << "saddle test: " << rep.saddle->note << "\n";
    if (rep.second_order && !rep.second_order->rays.empty()) {
        os << "second-order flex rays (null-basis coordinates):\n";
        for (const SecondOrderRay& r : rep.second_order->rays) {
            os << "  a = [";
            for (int i = 0; i < r.a.size(); ++i) {
                if (i) os << ", ";
                os << format_number(r.a(i));
                const std::string sym = symbolic_annotation(r.a(i));
                if (!sym.empty()) os << " (" << sym << ")";
            }
            os << "]  max|q| = " << format_number(r.max_qform) << "\n";
        }
    }
    if (rep.recursion) {
        os << "nullity-one recursion: ";
        if (rep.recursion->decided)
            os << "rigidity order " << rep.recursion->order << "\n";
        else
            os << "flexible through order " << rep.recursion->kmax << "\n";
    }
    return os.str();
}

} // namespace rigidity
