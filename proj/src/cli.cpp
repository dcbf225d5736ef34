#include "optrec/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "optrec/errors.hpp"
#include "optrec/global.hpp"
#include "optrec/io.hpp"
#include "optrec/local.hpp"
#include "optrec/oracle.hpp"
#include "optrec/regularize.hpp"

namespace optrec {

using nlohmann::json;

namespace {

constexpr double kSamplingShortfall = 0.995;  // oracle must reach 99.5% of a claimed value

struct Options {
    std::string input;
    std::string solution;
    double tol = 1e-10;
    std::string method = "auto";
    std::optional<double> tau;
    bool verify = false;
    std::size_t oracle_samples = 20000;
    std::uint64_t seed = 0;
};

std::vector<Vector> plus_minus(std::span<const double> c, const Vector& h) {
    Vector a(c.begin(), c.end()), b(c.begin(), c.end());
    axpy(1.0, h, a);
    axpy(-1.0, h, b);
    return {a, b};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

LocalMethod parse_method(const std::string& m) {
    if (m == "eigen") return LocalMethod::eigen;
    if (m == "ball") return LocalMethod::ball;
    if (m == "sdp") return LocalMethod::sdp;
    return LocalMethod::automatic;
}

json certificate_json(const LocalSolution& sol) {
    if (!sol.certificate) return nullptr;
    json c{{"h_sharp", sol.certificate->h_sharp},
           {"a", sol.certificate->a},
           {"b", sol.certificate->b}};
    if (sol.lambda_sharp) c["lambda_sharp"] = *sol.lambda_sharp;
    return c;
}

std::optional<CenterCertificate> certificate_from_json(const json& c) {
    if (!c.is_object()) return std::nullopt;
    CenterCertificate cert;
    cert.h_sharp = vector_from_json(c.at("h_sharp"), "certificate.h_sharp");
    cert.a = c.at("a").get<double>();
    cert.b = c.at("b").get<double>();
    return cert;
}

double json_number_or_inf(const json& v) {
    return v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
}

int emit(std::ostream& out, const json& doc) {
    out << dump_json(doc) << '\n';
    return kExitOk;
}

int cmd_local(const Options& o, std::ostream& out) {
    const ProblemInstance p = instance_from_json(read_json_file(o.input));
    const Geometry g = validate(p);
    const LocalSolution sol = chebyshev_center(p, g, parse_method(o.method), o.tol);

    SolveReport r;
    r.instance_digest = instance_digest(p);
    r.route = std::string(to_string(sol.route));
    r.tau = sol.tau_sharp;
    r.center = sol.center;
    r.radius = sol.radius;
    r.certificate = certificate_json(sol);

    if (o.verify || sol.route == LocalRoute::reduced_sdp) {
        std::vector<Vector> hints;
        if (sol.certificate) hints = plus_minus(sol.center, sol.certificate->h_sharp);
        const OracleReport est = sample_radius(p, g, sol.center, o.oracle_samples, o.seed, hints);
        if (est.estimate > sol.radius + 1e-9 * std::max(1.0, sol.radius))
            r.warnings.push_back("oracle found a consistent point at distance " + fmt(est.estimate) +
                                 " from the center, beyond the reported radius " + fmt(sol.radius));
        if (est.estimate < kSamplingShortfall * sol.radius)
            r.warnings.push_back("oracle estimate " + fmt(est.estimate) +
                                 " is more than 0.5% below the reported radius " + fmt(sol.radius));
        r.oracle = est;
    }
    return emit(out, report_to_json(r));
}

int cmd_global(const Options& o, std::ostream& out) {
    const ProblemInstance p = instance_from_json(read_json_file(o.input));
    const Geometry g = validate(p);
    const GlobalSolution lb = lower_bound(p, g, o.tol);

    SolveReport r;
    r.instance_digest = instance_digest(p);
    r.lb = lb.lb;
    json cert{{"c_flat", lb.c_flat}, {"d_flat", lb.d_flat}, {"tau_flat", lb.tau_flat}};
    if (!std::isfinite(lb.d_flat)) cert["d_flat"] = nullptr;

    Matrix map;
    if (o.tau) {
        r.route = "regularization_map";
        r.tau = *o.tau;
        map = regularization_map(p, g, *o.tau);
    } else {
        r.route = "lower_bound";
        r.tau = lb.tau_flat;
        map = lb.map;
    }
    const GwceBound bound = gwce_linear_bound(p, g, map, o.tol);
    cert["gwce_upper_bound"] = bound.value;
    cert["gwce_c"] = bound.c;
    cert["gwce_d"] = bound.d;
    if (bound.value > lb.lb * (1.0 + 1e-6) + 1e-12)
        r.warnings.push_back("gwce upper bound " + fmt(bound.value) + " exceeds lb " + fmt(lb.lb) +
                             ": this map is not proven optimal");
    r.certificate = std::move(cert);
    r.map = map;

    if (o.verify) {
        const OracleReport est = sample_gwce(p, g, map, o.oracle_samples, o.seed, lb.extremal);
        if (est.estimate > bound.value + 1e-9 * std::max(1.0, bound.value))
            r.warnings.push_back("oracle worst-case error " + fmt(est.estimate) +
                                 " exceeds the gwce upper bound " + fmt(bound.value));
        if (est.estimate < kSamplingShortfall * lb.lb)
            r.warnings.push_back("oracle worst-case error " + fmt(est.estimate) +
                                 " is more than 0.5% below lb " + fmt(lb.lb));
        r.oracle = est;
    }
    return emit(out, report_to_json(r));
}

struct Checks {
    json list = json::array();
    bool passed = true;

    void add(const std::string& name, bool ok, const std::string& detail) {
        list.push_back(json{{"name", name}, {"passed", ok}, {"detail", detail}});
        passed = passed && ok;
    }
};

void verify_local(const ProblemInstance& p, const Geometry& g, const SolveReport& r,
                  const Options& o, Checks& checks) {
    const Vector& center = *r.center;
    if (center.size() != p.N()) throw ValidationError("center: length does not match the instance");
    const double radius = r.radius.value_or(0.0);

    const double model = norm(g.P.matrix() * std::span<const double>(center));
    const double data = norm(sub(p.lambda * std::span<const double>(center), p.y));
    checks.add("consistency", model <= p.epsilon + 1e-8 && data <= p.eta + 1e-8,
               "||P center|| = " + fmt(model) + ", ||Lambda center - y|| = " + fmt(data));

    std::optional<CenterCertificate> cert = certificate_from_json(r.certificate);
    std::vector<Vector> hints;
    if (cert) {
        LocalSolution sol;
        sol.center = center;
        sol.radius = radius;
        sol.certificate = cert;
        hints = plus_minus(center, cert->h_sharp);
        const CertificateCheck c = check_center_certificate(p, g, sol);
        std::string detail = c.passed ? "all conditions hold" : "";
        for (const std::string& f : c.failures) detail += (detail.empty() ? "" : "; ") + f;
        checks.add("certificate", c.passed, detail);
        const double hn = norm(cert->h_sharp);
        checks.add("certificate_radius", std::abs(hn - radius) <= 1e-8 * std::max(1.0, radius),
                   "||h|| = " + fmt(hn));
    }

    const OracleReport est = sample_radius(p, g, center, o.oracle_samples, o.seed, hints);
    const bool below = est.estimate <= radius + 1e-9 * std::max(1.0, radius);
    const bool reached = est.estimate >= kSamplingShortfall * radius;
    checks.add("oracle_radius", below && reached,
               "sampled worst-case distance " + fmt(est.estimate) + " vs radius " + fmt(radius));
}

void verify_global(const ProblemInstance& p, const Geometry& g, const SolveReport& r,
                   const Options& o, Checks& checks) {
    const Matrix& map = *r.map;
    if (map.rows() != p.N() || map.cols() != p.m())
        throw ValidationError("map: shape does not match the instance");
    const double claimed_lb = r.lb.value_or(0.0);

    const GlobalSolution lb = lower_bound(p, g, o.tol);
    checks.add("lower_bound", std::abs(lb.lb - claimed_lb) <= 1e-6 * std::max(1.0, lb.lb),
               "recomputed lb = " + fmt(lb.lb));

    GwceBound bound;
    try {
        bound = gwce_linear_bound(p, g, map, o.tol);
    } catch (const UnboundedGwce& e) {
        checks.add("reproduces_v", false, e.what());
        return;
    }
    checks.add("reproduces_v", true, "Id - map*Lambda vanishes on V");

    double claimed = claimed_lb;
    if (r.certificate.is_object() && r.certificate.contains("gwce_upper_bound"))
        claimed = json_number_or_inf(r.certificate["gwce_upper_bound"]);
    if (r.route == "lower_bound") claimed = std::min(claimed, claimed_lb);
    checks.add("gwce_bound", bound.value <= claimed * (1.0 + 1e-6) + 1e-12,
               "gwce upper bound " + fmt(bound.value) + " vs claimed " + fmt(claimed));

    const OracleReport est = sample_gwce(p, g, map, o.oracle_samples, o.seed, lb.extremal);
    checks.add("oracle_gwce", est.estimate <= bound.value + 1e-9 * std::max(1.0, bound.value),
               "sampled worst-case error " + fmt(est.estimate));
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    const ProblemInstance p = instance_from_json(read_json_file(o.input));
    const Geometry g = validate(p);
    const SolveReport r = report_from_json(read_json_file(o.solution));

    const std::string digest = instance_digest(p);
    if (digest != r.instance_digest) {
        err << "error: digest mismatch: instance " << digest << ", solution "
            << r.instance_digest << '\n';
        return kExitFailure;
    }

    Checks checks;
    if (r.center) {
        verify_local(p, g, r, o, checks);
    } else {
        verify_global(p, g, r, o, checks);
    }
    emit(out, json{{"instance_digest", digest}, {"passed", checks.passed}, {"checks", checks.list}});
    if (!checks.passed) err << "error: verification failed\n";
    return checks.passed ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal recovery under an approximability model"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--input", o.input, "Instance JSON file")->required();
        sub->add_option("--tol", o.tol, "Root-finding / search tolerance")
            ->check(CLI::PositiveNumber);
        sub->add_option("--oracle-samples", o.oracle_samples, "Sampling oracle directions")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "Sampling oracle seed");
    };

    CLI::App* local = app.add_subcommand("local", "Chebyshev center and radius for the data y");
    common(local);
    local->add_option("--method", o.method, "Solution route")
        ->check(CLI::IsMember({"auto", "eigen", "ball", "sdp"}));
    local->add_flag("--verify", o.verify, "Cross-check with the sampling oracle");

    CLI::App* global = app.add_subcommand("global", "Optimal linear recovery map and lower bound");
    common(global);
    global->add_option("--tau", o.tau, "Report the regularization map at this tau")
        ->check(CLI::Range(0.0, 1.0));
    global->add_flag("--verify", o.verify, "Cross-check with the sampling oracle");

    CLI::App* verify = app.add_subcommand("verify", "Re-check a previously emitted report");
    common(verify);
    verify->add_option("--solution", o.solution, "Report JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (local->parsed()) return cmd_local(o, out);
        if (global->parsed()) return cmd_global(o, out);
        return cmd_verify(o, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return kExitFailure;
    } catch (const json::exception& e) {
        err << "error: ValidationError: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace optrec
