#include <algorithm>
#include <cmath>
#include <cstring>

#include "doctest.h"
#include "optrec/errors.hpp"
#include "optrec/global.hpp"
#include "optrec/local.hpp"
#include "optrec/oracle.hpp"
#include "optrec/regularize.hpp"
#include "support.hpp"

using namespace optrec;
using namespace optrec::testing;

namespace {

bool has_failure(const CertificateCheck& c, const std::string& what) {
    return std::find(c.failures.begin(), c.failures.end(), what) != c.failures.end();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("splitmix64 reference stream") {
    SplitMix64 r(0);
    CHECK(r.next() == 0xe220a8397b1dcdafULL);
    CHECK(r.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(r.next() == 0x06c45d188009454fULL);

    SplitMix64 u(42);
    double mean = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        const double z = u.normal();
        mean += z;
        sq += z * z;
    }
    CHECK(std::abs(mean / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("direction sampling of the lower bound") {
    SUBCASE("D1") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const double lb = lower_bound(p, g).lb;
        const OracleReport o = sample_lb(p, g, 100000, 0);
        CHECK(o.estimate >= 1.968);
        CHECK(o.estimate >= 0.995 * lb);
        CHECK(o.estimate <= lb + 1e-9);
        CHECK(o.method == OracleMethod::direction_scan);
        CHECK(norm(o.argmax_point) == doctest::Approx(o.estimate).epsilon(1e-12));
        // (a, b, 0) with b = 1/2, a = b + sqrt(2) is feasible with ||h||^2 = 3.9142...
        const Vector h{0.5 + std::sqrt(2.0), 0.5, 0.0};
        CHECK(norm(g.P.matrix() * std::span<const double>(h)) <= 1.0 + 1e-12);
        CHECK(norm(p.lambda * std::span<const double>(h)) <= 0.5 + 1e-12);
        CHECK(dot(h, h) <= lb * lb + 1e-9);
    }
    SUBCASE("V = {0}: a kernel direction reaches epsilon") {
        Rng rng(10);
        const ProblemInstance p = random_ball(rng);
        const Geometry g = validate(p);
        const GlobalSolution s = lower_bound(p, g);
        const OracleReport o = sample_lb(p, g, 1000, 3, s.extremal);
        CHECK(o.estimate == doctest::Approx(p.epsilon).epsilon(1e-9));
    }
    SUBCASE("tiny model set") {
        ProblemInstance p = d1();
        p.epsilon = 1e-9;
        const Geometry g = validate(p);
        const OracleReport o = sample_lb(p, g, 5000, 1);
        CHECK(o.estimate > 0.0);
        CHECK(o.estimate <= lower_bound(p, g).lb * (1 + 1e-9));
        const double pu = norm(g.P.matrix() * std::span<const double>(o.argmax_point)) / o.estimate;
        CHECK(o.estimate <= 1e-9 / pu * (1 + 1e-12));
    }
    SUBCASE("exact data samples inside ker(Lambda)") {
        const ProblemInstance p = d1(0.0);
        const Geometry g = validate(p);
        const OracleReport o = sample_lb(p, g, 100, 0);
        CHECK(o.estimate == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("sampled radius") {
    SUBCASE("D1 at the Chebyshev center") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const LocalSolution s = chebyshev_center_orthonormal(p, g);
        const OracleReport o = sample_radius(p, g, s.center, 20000, 0);
        CHECK(o.estimate >= 1.93);
        CHECK(o.estimate <= 1.9392 + 1e-6);
        CHECK(o.estimate <= s.radius + 1e-9);
        CHECK(o.estimate >= 0.995 * s.radius);
        CHECK(norm(g.P.matrix() * std::span<const double>(o.argmax_point)) <= 1.0 + 1e-9);
        CHECK(norm(sub(p.lambda * std::span<const double>(o.argmax_point), p.y)) <= 0.5 + 1e-9);
    }
    SUBCASE("D1 at f0 is worse than at the center") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const OracleReport o = sample_radius(p, g, Vector{1, 1, 0}, 20000, 0);
        CHECK(o.estimate > 1.9392 + 1e-3);
    }
    SUBCASE("zero data and center 0 give lb") {
        const ProblemInstance p = d1(0.5, {0, 0});
        const Geometry g = validate(p);
        const GlobalSolution s = lower_bound(p, g);
        const OracleReport o = sample_radius(p, g, Vector{0, 0, 0}, 20000, 0);
        const OracleReport l = sample_lb(p, g, 20000, 0, s.extremal);
        CHECK(o.estimate == doctest::Approx(l.estimate).epsilon(1e-9));
        CHECK(o.estimate == doctest::Approx(s.lb).epsilon(1e-9));
    }
    SUBCASE("exact data") {
        const ProblemInstance p = d1(0.0);
        const Geometry g = validate(p);
        const OracleReport o = sample_radius(p, g, Vector{1, 1, 0.3}, 1000, 0);
        CHECK(o.estimate == doctest::Approx(std::sqrt(2.0 * 0.91)).epsilon(1e-9));
    }
    SUBCASE("hint points are used") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const LocalSolution s = chebyshev_center_orthonormal(p, g);
        Vector up = s.center;
        axpy(1.0, s.certificate->h_sharp, up);
        const OracleReport o = sample_radius(p, g, s.center, 0, 0, {up});
        CHECK(o.estimate == doctest::Approx(s.radius).epsilon(1e-9));
    }
}

TEST_CASE("sampled global worst-case error") {
    SUBCASE("D1 regularization maps") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const GlobalSolution s = lower_bound(p, g);
        for (const double t : {s.tau_flat, 0.25}) {
            const OracleReport o = sample_gwce(p, g, regularization_map(p, g, t), 20000, 0);
            CHECK(o.estimate >= 1.968);
            CHECK(o.estimate <= s.lb + 1e-6);
            CHECK(o.method == OracleMethod::boundary_ascent);
            REQUIRE(o.argmax_point.size() == 5);
        }
    }
    SUBCASE("V = {0} and the zero map give epsilon") {
        Rng rng(20);
        const ProblemInstance p = random_ball(rng);
        const Geometry g = validate(p);
        const OracleReport o = sample_gwce(p, g, Matrix(p.N(), p.m()), 5000, 0);
        CHECK(o.estimate == doctest::Approx(p.epsilon).epsilon(1e-9));
    }
    SUBCASE("the extremal pair (h, -Lambda h) attains lb") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        const GlobalSolution s = lower_bound(p, g);
        const OracleReport o = sample_gwce(p, g, s.map, 0, 0, s.extremal);
        CHECK(o.estimate == doctest::Approx(s.lb).epsilon(1e-7));
    }
    SUBCASE("a map that does not reproduce V") {
        const ProblemInstance p = d1();
        const Geometry g = validate(p);
        Matrix map = regularization_map(p, g, 0.5);
        map(1, 0) -= 0.2;
        CHECK_THROWS_AS(sample_gwce(p, g, map, 100, 0), UnboundedGwce);
    }
}

TEST_CASE("certificate checks") {
    const ProblemInstance p = d1();
    const Geometry g = validate(p);
    const LocalSolution s = chebyshev_center_orthonormal(p, g);

    const CertificateCheck ok = check_center_certificate(p, g, s);
    CHECK(ok.passed);
    CHECK(ok.failures.empty());
    CHECK(ok.orthogonality_model < 1e-7);
    CHECK(ok.orthogonality_data < 1e-7);
    CHECK(ok.saturation_model < 1e-7);
    CHECK(ok.saturation_data < 1e-7);
    CHECK(ok.psd_margin > -1e-7);
    CHECK(ok.stationarity < 1e-7);

    LocalSolution stretched = s;
    stretched.certificate->h_sharp = scaled(s.certificate->h_sharp, 1.1);
    const CertificateCheck bad_norm = check_center_certificate(p, g, stretched);
    CHECK_FALSE(bad_norm.passed);
    CHECK(has_failure(bad_norm, "model constraint not saturated"));
    CHECK(has_failure(bad_norm, "data constraint not saturated"));

    LocalSolution zero = s;
    zero.certificate->a = 0.0;
    zero.certificate->b = 0.0;
    const CertificateCheck bad_psd = check_center_certificate(p, g, zero);
    CHECK_FALSE(bad_psd.passed);
    CHECK(has_failure(bad_psd, "a P + b L - Id not PSD"));

    LocalSolution none = s;
    none.certificate.reset();
    CHECK_THROWS_AS(check_center_certificate(p, g, none), DomainError);
}

TEST_CASE("estimates never exceed the analytic values") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(1000 + seed);
        const ProblemInstance p = seed % 3 == 2 ? random_general(rng) : random_orthonormal(rng);
        const Geometry g = validate(p);
        const GlobalSolution s = lower_bound(p, g);
        CHECK(sample_lb(p, g, 5000, seed, s.extremal).estimate <= s.lb * (1 + 1e-9) + 1e-9);
        for (const double t : {0.0, 0.5, 1.0}) {
            const Matrix map = regularization_map(p, g, t);
            const double bound = gwce_linear_bound(p, g, map).value;
            CHECK(sample_gwce(p, g, map, 2000, seed).estimate <= bound * (1 + 1e-9) + 1e-9);
        }
        const LocalSolution l = chebyshev_center(p, g);
        const double r = sample_radius(p, g, l.center, 2000, seed).estimate;
        CHECK(r <= l.radius * (1 + 1e-9) + 1e-9);
        if (l.route != LocalRoute::reduced_sdp) CHECK(r >= (1 - 5e-3) * l.radius);
    }
}

TEST_CASE("more samples never lower the estimate") {
    Rng rng(2000);
    const ProblemInstance p = random_orthonormal(rng);
    const Geometry g = validate(p);
    const LocalSolution l = chebyshev_center(p, g);
    const Matrix map = regularization_map(p, g, 0.3);
    double lb = 0.0, radius = 0.0, gwce = 0.0;
    for (const std::size_t n : {10, 100, 1000, 10000}) {
        const double a = sample_lb(p, g, n, 7).estimate;
        const double b = sample_radius(p, g, l.center, n, 7).estimate;
        const double c = sample_gwce(p, g, map, n, 7).estimate;
        CHECK(a >= lb);
        CHECK(b >= radius * (1 - 1e-12));
        CHECK(c >= gwce * (1 - 1e-12));
        lb = a;
        radius = b;
        gwce = c;
    }
}

TEST_CASE("fixed seed and sample count give identical reports") {
    const ProblemInstance p = d1();
    const Geometry g = validate(p);
    const LocalSolution l = chebyshev_center_orthonormal(p, g);
    const OracleReport a = sample_radius(p, g, l.center, 3000, 11);
    const OracleReport b = sample_radius(p, g, l.center, 3000, 11);
    CHECK(same_bits(a.estimate, b.estimate));
    CHECK(a.argmax_point == b.argmax_point);
    const Matrix map = regularization_map(p, g, 0.4);
    const OracleReport c = sample_gwce(p, g, map, 3000, 11);
    const OracleReport d = sample_gwce(p, g, map, 3000, 11);
    CHECK(same_bits(c.estimate, d.estimate));
    CHECK(c.argmax_point == d.argmax_point);
    CHECK(same_bits(sample_lb(p, g, 3000, 11).estimate, sample_lb(p, g, 3000, 11).estimate));
    CHECK(sample_lb(p, g, 3000, 11).estimate != sample_lb(p, g, 3000, 12).estimate);
}

TEST_CASE("oracle errors") {
    const ProblemInstance empty = d1(0.5, {1.0, 3.0});
    const Geometry ge = validate(empty);
    CHECK_THROWS_AS(sample_radius(empty, ge, Vector{0, 0, 0}, 100, 0), EmptyConsistentSet);
    const ProblemInstance p = d1();
    const Geometry g = validate(p);
    CHECK_THROWS_AS(sample_radius(p, g, Vector{0, 0}, 100, 0), ValidationError);
    CHECK_THROWS_AS(sample_gwce(p, g, Matrix(2, 3), 100, 0), ValidationError);
}

}
