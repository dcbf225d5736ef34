#include <cmath>

#include "doctest.h"
#include "optrec/errors.hpp"
#include "optrec/model.hpp"
#include "support.hpp"

using namespace optrec;
using namespace optrec::testing;

TEST_SUITE("model") {

TEST_CASE("D1 geometry") {
    const Geometry g = validate(d1());
    CHECK(g.orthonormal);
    CHECK(max_abs(g.P.matrix() - Matrix{{0.5, -0.5, 0}, {-0.5, 0.5, 0}, {0, 0, 1}}) <= 1e-12);
    CHECK(max_abs(g.LtL.matrix() - Matrix{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}) <= 1e-15);
    CHECK(g.C.rows() == 2);
    CHECK(g.C(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(g.C(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("V = {0} gives P = Id") {
    ProblemInstance p = d1();
    p.vbasis = Matrix(3, 0);
    const Geometry g = validate(p);
    CHECK(max_abs(g.P.matrix() - Matrix::identity(3)) == 0.0);
}

TEST_CASE("V meeting ker(Lambda) is rejected") {
    ProblemInstance p = d1();
    p.vbasis = Matrix{{1}, {0}, {0}};
    CHECK_THROWS_AS(validate(p), InfiniteWorstCaseError);

    ProblemInstance wide = d1();
    wide.vbasis = Matrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK_THROWS_AS(validate(wide), InfiniteWorstCaseError);
}

TEST_CASE("malformed instances") {
    ProblemInstance p = d1();
    p.epsilon = 0.0;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = d1();
    p.eta = -1.0;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = d1();
    p.vbasis = Matrix{{1, 2}, {1, 2}, {0, 0}};
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = d1();
    p.y = {1.0};
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = d1();
    p.y[0] = std::nan("");
    CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("orthonormalize examples") {
    const OrthonormalizedInstance same = orthonormalize(d1());
    CHECK(max_abs(same.transform - Matrix::identity(2)) == 0.0);
    CHECK(max_abs(same.instance.lambda - d1().lambda) == 0.0);

    ProblemInstance p = d1();
    p.lambda = Matrix{{2, 0, 0}, {0, 2, 0}};
    p.y = {2, 4};
    const OrthonormalizedInstance o = orthonormalize(p);
    CHECK(max_abs(o.instance.lambda - Matrix{{1, 0, 0}, {0, 1, 0}}) <= 1e-14);
    CHECK(o.instance.y[0] == doctest::Approx(1.0));
    CHECK(o.instance.y[1] == doctest::Approx(2.0));
    CHECK(o.instance.eta == p.eta);

    p.lambda = Matrix{{1, 1, 0}, {0, 1, 1}};
    const Matrix lt = orthonormalize(p).instance.lambda;
    CHECK(max_abs(lt * lt.transposed() - Matrix::identity(2)) <= 1e-10);

    p.lambda = Matrix{{1, 1, 0}, {2, 2, 0}};
    CHECK_THROWS_AS(orthonormalize(p), RankDeficiencyError);
}

TEST_CASE("random instances: projector identities and orthonormalization") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const ProblemInstance p = random_general(rng);
        const Geometry g = validate(p);
        const Matrix b = orthonormal_columns(p.vbasis);
        const Matrix& P = g.P.matrix();
        CHECK(max_abs(P - projector_complement(b)) <= 1e-10);
        CHECK(max_abs(P * P - P) <= 1e-10);
        CHECK(max_abs(P * p.vbasis) <= 1e-10 * std::max(1.0, max_abs(p.vbasis)));
        double trace = 0.0;
        for (std::size_t i = 0; i < p.N(); ++i) trace += P(i, i);
        CHECK(trace == doctest::Approx(static_cast<double>(p.N() - p.n())).epsilon(1e-8));

        const OrthonormalizedInstance o = orthonormalize(p);
        CHECK(validate(o.instance).orthonormal);
    }
}

TEST_CASE("observation kernel") {
    const Matrix z = observation_kernel(d1());
    REQUIRE(z.cols() == 1);
    CHECK(std::abs(z(0, 0)) == doctest::Approx(1.0));
    CHECK(observation_kernel(d1()).rows() == 3);
}

}
