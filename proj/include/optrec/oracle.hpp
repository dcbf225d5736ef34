#pragma once

// Brute-force verification by sampling. Every estimate is attained by an
// explicitly constructed feasible point, so it never exceeds the true
// supremum beyond rounding.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optrec/linalg.hpp"
#include "optrec/local.hpp"
#include "optrec/model.hpp"

namespace optrec {

/// splitmix64 stream with Box-Muller normals. The sequence is fixed by the
/// seed, so independent implementations can reproduce each other's samples.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double normal() noexcept;
    Vector normal_vector(std::size_t n);

private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

enum class OracleMethod { direction_scan, boundary_ascent };

std::string_view to_string(OracleMethod m) noexcept;

struct OracleReport {
    double estimate = 0.0;
    Vector argmax_point;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    OracleMethod method = OracleMethod::direction_scan;
};

/// max over sampled directions u of min(eps/||P u||, eta/||Lambda u||).
/// With eta = 0 directions are drawn inside ker(Lambda). `hint` is scanned
/// first when given.
OracleReport sample_lb(const ProblemInstance& p, const Geometry& g, std::size_t n_samples,
                       std::uint64_t seed, const std::optional<Vector>& hint = std::nullopt);

/// max ||f - center|| over the consistent set. Rays from an interior base
/// point are cut at the boundary (exact quadratic roots); the ten best
/// directions are polished by coordinate ascent and then by successive
/// linearization. Each of `hints` (points of H, e.g. center +- h) adds the
/// ray through it.
OracleReport sample_radius(const ProblemInstance& p, const Geometry& g,
                           std::span<const double> center, std::size_t n_samples,
                           std::uint64_t seed, const std::vector<Vector>& hints = {});

/// sup ||f - map(Lambda f + e)|| over ||P f|| <= eps, ||e|| <= eta, by joint
/// sampling of (f, e) on the boundary of both blocks, coordinate ascent and
/// power-iteration steps.
/// `hint` is an element h giving the pair (h, -Lambda h).
OracleReport sample_gwce(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                         std::size_t n_samples, std::uint64_t seed,
                         const std::optional<Vector>& hint = std::nullopt);

struct CertificateCheck {
    bool passed = false;
    double orthogonality_model = 0.0;  // |<P f, h>|
    double orthogonality_data = 0.0;   // |<L f - s, h>|, L = Lambda^T Lambda, s = Lambda^T y
    double saturation_model = 0.0;     // | ||P f + P h|| - eps |
    double saturation_data = 0.0;      // | ||L f - s + L h|| - eta |
    double psd_margin = 0.0;           // lambda_min(a P + b L - Id)
    double stationarity = 0.0;         // ||a P f + b (L f - s) + (a P + b L) h - h||
    std::vector<std::string> failures;
};

/// Checks the sufficient conditions for sol.center to be the Chebyshev
/// center, at tolerance `tol` (relative to the natural scale of each term).
/// Throws DomainError when the solution has no certificate.
CertificateCheck check_center_certificate(const ProblemInstance& p, const Geometry& g,
                                          const LocalSolution& sol, double tol = 1e-7);

}  // namespace optrec
