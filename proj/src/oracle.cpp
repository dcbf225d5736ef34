#include "optrec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "optrec/errors.hpp"
#include "optrec/regularize.hpp"
#include "minimize.hpp"

namespace optrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPolishCandidates = 10;
constexpr int kPolishSweeps = 50;

struct Candidate {
    Vector v;
    double value = -kInf;
};

// Keeps the best `cap` candidates, best first.
class TopK {
public:
    explicit TopK(std::size_t cap) : cap_(cap) {}

    void offer(const Vector& v, double value) {
        if (!std::isfinite(value)) return;
        if (items_.size() == cap_ && value <= items_.back().value) return;
        auto it = std::find_if(items_.begin(), items_.end(),
                               [&](const Candidate& c) { return value > c.value; });
        items_.insert(it, Candidate{v, value});
        if (items_.size() > cap_) items_.pop_back();
    }
    const std::vector<Candidate>& items() const { return items_; }

private:
    std::size_t cap_;
    std::vector<Candidate> items_;
};

void normalize(Vector& v) {
    const double n = norm(v);
    if (n > 0.0)
        for (double& x : v) x /= n;
}

// Coordinate ascent on the unit sphere with step halving.
Candidate polish(const std::function<double(const Vector&)>& objective, Candidate start) {
    const std::size_t k = start.v.size();
    double step = 0.5;
    for (int sweep = 0; sweep < kPolishSweeps; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < k; ++j) {
            for (const double sign : {1.0, -1.0}) {
                Vector trial = start.v;
                trial[j] += sign * step;
                normalize(trial);
                const double value = objective(trial);
                if (std::isfinite(value) && value > start.value) {
                    start = {std::move(trial), value};
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return start;
}

// Largest t >= 0 with alpha t^2 + 2 beta t + gamma <= 0, given gamma <= 0.
double ray_exit(double alpha, double beta, double gamma) {
    gamma = std::min(gamma, 0.0);
    if (alpha <= 0.0) return kInf;
    const double root = std::sqrt(std::max(beta * beta - alpha * gamma, 0.0));
    if (beta > 0.0) return root + beta > 0.0 ? -gamma / (beta + root) : 0.0;
    return (root - beta) / alpha;
}

constexpr int kLinearizationSteps = 200;

// Cholesky factorization; ok is false when the matrix is not numerically
// positive definite.
struct Cholesky {
    Matrix l;
    bool ok = false;

    explicit Cholesky(const Matrix& a) : l(a.rows(), a.rows()) {
        const std::size_t n = a.rows();
        double diag_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, a(i, i));
        for (std::size_t j = 0; j < n; ++j) {
            double d = a(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
            if (!(d > 1e-13 * diag_max)) return;
            l(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
                l(i, j) = s / l(j, j);
            }
        }
        ok = true;
    }

    Vector solve(std::span<const double> b) const {
        const std::size_t n = l.rows();
        Vector x(b.begin(), b.end());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
            x[i] /= l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) x[i] -= l(k, i) * x[k];
            x[i] /= l(i, i);
        }
        return x;
    }
};

// argmax <d, x> over the consistent set, up to the accuracy of a scalar search.
//
// With eta > 0, every mix q_mu = (1 - mu) q_model + mu q_data of the two
// constraints cuts out an ellipsoid containing the set; the support value
// in direction d is quasiconvex in mu and its minimum is attained by the
// maximizer over the set. With eta = 0 the set is a single ellipsoid inside
// base + ker(Lambda).
class LinearMaximizer {
public:
    LinearMaximizer(const ProblemInstance& p, const Geometry& g, const Vector& base)
        : p_(p), g_(g), base_(base) {
        if (p.eta == 0.0) {
            kernel_ = observation_kernel(p);
        } else {
            w_ = transpose_times(p.lambda, p.y);
            yy_ = dot(p.y, p.y);
        }
    }

    std::optional<Vector> operator()(const Vector& d) const {
        return p_.eta == 0.0 ? on_kernel(d) : on_mixes(d);
    }

private:
    struct Support {
        double value = kInf;
        Vector point;
    };

    Support support(double mu, const Vector& d) const {
        const Cholesky chol((1.0 - mu) * g_.P.matrix() + mu * g_.LtL.matrix());
        if (!chol.ok) return {};
        const Vector a = chol.solve(w_);
        const Vector q = chol.solve(d);
        const double sigma = (1.0 - mu) * p_.epsilon * p_.epsilon + mu * (p_.eta * p_.eta - yy_) +
                             mu * mu * dot(w_, a);
        const double dq = dot(d, q);
        if (!(dq > 0.0)) return {};
        const double s = std::sqrt(std::max(sigma, 0.0) / dq);
        Support out{mu * dot(d, a) + s * dq, scaled(a, mu)};
        axpy(s, q, out.point);
        return out;
    }

    // Sign of dS/dmu: q_model - q_data at the support point.
    double slope(double mu, const Vector& d) const {
        const Support s = support(mu, d);
        if (!std::isfinite(s.value)) return std::numeric_limits<double>::quiet_NaN();
        const Vector px = g_.P.matrix() * std::span<const double>(s.point);
        const Vector r = sub(p_.lambda * std::span<const double>(s.point), p_.y);
        return (dot(px, px) - p_.epsilon * p_.epsilon) - (dot(r, r) - p_.eta * p_.eta);
    }

    std::optional<Vector> on_mixes(const Vector& d) const {
        if (!(norm(d) > 0.0)) return std::nullopt;
        constexpr int kGrid = 41;
        auto best = detail::grid_golden_minimize(
            [&](double mu) { return support(mu, d).value; }, 0.0, 1.0, kGrid, 1e-13);
        if (!std::isfinite(best.value)) return std::nullopt;
        // The golden step stalls near sqrt(machine epsilon) on a flat minimum;
        // bisection on the slope sign does not.
        double lo = std::max(0.0, best.x - 1.0 / (kGrid - 1));
        double hi = std::min(1.0, best.x + 1.0 / (kGrid - 1));
        if (slope(lo, d) < 0.0 && slope(hi, d) > 0.0) {
            for (int it = 0; it < 200 && hi - lo > 4e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid, d) < 0.0 ? lo : hi) = mid;
            }
            best.x = 0.5 * (lo + hi);
        }
        return support(best.x, d).point;
    }

    std::optional<Vector> on_kernel(const Vector& d) const {
        const Matrix pz = g_.P.matrix() * kernel_;
        const Cholesky chol(gram(pz));
        if (!chol.ok) return std::nullopt;
        const Vector pf = g_.P.matrix() * std::span<const double>(base_);
        const Vector b = transpose_times(pz, pf);
        const Vector h = transpose_times(kernel_, d);
        const Vector qb = chol.solve(b);
        const Vector qh = chol.solve(h);
        const double hq = dot(h, qh);
        const double r2 = p_.epsilon * p_.epsilon - dot(pf, pf) + dot(b, qb);
        if (!(hq > 0.0) || r2 < 0.0) return std::nullopt;
        Vector z = scaled(qb, -1.0);
        axpy(std::sqrt(r2 / hq), qh, z);
        Vector x = base_;
        axpy(1.0, kernel_ * std::span<const double>(z), x);
        return x;
    }

    const ProblemInstance& p_;
    const Geometry& g_;
    const Vector& base_;
    Matrix kernel_;
    Vector w_;
    double yy_ = 0.0;
};

void require_reproduces_v(const ProblemInstance& p, const Geometry& g, const Matrix& map) {
    if (map.rows() != p.N() || map.cols() != p.m()) throw ValidationError("map: shape mismatch");
    if (p.n() == 0) return;
    const Matrix residual_op = Matrix::identity(p.N()) - map * p.lambda;
    const double scale = std::max(1.0, max_abs(map) * max_abs(p.lambda) * static_cast<double>(p.N()));
    const double leak = max_abs(residual_op * g.basis);
    if (leak > 1e-8 * scale) {
        std::ostringstream os;
        os << "Id - map*Lambda does not vanish on V (max residual " << leak << ")";
        throw UnboundedGwce(os.str());
    }
}

}  // namespace

std::uint64_t SplitMix64::next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    return r * std::cos(angle);
}

Vector SplitMix64::normal_vector(std::size_t n) {
    Vector v(n);
    for (double& x : v) x = normal();
    return v;
}

std::string_view to_string(OracleMethod m) noexcept {
    return m == OracleMethod::direction_scan ? "direction_scan" : "boundary_ascent";
}

OracleReport sample_lb(const ProblemInstance& p, const Geometry& g, std::size_t n_samples,
                       std::uint64_t seed, const std::optional<Vector>& hint) {
    const bool exact_data = p.eta == 0.0;
    const Matrix kernel = exact_data ? observation_kernel(p) : Matrix();

    OracleReport report;
    report.n_samples = n_samples;
    report.seed = seed;
    report.method = OracleMethod::direction_scan;
    report.argmax_point.assign(p.N(), 0.0);
    if (exact_data && kernel.cols() == 0) return report;

    const auto consider = [&](Vector u) {
        normalize(u);
        const double pu = norm(g.P.matrix() * std::span<const double>(u));
        double t = pu > 0.0 ? p.epsilon / pu : kInf;
        if (!exact_data) {
            const double lu = norm(p.lambda * std::span<const double>(u));
            t = std::min(t, lu > 0.0 ? p.eta / lu : kInf);
        }
        if (std::isfinite(t) && t > report.estimate) {
            report.estimate = t;
            report.argmax_point = scaled(u, t);
        }
    };

    if (hint && norm(*hint) > 0.0) {
        Vector u = *hint;
        if (exact_data) u = kernel * std::span<const double>(transpose_times(kernel, u));
        consider(std::move(u));
    }
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (exact_data) {
            const Vector z = rng.normal_vector(kernel.cols());
            consider(kernel * std::span<const double>(z));
        } else {
            consider(rng.normal_vector(p.N()));
        }
    }
    return report;
}

OracleReport sample_radius(const ProblemInstance& p, const Geometry& g,
                           std::span<const double> center, std::size_t n_samples,
                           std::uint64_t seed, const std::vector<Vector>& hints) {
    if (center.size() != p.N()) throw ValidationError("center: length mismatch");
    const MinimaxPoint base = minimax_point(p, g);
    if (!(base.ratio <= 1.0 + 1e-10)) {
        std::ostringstream os;
        os << "consistent set is empty (best constraint ratio " << base.ratio << ")";
        throw EmptyConsistentSet(os.str());
    }

    const bool exact_data = p.eta == 0.0;
    // Directions live in R^k and map into H through `lift` (ker(Lambda) when eta = 0).
    const Matrix lift = exact_data ? observation_kernel(p) : Matrix::identity(p.N());
    const std::size_t k = lift.cols();

    OracleReport report;
    report.n_samples = n_samples;
    report.seed = seed;
    report.method = OracleMethod::boundary_ascent;
    report.argmax_point = base.f;
    report.estimate = norm(sub(base.f, center));
    if (k == 0) return report;

    const Vector pb = g.P.matrix() * std::span<const double>(base.f);
    const Vector rb = sub(p.lambda * std::span<const double>(base.f), p.y);
    const double gamma_model = dot(pb, pb) - p.epsilon * p.epsilon;
    const double gamma_data = dot(rb, rb) - p.eta * p.eta;

    const auto boundary_point = [&](const Vector& v) -> std::optional<Vector> {
        const Vector u = lift * std::span<const double>(v);
        const Vector pu = g.P.matrix() * std::span<const double>(u);
        double t = ray_exit(dot(pu, pu), dot(pb, pu), gamma_model);
        if (!exact_data) {
            const Vector lu = p.lambda * std::span<const double>(u);
            t = std::min(t, ray_exit(dot(lu, lu), dot(rb, lu), gamma_data));
        }
        if (!std::isfinite(t)) return std::nullopt;
        Vector x = base.f;
        axpy(t, u, x);
        return x;
    };
    const auto objective = [&](const Vector& v) {
        const auto x = boundary_point(v);
        return x ? norm(sub(*x, center)) : -kInf;
    };
    const auto direction_to = [&](const Vector& x) {
        Vector v = transpose_times(lift, sub(x, base.f));
        normalize(v);
        return v;
    };
    const auto record = [&](const Candidate& c) {
        if (c.value > report.estimate) {
            report.estimate = c.value;
            report.argmax_point = *boundary_point(c.v);
        }
    };

    TopK top(kPolishCandidates);
    for (const Vector& h : hints) {
        if (h.size() != p.N()) throw ValidationError("hint: length mismatch");
        const Vector v = direction_to(h);
        if (norm(v) == 0.0) continue;
        const double value = objective(v);
        top.offer(v, value);
        record({v, value});
    }
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Vector v = rng.normal_vector(k);
        normalize(v);
        const double value = objective(v);
        top.offer(v, value);
        record({v, value});
    }

    // Coordinate ascent stalls where both constraints are active, so each
    // polished candidate is pushed further by successive linearization:
    // maximize <x - center, .> over the set, cut the result back onto the
    // boundary along its ray, repeat while the distance grows.
    const LinearMaximizer linear(p, g, base.f);
    for (const Candidate& start : top.items()) {
        Candidate c = polish(objective, start);
        for (int it = 0; it < kLinearizationSteps; ++it) {
            const auto x = boundary_point(c.v);
            const auto z = linear(sub(*x, center));
            if (!z) break;
            const Vector v = direction_to(*z);
            const double value = objective(v);
            if (!(value > c.value * (1.0 + 1e-15))) break;
            c = {v, value};
        }
        record(c);
    }
    return report;
}

OracleReport sample_gwce(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                         std::size_t n_samples, std::uint64_t seed,
                         const std::optional<Vector>& hint) {
    require_reproduces_v(p, g, map);
    const std::size_t N = p.N(), m = p.m();
    const Matrix residual_op = Matrix::identity(N) - map * p.lambda;

    // v = (u, w) in R^{N+m}; f = eps P u / ||P u||, e = eta w / ||w||.
    const auto pair_of = [&](const Vector& v) -> std::optional<Vector> {
        const std::span<const double> u(v.data(), N);
        const std::span<const double> w(v.data() + N, m);
        // The V component of f does not affect the error, so f is kept in range(P).
        const Vector pu = g.P.matrix() * u;
        const double npu = norm(pu);
        if (!(npu > 0.0)) return std::nullopt;
        Vector fe(N + m, 0.0);
        for (std::size_t i = 0; i < N; ++i) fe[i] = p.epsilon * pu[i] / npu;
        const double nw = norm(w);
        if (nw > 0.0)
            for (std::size_t i = 0; i < m; ++i) fe[N + i] = p.eta * w[i] / nw;
        return fe;
    };
    const auto error_of = [&](const Vector& fe) {
        Vector r = residual_op * std::span<const double>(fe.data(), N);
        axpy(-1.0, map * std::span<const double>(fe.data() + N, m), r);
        return norm(r);
    };
    const auto objective = [&](const Vector& v) {
        const auto fe = pair_of(v);
        return fe ? error_of(*fe) : -kInf;
    };

    OracleReport report;
    report.n_samples = n_samples;
    report.seed = seed;
    report.method = OracleMethod::boundary_ascent;
    report.argmax_point.assign(N + m, 0.0);
    const auto record = [&](const Candidate& c) {
        if (c.value > report.estimate) {
            report.estimate = c.value;
            report.argmax_point = *pair_of(c.v);
        }
    };

    TopK top(kPolishCandidates);
    if (hint) {
        Vector v(N + m, 0.0);
        std::copy(hint->begin(), hint->end(), v.begin());
        const Vector lh = p.lambda * std::span<const double>(*hint);
        for (std::size_t i = 0; i < m; ++i) v[N + i] = -lh[i];
        normalize(v);
        const double value = objective(v);
        top.offer(v, value);
        record({v, value});
    }
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Vector v = rng.normal_vector(N + m);
        normalize(v);
        const double value = objective(v);
        top.offer(v, value);
        record({v, value});
    }
    // The error is convex in (f, e), so stepping to the maximizer of its
    // linearization (a power-iteration step) never decreases it.
    const auto linearized = [&](const Vector& fe) {
        Vector r = residual_op * std::span<const double>(fe.data(), N);
        axpy(-1.0, map * std::span<const double>(fe.data() + N, m), r);
        Vector v = transpose_times(residual_op, r);
        const Vector w = transpose_times(map, r);
        for (const double x : w) v.push_back(-x);
        normalize(v);
        return v;
    };
    for (const Candidate& start : top.items()) {
        Candidate c = polish(objective, start);
        for (int it = 0; it < kLinearizationSteps; ++it) {
            const Vector v = linearized(*pair_of(c.v));
            const double value = objective(v);
            if (!(value > c.value * (1.0 + 1e-15))) break;
            c = {v, value};
        }
        record(c);
    }
    return report;
}

CertificateCheck check_center_certificate(const ProblemInstance& p, const Geometry& g,
                                          const LocalSolution& sol, double tol) {
    if (!sol.certificate) throw DomainError("solution carries no certificate");
    const CenterCertificate& cert = *sol.certificate;
    const std::size_t N = p.N();
    if (cert.h_sharp.size() != N || sol.center.size() != N)
        throw ValidationError("certificate: vector length mismatch");

    const Matrix& P = g.P.matrix();
    const Matrix& L = g.LtL.matrix();
    const std::span<const double> f(sol.center);
    const std::span<const double> h(cert.h_sharp);
    const Vector s = transpose_times(p.lambda, p.y);

    const Vector pf = P * f;
    const Vector ph = P * h;
    const Vector data = sub(L * f, s);
    const Vector lh = L * h;

    CertificateCheck out;
    out.orthogonality_model = std::abs(dot(pf, h));
    out.orthogonality_data = std::abs(dot(data, h));
    out.saturation_model = std::abs(norm(add(pf, ph)) - p.epsilon);
    out.saturation_data = std::abs(norm(add(data, lh)) - p.eta);

    Matrix combo = cert.a * P;
    combo += cert.b * L;
    Matrix shifted = combo - Matrix::identity(N);
    out.psd_margin = lambda_min(SymMatrix::symmetrized(shifted));

    Vector station = scaled(pf, cert.a);
    axpy(cert.b, data, station);
    axpy(1.0, combo * h, station);
    axpy(-1.0, h, station);
    out.stationarity = norm(station);

    const double hn = norm(h);
    const double ortho_scale = std::max(1.0, norm(f) * hn);
    const double mult_scale = std::max(1.0, cert.a + cert.b);
    if (cert.a < 0.0 || cert.b < 0.0) out.failures.push_back("multipliers must be nonnegative");
    if (out.orthogonality_model > tol * ortho_scale)
        out.failures.push_back("orthogonality of P f and h");
    if (out.orthogonality_data > tol * ortho_scale)
        out.failures.push_back("orthogonality of the data residual and h");
    if (out.saturation_model > tol * std::max(1.0, p.epsilon))
        out.failures.push_back("model constraint not saturated");
    if (out.saturation_data > tol * std::max(1.0, p.eta))
        out.failures.push_back("data constraint not saturated");
    if (out.psd_margin < -tol * mult_scale) out.failures.push_back("a P + b L - Id not PSD");
    if (out.stationarity > tol * mult_scale * std::max(1.0, hn + norm(f)))
        out.failures.push_back("stationarity");
    out.passed = out.failures.empty();
    return out;
}

}  // namespace optrec
