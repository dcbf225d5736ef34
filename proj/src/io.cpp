#include "optrec/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "optrec/errors.hpp"

namespace optrec {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* key) {
    if (!doc.is_object()) throw ValidationError("expected a JSON object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw ValidationError(std::string(key) + ": missing key");
    return *it;
}

double number_at(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number()) throw ValidationError(std::string(key) + ": expected a number");
    return v.get<double>();
}

Vector numbers(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw ValidationError(what + ": expected an array of numbers");
    Vector out;
    out.reserve(arr.size());
    for (const json& x : arr) {
        if (!x.is_number()) throw ValidationError(what + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write(std::string& out, const json& v, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += json(key).dump();
                out += indent < 0 ? ":" : ": ";
                write(out, item, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::none_of(v.begin(), v.end(), [](const json& x) {
                return x.is_structured();
            });
            out += '[';
            bool first = true;
            for (const json& item : v) {
                if (!first) out += flat && indent >= 0 ? ", " : ",";
                first = false;
                if (!flat) newline(depth + 1);
                write(out, item, indent, depth + 1);
            }
            if (!flat) newline(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: {
            double x = v.get<double>();
            if (x == 0.0) x = 0.0;  // "-0" would read back as an integer
            if (!std::isfinite(x)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out += buf;
            return;
        }
        default:
            out += v.dump();
    }
}

}  // namespace

ProblemInstance instance_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("instance: expected a JSON object");
    ProblemInstance p;
    p.lambda = matrix_from_json(require(doc, "lambda"), "lambda");
    const std::size_t N = p.lambda.cols();

    const json& vb = require(doc, "v_basis");
    if (!vb.is_array()) throw ValidationError("v_basis: expected an array of columns");
    std::vector<Vector> cols;
    for (std::size_t j = 0; j < vb.size(); ++j) {
        Vector c = numbers(vb[j], "v_basis");
        if (c.size() != N) {
            std::ostringstream os;
            os << "v_basis: column " << j << " has length " << c.size() << ", expected N = " << N;
            throw ValidationError(os.str());
        }
        cols.push_back(std::move(c));
    }
    p.vbasis = Matrix::from_columns(N, cols);
    p.epsilon = number_at(doc, "epsilon");
    p.eta = number_at(doc, "eta");
    p.y = numbers(require(doc, "y"), "y");
    return p;
}

json instance_to_json(const ProblemInstance& p) {
    json vb = json::array();
    for (std::size_t j = 0; j < p.n(); ++j) vb.push_back(p.vbasis.column(j));
    return json{{"lambda", matrix_to_json(p.lambda)},
                {"v_basis", vb},
                {"epsilon", p.epsilon},
                {"eta", p.eta},
                {"y", p.y}};
}

std::string dump_json(const json& doc, int indent) {
    std::string out;
    write(out, doc, indent, 0);
    return out;
}

std::string instance_digest(const ProblemInstance& p) {
    const std::string text = dump_json(instance_to_json(p), -1);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(Vector(r.begin(), r.end()));
    }
    return rows;
}

Matrix matrix_from_json(const json& doc, const char* key) {
    if (!doc.is_array() || doc.empty())
        throw ValidationError(std::string(key) + ": expected a nonempty array of rows");
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        rows.push_back(numbers(doc[i], key));
        if (rows.back().size() != rows.front().size()) {
            std::ostringstream os;
            os << key << ": row " << i << " has " << rows.back().size() << " entries, expected "
               << rows.front().size();
            throw ValidationError(os.str());
        }
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

Vector vector_from_json(const json& doc, const char* key) { return numbers(doc, key); }

json oracle_to_json(const OracleReport& o) {
    return json{{"estimate", o.estimate},
                {"argmax_point", o.argmax_point},
                {"n_samples", o.n_samples},
                {"seed", o.seed},
                {"method", std::string(to_string(o.method))}};
}

OracleReport oracle_from_json(const json& doc) {
    OracleReport o;
    o.estimate = number_at(doc, "estimate");
    o.argmax_point = numbers(require(doc, "argmax_point"), "oracle.argmax_point");
    const json& n = require(doc, "n_samples");
    const json& seed = require(doc, "seed");
    if (!n.is_number_unsigned() || !seed.is_number_unsigned())
        throw ValidationError("oracle: n_samples and seed must be unsigned integers");
    o.n_samples = n.get<std::size_t>();
    o.seed = seed.get<std::uint64_t>();
    const json& method = require(doc, "method");
    if (method == "direction_scan") {
        o.method = OracleMethod::direction_scan;
    } else if (method == "boundary_ascent") {
        o.method = OracleMethod::boundary_ascent;
    } else {
        throw ValidationError("oracle.method: unknown method");
    }
    return o;
}

json report_to_json(const SolveReport& r) {
    json doc{{"instance_digest", r.instance_digest},
             {"route", r.route},
             {"tau", r.tau},
             {"certificate", r.certificate},
             {"oracle", r.oracle ? oracle_to_json(*r.oracle) : json(nullptr)},
             {"warnings", r.warnings}};
    if (r.center) doc["center"] = *r.center;
    if (r.map) doc["map"] = matrix_to_json(*r.map);
    if (r.radius) doc["radius"] = number_or_null(*r.radius);
    if (r.lb) doc["lb"] = number_or_null(*r.lb);
    return doc;
}

SolveReport report_from_json(const json& doc) {
    SolveReport r;
    const json& digest = require(doc, "instance_digest");
    const json& route = require(doc, "route");
    if (!digest.is_string() || !route.is_string())
        throw ValidationError("instance_digest and route must be strings");
    r.instance_digest = digest.get<std::string>();
    r.route = route.get<std::string>();
    r.tau = number_at(doc, "tau");
    if (doc.contains("center")) r.center = numbers(doc["center"], "center");
    if (doc.contains("map")) r.map = matrix_from_json(doc["map"], "map");
    if (doc.contains("radius")) r.radius = number_at(doc, "radius");
    if (doc.contains("lb")) r.lb = number_at(doc, "lb");
    if (r.center.has_value() == r.map.has_value())
        throw ValidationError("report: exactly one of center and map must be present");
    r.certificate = require(doc, "certificate");
    if (!r.certificate.is_null() && !r.certificate.is_object())
        throw ValidationError("certificate: expected an object or null");
    const json& oracle = require(doc, "oracle");
    if (!oracle.is_null()) r.oracle = oracle_from_json(oracle);
    const json& warnings = require(doc, "warnings");
    if (!warnings.is_array()) throw ValidationError("warnings: expected an array of strings");
    for (const json& w : warnings) {
        if (!w.is_string()) throw ValidationError("warnings: expected an array of strings");
        r.warnings.push_back(w.get<std::string>());
    }
    return r;
}

}  // namespace optrec
