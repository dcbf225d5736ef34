#pragma once

// JSON instances, solve reports, and their canonical serialization.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optrec/linalg.hpp"
#include "optrec/model.hpp"
#include "optrec/oracle.hpp"

namespace optrec {

/// Reads an instance object with keys "lambda" (m rows of N reals),
/// "v_basis" (n columns of N reals, possibly empty), "epsilon", "eta", "y".
/// Throws ValidationError naming the offending key.
ProblemInstance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const ProblemInstance& p);

/// Serializes with sorted keys and every double printed with 17 significant
/// digits, so equal documents give byte-identical text. Non-finite numbers
/// become null. indent < 0 gives the compact form.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

/// 64-bit FNV-1a of the compact canonical form of the instance, as 16 hex digits.
std::string instance_digest(const ProblemInstance& p);

struct SolveReport {
    std::string instance_digest;
    std::string route;
    double tau = 0.0;
    std::optional<Vector> center;  // local reports
    std::optional<Matrix> map;     // global reports
    std::optional<double> radius;  // local reports
    std::optional<double> lb;      // global reports
    nlohmann::json certificate;    // object or null
    std::optional<OracleReport> oracle;
    std::vector<std::string> warnings;
};

nlohmann::json report_to_json(const SolveReport& r);
/// Inverse of report_to_json; throws ValidationError on schema violations.
SolveReport report_from_json(const nlohmann::json& doc);

nlohmann::json oracle_to_json(const OracleReport& o);
OracleReport oracle_from_json(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const char* key);
Vector vector_from_json(const nlohmann::json& doc, const char* key);

}  // namespace optrec
