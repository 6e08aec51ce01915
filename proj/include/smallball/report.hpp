#pragma once

#include <json.hpp>
#include <string>

#include "smallball/certify.hpp"
#include "smallball/fields.hpp"
#include "smallball/solve.hpp"
#include "smallball/verify.hpp"

namespace smallball {

using json = nlohmann::ordered_json;

// All reports share schema_version and a kind tag; key order is fixed so
// identical inputs serialize byte-identically.
json certificate_to_json(const ConstantsCertificate& cert);
json solution_to_json(const SolutionCertificate& sol);
SolutionCertificate solution_from_json(const json& j);
json report_to_json(const VerificationReport& rep);
json problem_to_json(const ProblemConfig& cfg);
ProblemConfig problem_from_json(const json& j);

std::string dump_report(const json& j);  // 2-space indent + trailing newline

// FNV-1a 64-bit content hash, hex-encoded (run manifests).
std::string fnv1a_hex(const std::string& bytes);

}  // namespace smallball
