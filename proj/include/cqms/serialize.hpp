// serialize.hpp — JSON schemas for the public types and CSV export helpers

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "cqms/bridge.hpp"
#include "cqms/lipnorm.hpp"
#include "cqms/metrics.hpp"
#include "cqms/opsys.hpp"

namespace cqms::io {

using json = nlohmann::ordered_json;

// {"rows": r, "cols": c, "re": [...], "im": [...]}, row-major
json matrix_to_json(const CMatrix& a);
CMatrix matrix_from_json(const json& j);

json vector_to_json(const CVector& v);
CVector vector_from_json(const json& j);

// {"ambient_dim": k, "basis": [matrix...]}
json system_to_json(const opsys::OperatorSystem& sys);
opsys::SystemPtr system_from_json(const json& j);

// {"n": n, "images": [matrix...]}
json cpmap_to_json(const opsys::CpMap& phi);
opsys::UcpMap ucp_from_json(const json& j, opsys::SystemPtr system);

// {"variant": "action" | "functional" | "quotient" | "scaled" | "direct_sum", ...}
// with automorphisms as {"kind": "unitary" | "ambient_linear" | "coefficient",
// "matrix": ...}; systems are embedded so documents stand alone
json lipnorm_to_json(const lip::LipNorm& l);
lip::LipNormPtr lipnorm_from_json(const json& j);

json bridge_to_json(const metrics::Bridge& b);
metrics::Bridge bridge_from_json(const json& j);

json estimate_to_json(const metrics::MetricEstimate& e);

// CSV with fixed 17-significant-digit formatting for reproducible files.
std::string format_double(double v);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

} // namespace cqms::io
