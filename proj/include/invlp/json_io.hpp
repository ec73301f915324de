#pragma once

#include <json.hpp>

#include "invlp/grad.hpp"
#include "invlp/types.hpp"

namespace invlp {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // row-major nested arrays
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

/// LP file format: object with keys c, A, b, G, h as nested arrays of
/// numbers; absent G/h means no equality block.
Json to_json(const LinearProgram& lp);
LinearProgram lp_from_json(const Json& j);

Json to_json(const PrimalDualSolution& sol);
Json to_json(const KktResiduals& r);
Json to_json(const CoefficientJacobians& jac);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace invlp
