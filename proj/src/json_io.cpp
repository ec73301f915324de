#include "invlp/json_io.hpp"

#include <fstream>

namespace invlp {

Json to_json(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Json to_json(const Matrix& m) {
    Json arr = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        arr.push_back(std::move(row));
    }
    return arr;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a JSON array of rows");
    const Index rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(j[r].size()) != cols)
            throw std::invalid_argument("ragged matrix rows in JSON");
        for (Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Json to_json(const LinearProgram& lp) {
    Json j;
    j["c"] = to_json(lp.c);
    j["A"] = to_json(lp.A);
    j["b"] = to_json(lp.b);
    if (lp.num_eq() > 0) {
        j["G"] = to_json(lp.G);
        j["h"] = to_json(lp.h);
    }
    return j;
}

LinearProgram lp_from_json(const Json& j) {
    LinearProgram lp;
    lp.c = vector_from_json(j.at("c"));
    lp.A = j.contains("A") ? matrix_from_json(j["A"]) : Matrix(0, lp.c.size());
    lp.b = j.contains("b") ? vector_from_json(j["b"]) : Vector(0);
    lp.G = j.contains("G") ? matrix_from_json(j["G"]) : Matrix(0, lp.c.size());
    lp.h = j.contains("h") ? vector_from_json(j["h"]) : Vector(0);
    if (lp.A.rows() > 0 && lp.A.cols() == 0) lp.A.resize(lp.A.rows(), lp.c.size());
    if (lp.A.rows() == 0) lp.A.resize(0, lp.c.size());
    if (lp.G.rows() == 0) lp.G.resize(0, lp.c.size());
    lp.validate();
    return lp;
}

Json to_json(const PrimalDualSolution& sol) {
    Json j;
    j["status"] = to_string(sol.status);
    j["x"] = to_json(sol.x);
    j["lam"] = to_json(sol.lam);
    j["nu"] = to_json(sol.nu);
    j["objective"] = sol.objective;
    j["iterations"] = sol.iterations;
    j["kkt_residual"] = sol.kkt_residual;
    return j;
}

Json to_json(const KktResiduals& r) {
    return Json{{"primal_ineq", r.primal_ineq},
                {"primal_eq", r.primal_eq},
                {"dual", r.dual},
                {"complementarity", r.complementarity},
                {"sign", r.sign}};
}

Json to_json(const CoefficientJacobians& jac) {
    Json j;
    j["dc"] = to_json(jac.dc);
    j["dA"] = to_json(jac.dA);
    j["db"] = to_json(jac.db);
    j["dG"] = to_json(jac.dG);
    j["dh"] = to_json(jac.dh);
    j["degenerate_warning"] = jac.degenerate_warning;
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace invlp
