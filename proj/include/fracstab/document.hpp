/*
 Copyright 2026 The fracstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef FRACSTAB_DOCUMENT_HPP
#define FRACSTAB_DOCUMENT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fracstab/model.hpp"
#include "fracstab/synthesis.hpp"

namespace fracstab {

using Json = nlohmann::ordered_json;

struct ControllerBlock {
    int nc = 0;
    Matrix ac, bc, cc, dc;
};

/**
 * @brief Plant description as read from / written to a JSON document.
 *
 * Fields: "A", "B", "C" (nested arrays), "orders" (array of decimal
 * strings), optional "x0", "x0_deriv" (arrays) and optional "controller"
 * with "nc", "Ac", "Bc", "Cc", "Dc".
 */
struct SystemDocument {
    Matrix a, b, c;
    std::vector<std::string> orders;
    std::optional<Vector> x0, x0_deriv;
    std::optional<ControllerBlock> controller;
};

namespace detail {

inline Matrix json_matrix(const Json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field \"" + field + "\": expected a nested array");
    if (j.empty()) return Matrix(0, 0);
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix out;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) {
            throw ParseError("field \"" + field + "\" row " + std::to_string(i) + ": expected an array of numbers");
        }
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            out.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError("field \"" + field + "\" row " + std::to_string(i) + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ParseError("field \"" + field + "\"[" + std::to_string(i) + "][" + std::to_string(c) +
                                 "]: expected a number");
            }
            out(i, c) = v.get<double>();
        }
    }
    return out;
}

inline Vector json_vector(const Json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field \"" + field + "\": expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError("field \"" + field + "\"[" + std::to_string(i) + "]: expected a number");
        out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return out;
}

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    return {line, col};
}

} // namespace detail

inline Json matrix_to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

inline Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline SystemDocument document_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("document root must be an object");
    SystemDocument doc;
    if (!j.contains("A")) throw ParseError("missing required field \"A\"");
    if (!j.contains("orders")) throw ParseError("missing required field \"orders\"");
    doc.a = detail::json_matrix(j.at("A"), "A");
    if (j.contains("B")) doc.b = detail::json_matrix(j.at("B"), "B");
    if (j.contains("C")) doc.c = detail::json_matrix(j.at("C"), "C");
    const auto& orders = j.at("orders");
    if (!orders.is_array()) throw ParseError("field \"orders\": expected an array of decimal strings");
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (!orders[i].is_string()) {
            throw ParseError("field \"orders\"[" + std::to_string(i) +
                             "]: orders must be decimal strings such as \"0.93\", not numbers");
        }
        doc.orders.push_back(orders[i].get<std::string>());
    }
    if (j.contains("x0")) doc.x0 = detail::json_vector(j.at("x0"), "x0");
    if (j.contains("x0_deriv")) doc.x0_deriv = detail::json_vector(j.at("x0_deriv"), "x0_deriv");
    if (j.contains("controller")) {
        const auto& c = j.at("controller");
        if (!c.is_object()) throw ParseError("field \"controller\": expected an object");
        ControllerBlock block;
        if (!c.contains("nc") || !c.at("nc").is_number_integer() || c.at("nc").get<int>() < 0) {
            throw ParseError("field \"controller.nc\": expected a nonnegative integer");
        }
        block.nc = c.at("nc").get<int>();
        if (!c.contains("Dc")) throw ParseError("missing required field \"controller.Dc\"");
        block.dc = detail::json_matrix(c.at("Dc"), "controller.Dc");
        auto optional_matrix = [&c](const char* key) {
            return c.contains(key) ? detail::json_matrix(c.at(key), std::string("controller.") + key) : Matrix(0, 0);
        };
        block.ac = optional_matrix("Ac");
        block.bc = optional_matrix("Bc");
        block.cc = optional_matrix("Cc");
        doc.controller = std::move(block);
    }
    return doc;
}

/// Parses document text; syntax errors report line and column.
inline SystemDocument parse_document(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         e.what());
    }
    return document_from_json(j);
}

inline std::vector<RationalOrder> document_orders(const SystemDocument& doc) {
    std::vector<RationalOrder> out;
    for (std::size_t i = 0; i < doc.orders.size(); ++i) {
        try {
            out.push_back(parse_order(doc.orders[i]));
        } catch (const Error& e) {
            throw ParseError("field \"orders\"[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return out;
}

inline MultiOrderSystem to_system(const SystemDocument& doc) {
    const auto n = doc.a.rows();
    Matrix b = doc.b.size() ? doc.b : Matrix(n, 0);
    Matrix c = doc.c.size() ? doc.c : Matrix(0, n);
    return {doc.a, std::move(b), std::move(c), document_orders(doc), doc.x0.value_or(Vector()),
            doc.x0_deriv.value_or(Vector())};
}

/// Controller block of the document, shaped against the plant.
inline ControllerRealization to_controller(const SystemDocument& doc, const MultiOrderSystem& plant) {
    if (!doc.controller) throw ParseError("document has no \"controller\" block");
    const auto& block = *doc.controller;
    const auto nc = static_cast<Eigen::Index>(block.nc);
    ControllerRealization k;
    k.alpha_c = commensurate_base(plant.orders()).alpha_c;
    k.dc = block.dc;
    k.ac = nc == 0 && block.ac.size() == 0 ? Matrix(0, 0) : block.ac;
    k.bc = nc == 0 && block.bc.size() == 0 ? Matrix(0, plant.outputs()) : block.bc;
    k.cc = nc == 0 && block.cc.size() == 0 ? Matrix(plant.inputs(), 0) : block.cc;
    if (k.ac.rows() != nc || k.ac.cols() != nc) throw ParseError("field \"controller.Ac\": expected nc x nc");
    return k;
}

inline Json controller_to_json(const ControllerRealization& k) {
    Json c = Json::object();
    c["nc"] = k.order();
    c["Ac"] = matrix_to_json(k.ac);
    c["Bc"] = matrix_to_json(k.bc);
    c["Cc"] = matrix_to_json(k.cc);
    c["Dc"] = matrix_to_json(k.dc);
    c["alpha_c"] = k.alpha_c.to_string();
    return c;
}

inline Json document_to_json(const SystemDocument& doc) {
    Json j = Json::object();
    j["A"] = matrix_to_json(doc.a);
    if (doc.b.size()) j["B"] = matrix_to_json(doc.b);
    if (doc.c.size()) j["C"] = matrix_to_json(doc.c);
    j["orders"] = doc.orders;
    if (doc.x0) j["x0"] = vector_to_json(*doc.x0);
    if (doc.x0_deriv) j["x0_deriv"] = vector_to_json(*doc.x0_deriv);
    if (doc.controller) {
        Json c = Json::object();
        c["nc"] = doc.controller->nc;
        c["Ac"] = matrix_to_json(doc.controller->ac);
        c["Bc"] = matrix_to_json(doc.controller->bc);
        c["Cc"] = matrix_to_json(doc.controller->cc);
        c["Dc"] = matrix_to_json(doc.controller->dc);
        j["controller"] = std::move(c);
    }
    return j;
}

inline ControllerBlock to_block(const ControllerRealization& k) {
    return {static_cast<int>(k.order()), k.ac, k.bc, k.cc, k.dc};
}

} // namespace fracstab

#endif // FRACSTAB_DOCUMENT_HPP
