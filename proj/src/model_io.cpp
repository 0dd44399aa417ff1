#include "fraclife/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "fraclife/errors.hpp"
#include "fraclife/matrix_core.hpp"

namespace fraclife {

namespace {

using nlohmann::json;

// Attaches source:line prefixes to diagnostics.  Semantic errors are anchored
// to the first occurrence of the offending key in the raw text; parse errors
// to the byte offset reported by the JSON parser.
struct Anchor {
    const std::string& text;
    const std::string& source;

    std::size_t line_of_offset(std::size_t byte) const {
        byte = std::min(byte, text.size());
        return 1 + static_cast<std::size_t>(
                       std::count(text.begin(), text.begin() + byte, '\n'));
    }

    std::size_t line_of_key(const std::string& key) const {
        const std::size_t pos = text.find('"' + key + '"');
        return pos == std::string::npos ? 1 : line_of_offset(pos);
    }

    [[noreturn]] void fail_at(std::size_t line, const std::string& msg) const {
        throw Error(ErrorCode::Parse,
                    source + ":" + std::to_string(line) + ": " + msg);
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        fail_at(line_of_key(key), msg);
    }
};

json parse_root(const Anchor& at) {
    json root;
    try {
        root = json::parse(at.text);
    } catch (const json::parse_error& e) {
        at.fail_at(at.line_of_offset(e.byte), e.what());
    }
    if (!root.is_object()) at.fail_at(1, "top level must be an object");
    return root;
}

void reject_unknown_keys(const Anchor& at, const json& obj,
                         std::initializer_list<const char*> known) {
    for (const auto& item : obj.items()) {
        const bool ok = std::any_of(known.begin(), known.end(),
                                    [&](const char* k) { return item.key() == k; });
        if (!ok) at.fail(item.key(), "unknown key \"" + item.key() + "\"");
    }
}

double require_number(const Anchor& at, const json& obj, const std::string& key) {
    if (!obj.contains(key)) at.fail_at(1, "missing key \"" + key + "\"");
    if (!obj[key].is_number()) at.fail(key, "\"" + key + "\" must be a number");
    return obj[key].get<double>();
}

Eigen::VectorXd require_vector(const Anchor& at, const json& obj,
                               const std::string& key, Eigen::Index want = -1) {
    if (!obj.contains(key)) at.fail_at(1, "missing key \"" + key + "\"");
    const json& arr = obj[key];
    if (!arr.is_array() || arr.empty())
        at.fail(key, "\"" + key + "\" must be a nonempty array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            at.fail(key, "\"" + key + "\" must contain only numbers");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    if (want >= 0 && v.size() != want)
        at.fail(key, "\"" + key + "\" has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(want));
    return v;
}

Eigen::MatrixXd require_matrix(const Anchor& at, const json& obj,
                               const std::string& key, Eigen::Index want = -1) {
    if (!obj.contains(key)) at.fail_at(1, "missing key \"" + key + "\"");
    const json& rows = obj[key];
    if (!rows.is_array() || rows.empty())
        at.fail(key, "\"" + key + "\" must be a nonempty array of rows");
    const Eigen::Index p = static_cast<Eigen::Index>(rows.size());
    if (want >= 0 && p != want)
        at.fail(key, "\"" + key + "\" has " + std::to_string(p) +
                         " rows, expected " + std::to_string(want));
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != p)
            at.fail(key, "\"" + key + "\" row " + std::to_string(i) +
                             " must have " + std::to_string(p) + " entries");
        for (Eigen::Index j = 0; j < p; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            if (!cell.is_number())
                at.fail(key, "\"" + key + "\" must contain only numbers");
            m(i, j) = cell.get<double>();
        }
    }
    return m;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Parse, path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

ModelFile parse_model_text(const std::string& text, const std::string& source) {
    const Anchor at{text, source};
    const json root = parse_root(at);
    reject_unknown_keys(at, root,
                        {"alpha", "pi", "T", "transform", "repair_tolerance"});

    const double alpha = require_number(at, root, "alpha");
    const Eigen::MatrixXd raw = require_matrix(at, root, "T");
    const Eigen::VectorXd pi_col = require_vector(at, root, "pi", raw.rows());

    double tol = 1e-3;
    if (root.contains("repair_tolerance")) {
        tol = require_number(at, root, "repair_tolerance");
        if (!(tol >= 0.0) || !std::isfinite(tol))
            at.fail("repair_tolerance", "repair_tolerance must be finite and >= 0");
    }

    if (!root.contains("transform")) at.fail_at(1, "missing key \"transform\"");
    const json& tf = root["transform"];
    if (!tf.is_object() || !tf.contains("family") || !tf["family"].is_string())
        at.fail("transform", "\"transform\" must be {\"family\": ..., \"parameter\": ...}");
    const std::string family = tf["family"].get<std::string>();
    reject_unknown_keys(at, tf, {"family", "parameter"});

    try {
        const FractionalClock clock(alpha);

        InhomogeneityTransform g = InhomogeneityTransform::identity();
        if (family == "identity") {
            if (tf.contains("parameter"))
                at.fail("parameter", "the identity transform takes no parameter");
        } else {
            if (!tf.contains("parameter") || !tf["parameter"].is_number())
                at.fail("transform", "\"" + family + "\" requires a numeric parameter");
            const double param = tf["parameter"].get<double>();
            if (family == "power-weibull")
                g = InhomogeneityTransform::power_weibull(param);
            else if (family == "pareto-exp")
                g = InhomogeneityTransform::pareto_exp(param);
            else if (family == "gompertz-log")
                g = InhomogeneityTransform::gompertz_log(param);
            else
                at.fail("family", "unknown transform family \"" + family + "\"");
        }

        PhaseModel model =
            make_phase_model(pi_col.transpose(), validate_subintensity(raw, tol));
        return ModelFile{std::move(model), std::move(g), clock, tol};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) throw;
        at.fail_at(1, e.what());
    }
}

ModelFile load_model_file(const std::string& path) {
    return parse_model_text(read_file(path), path);
}

std::string serialize_model(const ModelFile& mf) {
    json root;
    root["alpha"] = mf.clock.alpha();
    root["pi"] = vector_to_json(mf.model.pi().transpose());
    root["T"] = matrix_to_json(mf.model.T().matrix());
    json tf;
    tf["family"] = mf.transform.name();
    if (mf.transform.family() != TransformFamily::Identity)
        tf["parameter"] = mf.transform.parameter();
    root["transform"] = tf;
    root["repair_tolerance"] = mf.repair_tolerance;
    return root.dump(2) + "\n";
}

Contract parse_contract_text(const std::string& text, const std::string& source,
                             Eigen::Index p) {
    const Anchor at{text, source};
    const json root = parse_root(at);
    reject_unknown_keys(at, root, {"a", "c", "B", "b", "r", "n"});

    Contract k;
    k.a = require_vector(at, root, "a", p);
    k.c = require_vector(at, root, "c", p);
    k.b = require_vector(at, root, "b", p);
    k.B = require_matrix(at, root, "B", p);
    k.r = require_number(at, root, "r");

    if (!root.contains("n")) at.fail_at(1, "missing key \"n\"");
    const json& n = root["n"];
    if (n.is_string()) {
        if (n.get<std::string>() != "inf")
            at.fail("n", "\"n\" must be a number or the token \"inf\"");
        k.horizon = kInfiniteHorizon;
    } else if (n.is_number()) {
        k.horizon = n.get<double>();
    } else {
        at.fail("n", "\"n\" must be a number or the token \"inf\"");
    }

    try {
        validate_contract(k, p);
    } catch (const Error& e) {
        at.fail_at(1, e.what());
    }
    return k;
}

Contract load_contract_file(const std::string& path, Eigen::Index p) {
    return parse_contract_text(read_file(path), path, p);
}

std::string serialize_contract(const Contract& contract) {
    json root;
    root["a"] = vector_to_json(contract.a);
    root["c"] = vector_to_json(contract.c);
    root["B"] = matrix_to_json(contract.B);
    root["b"] = vector_to_json(contract.b);
    root["r"] = contract.r;
    if (contract.horizon == kInfiniteHorizon)
        root["n"] = "inf";
    else
        root["n"] = contract.horizon;
    return root.dump(2) + "\n";
}

} // namespace fraclife
