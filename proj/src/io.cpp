#include "fwf/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf {

using nlohmann::json;

std::string format_double(double x) {
    return fmt::format("{:.17g}", x);
}

void write_series_csv(std::ostream& os, const Series& s) {
    os << "value\n";
    for (double v : s.values()) os << format_double(v) << '\n';
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
    const std::string buf(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || errno == ERANGE) {
        throw IoError(fmt::format("{}:{}: '{}' is not a number", source, line, buf));
    }
    return v;
}

}  // namespace

Series read_series_csv(std::istream& is, const std::string& source) {
    std::string line;
    if (!std::getline(is, line)) throw IoError(fmt::format("{}: empty file", source));
    if (trim(line) != "value") {
        throw IoError(fmt::format("{}:1: expected header 'value', found '{}'", source, trim(line)));
    }
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty()) continue;
        const double v = parse_double(t, source, lineno);
        if (!std::isfinite(v)) throw IoError(fmt::format("{}:{}: non-finite value", source, lineno));
        values.push_back(v);
    }
    if (values.empty()) throw IoError(fmt::format("{}: no samples after the header", source));
    return Series(std::move(values));
}

Series read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open series file '{}'", path.string()));
    return read_series_csv(in, path.string());
}

void write_lag_profile_csv(std::ostream& os, const LagProfile& p) {
    os << "lag,value\n";
    for (std::size_t tau = 0; tau < p.size(); ++tau) os << tau << ',' << format_double(p[tau]) << '\n';
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_json(const RowMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(std::vector<double>(m.data() + i * m.cols(), m.data() + (i + 1) * m.cols()));
    }
    return rows;
}

Eigen::VectorXd vector_from(const json& j, const char* field) {
    if (!j.is_array()) throw IoError(fmt::format("model.{}: expected an array", field));
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw IoError(fmt::format("model.{}[{}]: expected a number", field, i));
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

RowMatrix matrix_from(const json& j, const char* field, std::size_t cols) {
    if (!j.is_array()) throw IoError(fmt::format("model.{}: expected an array of rows", field));
    RowMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        if (!row.is_array() || row.size() != cols) {
            throw IoError(fmt::format("model.{}[{}]: expected {} numbers", field, i, cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) throw IoError(fmt::format("model.{}[{}][{}]: expected a number", field, i, c));
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return m;
}

const json& field(const json& j, const char* name, const char* where) {
    if (!j.is_object() || !j.contains(name)) throw IoError(fmt::format("{}: missing field '{}'", where, name));
    return j.at(name);
}

double number(const json& j, const char* name, const char* where) {
    const json& v = field(j, name, where);
    if (!v.is_number()) throw IoError(fmt::format("{}.{}: expected a number", where, name));
    return v.get<double>();
}

std::size_t count(const json& j, const char* name, const char* where) {
    const json& v = field(j, name, where);
    if (!v.is_number_unsigned()) throw IoError(fmt::format("{}.{}: expected a non-negative integer", where, name));
    return v.get<std::size_t>();
}

KafVariant kaf_variant_from(std::string_view s) {
    if (s == "klms") return KafVariant::klms;
    if (s == "krls") return KafVariant::krls;
    if (s == "krr") return KafVariant::krr;
    throw IoError(fmt::format("unknown model variant '{}'", s));
}

struct ModelToJson {
    json operator()(const FwfModel& m) const {
        const FwfParams& p = m.params();
        return {{"weights", vector_json(m.weights())},
                {"partners", matrix_json(m.partners())},
                {"train_windows", matrix_json(m.train_windows())},
                {"bias", m.bias()},
                {"params",
                 {{"order", p.order},
                  {"horizon", p.horizon},
                  {"sigma_input", p.sigma_input},
                  {"sigma_weight", p.sigma_weight},
                  {"alpha", p.alpha},
                  {"k_neighbors", p.k_neighbors},
                  {"ridge", p.ridge}}}};
    }
    json operator()(const WienerModel& m) const {
        return {{"weights", vector_json(m.weights)}, {"ridge", m.ridge}};
    }
    json operator()(const KafModel& m) const {
        return {{"centers", matrix_json(m.centers)},
                {"coefficients", vector_json(m.coefficients)},
                {"sigma", m.sigma.sigma()}};
    }
};

}  // namespace

json to_json(const SavedModel& m) {
    const Standardization& s = m.standardization;
    return {{"format", "fwf-model"},
            {"version", kModelFormatVersion},
            {"variant", std::string(model_kind(m.model))},
            {"order", m.order},
            {"horizon", m.horizon},
            {"standardization",
             {{"enabled", s.enabled},
              {"input_mean", s.input_mean},
              {"input_std", s.input_std},
              {"target_mean", s.target_mean},
              {"target_std", s.target_std}}},
            {"model", std::visit(ModelToJson{}, m.model)}};
}

SavedModel saved_model_from_json(const json& j) {
    if (!j.is_object()) throw IoError("model file: top level must be an object");
    const json& format = field(j, "format", "model file");
    if (!format.is_string() || format.get<std::string>() != "fwf-model") {
        throw IoError("model file: format must be 'fwf-model'");
    }
    const json& version = field(j, "version", "model file");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
        throw IoError(fmt::format("model file: unsupported version {}", version.dump()));
    }
    const json& variant_j = field(j, "variant", "model file");
    if (!variant_j.is_string()) throw IoError("model file: variant must be a string");
    const std::string variant = variant_j.get<std::string>();

    const std::size_t order = count(j, "order", "model file");
    const std::size_t horizon = count(j, "horizon", "model file");
    if (order == 0) throw IoError("model file: order must be at least 1");

    Standardization st;
    const json& sj = field(j, "standardization", "model file");
    const json& enabled = field(sj, "enabled", "standardization");
    if (!enabled.is_boolean()) throw IoError("standardization.enabled: expected a boolean");
    st.enabled = enabled.get<bool>();
    st.input_mean = number(sj, "input_mean", "standardization");
    st.input_std = number(sj, "input_std", "standardization");
    st.target_mean = number(sj, "target_mean", "standardization");
    st.target_std = number(sj, "target_std", "standardization");
    if (st.enabled && !(st.input_std > 0.0 && st.target_std > 0.0)) {
        throw IoError("standardization: std values must be positive");
    }

    const json& mj = field(j, "model", "model file");
    try {
        if (variant == "fwf") {
            const json& pj = field(mj, "params", "model");
            FwfParams p;
            p.order = count(pj, "order", "model.params");
            p.horizon = count(pj, "horizon", "model.params");
            p.sigma_input = number(pj, "sigma_input", "model.params");
            p.sigma_weight = number(pj, "sigma_weight", "model.params");
            p.alpha = number(pj, "alpha", "model.params");
            p.k_neighbors = count(pj, "k_neighbors", "model.params");
            p.ridge = number(pj, "ridge", "model.params");
            if (p.order != order || p.horizon != horizon) {
                throw IoError("model.params: order/horizon disagree with the envelope");
            }
            FwfModel m(vector_from(field(mj, "weights", "model"), "weights"),
                       matrix_from(field(mj, "partners", "model"), "partners", order),
                       matrix_from(field(mj, "train_windows", "model"), "train_windows", order),
                       number(mj, "bias", "model"), p);
            return {std::move(m), order, horizon, st};
        }
        if (variant == "wiener") {
            WienerModel m{vector_from(field(mj, "weights", "model"), "weights"), number(mj, "ridge", "model")};
            if (static_cast<std::size_t>(m.weights.size()) != order) {
                throw IoError(fmt::format("model.weights: {} entries for order {}", m.weights.size(), order));
            }
            return {std::move(m), order, horizon, st};
        }
        KafModel m{matrix_from(field(mj, "centers", "model"), "centers", order),
                   vector_from(field(mj, "coefficients", "model"), "coefficients"),
                   KernelWidth(number(mj, "sigma", "model")), kaf_variant_from(variant)};
        if (m.centers.rows() != m.coefficients.size()) {
            throw IoError("model: centers and coefficients differ in count");
        }
        return {std::move(m), order, horizon, st};
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw IoError(fmt::format("model file: {}", e.what()));
    }
}

void save_model(const std::filesystem::path& path, const SavedModel& m) {
    const std::string text = to_json(m).dump(1) + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write model file '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed while writing model file '{}'", path.string()));
}

SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open model file '{}'", path.string()));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(fmt::format("{}: invalid JSON ({})", path.string(), e.what()));
    }
    return saved_model_from_json(j);
}

}  // namespace fwf
