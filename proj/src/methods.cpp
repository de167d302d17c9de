#include "fwf/methods.hpp"

namespace fwf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

KernelWidth width_or_silverman(const std::optional<double>& sigma, const Dataset& data) {
    return sigma ? KernelWidth(*sigma) : silverman_sigma(data);
}

}  // namespace

std::string_view method_kind(const MethodConfig& m) {
    return std::visit(overloaded{
                          [](const FwfMethod&) { return std::string_view("fwf"); },
                          [](const WienerMethod&) { return std::string_view("wiener"); },
                          [](const KlmsMethod&) { return std::string_view("klms"); },
                          [](const KrlsMethod&) { return std::string_view("krls"); },
                          [](const KrrMethod&) { return std::string_view("krr"); },
                      },
                      m);
}

const std::vector<std::string>& valid_method_kinds() {
    static const std::vector<std::string> kinds{"fwf", "wiener", "klms", "krls", "krr"};
    return kinds;
}

std::optional<MethodConfig> method_from_kind(std::string_view kind) {
    if (kind == "fwf") return FwfMethod{};
    if (kind == "wiener") return WienerMethod{};
    if (kind == "klms") return KlmsMethod{};
    if (kind == "krls") return KrlsMethod{};
    if (kind == "krr") return KrrMethod{};
    return std::nullopt;
}

Model fit_method(const MethodConfig& m, const Dataset& data) {
    return std::visit(overloaded{
                          [&](const FwfMethod& f) -> Model { return fit(data, f.config); },
                          [&](const WienerMethod& w) -> Model { return wiener_fit(data, w.ridge); },
                          [&](const KlmsMethod& k) -> Model {
                              return klms_fit(data, k.eta, width_or_silverman(k.sigma, data));
                          },
                          [&](const KrlsMethod& k) -> Model {
                              return krls_fit(data, k.lambda, width_or_silverman(k.sigma, data));
                          },
                          [&](const KrrMethod& k) -> Model {
                              return krr_fit(data, k.lambda, width_or_silverman(k.sigma, data));
                          },
                      },
                      m);
}

double predict(const Model& m, std::span<const double> x) {
    return std::visit(overloaded{
                          [&](const FwfModel& f) { return f.predict(x); },
                          [&](const WienerModel& w) { return wiener_predict(w, x); },
                          [&](const KafModel& k) { return kaf_predict(k, x); },
                      },
                      m);
}

std::string_view model_kind(const Model& m) {
    return std::visit(overloaded{
                          [](const FwfModel&) { return std::string_view("fwf"); },
                          [](const WienerModel&) { return std::string_view("wiener"); },
                          [](const KafModel& k) { return to_string(k.variant); },
                      },
                      m);
}

}  // namespace fwf
