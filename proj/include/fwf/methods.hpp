#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fwf/baselines.hpp"
#include "fwf/fwf_core.hpp"

namespace fwf {

struct FwfMethod {
    FwfConfig config;
};

struct WienerMethod {
    std::optional<double> ridge;
};

/// Kernel methods fall back to Silverman's rule on the training input when
/// sigma is unset.
struct KlmsMethod {
    double eta = 0.5;
    std::optional<double> sigma;
};

struct KrlsMethod {
    double lambda = 1e-3;
    std::optional<double> sigma;
};

struct KrrMethod {
    double lambda = 1e-3;
    std::optional<double> sigma;
};

using MethodConfig = std::variant<FwfMethod, WienerMethod, KlmsMethod, KrlsMethod, KrrMethod>;

/// A named method as it appears in result tables.
struct MethodSpec {
    std::string name;
    MethodConfig config;
};

using Model = std::variant<FwfModel, WienerModel, KafModel>;

/// "fwf", "wiener", "klms", "krls", "krr".
std::string_view method_kind(const MethodConfig& m);
const std::vector<std::string>& valid_method_kinds();
/// Default-configured method of the given kind; nullopt for unknown names.
std::optional<MethodConfig> method_from_kind(std::string_view kind);

Model fit_method(const MethodConfig& m, const Dataset& data);
double predict(const Model& m, std::span<const double> x);
std::string_view model_kind(const Model& m);

}  // namespace fwf
