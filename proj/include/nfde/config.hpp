#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfde/compartment.hpp"
#include "nfde/integrator.hpp"
#include "nfde/ordering.hpp"

namespace nfde {

inline constexpr int kSchemaVersion = 1;

/// A history given in closed form or read from CSV.
struct HistorySpec {
    struct Wave {
        Eigen::Index component = 0;
        double amplitude = 0.0;
        double frequency = 0.0;  // cycles per unit time
        double phase = 0.0;      // radians
    };
    Vector constant;
    std::vector<Wave> waves;
    std::optional<std::filesystem::path> csv;

    /// Closed forms never run out; CSV data end where the file ends.
    std::unique_ptr<HistorySource> build(Eigen::Index m, double step) const;
};

struct PairYSpec {
    enum class Mode { Comparison, History };
    Mode mode = Mode::Comparison;
    double epsilon = 0.1;
    HistorySpec history;
    bool equalize_mass = false;
};

struct CheckSpec {
    std::vector<Condition> conditions{Condition::G5};
    std::optional<std::vector<double>> a;  // nullopt: pick by suggest_a
    std::vector<double> a_grid;
    CheckOptions options;
};

struct InvertSpec {
    HistorySpec yhat;
    double tol = 1e-8;
    double depth = 10.0;  // length of the yhat window
    double step = 0.01;
};

struct Thresholds {
    double cone_margin = 1e-7;    // pair fails when the margin drops below -value
    double mass_residual = 1e-4;  // mass audit, relative to max(1, |M(0)|)
};

struct CoveringSpec {
    CoveringOptions options;
    std::vector<double> return_tols{1e-1, 3e-2, 1e-2};
};

struct ExperimentConfig {
    TorusFlow flow = TorusFlow::golden();
    TorusPoint p0;
    std::optional<NeutralDiagSystem> diag;  // set for the neutral diagonal family
    std::optional<CompartmentalSystem> system;
    HistorySpec initial;
    std::optional<PairYSpec> initial_y;
    SimConfig sim;
    OmegaSampling sampling;
    CheckSpec check;
    InvertSpec invert;
    Thresholds thresholds;
    CoveringSpec covering;
    /// The parsed config with every default written out.
    nlohmann::ordered_json echo;

    const CompartmentalSystem& sys() const { return *system; }
};

/// Throws ConfigError with a JSON-pointer-like location on any problem.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

TrigPoly parse_trig(const nlohmann::json& j, std::size_t dim);

}  // namespace nfde
