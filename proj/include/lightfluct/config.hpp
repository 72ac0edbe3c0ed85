#ifndef LIGHTFLUCT_CONFIG_HPP
#define LIGHTFLUCT_CONFIG_HPP

#include "lightfluct/detection.hpp"
#include "lightfluct/field.hpp"
#include "lightfluct/quantum.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightfluct::config {

/// Invalid configuration. `diagnostics` holds one "section.key: problem" entry per fault.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    std::vector<std::string> diagnostics;
};

enum class Engine { semiclassical, quantum };
enum class Units { dimensionless, si };

struct EngineSection {
    Engine engine = Engine::quantum;
    Units units = Units::dimensionless;
    double si_time_unit_ns = 50.0;  // one simulation time unit in SI mode
};

struct DetectionSection {
    double lo_amplitude = 10.0;
    double lo_phase = quantum::kDefaultLoPhase;
    double bandwidth = 0.0;  // 0 selects the Nyquist frequency of the run grid
    double split_to_counter = 0.5;
    detection::DetectorOptions detector;
};

struct RunSection {
    double duration = 1000.0;
    double dt = 0.02;
    double burn_in = 20.0;
    std::size_t n_trajectories = 4;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool strict_deterministic = true;
    std::string output_dir = "runs/latest";
};

struct AnalysisSection {
    double bin_width = 0.2;
    double max_lag = 8.0;
    double halfwidth = 8.0;
    int rebin = 11;
    int zero_padding = 8;
};

struct ExperimentConfig {
    EngineSection engine;
    field::FieldModel field = field::BurstField{1.0, 0.2, 0.2, 2.0, 0.5, field::BurstSign::positive,
                                               quantum::kDefaultLoPhase};
    quantum::SystemParams system = quantum::default_params();
    DetectionSection detection;
    RunSection run;
    AnalysisSection analysis;

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

ExperimentConfig parse(const std::string& text);
ExperimentConfig load(const std::filesystem::path& file);
std::string serialize(const ExperimentConfig& config);

/// Applies LIGHTFLUCT_SEED and LIGHTFLUCT_OUTPUT_DIR when set.
void apply_environment(ExperimentConfig& config);

std::string_view to_string(Engine e);
std::string_view to_string(Units u);

/// SI relabelling: ordinary frequency in MHz for a dimensionless one.
double to_megahertz(const EngineSection& engine, double frequency);

} // namespace lightfluct::config

#endif // LIGHTFLUCT_CONFIG_HPP
