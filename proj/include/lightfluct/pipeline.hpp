#ifndef LIGHTFLUCT_PIPELINE_HPP
#define LIGHTFLUCT_PIPELINE_HPP

#include "lightfluct/analyzers.hpp"
#include "lightfluct/config.hpp"
#include "lightfluct/records.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lightfluct::pipeline {

inline constexpr const char* kEngineVersion = "lightfluct 1.0.0";

/// 64-bit FNV-1a of the serialized configuration, as 16 hex digits.
std::string config_hash(const config::ExperimentConfig& cfg);

/// Counting-channel clicks and homodyne current of one realization.
struct Realization {
    CountRecord triggers;
    PhotocurrentRecord current;
};

/// Realization `index` of the configured engine, drawn from stream (seed, index).
Realization simulate(const config::ExperimentConfig& cfg, std::size_t index);

struct Campaign {
    analysis::G2Accumulator g2;
    analysis::HAccumulator h;
    std::size_t clicks = 0;
    double observed_time = 0.0;
};

/// Runs cfg.run.n_trajectories realizations on cfg.run.workers threads and
/// accumulates the estimators. `sink` (if given) sees every realization and
/// may be called concurrently for different indices. In strict mode partial
/// results are merged in index order, so sums are independent of scheduling.
Campaign run_campaign(const config::ExperimentConfig& cfg,
                      const std::function<void(std::size_t, const Realization&)>& sink = {});

struct Artifact {
    std::string path;  // relative to the run directory
    std::uintmax_t bytes = 0;
    std::string kind;
    std::size_t index = 0;
};

struct RunManifest {
    std::filesystem::path directory;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string engine;
    std::string engine_version;
    double wall_clock_seconds = 0.0;
    std::vector<Artifact> artifacts;

    /// Throws std::runtime_error if an artifact is missing or its size changed.
    void verify() const;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& run_dir);

/// Writes counts_NNNN.txt, current_NNNN.csv, config.ini and manifest.json
/// under cfg.run.output_dir.
RunManifest run(const config::ExperimentConfig& cfg);

struct AnalysisOverrides {
    std::optional<double> bin_width;
    std::optional<double> max_lag;
    std::optional<double> halfwidth;
    std::optional<int> rebin;
};

struct AnalysisResult {
    analysis::CorrelationSeries g2;
    std::optional<analysis::CorrelationSeries> h;
    std::optional<analysis::SqueezingSpectrum> spectrum;
    analysis::AuditReport audit;
    std::vector<std::string> inconclusive;  // reasons, empty when every estimate is usable
};

/// Estimators, spectrum and audit for a set of realizations.
AnalysisResult analyze_campaign(const config::ExperimentConfig& cfg, const Campaign& campaign);

nlohmann::json audit_to_json(const analysis::AuditReport& report);
nlohmann::json summarize(const config::ExperimentConfig& cfg, const AnalysisResult& result);

/// Reads a run directory and writes g2.csv, h.csv, spectrum.csv, audit.json and report.json into it.
AnalysisResult analyze(const std::filesystem::path& run_dir, const AnalysisOverrides& overrides = {});

/// Side-by-side h of two analyzed runs; writes comparison.csv and comparison.json into out_dir.
nlohmann::json compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                       const std::filesystem::path& out_dir);

/// Re-audits g2.csv (and h.csv when present) of an analyzed run and rewrites audit.json.
analysis::AuditReport audit(const std::filesystem::path& run_dir);

} // namespace lightfluct::pipeline

#endif // LIGHTFLUCT_PIPELINE_HPP
