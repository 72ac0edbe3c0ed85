#include "lightfluct/blackbody.hpp"
#include "lightfluct/config.hpp"
#include "lightfluct/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace lf = lightfluct;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3, kInconclusive = 4 };

json moments_json(const lf::blackbody::EnergyMoments& m)
{
    return {{"mean", m.mean}, {"variance", m.variance}};
}

json summary_json(const lf::blackbody::SampleSummary& s)
{
    return {{"n", s.count},
            {"mean", s.mean},
            {"variance", s.variance},
            {"mean_stderr", s.mean_stderr},
            {"variance_stderr", s.variance_stderr}};
}

int cmd_blackbody(double x_value, std::size_t n, std::uint64_t seed)
{
    const lf::blackbody::ThermalParameter x(x_value);
    lf::RngStream continuous_stream(seed, 0);
    lf::RngStream discrete_stream(seed, 1);
    const auto cont = lf::blackbody::sample_energy(x, lf::blackbody::EnergyModel::continuous, n, continuous_stream);
    const auto disc = lf::blackbody::sample_energy(x, lf::blackbody::EnergyModel::discrete, n, discrete_stream);
    const json report = {{"x", x.value()},
                         {"seed", seed},
                         {"analytic_continuous", moments_json(lf::blackbody::moments_continuous(x))},
                         {"analytic_discrete", moments_json(lf::blackbody::moments_discrete(x))},
                         {"sampled_continuous", summary_json(lf::blackbody::summarize(cont))},
                         {"sampled_discrete", summary_json(lf::blackbody::summarize(disc))}};
    std::cout << report.dump(2) << '\n';
    return kOk;
}

struct RunOptions {
    std::string config_file;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;
};

int cmd_run(const RunOptions& opt)
{
    lf::config::ExperimentConfig cfg =
        opt.config_file.empty() ? lf::config::ExperimentConfig{} : lf::config::load(opt.config_file);
    lf::config::apply_environment(cfg);
    if (opt.seed)
        cfg.run.seed = *opt.seed;
    if (!opt.output_dir.empty())
        cfg.run.output_dir = opt.output_dir;
    cfg.validate();
    if (opt.dry_run) {
        std::cout << lf::config::serialize(cfg);
        return kOk;
    }
    const auto manifest = lf::pipeline::run(cfg);
    std::cout << lf::pipeline::to_json(manifest).dump(2) << '\n';
    return kOk;
}

int cmd_analyze(const std::string& dir, const lf::pipeline::AnalysisOverrides& overrides)
{
    const auto result = lf::pipeline::analyze(dir, overrides);
    std::ifstream report(std::filesystem::path(dir) / "report.json");
    std::cout << report.rdbuf() << std::flush;
    for (const auto& reason : result.inconclusive)
        fmt::print(stderr, "inconclusive: {}\n", reason);
    return result.inconclusive.empty() ? kOk : kInconclusive;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out)
{
    std::cout << lf::pipeline::compare(a, b, out).dump(2) << '\n';
    return kOk;
}

int cmd_audit(const std::string& dir)
{
    const auto report = lf::pipeline::audit(dir);
    std::cout << lf::pipeline::audit_to_json(report).dump(2) << '\n';
    return report.count(lf::analysis::Verdict::inconclusive) > 0 ? kInconclusive : kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"lightfluct: semiclassical and quantum photodetection simulator"};
    app.require_subcommand(1);

    double x = 1.0;
    std::size_t n = 1000000;
    std::uint64_t bb_seed = 1;
    auto* bb = app.add_subcommand("blackbody", "Thermal oscillator energy moments, analytic and sampled (JSON)");
    bb->add_option("--x", x, "h nu / k T")->required();
    bb->add_option("--n", n, "samples per model")->check(CLI::PositiveNumber);
    bb->add_option("--seed", bb_seed, "random seed");

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Simulate realizations and write records plus a manifest");
    run->add_option("--config", run_opt.config_file, "INI configuration file")->check(CLI::ExistingFile);
    run->add_option("--output-dir", run_opt.output_dir, "run directory (overrides config and environment)");
    run->add_option("--seed", run_opt.seed, "seed (overrides config and environment)");
    run->add_flag("--dry-run", run_opt.dry_run, "print the effective configuration and exit");

    std::string analyze_dir;
    lf::pipeline::AnalysisOverrides overrides;
    auto* analyze = app.add_subcommand("analyze", "Estimate g2, h, spectrum and audit a run directory");
    analyze->add_option("run_dir", analyze_dir, "run directory")->required();
    analyze->add_option("--bin-width", overrides.bin_width, "g2 bin width");
    analyze->add_option("--max-lag", overrides.max_lag, "g2 maximum lag");
    analyze->add_option("--halfwidth", overrides.halfwidth, "h segment half width");
    analyze->add_option("--rebin", overrides.rebin, "odd number of h samples per output bin");

    std::string cmp_a, cmp_b, cmp_out = "comparison";
    auto* compare = app.add_subcommand("compare", "Compare the h series of two analyzed runs");
    compare->add_option("run_a", cmp_a, "first run directory")->required();
    compare->add_option("run_b", cmp_b, "second run directory")->required();
    compare->add_option("--out", cmp_out, "output directory");

    std::string audit_dir;
    auto* audit = app.add_subcommand("audit", "Re-audit the classical bounds of an analyzed run");
    audit->add_option("run_dir", audit_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (bb->parsed())
            return cmd_blackbody(x, n, bb_seed);
        if (run->parsed())
            return cmd_run(run_opt);
        if (analyze->parsed())
            return cmd_analyze(analyze_dir, overrides);
        if (compare->parsed())
            return cmd_compare(cmp_a, cmp_b, cmp_out);
        return cmd_audit(audit_dir);
    } catch (const lf::config::ConfigError& e) {
        for (const auto& d : e.diagnostics)
            fmt::print(stderr, "config error: {}\n", d);
        return kConfigError;
    } catch (const lf::analysis::InconclusiveStatistics& e) {
        fmt::print(stderr, "inconclusive: {}\n", e.what());
        return kInconclusive;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "invalid input: {}\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kRuntimeError;
    }
}
