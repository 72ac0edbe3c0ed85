#include "lightfluct/pipeline.hpp"

#include "lightfluct/detection.hpp"
#include "lightfluct/quantum.hpp"
#include "lightfluct/records_io.hpp"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

namespace lightfluct::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_hash(const config::ExperimentConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config::serialize(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

namespace {

double effective_bandwidth(const config::ExperimentConfig& cfg)
{
    return cfg.detection.bandwidth > 0.0 ? cfg.detection.bandwidth : 0.5 / cfg.run.dt;
}

} // namespace

Realization simulate(const config::ExperimentConfig& cfg, std::size_t index)
{
    RngStream stream(cfg.run.seed, index);
    Realization out;
    if (cfg.engine.engine == config::Engine::semiclassical) {
        const TimeGrid grid = TimeGrid::covering(0.0, cfg.run.duration, cfg.run.dt);
        const field::LocalOscillator lo{cfg.detection.lo_amplitude, cfg.detection.lo_phase};
        auto run = detection::run_semiclassical_correlator(cfg.field, lo, grid, cfg.analysis.halfwidth,
                                                           effective_bandwidth(cfg), stream, cfg.detection.detector);
        out.triggers = std::move(run.triggers);
        out.current = std::move(run.current);
    } else {
        quantum::UnravelOptions opt;
        opt.split_to_counter = cfg.detection.split_to_counter;
        opt.lo_phase = cfg.detection.lo_phase;
        opt.duration = cfg.run.duration;
        opt.dt = cfg.run.dt;
        opt.burn_in = cfg.run.burn_in;
        auto rec = quantum::unravel_mixed(cfg.system, opt, stream);
        out.triggers = std::move(rec.jumps);
        out.current = std::move(rec.current);
    }
    return out;
}

Campaign run_campaign(const config::ExperimentConfig& cfg,
                      const std::function<void(std::size_t, const Realization&)>& sink)
{
    cfg.validate();
    const std::size_t n = cfg.run.n_trajectories;
    const std::size_t workers = std::min(cfg.run.workers, n);
    auto fresh = [&] {
        return Campaign{analysis::G2Accumulator(cfg.analysis.bin_width, cfg.analysis.max_lag),
                        analysis::HAccumulator(cfg.analysis.halfwidth), 0, 0.0};
    };
    auto absorb = [](Campaign& c, const Realization& r) {
        c.g2.add(r.triggers);
        c.h.add(r.triggers, r.current);
        c.clicks += r.triggers.size();
        c.observed_time += r.triggers.window();
    };
    auto merge = [](Campaign& into, const Campaign& from) {
        into.g2.merge(from.g2);
        into.h.merge(from.h);
        into.clicks += from.clicks;
        into.observed_time += from.observed_time;
    };

    std::vector<Campaign> partial;
    const bool per_index = cfg.run.strict_deterministic;
    for (std::size_t i = 0; i < (per_index ? n : workers); ++i)
        partial.push_back(fresh());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](std::size_t worker) {
        try {
            for (std::size_t i = next++; i < n; i = next++) {
                const Realization r = simulate(cfg, i);
                if (sink)
                    sink(i, r);
                absorb(partial[per_index ? i : worker], r);
            }
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = n;
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
    }
    if (failure)
        std::rethrow_exception(failure);

    Campaign total = fresh();
    for (const auto& p : partial)
        merge(total, p);
    return total;
}

// ---------------------------------------------------------------------------
// manifest

void RunManifest::verify() const
{
    for (const auto& a : artifacts) {
        const fs::path file = directory / a.path;
        std::error_code ec;
        const auto size = fs::file_size(file, ec);
        if (ec)
            throw std::runtime_error("missing artifact " + file.string());
        if (size != a.bytes)
            throw std::runtime_error(fmt::format("artifact {} has {} bytes, manifest records {}", file.string(), size, a.bytes));
    }
}

json to_json(const RunManifest& m)
{
    json artifacts = json::array();
    for (const auto& a : m.artifacts)
        artifacts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"kind", a.kind}, {"index", a.index}});
    return {{"config_hash", m.config_hash}, {"seed", m.seed},         {"engine", m.engine},
            {"engine_version", m.engine_version}, {"wall_clock_seconds", m.wall_clock_seconds},
            {"config", "config.ini"}, {"artifacts", artifacts}};
}

RunManifest read_manifest(const fs::path& run_dir)
{
    std::ifstream in(run_dir / "manifest.json");
    if (!in)
        throw std::runtime_error("no manifest.json in " + run_dir.string());
    RunManifest m;
    try {
        const json j = json::parse(in);
        m.directory = run_dir;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.engine = j.at("engine").get<std::string>();
        m.engine_version = j.at("engine_version").get<std::string>();
        m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
        for (const auto& a : j.at("artifacts"))
            m.artifacts.push_back({a.at("path").get<std::string>(), a.at("bytes").get<std::uintmax_t>(),
                                   a.at("kind").get<std::string>(), a.at("index").get<std::size_t>()});
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed manifest.json: " + std::string(e.what()));
    }
    return m;
}

namespace {

void write_text(const fs::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text))
        throw std::runtime_error("cannot write " + file.string());
}

std::string counts_name(std::size_t i)
{
    return fmt::format("counts_{:04d}.txt", i);
}

std::string current_name(std::size_t i)
{
    return fmt::format("current_{:04d}.csv", i);
}

} // namespace

RunManifest run(const config::ExperimentConfig& cfg)
{
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const fs::path dir = cfg.run.output_dir;
    fs::create_directories(dir);
    write_text(dir / "config.ini", config::serialize(cfg));

    const std::string model =
        cfg.engine.engine == config::Engine::quantum ? std::string("jaynes_cummings") : field::model_name(cfg.field);
    auto sink = [&](std::size_t i, const Realization& r) {
        const io::Header header{{"seed", std::to_string(cfg.run.seed)},
                                {"stream", std::to_string(i)},
                                {"engine", std::string(config::to_string(cfg.engine.engine))},
                                {"model", model}};
        io::write_count_record(dir / counts_name(i), r.triggers, header);
        io::write_photocurrent(dir / current_name(i), r.current, header);
    };
    // The estimators are not needed here; a small campaign keeps one code path.
    run_campaign(cfg, sink);

    RunManifest m;
    m.directory = dir;
    m.config_hash = config_hash(cfg);
    m.seed = cfg.run.seed;
    m.engine = std::string(config::to_string(cfg.engine.engine));
    m.engine_version = kEngineVersion;
    for (std::size_t i = 0; i < cfg.run.n_trajectories; ++i) {
        m.artifacts.push_back({counts_name(i), fs::file_size(dir / counts_name(i)), "counts", i});
        m.artifacts.push_back({current_name(i), fs::file_size(dir / current_name(i)), "current", i});
    }
    m.artifacts.push_back({"config.ini", fs::file_size(dir / "config.ini"), "config", 0});
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_text(dir / "manifest.json", to_json(m).dump(2) + "\n");
    return m;
}

// ---------------------------------------------------------------------------
// analysis

AnalysisResult analyze_campaign(const config::ExperimentConfig& cfg, const Campaign& campaign)
{
    AnalysisResult out;
    out.g2 = campaign.g2.finalize();
    if (out.g2.inconclusive)
        out.inconclusive.push_back("g2: fewer than two clicks");
    try {
        out.h = analysis::rebin(campaign.h.finalize(), cfg.analysis.rebin);
        out.spectrum = analysis::squeezing_spectrum(*out.h, cfg.analysis.zero_padding);
    } catch (const analysis::InconclusiveStatistics& e) {
        out.inconclusive.push_back(e.what());
    }
    out.audit = analysis::audit_classical_bounds(out.g2, out.h);
    return out;
}

json audit_to_json(const analysis::AuditReport& report)
{
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"inequality", c.inequality},
                          {"margin", c.margin},
                          {"stderr", c.standard_error},
                          {"tau", c.tau},
                          {"verdict", std::string(analysis::to_string(c.verdict))}});
    return {{"checks", checks},
            {"violated", report.count(analysis::Verdict::violated)},
            {"satisfied", report.count(analysis::Verdict::satisfied)},
            {"inconclusive", report.count(analysis::Verdict::inconclusive)}};
}

json summarize(const config::ExperimentConfig& cfg, const AnalysisResult& r)
{
    json j;
    j["engine"] = std::string(config::to_string(cfg.engine.engine));
    j["config_hash"] = config_hash(cfg);
    j["units"] = std::string(config::to_string(cfg.engine.units));
    j["g2_zero"] = {{"value", r.g2.at_zero()}, {"stderr", r.g2.stderr_at_zero()}, {"tau", r.g2.lags[r.g2.zero_index()]}};
    j["clicks"] = r.g2.events;
    if (r.h) {
        j["h_zero"] = {{"value", r.h->at_zero()}, {"stderr", r.h->stderr_at_zero()}};
        j["h_extremum_at_zero"] = std::string(analysis::to_string(analysis::extremum_at_zero(*r.h)));
        j["triggers_used"] = r.h->events;
    } else {
        j["h_zero"] = nullptr;
    }
    if (r.spectrum && r.spectrum->values.size() > 0) {
        Eigen::Index k = 0;
        r.spectrum->values.minCoeff(&k);
        json smin = {{"value", r.spectrum->values[k]},
                     {"stderr", r.spectrum->standard_error[k]},
                     {"frequency", r.spectrum->frequencies[k]},
                     {"angular_frequency", 2.0 * std::numbers::pi * r.spectrum->frequencies[k]}};
        if (cfg.engine.units == config::Units::si)
            smin["frequency_mhz"] = config::to_megahertz(cfg.engine, r.spectrum->frequencies[k]);
        j["spectrum_minimum"] = smin;
    } else {
        j["spectrum_minimum"] = nullptr;
    }
    j["audit"] = audit_to_json(r.audit);
    j["inconclusive"] = r.inconclusive;
    return j;
}

AnalysisResult analyze(const fs::path& run_dir, const AnalysisOverrides& overrides)
{
    const RunManifest manifest = read_manifest(run_dir);
    manifest.verify();
    config::ExperimentConfig cfg = config::load(run_dir / "config.ini");
    if (overrides.bin_width)
        cfg.analysis.bin_width = *overrides.bin_width;
    if (overrides.max_lag)
        cfg.analysis.max_lag = *overrides.max_lag;
    if (overrides.halfwidth)
        cfg.analysis.halfwidth = *overrides.halfwidth;
    if (overrides.rebin)
        cfg.analysis.rebin = *overrides.rebin;
    cfg.validate();

    Campaign campaign{analysis::G2Accumulator(cfg.analysis.bin_width, cfg.analysis.max_lag),
                      analysis::HAccumulator(cfg.analysis.halfwidth), 0, 0.0};
    std::map<std::size_t, std::pair<std::string, std::string>> pairs;
    for (const auto& a : manifest.artifacts) {
        if (a.kind == "counts")
            pairs[a.index].first = a.path;
        else if (a.kind == "current")
            pairs[a.index].second = a.path;
    }
    for (const auto& [index, files] : pairs) {
        if (files.first.empty() || files.second.empty())
            throw std::runtime_error(fmt::format("realization {} lacks its counts or current file", index));
        const CountRecord counts = io::read_count_record(run_dir / files.first);
        const PhotocurrentRecord current = io::read_photocurrent(run_dir / files.second);
        campaign.g2.add(counts);
        campaign.h.add(counts, current);
        campaign.clicks += counts.size();
        campaign.observed_time += counts.window();
    }

    AnalysisResult result = analyze_campaign(cfg, campaign);
    io::write_correlation(run_dir / "g2.csv", result.g2);
    if (result.h)
        io::write_correlation(run_dir / "h.csv", *result.h);
    if (result.spectrum)
        io::write_spectrum(run_dir / "spectrum.csv", *result.spectrum);
    write_text(run_dir / "audit.json", audit_to_json(result.audit).dump(2) + "\n");
    write_text(run_dir / "report.json", summarize(cfg, result).dump(2) + "\n");
    return result;
}

json compare(const fs::path& run_a, const fs::path& run_b, const fs::path& out_dir)
{
    const auto a = io::read_correlation(run_a / "h.csv");
    const auto b = io::read_correlation(run_b / "h.csv");
    if (a.size() != b.size() || (a.lags - b.lags).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, a.lags.cwiseAbs().maxCoeff()))
        throw std::runtime_error("compare: h series of the two runs are on incompatible lag grids");

    fs::create_directories(out_dir);
    std::string csv = "tau,a,a_stderr,b,b_stderr,diff,diff_stderr\n";
    double max_z = 0.0;
    std::size_t beyond = 0;
    bool identical = true;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double diff = a.values[k] - b.values[k];
        const double err = std::hypot(a.standard_error[k], b.standard_error[k]);
        identical = identical && diff == 0.0;
        const double z = diff == 0.0 ? 0.0 : std::abs(diff) / std::max(err, analysis::kAuditStderrFloor);
        max_z = std::max(max_z, z);
        beyond += z > 3.0 ? 1 : 0;
        csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", a.lags[k], a.values[k],
                           a.standard_error[k], b.values[k], b.standard_error[k], diff, err);
    }
    const json j = {{"run_a", run_a.string()},
                    {"run_b", run_b.string()},
                    {"points", a.size()},
                    {"identical", identical},
                    {"max_abs_z", max_z},
                    {"points_beyond_3sigma", beyond},
                    {"extremum_at_zero_a", std::string(analysis::to_string(analysis::extremum_at_zero(a)))},
                    {"extremum_at_zero_b", std::string(analysis::to_string(analysis::extremum_at_zero(b)))}};
    write_text(out_dir / "comparison.csv", csv);
    write_text(out_dir / "comparison.json", j.dump(2) + "\n");
    return j;
}

analysis::AuditReport audit(const fs::path& run_dir)
{
    const auto g2 = io::read_correlation(run_dir / "g2.csv");
    std::optional<analysis::CorrelationSeries> h;
    if (fs::exists(run_dir / "h.csv"))
        h = io::read_correlation(run_dir / "h.csv");
    const auto report = analysis::audit_classical_bounds(g2, h);
    write_text(run_dir / "audit.json", audit_to_json(report).dump(2) + "\n");
    return report;
}

} // namespace lightfluct::pipeline
