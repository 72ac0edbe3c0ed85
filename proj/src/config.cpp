#include "lightfluct/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lightfluct::config {

namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        if (!out.empty())
            out += "; ";
        out += s;
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> diags)
    : std::runtime_error("invalid configuration: " + join(diags)), diagnostics(std::move(diags))
{
}

std::string_view to_string(Engine e)
{
    return e == Engine::quantum ? "quantum" : "semiclassical";
}

std::string_view to_string(Units u)
{
    return u == Units::si ? "si" : "dimensionless";
}

double to_megahertz(const EngineSection& engine, double frequency)
{
    return frequency * 1e3 / engine.si_time_unit_ns;
}

namespace {

// Collects typed values from one section, recording a diagnostic per bad key.
class SectionReader {
public:
    SectionReader(const pt::ptree* tree, std::string name, std::vector<std::string>& diags)
        : tree_(tree), name_(std::move(name)), diags_(diags)
    {
    }

    void number(const std::string& key, double& target)
    {
        read(key, [&](const std::string& text) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
                return fail(key, "expected a finite number, got '" + text + "'");
            target = v;
        });
    }

    template <typename Int>
    void integer(const std::string& key, Int& target)
    {
        read(key, [&](const std::string& text) {
            Int v{};
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size())
                return fail(key, "expected an integer, got '" + text + "'");
            target = v;
        });
    }

    void boolean(const std::string& key, bool& target)
    {
        read(key, [&](const std::string& text) {
            if (text == "true")
                target = true;
            else if (text == "false")
                target = false;
            else
                fail(key, "expected true or false, got '" + text + "'");
        });
    }

    void text(const std::string& key, std::string& target)
    {
        read(key, [&](const std::string& t) { target = t; });
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& target, const std::map<std::string, Enum>& options)
    {
        read(key, [&](const std::string& t) {
            const auto it = options.find(t);
            if (it == options.end()) {
                std::string allowed;
                for (const auto& [name, value] : options)
                    allowed += (allowed.empty() ? "" : "|") + name;
                return fail(key, "expected one of " + allowed + ", got '" + t + "'");
            }
            target = it->second;
        });
    }

    void reject(const std::string& key, const std::string& why)
    {
        if (tree_ && tree_->find(key) != tree_->not_found()) {
            fail(key, why);
            seen_.insert(key);
        }
    }

    void reject_unknown()
    {
        if (!tree_)
            return;
        for (const auto& [key, value] : *tree_)
            if (!seen_.count(key))
                fail(key, "unknown key");
    }

    void fail(const std::string& key, const std::string& message) { diags_.push_back(name_ + "." + key + ": " + message); }

private:
    void read(const std::string& key, const std::function<void(const std::string&)>& apply)
    {
        if (!tree_)
            return;
        const auto it = tree_->find(key);
        if (it == tree_->not_found())
            return;
        seen_.insert(key);
        apply(it->second.data());
    }

    const pt::ptree* tree_;
    std::string name_;
    std::vector<std::string>& diags_;
    std::set<std::string> seen_;
};

const std::map<std::string, Engine> kEngines{{"semiclassical", Engine::semiclassical}, {"quantum", Engine::quantum}};
const std::map<std::string, Units> kUnits{{"dimensionless", Units::dimensionless}, {"si", Units::si}};
const std::map<std::string, field::BurstSign> kSigns{
    {"positive", field::BurstSign::positive}, {"negative", field::BurstSign::negative},
    {"symmetric", field::BurstSign::symmetric}};

const std::vector<std::string> kCoherentKeys{"amplitude", "phase"};
const std::vector<std::string> kThermalKeys{"correlation_time", "mean_intensity"};
const std::vector<std::string> kBurstKeys{"background_amplitude", "burst_rate", "burst_amplitude", "frequency",
                                          "decay_rate", "sign", "phase"};

void read_field(const pt::ptree* tree, ExperimentConfig& cfg, std::vector<std::string>& diags)
{
    SectionReader r(tree, "field", diags);
    std::string model = field::model_name(cfg.field);
    r.text("model", model);
    auto reject_others = [&](const std::vector<std::string>& own) {
        for (const auto* keys : {&kCoherentKeys, &kThermalKeys, &kBurstKeys})
            for (const auto& k : *keys)
                if (std::find(own.begin(), own.end(), k) == own.end())
                    r.reject(k, "not a parameter of model " + model);
    };
    if (model == "coherent") {
        field::CoherentField m;
        m.phase = quantum::kDefaultLoPhase;
        if (auto* old = std::get_if<field::CoherentField>(&cfg.field))
            m = *old;
        r.number("amplitude", m.amplitude);
        r.number("phase", m.phase);
        reject_others(kCoherentKeys);
        cfg.field = m;
    } else if (model == "thermal_ou") {
        field::ThermalOuField m;
        if (auto* old = std::get_if<field::ThermalOuField>(&cfg.field))
            m = *old;
        r.number("correlation_time", m.correlation_time);
        r.number("mean_intensity", m.mean_intensity);
        reject_others(kThermalKeys);
        cfg.field = m;
    } else if (model == "modulated_burst") {
        field::BurstField m;
        m.phase = quantum::kDefaultLoPhase;
        if (auto* old = std::get_if<field::BurstField>(&cfg.field))
            m = *old;
        r.number("background_amplitude", m.background_amplitude);
        r.number("burst_rate", m.burst_rate);
        r.number("burst_amplitude", m.burst_amplitude);
        r.number("frequency", m.frequency);
        r.number("decay_rate", m.decay_rate);
        r.choice("sign", m.sign, kSigns);
        r.number("phase", m.phase);
        reject_others(kBurstKeys);
        cfg.field = m;
    } else {
        r.fail("model", "expected one of coherent|thermal_ou|modulated_burst, got '" + model + "'");
        return;
    }
    r.reject_unknown();
}

} // namespace

void ExperimentConfig::validate() const
{
    std::vector<std::string> diags;
    auto check = [&](bool ok, const std::string& where, const std::string& what) {
        if (!ok)
            diags.push_back(where + ": " + what);
    };
    try {
        field::validate(field);
    } catch (const std::invalid_argument& e) {
        diags.push_back(std::string("field: ") + e.what());
    }
    try {
        system.validate();
    } catch (const std::invalid_argument& e) {
        diags.push_back(std::string("system: ") + e.what());
    }
    try {
        detection.detector.validate();
    } catch (const std::invalid_argument& e) {
        diags.push_back(std::string("detection: ") + e.what());
    }
    check(engine.si_time_unit_ns > 0.0, "engine.si_time_unit_ns", "must be positive");
    check(detection.lo_amplitude >= 0.0, "detection.lo_amplitude", "must be >= 0");
    check(detection.bandwidth >= 0.0, "detection.bandwidth", "must be >= 0 (0 selects Nyquist)");
    check(detection.bandwidth <= 0.5 / run.dt * (1.0 + 1e-12), "detection.bandwidth", "exceeds the Nyquist frequency 1/(2 dt)");
    check(detection.split_to_counter > 0.0 && detection.split_to_counter < 1.0, "detection.split_to_counter",
          "must lie in (0, 1)");
    check(run.dt > 0.0, "run.dt", "must be positive");
    check(run.duration > 0.0, "run.duration", "must be positive");
    check(run.burn_in >= 0.0, "run.burn_in", "must be >= 0");
    check(run.n_trajectories >= 1, "run.n_trajectories", "must be >= 1");
    check(run.workers >= 1, "run.workers", "must be >= 1");
    check(!run.output_dir.empty(), "run.output_dir", "must not be empty");
    check(analysis.bin_width > 0.0, "analysis.bin_width", "must be positive");
    check(analysis.max_lag > analysis.bin_width, "analysis.max_lag", "must exceed bin_width");
    check(analysis.halfwidth >= run.dt, "analysis.halfwidth", "must be at least one sample");
    check(2.0 * analysis.halfwidth < run.duration, "analysis.halfwidth", "must be short against run.duration");
    check(analysis.rebin >= 1 && analysis.rebin % 2 == 1, "analysis.rebin", "must be a positive odd integer");
    check(analysis.zero_padding >= 1, "analysis.zero_padding", "must be >= 1");
    if (engine.engine == Engine::quantum)
        check(run.dt * system.max_rate() < 0.05, "run.dt", "too coarse for the system rates (need dt * max rate < 0.05)");
    if (!diags.empty())
        throw ConfigError(std::move(diags));
}

ExperimentConfig parse(const std::string& text)
{
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({fmt::format("line {}: {}", e.line(), e.message())});
    }

    ExperimentConfig cfg;
    std::vector<std::string> diags;
    static const std::set<std::string> sections{"engine", "field", "system", "detection", "run", "analysis"};
    for (const auto& [name, sub] : tree) {
        if (!sections.count(name))
            diags.push_back(name + (sub.empty() ? ": keys must appear inside a section" : ": unknown section"));
    }
    auto section = [&](const char* name) -> const pt::ptree* {
        const auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    };

    {
        SectionReader r(section("engine"), "engine", diags);
        r.choice("name", cfg.engine.engine, kEngines);
        r.choice("units", cfg.engine.units, kUnits);
        r.number("si_time_unit_ns", cfg.engine.si_time_unit_ns);
        r.reject_unknown();
    }
    read_field(section("field"), cfg, diags);
    {
        SectionReader r(section("system"), "system", diags);
        r.number("g", cfg.system.g);
        r.number("kappa", cfg.system.kappa);
        r.number("gamma", cfg.system.gamma);
        r.number("drive", cfg.system.drive);
        r.integer("fock_cutoff", cfg.system.fock_cutoff);
        r.reject_unknown();
    }
    {
        SectionReader r(section("detection"), "detection", diags);
        r.number("lo_amplitude", cfg.detection.lo_amplitude);
        r.number("lo_phase", cfg.detection.lo_phase);
        r.number("bandwidth", cfg.detection.bandwidth);
        r.number("split_to_counter", cfg.detection.split_to_counter);
        r.number("quantum_efficiency", cfg.detection.detector.quantum_efficiency);
        r.number("dark_count_rate", cfg.detection.detector.dark_count_rate);
        r.number("dead_time", cfg.detection.detector.dead_time);
        r.reject_unknown();
    }
    {
        SectionReader r(section("run"), "run", diags);
        r.number("duration", cfg.run.duration);
        r.number("dt", cfg.run.dt);
        r.number("burn_in", cfg.run.burn_in);
        r.integer("n_trajectories", cfg.run.n_trajectories);
        r.integer("seed", cfg.run.seed);
        r.integer("workers", cfg.run.workers);
        r.boolean("strict_deterministic", cfg.run.strict_deterministic);
        r.text("output_dir", cfg.run.output_dir);
        r.reject_unknown();
    }
    {
        SectionReader r(section("analysis"), "analysis", diags);
        r.number("bin_width", cfg.analysis.bin_width);
        r.number("max_lag", cfg.analysis.max_lag);
        r.number("halfwidth", cfg.analysis.halfwidth);
        r.integer("rebin", cfg.analysis.rebin);
        r.integer("zero_padding", cfg.analysis.zero_padding);
        r.reject_unknown();
    }
    if (!diags.empty())
        throw ConfigError(std::move(diags));
    cfg.validate();
    return cfg;
}

ExperimentConfig load(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw ConfigError({"cannot read config file " + file.string()});
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

std::string serialize(const ExperimentConfig& cfg)
{
    // Shortest text that parses back to the same double.
    auto format_double = [](double v) { return fmt::format("{}", v); };
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };

    out += "[engine]\n";
    line("name", std::string(to_string(cfg.engine.engine)));
    line("units", std::string(to_string(cfg.engine.units)));
    line("si_time_unit_ns", format_double(cfg.engine.si_time_unit_ns));

    out += "\n[field]\n";
    line("model", field::model_name(cfg.field));
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, field::CoherentField>) {
                line("amplitude", format_double(m.amplitude));
                line("phase", format_double(m.phase));
            } else if constexpr (std::is_same_v<T, field::ThermalOuField>) {
                line("correlation_time", format_double(m.correlation_time));
                line("mean_intensity", format_double(m.mean_intensity));
            } else {
                line("background_amplitude", format_double(m.background_amplitude));
                line("burst_rate", format_double(m.burst_rate));
                line("burst_amplitude", format_double(m.burst_amplitude));
                line("frequency", format_double(m.frequency));
                line("decay_rate", format_double(m.decay_rate));
                line("sign", std::string(field::to_string(m.sign)));
                line("phase", format_double(m.phase));
            }
        },
        cfg.field);

    out += "\n[system]\n";
    line("g", format_double(cfg.system.g));
    line("kappa", format_double(cfg.system.kappa));
    line("gamma", format_double(cfg.system.gamma));
    line("drive", format_double(cfg.system.drive));
    line("fock_cutoff", std::to_string(cfg.system.fock_cutoff));

    out += "\n[detection]\n";
    line("lo_amplitude", format_double(cfg.detection.lo_amplitude));
    line("lo_phase", format_double(cfg.detection.lo_phase));
    line("bandwidth", format_double(cfg.detection.bandwidth));
    line("split_to_counter", format_double(cfg.detection.split_to_counter));
    line("quantum_efficiency", format_double(cfg.detection.detector.quantum_efficiency));
    line("dark_count_rate", format_double(cfg.detection.detector.dark_count_rate));
    line("dead_time", format_double(cfg.detection.detector.dead_time));

    out += "\n[run]\n";
    line("duration", format_double(cfg.run.duration));
    line("dt", format_double(cfg.run.dt));
    line("burn_in", format_double(cfg.run.burn_in));
    line("n_trajectories", std::to_string(cfg.run.n_trajectories));
    line("seed", std::to_string(cfg.run.seed));
    line("workers", std::to_string(cfg.run.workers));
    line("strict_deterministic", cfg.run.strict_deterministic ? "true" : "false");
    line("output_dir", cfg.run.output_dir);

    out += "\n[analysis]\n";
    line("bin_width", format_double(cfg.analysis.bin_width));
    line("max_lag", format_double(cfg.analysis.max_lag));
    line("halfwidth", format_double(cfg.analysis.halfwidth));
    line("rebin", std::to_string(cfg.analysis.rebin));
    line("zero_padding", std::to_string(cfg.analysis.zero_padding));
    return out;
}

void apply_environment(ExperimentConfig& cfg)
{
    if (const char* seed = std::getenv("LIGHTFLUCT_SEED"); seed && *seed) {
        const std::string text(seed);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError({"LIGHTFLUCT_SEED: expected an unsigned integer, got '" + text + "'"});
        cfg.run.seed = v;
    }
    if (const char* dir = std::getenv("LIGHTFLUCT_OUTPUT_DIR"); dir && *dir)
        cfg.run.output_dir = dir;
}

} // namespace lightfluct::config
