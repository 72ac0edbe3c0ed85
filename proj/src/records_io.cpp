#include "lightfluct/records_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <vector>

namespace lightfluct::io {

std::string format_double(double v)
{
    return fmt::format("{:.17g}", v);
}

namespace {

std::ofstream open_out(const std::filesystem::path& file)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + file.string() + " for writing");
    return out;
}

void write_header(std::ostream& out, const Header& header)
{
    for (const auto& [key, value] : header)
        out << "# " << key << '=' << value << '\n';
}

double parse_double(std::string_view text, const std::filesystem::path& file, std::size_t line)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r'))
        text.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw FormatError(fmt::format("{}:{}: malformed number '{}'", file.string(), line, text));
    return v;
}

// Reads header pairs and the remaining rows split on commas. The first
// non-comment row is treated as a column header when `columns` is non-empty.
std::vector<std::vector<double>> read_table(const std::filesystem::path& file, Header& header,
                                            std::string_view columns, std::size_t width)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t number = 0;
    bool saw_columns = columns.empty();
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                header[key] = line.substr(eq + 1);
            }
            continue;
        }
        if (!saw_columns) {
            if (line != columns)
                throw FormatError(fmt::format("{}:{}: expected column header '{}'", file.string(), number, columns));
            saw_columns = true;
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            row.push_back(parse_double(rest.substr(0, comma), file, number));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (row.size() != width)
            throw FormatError(fmt::format("{}:{}: expected {} fields, found {}", file.string(), number, width, row.size()));
        rows.push_back(std::move(row));
    }
    if (!saw_columns)
        throw FormatError(file.string() + ": missing column header");
    return rows;
}

double header_double(const Header& header, const std::string& key, const std::filesystem::path& file)
{
    const auto it = header.find(key);
    if (it == header.end())
        throw FormatError(file.string() + ": missing header key '" + key + "'");
    return parse_double(it->second, file, 0);
}

} // namespace

void write_field_path(const std::filesystem::path& file, const field::FieldPath& path, const Header& header)
{
    path.validate();
    auto out = open_out(file);
    Header h = header;
    h["dt"] = format_double(path.grid.dt);
    h["t_start"] = format_double(path.grid.t_start);
    write_header(out, h);
    out << "t,re,im\n";
    for (std::size_t i = 0; i < path.grid.n_samples; ++i) {
        const auto v = path.envelope[static_cast<Eigen::Index>(i)];
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", path.grid.time(i), v.real(), v.imag());
    }
}

field::FieldPath read_field_path(const std::filesystem::path& file, Header* header)
{
    Header h;
    const auto rows = read_table(file, h, "t,re,im", 3);
    if (rows.empty())
        throw FormatError(file.string() + ": no samples");
    field::FieldPath path{TimeGrid(header_double(h, "t_start", file), header_double(h, "dt", file), rows.size()), {}};
    path.envelope.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        path.envelope[static_cast<Eigen::Index>(i)] = {rows[i][1], rows[i][2]};
    if (header)
        *header = std::move(h);
    return path;
}

void write_count_record(const std::filesystem::path& file, const CountRecord& record, const Header& header)
{
    record.validate();
    auto out = open_out(file);
    Header h = header;
    h["t0"] = format_double(record.t0);
    h["t1"] = format_double(record.t1);
    h["window"] = format_double(record.window());
    write_header(out, h);
    for (double t : record.timestamps)
        out << format_double(t) << '\n';
}

CountRecord read_count_record(const std::filesystem::path& file, Header* header)
{
    Header h;
    const auto rows = read_table(file, h, "", 1);
    CountRecord record;
    record.t0 = header_double(h, "t0", file);
    record.t1 = header_double(h, "t1", file);
    record.timestamps.reserve(rows.size());
    for (const auto& row : rows)
        record.timestamps.push_back(row[0]);
    try {
        record.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    if (header)
        *header = std::move(h);
    return record;
}

void write_photocurrent(const std::filesystem::path& file, const PhotocurrentRecord& record, const Header& header)
{
    record.validate();
    auto out = open_out(file);
    Header h = header;
    h["dt"] = format_double(record.grid.dt);
    h["t_start"] = format_double(record.grid.t_start);
    h["bandwidth"] = format_double(record.bandwidth);
    write_header(out, h);
    out << "t,i\n";
    for (std::size_t k = 0; k < record.grid.n_samples; ++k)
        out << fmt::format("{:.17g},{:.17g}\n", record.grid.time(k), record.samples[static_cast<Eigen::Index>(k)]);
}

PhotocurrentRecord read_photocurrent(const std::filesystem::path& file, Header* header)
{
    Header h;
    const auto rows = read_table(file, h, "t,i", 2);
    if (rows.empty())
        throw FormatError(file.string() + ": no samples");
    PhotocurrentRecord record;
    record.grid = TimeGrid(header_double(h, "t_start", file), header_double(h, "dt", file), rows.size());
    record.bandwidth = header_double(h, "bandwidth", file);
    record.samples.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
        record.samples[static_cast<Eigen::Index>(k)] = rows[k][1];
    try {
        record.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    if (header)
        *header = std::move(h);
    return record;
}

void write_correlation(const std::filesystem::path& file, const analysis::CorrelationSeries& series)
{
    series.validate();
    auto out = open_out(file);
    write_header(out, {{"normalization", std::string(analysis::to_string(series.normalization))},
                       {"inconclusive", series.inconclusive ? "true" : "false"},
                       {"events", std::to_string(series.events)}});
    out << "tau,value,stderr\n";
    for (Eigen::Index k = 0; k < series.size(); ++k)
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", series.lags[k], series.values[k], series.standard_error[k]);
}

analysis::CorrelationSeries read_correlation(const std::filesystem::path& file)
{
    Header h;
    const auto rows = read_table(file, h, "tau,value,stderr", 3);
    analysis::CorrelationSeries series;
    const auto n = static_cast<Eigen::Index>(rows.size());
    series.lags.resize(n);
    series.values.resize(n);
    series.standard_error.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& row = rows[static_cast<std::size_t>(k)];
        series.lags[k] = row[0];
        series.values[k] = row[1];
        series.standard_error[k] = row[2];
    }
    try {
        if (auto it = h.find("normalization"); it != h.end())
            series.normalization = analysis::parse_normalization(it->second);
        series.inconclusive = h.count("inconclusive") && h.at("inconclusive") == "true";
        if (auto it = h.find("events"); it != h.end())
            series.events = std::stoull(it->second);
        series.validate();
    } catch (const std::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    return series;
}

void write_spectrum(const std::filesystem::path& file, const analysis::SqueezingSpectrum& spectrum)
{
    auto out = open_out(file);
    out << "freq,value\n";
    for (Eigen::Index k = 0; k < spectrum.frequencies.size(); ++k)
        out << fmt::format("{:.17g},{:.17g}\n", spectrum.frequencies[k], spectrum.values[k]);
}

} // namespace lightfluct::io
