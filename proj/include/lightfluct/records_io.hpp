#ifndef LIGHTFLUCT_RECORDS_IO_HPP
#define LIGHTFLUCT_RECORDS_IO_HPP

#include "lightfluct/analyzers.hpp"
#include "lightfluct/field.hpp"
#include "lightfluct/records.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace lightfluct::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Text formats. Numbers are written with 17 significant digits so a
// write/read cycle is exact. Header lines start with '#' and hold key=value
// pairs.
using Header = std::map<std::string, std::string>;

std::string format_double(double v);

void write_field_path(const std::filesystem::path& file, const field::FieldPath& path, const Header& header);
field::FieldPath read_field_path(const std::filesystem::path& file, Header* header = nullptr);

/// Header keys t0/t1 carry the window; one timestamp per line.
void write_count_record(const std::filesystem::path& file, const CountRecord& record, const Header& header);
CountRecord read_count_record(const std::filesystem::path& file, Header* header = nullptr);

/// CSV `t,i` with header keys dt and bandwidth.
void write_photocurrent(const std::filesystem::path& file, const PhotocurrentRecord& record, const Header& header);
PhotocurrentRecord read_photocurrent(const std::filesystem::path& file, Header* header = nullptr);

/// CSV `tau,value,stderr` with header keys normalization, inconclusive and events.
void write_correlation(const std::filesystem::path& file, const analysis::CorrelationSeries& series);
analysis::CorrelationSeries read_correlation(const std::filesystem::path& file);

/// CSV `freq,value`.
void write_spectrum(const std::filesystem::path& file, const analysis::SqueezingSpectrum& spectrum);

} // namespace lightfluct::io

#endif // LIGHTFLUCT_RECORDS_IO_HPP
