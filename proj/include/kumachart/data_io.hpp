#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kumachart {

/// Malformed or out-of-range line in a data file.
class DataParseError : public std::runtime_error {
public:
    DataParseError(const std::filesystem::path& path, std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Observations read from a text file: one value per line, blank lines and
/// lines starting with '#' skipped, every value strictly inside (0, 1).
struct DataFile {
    std::filesystem::path path;
    std::vector<double> values;
};

DataFile read_data_file(const std::filesystem::path& path);

/// Parses the same format from an in-memory string; `path` is used for messages.
std::vector<double> parse_data(const std::string& text, const std::filesystem::path& path = "<memory>");

/// Writes one value per line in shortest round-trip form.
void write_data_file(const std::filesystem::path& path, std::span<const double> values,
                     const std::string& header_comment = {});

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

} // namespace kumachart
