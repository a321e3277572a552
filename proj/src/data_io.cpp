#include "kumachart/data_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace kumachart {

DataParseError::DataParseError(const std::filesystem::path& path, std::size_t line, const std::string& what)
    : std::runtime_error(path.string() + ": line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_double(double v) {
    char buf[400];
    const double a = std::abs(v);
    const auto fmt = (a >= 1e-6 && a < 1e16) || a == 0.0 ? std::chars_format::fixed : std::chars_format::scientific;
    const auto res = std::to_chars(buf, buf + sizeof buf, v, fmt);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_data(const std::string& text, const std::filesystem::path& path) {
    std::vector<double> values;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        const char* begin = line.data() + first;
        const char* end = line.data() + last + 1;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end) {
            throw DataParseError(path, lineno, "not a decimal number: '" + std::string(begin, end) + "'");
        }
        if (!(v > 0.0 && v < 1.0)) {
            throw DataParseError(path, lineno, "value " + std::string(begin, end) + " is outside (0, 1)");
        }
        values.push_back(v);
    }
    return values;
}

DataFile read_data_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open data file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return {path, parse_data(buf.str(), path)};
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
        throw IoError("write to " + path.string() + " failed");
    }
}

void write_data_file(const std::filesystem::path& path, std::span<const double> values,
                     const std::string& header_comment) {
    std::string text;
    if (!header_comment.empty()) {
        text += "# " + header_comment + "\n";
    }
    for (const double v : values) {
        text += format_double(v);
        text += '\n';
    }
    write_text_file(path, text);
}

} // namespace kumachart
