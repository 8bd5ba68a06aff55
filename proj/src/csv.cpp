#include "oectsim/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace oectsim {

CsvParseError::CsvParseError(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what)
    : std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what),
      line(line_no) {}

std::string format_sci(double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 8);
    if (ec != std::errc{}) throw std::runtime_error("format_sci: conversion failed");
    return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& [key, value] : table.metadata) out << "# " << key << "=" << value << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i == 0 ? "" : ",") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i == 0 ? "" : ",") << format_sci(row[i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::filesystem::path& path, std::size_t line_no, const std::string& s) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    while (ptr < end && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
    if (ec != std::errc{} || ptr != end)
        throw CsvParseError(path, line_no, "cannot parse number from '" + s + "'");
    return value;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body.front() == ' ') body.erase(0, 1);
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                table.metadata[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        if (!have_header) {
            table.columns = split_fields(line);
            if (table.columns.empty()) throw CsvParseError(path, line_no, "empty header");
            have_header = true;
            continue;
        }
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != table.columns.size())
            throw CsvParseError(path, line_no,
                                "expected " + std::to_string(table.columns.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(path, line_no, f));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw CsvParseError(path, line_no, "missing header row");
    return table;
}

}  // namespace oectsim
