#include "nlmodes/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nlmodes/errors.hpp"

namespace nlmodes {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_row(std::span<const double> values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            row += ',';
        }
        row += format_double(values[i]);
    }
    return row;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw InvalidArgument("csv: missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("csv: cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
        }
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw InvalidArgument("csv: " + path.string() + ":" + std::to_string(line_no) +
                                  ": wrong number of columns");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw InvalidArgument("csv: " + path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                                      c + "'");
            }
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw InvalidArgument("csv: " + path.string() + " has no header");
    }
    return table;
}

}  // namespace nlmodes
