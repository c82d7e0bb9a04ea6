#ifndef QKDVOA_CSV_HPP
#define QKDVOA_CSV_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qkdvoa/common.hpp"

namespace qkdvoa {

// Floats are serialized with 12 significant digits so dataset bytes are
// reproducible across platforms and runs.
inline std::string format_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::string format_float_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Minimal RFC-4180-style writer: mandatory header row, '.' decimal separator.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        columns_ = header.size();
        write_row(header);
    }

    void write_row(const std::vector<std::string>& fields) {
        if (fields.size() != columns_)
            throw NumericalError("CSV row width does not match header");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_quote(fields[i]);
        }
        out_ << '\n';
    }

    void write_numeric_row(const std::vector<double>& values) {
        std::vector<std::string> fields;
        fields.reserve(values.size());
        for (double v : values) fields.push_back(format_float(v));
        write_row(fields);
    }

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

}  // namespace qkdvoa

#endif
