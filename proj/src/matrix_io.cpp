#include "smartsizer/matrix_io.hpp"

#include "smartsizer/error.hpp"

#include "json.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace smartsizer {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view token, std::size_t line) {
    token = trim(token);
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc{} || ptr != last) {
        fail(Errc::parse_error, "line " + std::to_string(line) + ": not a number: '" +
                                    std::string(token) + "'");
    }
    return value;
}

std::vector<double> split_row(std::string_view line, std::size_t line_no) {
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        row.push_back(parse_number(line.substr(start, comma - start), line_no));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return row;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) fail(Errc::empty_input, "matrix has no rows");
    const std::size_t cols = rows.front().size();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            fail(Errc::parse_error, "ragged row " + std::to_string(i + 1) + ": expected " +
                                        std::to_string(cols) + " values, got " +
                                        std::to_string(rows[i].size()));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Matrix parse_matrix_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        ++line_no;
        if (!line.empty() && line.front() != '#') rows.push_back(split_row(line, line_no));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return from_rows(rows);
}

Matrix parse_matrix_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, e.what());
    }
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
        fail(Errc::parse_error, "expected an object with a \"rows\" array");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& r : doc["rows"]) {
        if (!r.is_array()) fail(Errc::parse_error, "each row must be an array");
        std::vector<double>& row = rows.emplace_back();
        for (const auto& v : r) {
            if (!v.is_number()) fail(Errc::parse_error, "matrix entries must be numbers");
            row.push_back(v.get<double>());
        }
    }
    Matrix m = from_rows(rows);
    if (doc.contains("dim")) {
        if (!doc["dim"].is_number_integer() || doc["dim"].get<long long>() != m.rows()) {
            fail(Errc::parse_error, "\"dim\" does not match the number of rows");
        }
    }
    return m;
}

Matrix parse_matrix(std::string_view text) {
    const auto t = trim(text);
    if (!t.empty() && t.front() == '{') return parse_matrix_json(t);
    return parse_matrix_csv(t);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Matrix read_matrix_file(const std::filesystem::path& path) { return parse_matrix(read_text_file(path)); }

std::string format_matrix_csv(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_matrix_json(const Matrix& m) {
    std::string out = "{\"dim\": " + std::to_string(m.rows()) + ", \"rows\": [";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += i ? ",\n  [" : "\n  [";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ", ";
            out += format_double(m(i, j));
        }
        out += ']';
    }
    out += "\n]}\n";
    return out;
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    out << (path.extension() == ".json" ? format_matrix_json(m) : format_matrix_csv(m));
}

Vector parse_vector_list(std::string_view text) {
    const auto t = trim(text);
    if (!t.empty() && t.front() == '[') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::parse_error, e.what());
        }
        Vector v(static_cast<Eigen::Index>(doc.size()));
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (!doc[i].is_number()) fail(Errc::parse_error, "vector entries must be numbers");
            v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
        }
        if (v.size() == 0) fail(Errc::empty_input, "empty vector");
        return v;
    }
    // One row, one column, or a mixture of newlines and commas.
    std::string flat(t);
    for (char& c : flat) {
        if (c == '\n' || c == '\r') c = ',';
    }
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= flat.size()) {
        const auto comma = flat.find(',', start);
        const auto token = trim(std::string_view(flat).substr(start, comma - start));
        if (!token.empty()) values.push_back(parse_number(token, 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (values.empty()) fail(Errc::empty_input, "empty vector");
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector read_vector_arg(const std::string& file_or_list) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(file_or_list, ec)) {
        return parse_vector_list(read_text_file(file_or_list));
    }
    return parse_vector_list(file_or_list);
}

}  // namespace smartsizer
