#include "specstack/csv.hpp"

#include "specstack/types.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace specstack {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

int CsvTable::col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

CsvTable parse_csv(const std::string& text, char delim) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, delim);
        for (auto& f : fields) f = trim(f);
        if (first) {
            t.header = fields;
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw DataError("row has " + std::to_string(fields.size()) +
                                " fields, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError("empty table: no header row");
    return t;
}

CsvTable read_csv(const std::string& path, char delim) {
    try {
        return parse_csv(read_file(path), delim);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_csv(const std::string& path, const CsvTable& table, char delim) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << delim;
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << delim;
            out << row[i];
        }
        out << '\n';
    }
    write_file(path, out.str());
}

std::string fmt_double(double v, int significant) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

double parse_double(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw DataError("non-numeric value '" + s + "' in " + context);
    }
    if (pos != t.size()) throw DataError("non-numeric value '" + s + "' in " + context);
    return v;
}

}  // namespace specstack
