#pragma once

#include <string>
#include <vector>

namespace specstack {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path, char delim = ',');
CsvTable parse_csv(const std::string& text, char delim = ',');

void write_csv(const std::string& path, const CsvTable& table, char delim = ',');

// Locale-independent double formatting; the one formatter used for every
// file we emit so reruns are byte-identical.
std::string fmt_double(double v, int significant = 12);

double parse_double(const std::string& s, const std::string& context);
std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char delim);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace specstack
