#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace curio::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a header column; throws std::runtime_error when absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
};

/// Writes a header and numeric rows; numbers use the shortest round-trip form.
void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows);

/// Reads a purely numeric CSV with a header line.
Table read(const std::filesystem::path& path);

}  // namespace curio::csv
