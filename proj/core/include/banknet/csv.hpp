#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace banknet::csv {

/// Shortest decimal representation that round-trips to the same double.
/// Keeps golden CSV files stable across platforms.
std::string format_double(double value);

/// Simple in-memory CSV builder; the whole file is written in one shot so
/// output is byte-deterministic.
class Table {
public:
    explicit Table(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

void write_file(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace banknet::csv
