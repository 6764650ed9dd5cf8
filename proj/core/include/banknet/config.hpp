#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "banknet/domain.hpp"

namespace banknet::config {

/// Configuration error with the offending [section].key path in the message.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sectioned key=value text. Keys may repeat (matrix rows, institutions);
/// values keep their order of appearance.
class Ini {
public:
    static Ini parse(const std::string& text);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    /// All values of a repeated key, in file order.
    std::vector<std::string> all(const std::string& section, const std::string& key) const;

    std::string require(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;

    double require_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;

    /// Whitespace-separated list of doubles.
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

    /// Complains (SchemaError) about unknown sections/keys so typos fail
    /// loudly with a field path.
    void check_known(const std::map<std::string, std::set<std::string>>& allowed) const;

    const std::map<std::string, std::map<std::string, std::vector<std::string>>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::vector<std::string>>> sections_;
};

double parse_double(const std::string& text, const std::string& path);
std::vector<double> parse_double_list(const std::string& text, const std::string& path);

/// [network] section round-trip. write_network emits shortest round-trip
/// decimals, so read(write(net)) == net field-for-field.
std::string write_network(const Network& net);
Network read_network(const Ini& ini);

}  // namespace banknet::config
