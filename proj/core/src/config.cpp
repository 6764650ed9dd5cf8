#include "banknet/config.hpp"

#include <cstdlib>
#include <sstream>

#include "banknet/csv.hpp"

namespace banknet::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Ini Ini::parse(const std::string& text) {
    Ini ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw SchemaError("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw SchemaError("config line " + std::to_string(lineno) + ": empty section name");
            ini.sections_[section];   // allow empty sections
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw SchemaError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw SchemaError("config line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw SchemaError("config line " + std::to_string(lineno) + ": empty key");
        ini.sections_[section][key].push_back(value);
    }
    return ini;
}

bool Ini::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

bool Ini::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::vector<std::string> Ini::all(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return {};
    const auto k = s->second.find(key);
    if (k == s->second.end()) return {};
    return k->second;
}

std::string Ini::require(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw SchemaError("missing required key [" + section + "]." + key);
    return all(section, key).back();
}

std::string Ini::get(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return all(section, key).back();
}

double parse_double(const std::string& text, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw SchemaError("not a number at " + path + ": '" + text + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& path) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, path));
    return out;
}

double Ini::require_double(const std::string& section, const std::string& key) const {
    return parse_double(require(section, key), "[" + section + "]." + key);
}

double Ini::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(all(section, key).back(), "[" + section + "]." + key);
}

long long Ini::get_int(const std::string& section, const std::string& key,
                       long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string text = all(section, key).back();
    const std::string path = "[" + section + "]." + key;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0')
        throw SchemaError("not an integer at " + path + ": '" + text + "'");
    return v;
}

std::vector<double> Ini::get_doubles(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return {};
    return parse_double_list(all(section, key).back(), "[" + section + "]." + key);
}

void Ini::check_known(const std::map<std::string, std::set<std::string>>& allowed) const {
    for (const auto& [section, keys] : sections_) {
        const auto it = allowed.find(section);
        if (it == allowed.end())
            throw SchemaError("unknown section [" + section + "]");
        for (const auto& [key, values] : keys) {
            if (!it->second.count(key))
                throw SchemaError("unknown key [" + section + "]." + key);
        }
    }
}

std::string write_network(const Network& net) {
    std::ostringstream out;
    out << "[network]\n";
    out << "risk_free_rate = " << csv::format_double(net.risk_free_rate()) << "\n";
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Institution& b = net.at(i);
        out << "institution = " << csv::format_double(b.external_assets) << ' '
            << csv::format_double(b.cash) << ' ' << csv::format_double(b.nominal_debt) << ' '
            << csv::format_double(b.equity_book) << ' ' << csv::format_double(b.maturity) << ' '
            << csv::format_double(b.debt_rate) << "\n";
    }
    for (std::size_t i = 0; i < net.size(); ++i) {
        out << "pi_row =";
        for (std::size_t j = 0; j < net.size(); ++j)
            out << ' ' << csv::format_double(net.share_matrix()(i, j));
        out << "\n";
    }
    for (std::size_t i = 0; i < net.size(); ++i) {
        out << "gamma_row =";
        for (std::size_t j = 0; j < net.size(); ++j)
            out << ' ' << csv::format_double(net.debt_matrix()(i, j));
        out << "\n";
    }
    return out.str();
}

Network read_network(const Ini& ini) {
    if (!ini.has_section("network")) throw SchemaError("missing section [network]");
    const auto inst_lines = ini.all("network", "institution");
    const std::size_t n = inst_lines.size();
    if (n == 0) throw SchemaError("[network].institution: at least one required");

    std::vector<Institution> insts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = parse_double_list(inst_lines[i], "[network].institution");
        if (v.size() != 6)
            throw SchemaError("[network].institution: expected 6 fields "
                              "(ax cash nominal_debt equity maturity debt_rate)");
        insts[i].external_assets = v[0];
        insts[i].cash = v[1];
        insts[i].nominal_debt = v[2];
        insts[i].equity_book = v[3];
        insts[i].maturity = v[4];
        insts[i].debt_rate = v[5];
    }

    auto read_matrix = [&](const char* key) {
        const auto rows = ini.all("network", key);
        if (rows.size() != n)
            throw SchemaError(std::string("[network].") + key + ": expected " + std::to_string(n) +
                              " rows");
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = parse_double_list(rows[i], std::string("[network].") + key);
            if (v.size() != n)
                throw SchemaError(std::string("[network].") + key + ": row " + std::to_string(i + 1) +
                                  " must have " + std::to_string(n) + " entries");
            for (std::size_t j = 0; j < n; ++j) m(i, j) = v[j];
        }
        return m;
    };

    const double rrf = ini.get_double("network", "risk_free_rate", 0.0);
    return Network(std::move(insts), read_matrix("pi_row"), read_matrix("gamma_row"), rrf);
}

}  // namespace banknet::config
