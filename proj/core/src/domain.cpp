#include "banknet/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace banknet {

Network::Network(std::vector<Institution> institutions, Matrix share_matrix, Matrix debt_matrix,
                 double risk_free_rate)
    : institutions_(std::move(institutions)),
      share_matrix_(std::move(share_matrix)),
      debt_matrix_(std::move(debt_matrix)),
      risk_free_rate_(risk_free_rate) {
    const std::size_t n = institutions_.size();
    if (share_matrix_.rows() != n || share_matrix_.cols() != n ||
        debt_matrix_.rows() != n || debt_matrix_.cols() != n) {
        throw std::invalid_argument("Network: holding matrices must be n x n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        institutions_[i].id = static_cast<int>(i);
        institutions_[i].shares_held.resize(n);
        institutions_[i].debt_held.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            institutions_[i].shares_held[j] = share_matrix_(i, j);
            institutions_[i].debt_held[j] = debt_matrix_(i, j);
        }
    }
}

namespace {

void check_matrix(const Matrix& m, const char* name, const char* self_cond,
                  std::vector<Violation>& out) {
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m(i, j);
            if (!(v >= 0.0) || v > 1.0 || !std::isfinite(v)) {
                out.push_back({"(A1')", static_cast<int>(i),
                               std::string(name) + " entry (" + std::to_string(i) + "," +
                                   std::to_string(j) + ") outside [0,1]"});
            }
        }
        if (m(i, i) != 0.0) {
            out.push_back({self_cond, static_cast<int>(i),
                           std::string(name) + " self-holding at " + std::to_string(i) +
                               " must be exactly 0"});
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) col += m(i, j);
        if (!(col < 1.0)) {
            out.push_back({"(A3')", static_cast<int>(j),
                           std::string(name) + " column sum >= 1"});
        }
    }
}

}  // namespace

std::vector<Violation> validate_network(const Network& net) {
    std::vector<Violation> out;
    const std::size_t n = net.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Institution& b = net.at(i);
        const int idx = static_cast<int>(i);
        if (!(b.external_assets >= 0.0) || !std::isfinite(b.external_assets))
            out.push_back({"(A2')", idx, "external_assets negative"});
        if (!(b.cash >= 0.0) || !std::isfinite(b.cash))
            out.push_back({"(A2')", idx, "cash negative"});
        if (!(b.nominal_debt >= 0.0) || !std::isfinite(b.nominal_debt))
            out.push_back({"(A2')", idx, "nominal_debt negative"});
        if (!(b.equity_book >= 0.0) || !std::isfinite(b.equity_book))
            out.push_back({"(A2')", idx, "equity_book negative"});
        if (!(b.maturity >= 0.0 && b.maturity <= 1.0))
            out.push_back({"maturity", idx, "maturity outside [0,1]"});
        if (!(b.debt_rate >= 0.0))
            out.push_back({"debt_rate", idx, "debt_rate negative"});
        // Rows must mirror the matrices (they are derived at construction;
        // a mismatch means someone mutated a copy).
        for (std::size_t j = 0; j < n; ++j) {
            if (b.shares_held.size() != n || b.debt_held.size() != n ||
                b.shares_held[j] != net.share_matrix()(i, j) ||
                b.debt_held[j] != net.debt_matrix()(i, j)) {
                out.push_back({"row-view", idx, "institution rows diverge from matrices"});
                break;
            }
        }
    }
    check_matrix(net.share_matrix(), "share", "self-share", out);
    check_matrix(net.debt_matrix(), "debt", "self-debt", out);
    return out;
}

std::string to_string(const Violation& v) {
    std::string s = v.condition;
    if (v.index >= 0) s += " [" + std::to_string(v.index + 1) + "]";
    s += ": " + v.message;
    return s;
}

}  // namespace banknet
