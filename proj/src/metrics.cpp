#include "evolvid/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace evolvid {

double tic(const Eigen::VectorXd& measured, const Eigen::VectorXd& predicted) {
    if (measured.size() != predicted.size() || measured.size() == 0)
        throw std::invalid_argument("tic: vectors must have equal nonzero length");
    const double nz = measured.norm();
    const double ny = predicted.norm();
    if (nz == 0.0 && ny == 0.0)
        throw std::invalid_argument("tic: undefined for two all-zero vectors");
    return (measured - predicted).norm() / (nz + ny);
}

std::map<std::string, double> rank_models(const TicTable& table) {
    const std::size_t m = table.models.size();
    std::vector<std::string> missing;
    for (CoeffKind k : kAllCoeffs) {
        auto it = table.cells.find(k);
        if (it == table.cells.end() || it->second.size() != m) {
            for (std::size_t c = 0; c < m; ++c)
                if (it == table.cells.end() || c >= it->second.size())
                    missing.push_back(std::string(coeff_name(k)) + "/" + table.models[c]);
        }
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "rank_models: incomplete table, missing cells:";
        for (const auto& s : missing) os << ' ' << s;
        throw std::invalid_argument(os.str());
    }
    std::map<std::string, double> sum;
    for (const auto& name : table.models) sum[name] = 0.0;
    for (CoeffKind k : kAllCoeffs) {
        const auto& row = table.cells.at(k);
        // ascending TIC; ties share the average of the tied positions
        for (std::size_t c = 0; c < m; ++c) {
            int below = 0, equal = 0;
            for (std::size_t o = 0; o < m; ++o) {
                if (row[o] < row[c]) ++below;
                if (row[o] == row[c]) ++equal;
            }
            sum[table.models[c]] += below + 0.5 * (equal + 1);
        }
    }
    for (auto& [name, v] : sum) v /= 6.0;
    return sum;
}

double rule_count_stats(const std::vector<int>& rule_counts) {
    if (rule_counts.empty()) throw std::invalid_argument("rule_count_stats: no models");
    const double mean = std::accumulate(rule_counts.begin(), rule_counts.end(), 0.0) /
                        static_cast<double>(rule_counts.size());
    return std::round(mean * 100.0) / 100.0;
}

namespace {
std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}
}  // namespace

void write_tic_table(const TicTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "coeff";
    for (const auto& m : table.models) out << ',' << m;
    out << '\n';
    for (CoeffKind k : kAllCoeffs) {
        auto it = table.cells.find(k);
        if (it == table.cells.end()) continue;
        out << coeff_name(k);
        for (double v : it->second) out << ',' << fmt(v);
        out << '\n';
    }
}

void write_rank_table(const std::map<std::string, double>& ranks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "model,mean_rank\n";
    std::vector<std::pair<std::string, double>> rows(ranks.begin(), ranks.end());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [name, r] : rows) out << name << ',' << fmt(r) << '\n';
}

}  // namespace evolvid
