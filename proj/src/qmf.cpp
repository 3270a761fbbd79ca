#include "evolvid/qmf.hpp"

#include <algorithm>

namespace evolvid {

void QuantumMFParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("QMF: gamma must be positive");
    if (!std::isfinite(mean)) throw std::invalid_argument("QMF: mean must be finite");
    if (upper_jumps.empty() || upper_jumps.size() != lower_jumps.size())
        throw std::invalid_argument("QMF: jump lists must be nonempty and equal length");
    for (std::size_t r = 0; r < upper_jumps.size(); ++r) {
        if (!(lower_jumps[r] > 0.0) || !(upper_jumps[r] >= lower_jumps[r]))
            throw std::invalid_argument("QMF: need upper_jumps[r] >= lower_jumps[r] > 0");
        if (r > 0 && (upper_jumps[r] < upper_jumps[r - 1] || lower_jumps[r] < lower_jumps[r - 1]))
            throw std::invalid_argument("QMF: jump lists must be sorted ascending");
    }
}

namespace {
const std::vector<double>& jump_set(const QuantumMFParams& p, MFSide side) {
    return side == MFSide::Upper ? p.upper_jumps : p.lower_jumps;
}
}  // namespace

double eval_qmf(double x, const QuantumMFParams& p, MFSide side) {
    if (!std::isfinite(x)) throw std::invalid_argument("eval_qmf: non-finite input");
    p.validate();
    const auto& jumps = jump_set(p, side);
    // Both union branches reduce to sigmoid(gamma * (theta - |x - mean|)).
    const double d = std::abs(x - p.mean);
    double acc = 0.0;
    for (double theta : jumps) acc += sigmoid(p.gamma * (theta - d));
    return acc / static_cast<double>(jumps.size());
}

std::pair<double, double> eval_it2qmf(double x, const QuantumMFParams& p) {
    return {eval_qmf(x, p, MFSide::Upper), eval_qmf(x, p, MFSide::Lower)};
}

double qmf_dmean(double x, const QuantumMFParams& p, MFSide side) {
    const auto& jumps = jump_set(p, side);
    const double d = std::abs(x - p.mean);
    const double sign = x >= p.mean ? 1.0 : -1.0;  // right branch owns x == mean
    double acc = 0.0;
    for (double theta : jumps) {
        const double s = sigmoid(p.gamma * (theta - d));
        acc += s * (1.0 - s);
    }
    return sign * p.gamma * acc / static_cast<double>(jumps.size());
}

double qmf_djump(double x, const QuantumMFParams& p, MFSide side, std::size_t grade) {
    const auto& jumps = jump_set(p, side);
    const double d = std::abs(x - p.mean);
    const double s = sigmoid(p.gamma * (jumps.at(grade) - d));
    return p.gamma * s * (1.0 - s) / static_cast<double>(jumps.size());
}

}  // namespace evolvid
