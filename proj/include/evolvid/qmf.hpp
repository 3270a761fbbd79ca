#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace evolvid {

// One antecedent quantum membership function: an average of n_s shifted
// sigmoid pairs, symmetric about `mean`, with separate upper/lower jump
// position sets forming the interval type-2 band.
struct QuantumMFParams {
    double mean = 0.0;
    double gamma = 2.0;
    std::vector<double> upper_jumps;  // ascending, upper_jumps[r] >= lower_jumps[r] > 0
    std::vector<double> lower_jumps;

    std::size_t grades() const { return upper_jumps.size(); }
    void validate() const;
};

enum class MFSide { Upper, Lower };

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Membership grade in (0,1): mean over grades of sigmoid(gamma*(theta_r - |x-mean|)).
// The left/right sigmoid branches of the union step function meet at x = mean;
// the right branch owns x == mean.
double eval_qmf(double x, const QuantumMFParams& p, MFSide side);

// (upper, lower) membership pair; upper >= lower.
std::pair<double, double> eval_it2qmf(double x, const QuantumMFParams& p);

// d(membership)/d(mean) and d(membership)/d(theta_r), used by the DEKF Jacobian.
double qmf_dmean(double x, const QuantumMFParams& p, MFSide side);
double qmf_djump(double x, const QuantumMFParams& p, MFSide side, std::size_t grade);

}  // namespace evolvid
