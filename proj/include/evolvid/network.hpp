#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evolvid/qmf.hpp"

namespace evolvid {

struct UntrainedNetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All firing strengths vanished for one sample; carries the offending input.
struct DegenerateFiringError : std::runtime_error {
    explicit DegenerateFiringError(const Eigen::VectorXd& x);
    Eigen::VectorXd sample;
};

struct TrainConfig {
    double rho = 0.65;     // vigilance: fraction of total significance a new rule must reach
    double delta1 = 0.8;   // FOU factor, lower width = delta1 * upper width
    int n_s = 3;           // quantum grades per membership function
    double gamma = 2.0;    // sigmoid slope
    double eta = 1.0;      // DEKF measurement-noise scalar
    double sigma0 = 1.0;   // first-rule width prior (normalized units)
    std::uint64_t seed = 0;

    void validate() const;
};

struct NormStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // floored at kStdFloor
};

inline constexpr double kStdFloor = 1e-9;
inline constexpr double kFiringFloor = 1e-300;
inline constexpr double kJumpFloor = 1e-6;
inline constexpr double kQLogitClamp = 40.0;

struct Rule {
    std::vector<QuantumMFParams> antecedents;  // length I
    Eigen::MatrixXd upper_weights;             // M x (I+1)
    Eigen::MatrixXd lower_weights;             // M x (I+1)
    Eigen::MatrixXd covariance;                // Z x Z, symmetric PSD
    long support_count = 0;

    void validate(int input_dim) const;
};

struct FiringTrace {
    Eigen::MatrixXd upper_memberships;  // K x I
    Eigen::MatrixXd lower_memberships;  // K x I
    Eigen::VectorXd upper_firing;       // K
    Eigen::VectorXd lower_firing;       // K
    Eigen::VectorXd x_ext;              // [1, z_1..z_I], normalized
    Eigen::VectorXd y_upper, y_lower, y_out;
};

struct Network {
    int input_dim = 0;
    int output_dim = 1;
    std::vector<Rule> rules;
    double q_logit = 0.0;  // q = sigmoid(q_logit)
    bool type1 = false;    // type-1 reduction: lower == upper, q pinned at 0.5
    NormStats norm;
    TrainConfig config;
    long skipped_updates = 0;  // DEKF steps dropped on non-finite values
    std::vector<std::string> input_names;

    double q() const { return type1 ? 0.5 : sigmoid(q_logit); }
    Eigen::VectorXd normalize(const Eigen::VectorXd& x_raw) const;

    // Per-rule trainable parameter count (the DEKF block size).
    int param_count() const;
};

// Layers 1-3: memberships and product-T-norm firing strengths. `z` is normalized.
FiringTrace firing_strengths(const Eigen::VectorXd& z, const Network& net);

// Layer 4: q-factor type reduction. Fills y_upper / y_lower / y_out in the trace.
void type_reduce(FiringTrace& trace, const Network& net);

// Full pipeline on a raw input vector.
FiringTrace forward(const Eigen::VectorXd& x_raw, const Network& net);

}  // namespace evolvid
