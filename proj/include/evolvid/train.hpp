#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evolvid/network.hpp"

namespace evolvid {

struct GMMComponent {
    double alpha = 0.0;       // mixing coefficient
    Eigen::VectorXd mean;     // length I
    Eigen::VectorXd var;      // diagonal covariance entries, length I
};

struct GMMState {
    std::vector<GMMComponent> components;  // one per existing rule
};

struct SignificanceResult {
    double e_upper = 0.0;
    double e_lower = 0.0;
    double e_total = 0.0;  // |e_upper| + |e_lower|
};

struct RuleGaussian {
    Eigen::VectorXd mean;         // length I
    Eigen::VectorXd sigma_upper;  // min over grades of upper jumps
    Eigen::VectorXd sigma_lower;
};

// Candidate summary fed to the significance estimate.
struct RuleSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma_upper;
    Eigen::VectorXd sigma_lower;
    double weight_norm = 0.0;  // ||omega||, flattened consequent matrices
};

struct TrainStep {
    long step = 0;
    int rule_count = 0;
    int winning_rule = 0;
    double innovation_norm = 0.0;
    int grew = 0;
    double e_candidate = 0.0;
    double e_sum = 0.0;
};

using TrainLog = std::vector<TrainStep>;

struct TrainResult {
    Network network;
    TrainLog log;
};

// Gaussian approximation of a rule's antecedents (means kept, widths = min jump).
RuleGaussian qmf_to_gaussian(const Rule& rule);

// GMM whose components are the existing rules themselves.
GMMState gmm_from_rules(const Network& net);

SignificanceResult rule_significance(const RuleSummary& candidate, const GMMState& gmm);

RuleSummary summarize_rule(const Rule& rule);

bool should_grow(double e_candidate, const std::vector<double>& e_existing, double rho);

// New rule centered at the normalized sample; widths from the GMM mixed variance
// (sigma0 for the very first rule), consequents copied from the winning rule.
Rule init_rule(const Eigen::VectorXd& x_norm, const GMMState& gmm, const Rule* winning,
               const TrainConfig& cfg, int output_dim, int param_count);

// Scales every pre-existing covariance block by (K^2+1)/K^2.
void inflate_covariances(std::vector<Rule>& rules, int prior_count);

// Argmax of the mean spatial firing strength, lowest index on ties.
int select_winning_rule(const FiringTrace& trace);

// One generic Kalman step: gain, covariance contraction, parameter delta.
struct KalmanStep {
    Eigen::MatrixXd gain;        // Z x M
    Eigen::MatrixXd covariance;  // Z x Z, symmetrized
    Eigen::VectorXd delta;       // Z
};
KalmanStep kalman_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H, double eta,
                       const Eigen::VectorXd& innovation);

// Analytic Jacobian d(y_out)/d(phi_jw) for the winning rule's parameter block.
Eigen::MatrixXd dekf_jacobian(const Network& net, const FiringTrace& trace, int winner);

// Pack/unpack the per-rule parameter vector phi
// (type-2: [lower W, upper W, q_logit, m, lower jumps, upper jumps];
//  type-1: [W, m, jumps]).
Eigen::VectorXd pack_params(const Network& net, int rule_idx);
void unpack_params(Network& net, int rule_idx, const Eigen::VectorXd& phi);

// DEKF update of the winning rule against target t; returns innovation norm.
double dekf_update(Network& net, int winner, const Eigen::VectorXd& x_raw,
                   const Eigen::VectorXd& target, const FiringTrace& trace);

// Online training over a sample stream. Rows of `inputs` are raw samples; rows of
// `targets` the measured outputs. When `prefit_norm` is given the normalization is
// frozen to it, otherwise running statistics are maintained incrementally.
TrainResult train_online(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         const TrainConfig& cfg, bool type1 = false,
                         const NormStats* prefit_norm = nullptr,
                         const std::vector<std::string>& input_names = {});

// Type-1 reduction: lower jumps := upper jumps, q pinned at 0.5, restricted
// parameter vector for any subsequent training.
Network reduce_to_type1(const Network& net);

void write_training_log(const TrainLog& log, const std::string& path);

}  // namespace evolvid
