#include "evolvid/network.hpp"

#include <sstream>

namespace evolvid {

DegenerateFiringError::DegenerateFiringError(const Eigen::VectorXd& x)
    : std::runtime_error("all firing strengths vanished for sample"), sample(x) {}

void TrainConfig::validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("TrainConfig: rho in (0,1]");
    if (!(delta1 > 0.0 && delta1 < 1.0))
        throw std::invalid_argument("TrainConfig: delta1 in (0,1)");
    if (n_s < 1) throw std::invalid_argument("TrainConfig: n_s >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("TrainConfig: gamma > 0");
    if (!(eta > 0.0)) throw std::invalid_argument("TrainConfig: eta > 0");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("TrainConfig: sigma0 > 0");
}

void Rule::validate(int input_dim) const {
    if (static_cast<int>(antecedents.size()) != input_dim)
        throw std::invalid_argument("Rule: antecedent count != input_dim");
    for (const auto& a : antecedents) a.validate();
    if (upper_weights.rows() != lower_weights.rows() ||
        upper_weights.cols() != lower_weights.cols())
        throw std::invalid_argument("Rule: weight matrices must have identical shape");
    if (upper_weights.cols() != input_dim + 1)
        throw std::invalid_argument("Rule: weight matrices must be M x (I+1)");
    const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
    if ((covariance - sym).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("Rule: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("Rule: covariance not positive semidefinite");
}

Eigen::VectorXd Network::normalize(const Eigen::VectorXd& x_raw) const {
    if (norm.mean.size() != input_dim)
        throw std::invalid_argument("Network: normalization statistics missing");
    return (x_raw - norm.mean).cwiseQuotient(norm.stddev);
}

int Network::param_count() const {
    const int w = output_dim * (input_dim + 1);
    const int jumps = input_dim * config.n_s;
    if (type1) return w + input_dim + jumps;
    return 2 * w + 1 + input_dim + 2 * jumps;
}

FiringTrace firing_strengths(const Eigen::VectorXd& z, const Network& net) {
    if (net.rules.empty()) throw UntrainedNetworkError("network has no rules");
    if (z.size() != net.input_dim)
        throw std::invalid_argument("firing_strengths: input dimension mismatch");
    const int K = static_cast<int>(net.rules.size());
    const int I = net.input_dim;
    FiringTrace tr;
    tr.upper_memberships.resize(K, I);
    tr.lower_memberships.resize(K, I);
    tr.upper_firing.resize(K);
    tr.lower_firing.resize(K);
    for (int j = 0; j < K; ++j) {
        double ru = 1.0, rl = 1.0;
        for (int i = 0; i < I; ++i) {
            auto [u, l] = eval_it2qmf(z[i], net.rules[j].antecedents[i]);
            tr.upper_memberships(j, i) = u;
            tr.lower_memberships(j, i) = l;
            ru *= u;
            rl *= l;
        }
        tr.upper_firing[j] = ru;
        tr.lower_firing[j] = rl;
    }
    tr.x_ext.resize(I + 1);
    tr.x_ext[0] = 1.0;
    tr.x_ext.tail(I) = z;
    return tr;
}

void type_reduce(FiringTrace& trace, const Network& net) {
    const int K = static_cast<int>(net.rules.size());
    const int M = net.output_dim;
    const double su = trace.upper_firing.sum();
    const double sl = trace.lower_firing.sum();
    if (su < kFiringFloor && sl < kFiringFloor)
        throw DegenerateFiringError(trace.x_ext.tail(net.input_dim));
    Eigen::VectorXd num_u = Eigen::VectorXd::Zero(M);
    Eigen::VectorXd num_l = Eigen::VectorXd::Zero(M);
    for (int j = 0; j < K; ++j) {
        num_u += trace.upper_firing[j] * (net.rules[j].upper_weights * trace.x_ext);
        num_l += trace.lower_firing[j] * (net.rules[j].lower_weights * trace.x_ext);
    }
    const double q = net.q();
    trace.y_upper = (1.0 - q) * num_u / std::max(su, kFiringFloor);
    trace.y_lower = q * num_l / std::max(sl, kFiringFloor);
    trace.y_out = trace.y_upper + trace.y_lower;
}

FiringTrace forward(const Eigen::VectorXd& x_raw, const Network& net) {
    FiringTrace tr = firing_strengths(net.normalize(x_raw), net);
    type_reduce(tr, net);
    return tr;
}

}  // namespace evolvid
