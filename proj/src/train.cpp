#include "evolvid/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace evolvid {

RuleGaussian qmf_to_gaussian(const Rule& rule) {
    RuleGaussian g;
    const int I = static_cast<int>(rule.antecedents.size());
    g.mean.resize(I);
    g.sigma_upper.resize(I);
    g.sigma_lower.resize(I);
    for (int i = 0; i < I; ++i) {
        const auto& a = rule.antecedents[i];
        g.mean[i] = a.mean;
        g.sigma_upper[i] = *std::min_element(a.upper_jumps.begin(), a.upper_jumps.end());
        g.sigma_lower[i] = *std::min_element(a.lower_jumps.begin(), a.lower_jumps.end());
    }
    return g;
}

GMMState gmm_from_rules(const Network& net) {
    GMMState gmm;
    double total = 0.0;
    for (const auto& r : net.rules) total += static_cast<double>(std::max<long>(r.support_count, 1));
    for (const auto& r : net.rules) {
        GMMComponent c;
        c.alpha = static_cast<double>(std::max<long>(r.support_count, 1)) / total;
        const RuleGaussian g = qmf_to_gaussian(r);
        c.mean = g.mean;
        c.var = g.sigma_upper.array().square();
        gmm.components.push_back(std::move(c));
    }
    return gmm;
}

RuleSummary summarize_rule(const Rule& rule) {
    RuleSummary s;
    const RuleGaussian g = qmf_to_gaussian(rule);
    s.mean = g.mean;
    s.sigma_upper = g.sigma_upper;
    s.sigma_lower = g.sigma_lower;
    s.weight_norm = std::sqrt(rule.upper_weights.squaredNorm() + rule.lower_weights.squaredNorm());
    return s;
}

namespace {

// Significance estimate for one width set, computed in log space:
// ||omega|| * ( (1/pi^2) * det(Sigma_j)^(1/2) * sum_h alpha_h N(m_j - v_h; 0, Sigma_j/2 + Sigma_h) )^(1/2)
double significance_one(const Eigen::VectorXd& m, const Eigen::VectorXd& sigma,
                        double weight_norm, const GMMState& gmm) {
    const int I = static_cast<int>(m.size());
    double log_det_half = 0.0;  // log det(Sigma_j)^(1/2)
    for (int i = 0; i < I; ++i) log_det_half += std::log(sigma[i] * sigma[i]);
    log_det_half *= 0.5;

    double mix = 0.0;
    for (const auto& c : gmm.components) {
        double log_n = 0.0;
        for (int i = 0; i < I; ++i) {
            const double v = 0.5 * sigma[i] * sigma[i] + c.var[i];
            const double d = m[i] - c.mean[i];
            log_n += -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * d * d / v;
        }
        mix += c.alpha * std::exp(log_n);
    }
    if (mix <= 0.0) return 0.0;
    const double inner =
        -2.0 * std::log(std::numbers::pi) + log_det_half + std::log(mix);
    return weight_norm * std::exp(0.5 * inner);
}

}  // namespace

SignificanceResult rule_significance(const RuleSummary& candidate, const GMMState& gmm) {
    if (gmm.components.empty())
        throw std::runtime_error(
            "rule_significance: empty GMM; bootstrap the first rule directly");
    SignificanceResult r;
    r.e_upper = significance_one(candidate.mean, candidate.sigma_upper, candidate.weight_norm, gmm);
    r.e_lower = significance_one(candidate.mean, candidate.sigma_lower, candidate.weight_norm, gmm);
    r.e_total = std::abs(r.e_upper) + std::abs(r.e_lower);
    return r;
}

bool should_grow(double e_candidate, const std::vector<double>& e_existing, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("should_grow: rho in (0,1]");
    double sum = 0.0;
    for (double e : e_existing) sum += e;
    return e_candidate >= rho * sum;
}

Rule init_rule(const Eigen::VectorXd& x_norm, const GMMState& gmm, const Rule* winning,
               const TrainConfig& cfg, int output_dim, int param_count) {
    if (!x_norm.allFinite()) throw std::invalid_argument("init_rule: non-finite sample");
    const int I = static_cast<int>(x_norm.size());
    Rule rule;
    Eigen::VectorXd sigma_up(I);
    if (gmm.components.empty()) {
        sigma_up.setConstant(cfg.sigma0);
    } else {
        Eigen::VectorXd mixed = Eigen::VectorXd::Zero(I);
        for (const auto& c : gmm.components) mixed += c.alpha * c.var;
        sigma_up = mixed.cwiseMax(kJumpFloor * kJumpFloor).cwiseSqrt();
    }
    rule.antecedents.resize(I);
    for (int i = 0; i < I; ++i) {
        auto& a = rule.antecedents[i];
        a.mean = x_norm[i];
        a.gamma = cfg.gamma;
        a.upper_jumps.resize(cfg.n_s);
        a.lower_jumps.resize(cfg.n_s);
        const double su = sigma_up[i];
        const double sl = cfg.delta1 * su;
        for (int r = 1; r <= cfg.n_s; ++r) {
            const double scale = 2.0 * r / (cfg.n_s + 1.0);
            a.upper_jumps[r - 1] = scale * su;
            a.lower_jumps[r - 1] = scale * sl;
        }
    }
    if (winning != nullptr) {
        rule.upper_weights = winning->upper_weights;
        rule.lower_weights = winning->lower_weights;
    } else {
        rule.upper_weights = Eigen::MatrixXd::Zero(output_dim, I + 1);
        rule.lower_weights = Eigen::MatrixXd::Zero(output_dim, I + 1);
    }
    rule.covariance = Eigen::MatrixXd::Identity(param_count, param_count);
    rule.support_count = 1;
    return rule;
}

void inflate_covariances(std::vector<Rule>& rules, int prior_count) {
    if (prior_count < 1) throw std::invalid_argument("inflate_covariances: need K >= 1");
    const double k = static_cast<double>(prior_count);
    const double factor = (k * k + 1.0) / (k * k);
    for (int j = 0; j < prior_count && j < static_cast<int>(rules.size()); ++j)
        rules[j].covariance *= factor;
}

int select_winning_rule(const FiringTrace& trace) {
    const int K = static_cast<int>(trace.upper_firing.size());
    if (K == 0) throw UntrainedNetworkError("select_winning_rule: no rules");
    int best = 0;
    double best_val = -1.0;
    for (int j = 0; j < K; ++j) {
        const double spatial = 0.5 * (trace.upper_firing[j] + trace.lower_firing[j]);
        if (spatial > best_val) {
            best_val = spatial;
            best = j;
        }
    }
    return best;
}

KalmanStep kalman_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H, double eta,
                       const Eigen::VectorXd& innovation) {
    const int m = static_cast<int>(H.cols());
    const Eigen::MatrixXd ph = P * H;                       // Z x M
    const Eigen::MatrixXd s =
        eta * Eigen::MatrixXd::Identity(m, m) + H.transpose() * ph;  // M x M
    KalmanStep out;
    out.gain = s.ldlt().solve(ph.transpose()).transpose();  // Z x M
    Eigen::MatrixXd pn = P - out.gain * H.transpose() * P;
    out.covariance = 0.5 * (pn + pn.transpose());
    out.delta = out.gain * innovation;
    return out;
}

namespace {

struct Layout {
    int I, M, n_s;
    bool type1;
    int w;  // weights per matrix = M*(I+1)
    int off_wl, off_wu, off_q, off_m, off_jl, off_ju, total;
};

Layout layout_of(const Network& net) {
    Layout L;
    L.I = net.input_dim;
    L.M = net.output_dim;
    L.n_s = net.config.n_s;
    L.type1 = net.type1;
    L.w = L.M * (L.I + 1);
    const int jumps = L.I * L.n_s;
    if (net.type1) {
        L.off_wl = 0;  // single shared weight matrix
        L.off_wu = 0;
        L.off_q = -1;
        L.off_m = L.w;
        L.off_jl = L.w + L.I;
        L.off_ju = L.off_jl;
        L.total = L.w + L.I + jumps;
    } else {
        L.off_wl = 0;
        L.off_wu = L.w;
        L.off_q = 2 * L.w;
        L.off_m = 2 * L.w + 1;
        L.off_jl = L.off_m + L.I;
        L.off_ju = L.off_jl + jumps;
        L.total = L.off_ju + jumps;
    }
    return L;
}

}  // namespace

Eigen::VectorXd pack_params(const Network& net, int rule_idx) {
    const Layout L = layout_of(net);
    const Rule& r = net.rules.at(rule_idx);
    Eigen::VectorXd phi(L.total);
    int k = 0;
    if (L.type1) {
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) phi[k++] = r.upper_weights(m, i);
    } else {
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) phi[k++] = r.lower_weights(m, i);
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) phi[k++] = r.upper_weights(m, i);
        phi[k++] = net.q_logit;
    }
    for (int i = 0; i < L.I; ++i) phi[k++] = r.antecedents[i].mean;
    if (!L.type1)
        for (int i = 0; i < L.I; ++i)
            for (int g = 0; g < L.n_s; ++g) phi[k++] = r.antecedents[i].lower_jumps[g];
    for (int i = 0; i < L.I; ++i)
        for (int g = 0; g < L.n_s; ++g) phi[k++] = r.antecedents[i].upper_jumps[g];
    return phi;
}

void unpack_params(Network& net, int rule_idx, const Eigen::VectorXd& phi) {
    const Layout L = layout_of(net);
    Rule& r = net.rules.at(rule_idx);
    int k = 0;
    if (L.type1) {
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) {
                r.upper_weights(m, i) = phi[k];
                r.lower_weights(m, i) = phi[k];
                ++k;
            }
    } else {
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) r.lower_weights(m, i) = phi[k++];
        for (int m = 0; m < L.M; ++m)
            for (int i = 0; i <= L.I; ++i) r.upper_weights(m, i) = phi[k++];
        net.q_logit = std::clamp(phi[k++], -kQLogitClamp, kQLogitClamp);
    }
    for (int i = 0; i < L.I; ++i) r.antecedents[i].mean = phi[k++];
    std::vector<double> lo(L.n_s), hi(L.n_s);
    for (int i = 0; i < L.I; ++i) {
        auto& a = r.antecedents[i];
        if (L.type1) {
            for (int g = 0; g < L.n_s; ++g) hi[g] = std::max(phi[k + i * L.n_s + g], kJumpFloor);
            std::sort(hi.begin(), hi.end());
            a.upper_jumps.assign(hi.begin(), hi.end());
            a.lower_jumps = a.upper_jumps;
        } else {
            for (int g = 0; g < L.n_s; ++g) {
                lo[g] = std::max(phi[k + i * L.n_s + g], kJumpFloor);
                hi[g] = std::max(phi[k + L.I * L.n_s + i * L.n_s + g], kJumpFloor);
            }
            // keep each list ascending and the pairing upper >= lower
            std::sort(lo.begin(), lo.end());
            std::sort(hi.begin(), hi.end());
            for (int g = 0; g < L.n_s; ++g) {
                a.upper_jumps[g] = std::max(lo[g], hi[g]);
                a.lower_jumps[g] = std::min(lo[g], hi[g]);
            }
        }
    }
}

Eigen::MatrixXd dekf_jacobian(const Network& net, const FiringTrace& trace, int winner) {
    const Layout L = layout_of(net);
    const Rule& r = net.rules[winner];
    const double q = net.q();
    const double su = std::max(trace.upper_firing.sum(), kFiringFloor);
    const double sl = std::max(trace.lower_firing.sum(), kFiringFloor);

    // consequent outputs and type-reduced means (before the q factors)
    Eigen::VectorXd a_mean = Eigen::VectorXd::Zero(L.M);
    Eigen::VectorXd b_mean = Eigen::VectorXd::Zero(L.M);
    for (int j = 0; j < static_cast<int>(net.rules.size()); ++j) {
        a_mean += trace.upper_firing[j] * (net.rules[j].upper_weights * trace.x_ext);
        b_mean += trace.lower_firing[j] * (net.rules[j].lower_weights * trace.x_ext);
    }
    a_mean /= su;
    b_mean /= sl;
    const Eigen::VectorXd yj_u = r.upper_weights * trace.x_ext;
    const Eigen::VectorXd yj_l = r.lower_weights * trace.x_ext;
    // dy/dR for the winning rule
    const Eigen::VectorXd dy_dru = (1.0 - q) * (yj_u - a_mean) / su;
    const Eigen::VectorXd dy_drl = q * (yj_l - b_mean) / sl;

    const Eigen::VectorXd z = trace.x_ext.tail(L.I);
    // products of memberships excluding input i
    Eigen::VectorXd prod_u_excl(L.I), prod_l_excl(L.I);
    for (int i = 0; i < L.I; ++i) {
        double pu = 1.0, pl = 1.0;
        for (int k2 = 0; k2 < L.I; ++k2) {
            if (k2 == i) continue;
            pu *= trace.upper_memberships(winner, k2);
            pl *= trace.lower_memberships(winner, k2);
        }
        prod_u_excl[i] = pu;
        prod_l_excl[i] = pl;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L.total, L.M);
    const double ru = trace.upper_firing[winner];
    const double rl = trace.lower_firing[winner];
    for (int m = 0; m < L.M; ++m) {
        if (L.type1) {
            for (int i = 0; i <= L.I; ++i)
                H(m * (L.I + 1) + i, m) =
                    (0.5 * ru / su + 0.5 * rl / sl) * trace.x_ext[i];
        } else {
            for (int i = 0; i <= L.I; ++i) {
                H(L.off_wl + m * (L.I + 1) + i, m) = q * rl / sl * trace.x_ext[i];
                H(L.off_wu + m * (L.I + 1) + i, m) = (1.0 - q) * ru / su * trace.x_ext[i];
            }
            H(L.off_q, m) = (b_mean[m] - a_mean[m]) * q * (1.0 - q);
        }
    }
    for (int i = 0; i < L.I; ++i) {
        const auto& a = r.antecedents[i];
        const double dqu_dm = qmf_dmean(z[i], a, MFSide::Upper);
        const double dql_dm = qmf_dmean(z[i], a, MFSide::Lower);
        const double dru_dm = prod_u_excl[i] * dqu_dm;
        const double drl_dm = prod_l_excl[i] * dql_dm;
        for (int m = 0; m < L.M; ++m)
            H(L.off_m + i, m) = dy_dru[m] * dru_dm + dy_drl[m] * drl_dm;
        for (int g = 0; g < L.n_s; ++g) {
            const double dru_dj = prod_u_excl[i] * qmf_djump(z[i], a, MFSide::Upper, g);
            const double drl_dj = prod_l_excl[i] * qmf_djump(z[i], a, MFSide::Lower, g);
            for (int m = 0; m < L.M; ++m) {
                if (L.type1) {
                    H(L.off_ju + i * L.n_s + g, m) =
                        dy_dru[m] * dru_dj + dy_drl[m] * drl_dj;
                } else {
                    H(L.off_jl + i * L.n_s + g, m) = dy_drl[m] * drl_dj;
                    H(L.off_ju + i * L.n_s + g, m) = dy_dru[m] * dru_dj;
                }
            }
        }
    }
    return H;
}

double dekf_update(Network& net, int winner, const Eigen::VectorXd& x_raw,
                   const Eigen::VectorXd& target, const FiringTrace& trace) {
    const Eigen::VectorXd innovation = target - trace.y_out;
    const double inn_norm = innovation.norm();
    if (!innovation.allFinite()) {
        ++net.skipped_updates;
        return 0.0;
    }
    const Eigen::MatrixXd H = dekf_jacobian(net, trace, winner);
    if (!H.allFinite()) {
        ++net.skipped_updates;
        return inn_norm;
    }
    Rule& rule = net.rules[winner];
    const KalmanStep step = kalman_step(rule.covariance, H, net.config.eta, innovation);
    if (!step.delta.allFinite() || !step.covariance.allFinite()) {
        ++net.skipped_updates;
        return inn_norm;
    }
    Eigen::VectorXd phi = pack_params(net, winner);
    phi += step.delta;
    unpack_params(net, winner, phi);
    rule.covariance = step.covariance;
    (void)x_raw;
    return inn_norm;
}

TrainResult train_online(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         const TrainConfig& cfg, bool type1, const NormStats* prefit_norm,
                         const std::vector<std::string>& input_names) {
    cfg.validate();
    if (inputs.rows() == 0) throw std::invalid_argument("train_online: empty stream");
    if (inputs.rows() != targets.rows())
        throw std::invalid_argument("train_online: input/target row counts differ");

    const int I = static_cast<int>(inputs.cols());
    const int M = static_cast<int>(targets.cols());
    TrainResult result;
    Network& net = result.network;
    net.input_dim = I;
    net.output_dim = M;
    net.type1 = type1;
    net.q_logit = 0.0;
    net.config = cfg;
    net.input_names = input_names;

    // incremental normalization state (Welford, population convention)
    Eigen::VectorXd run_mean = Eigen::VectorXd::Zero(I);
    Eigen::VectorXd run_m2 = Eigen::VectorXd::Zero(I);
    if (prefit_norm != nullptr) net.norm = *prefit_norm;

    for (long n = 0; n < inputs.rows(); ++n) {
        const Eigen::VectorXd x = inputs.row(n).transpose();
        const Eigen::VectorXd t = targets.row(n).transpose();
        if (!x.allFinite() || !t.allFinite()) {
            std::ostringstream os;
            os << "train_online: non-finite values at sample " << n;
            throw std::invalid_argument(os.str());
        }
        if (prefit_norm == nullptr) {
            const Eigen::VectorXd d = x - run_mean;
            run_mean += d / static_cast<double>(n + 1);
            run_m2 += d.cwiseProduct(x - run_mean);
            net.norm.mean = run_mean;
            net.norm.stddev =
                (run_m2 / static_cast<double>(n + 1)).cwiseSqrt().cwiseMax(kStdFloor);
        }
        const Eigen::VectorXd z = net.normalize(x);

        TrainStep row;
        row.step = n + 1;

        if (net.rules.empty()) {
            net.rules.push_back(
                init_rule(z, GMMState{}, nullptr, cfg, M, net.param_count()));
            row.rule_count = 1;
            row.winning_rule = 0;
            row.innovation_norm = t.norm();
            row.grew = 1;
            result.log.push_back(row);
            continue;
        }

        FiringTrace trace = firing_strengths(z, net);
        type_reduce(trace, net);
        const int winner = select_winning_rule(trace);
        row.winning_rule = winner;

        const GMMState gmm = gmm_from_rules(net);
        const Rule hypothetical =
            init_rule(z, gmm, &net.rules[winner], cfg, M, net.param_count());
        const SignificanceResult cand = rule_significance(summarize_rule(hypothetical), gmm);
        std::vector<double> existing;
        existing.reserve(net.rules.size());
        for (const auto& r : net.rules)
            existing.push_back(rule_significance(summarize_rule(r), gmm).e_total);
        row.e_candidate = cand.e_total;
        row.e_sum = 0.0;
        for (double e : existing) row.e_sum += e;

        if (cand.e_total > 0.0 && should_grow(cand.e_total, existing, cfg.rho)) {
            const int k_before = static_cast<int>(net.rules.size());
            inflate_covariances(net.rules, k_before);
            net.rules.push_back(hypothetical);
            row.grew = 1;
            row.innovation_norm = (t - trace.y_out).norm();
        } else {
            row.innovation_norm = dekf_update(net, winner, x, t, trace);
            ++net.rules[winner].support_count;
        }
        row.rule_count = static_cast<int>(net.rules.size());
        result.log.push_back(row);
    }
    return result;
}

Network reduce_to_type1(const Network& net) {
    Network out = net;
    out.type1 = true;
    out.q_logit = 0.0;
    const int z1 = out.param_count();
    for (auto& r : out.rules) {
        const Eigen::MatrixXd merged = 0.5 * (r.upper_weights + r.lower_weights);
        r.upper_weights = merged;
        r.lower_weights = merged;
        for (auto& a : r.antecedents) a.lower_jumps = a.upper_jumps;
        r.covariance = Eigen::MatrixXd::Identity(z1, z1);
    }
    return out;
}

void write_training_log(const TrainLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open training log for writing: " + path);
    out << "step,rule_count,winning_rule,innovation_norm,grew,e_candidate,e_sum\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    };
    for (const auto& s : log)
        out << s.step << ',' << s.rule_count << ',' << s.winning_rule << ','
            << fmt(s.innovation_norm) << ',' << s.grew << ',' << fmt(s.e_candidate) << ','
            << fmt(s.e_sum) << '\n';
}

}  // namespace evolvid
