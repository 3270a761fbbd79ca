// Acceptance gate: one pass/fail line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "evolvid/aero.hpp"
#include "evolvid/flight_data.hpp"
#include "evolvid/metrics.hpp"
#include "evolvid/snapshot.hpp"
#include "evolvid/train.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace evolvid;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& title, bool ok, const std::string& detail) {
    std::cout << "criterion " << criterion << " [" << title << "]: "
              << (ok ? "PASS" : "FAIL");
    if (!ok && !detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------- criterion 1
void criterion_qmf() {
    std::ostringstream why;
    bool ok = true;
    const double t0 = now_seconds();
    std::mt19937 rng(20240101);
    std::uniform_real_distribution<double> x_d(-4.0, 4.0);
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const QuantumMFParams p = testutil::random_qmf(rng);
        const double eps = 1e-8;
        if (std::abs(eval_qmf(p.mean - eps, p, MFSide::Upper) -
                     eval_qmf(p.mean + eps, p, MFSide::Upper)) >= 1e-6) {
            ok = false;
            why << "continuity break at trial " << trial;
            break;
        }
        const double d = std::abs(x_d(rng));
        const double r = eval_qmf(p.mean + d, p, MFSide::Upper);
        if (std::abs(r - eval_qmf(p.mean - d, p, MFSide::Upper)) >= 1e-12 || r <= 0.0 ||
            r >= 1.0) {
            ok = false;
            why << "symmetry/range break at trial " << trial;
            break;
        }
        double prev_up = 0.0, prev_down = 1.0;
        bool first = true;
        for (int k = 0; k <= 40; ++k) {
            const double xl = p.mean - 4.0 + 0.1 * k;
            const double cur = eval_qmf(xl, p, MFSide::Upper);
            if (!first && cur < prev_up - 1e-14) ok = false;
            prev_up = cur;
            const double xr = p.mean + 0.1 * k;
            const double cur2 = eval_qmf(xr, p, MFSide::Upper);
            if (!first && cur2 > prev_down + 1e-14) ok = false;
            prev_down = cur2;
            first = false;
            auto [u, l] = eval_it2qmf(x_d(rng), p);
            if (l > u) ok = false;
        }
        if (!ok) why << "monotonicity/FOU break at trial " << trial;
    }
    const double elapsed = now_seconds() - t0;
    if (elapsed >= 5.0) {
        ok = false;
        why << " runtime " << elapsed << " s";
    }
    report(1, "quantum membership properties", ok, why.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_type1_collapse() {
    std::ostringstream why;
    bool ok = true;
    std::mt19937 rng(20240202);
    for (int n = 0; n < 100 && ok; ++n) {
        Network net = testutil::random_network(rng, 2, 3, false, true);
        net.q_logit = 0.0;  // q = 0.5
        const Network t1 = reduce_to_type1(net);
        for (int s = 0; s < 100; ++s) {
            const Eigen::VectorXd x = testutil::random_input(rng, 2);
            const double y2 = forward(x, net).y_out[0];
            const double y1 = forward(x, t1).y_out[0];
            if (std::abs(y2 - y1) >= 1e-12) {
                ok = false;
                why << "net " << n << " sample " << s << " |dy| = " << std::abs(y2 - y1);
                break;
            }
        }
    }
    report(2, "type-1 collapse", ok, why.str());
}

// ---------------------------------------------------------------- criterion 3
void criterion_dekf() {
    std::ostringstream why;
    bool ok = true;

    // scalar hand oracle: P = 1, H = 1, eta = 1, innovation = 1
    const auto step = kalman_step(Eigen::MatrixXd::Identity(1, 1),
                                  Eigen::MatrixXd::Identity(1, 1), 1.0,
                                  Eigen::VectorXd::Ones(1));
    if (std::abs(step.gain(0, 0) - 0.5) > 1e-15 ||
        std::abs(step.covariance(0, 0) - 0.5) > 1e-15 ||
        std::abs(step.delta[0] - 0.5) > 1e-15) {
        ok = false;
        why << "scalar oracle mismatch";
    }

    // Jacobian vs central finite differences over 100 random networks
    std::mt19937 rng(20240303);
    for (int n = 0; n < 100 && ok; ++n) {
        const bool type1 = n % 3 == 2;
        Network net = testutil::random_network(rng, 2, 2, type1);
        const Eigen::VectorXd x = testutil::random_input(rng, 2, 1.0);
        const FiringTrace trace = forward(x, net);
        const int winner = select_winning_rule(trace);
        const Eigen::MatrixXd H = dekf_jacobian(net, trace, winner);
        const Eigen::VectorXd phi = pack_params(net, winner);
        const double h = 1e-6;
        for (int z = 0; z < phi.size() && ok; ++z) {
            Network plus = net, minus = net;
            Eigen::VectorXd pp = phi, pm = phi;
            pp[z] += h;
            pm[z] -= h;
            unpack_params(plus, winner, pp);
            unpack_params(minus, winner, pm);
            const double fd =
                (forward(x, plus).y_out[0] - forward(x, minus).y_out[0]) / (2.0 * h);
            const double denom = std::max(std::abs(fd), 1e-6);
            if (std::abs(H(z, 0) - fd) / denom >= 1e-4) {
                ok = false;
                why << "jacobian mismatch net " << n << " param " << z << ": analytic "
                    << H(z, 0) << " fd " << fd;
            }
        }
    }

    // zero-innovation no-op: parameters bitwise unchanged
    if (ok) {
        Network net = testutil::random_network(rng, 2, 2);
        const Eigen::VectorXd x = testutil::random_input(rng, 2, 1.0);
        const FiringTrace trace = forward(x, net);
        const int winner = select_winning_rule(trace);
        const Eigen::VectorXd before = pack_params(net, winner);
        Eigen::VectorXd target(1);
        target[0] = trace.y_out[0];
        dekf_update(net, winner, x, target, trace);
        const Eigen::VectorXd after = pack_params(net, winner);
        for (int z = 0; z < before.size(); ++z)
            if (before[z] != after[z]) {
                ok = false;
                why << "zero-innovation changed param " << z;
                break;
            }
    }
    report(3, "DEKF correctness", ok, why.str());
}

// ---------------------------------------------------------------- criterion 4
void criterion_ols_roundtrip() {
    std::ostringstream why;
    bool ok = true;
    const auto truth = table_v_ols_params();
    const Dataset data = synthesize(truth, ManeuverConfig{}, 2128, 0.0, 11);
    for (const AeroParams& p : truth) {
        const AeroParams fit = ols_fit(data, p.kind);
        double err = std::abs(fit.bias - p.bias);
        for (std::size_t i = 0; i < p.slopes.size(); ++i)
            err = std::max(err, std::abs(fit.slopes[i] - p.slopes[i]));
        if (err >= 1e-8) {
            ok = false;
            why << coeff_name(p.kind) << " max abs error " << err << "; ";
        }
    }
    report(4, "OLS round trip", ok, why.str());
}

// ------------------------------------------------------- criteria 5, 6 and 7
struct EndToEnd {
    std::map<CoeffKind, TrainResult> nets;
    std::map<CoeffKind, AeroParams> ols;
    Dataset train_set, test_set;
    NormStats train_stats;
    double elapsed = 0.0;
};

EndToEnd run_end_to_end() {
    EndToEnd r;
    const double t0 = now_seconds();
    const auto truth = table_v_ols_params();
    const Dataset data = synthesize(truth, ManeuverConfig{}, 2128, 0.01, 2024);
    std::tie(r.train_set, r.test_set) = split(data, SplitSetting::Setting1);
    r.train_stats = fit_normalization(r.train_set);
    for (CoeffKind k : kAllCoeffs) {
        const auto& regs = coeff_regressors(k);
        const int I = static_cast<int>(regs.size());
        Eigen::MatrixXd x(r.train_set.size(), I);
        Eigen::MatrixXd t(r.train_set.size(), 1);
        const int ti = coeff_target_index(k);
        for (std::size_t n = 0; n < r.train_set.size(); ++n) {
            for (int i = 0; i < I; ++i) x(n, i) = r.train_set[n].input(regs[i]);
            t(n, 0) = r.train_set[n].target(ti);
        }
        NormStats sub;
        sub.mean.resize(I);
        sub.stddev.resize(I);
        std::vector<std::string> names;
        for (int i = 0; i < I; ++i) {
            sub.mean[i] = r.train_stats.mean[regs[i]];
            sub.stddev[i] = r.train_stats.stddev[regs[i]];
            names.emplace_back(kInputNames[regs[i]]);
        }
        TrainConfig cfg;  // rho = 0.65, delta1 = 0.8
        r.nets[k] = train_online(x, t, cfg, false, &sub, names);
        r.ols[k] = ols_fit(r.train_set, k);
    }
    r.elapsed = now_seconds() - t0;
    return r;
}

double test_tic(const EndToEnd& r, CoeffKind k, bool use_net) {
    const auto& regs = coeff_regressors(k);
    const int ti = coeff_target_index(k);
    Eigen::VectorXd z(r.test_set.size()), y(r.test_set.size());
    for (std::size_t n = 0; n < r.test_set.size(); ++n) {
        z[n] = r.test_set[n].target(ti);
        if (use_net) {
            Eigen::VectorXd x(regs.size());
            for (std::size_t i = 0; i < regs.size(); ++i) x[i] = r.test_set[n].input(regs[i]);
            y[n] = forward(x, r.nets.at(k).network).y_out[0];
        } else {
            y[n] = eval_coefficient_model(r.ols.at(k), r.test_set[n]);
        }
    }
    return tic(z, y);
}

void criterion_end_to_end(const EndToEnd& r) {
    std::ostringstream why;
    bool ok = true;
    for (CoeffKind k : kAllCoeffs) {
        const double t_net = test_tic(r, k, true);
        const double t_ols = test_tic(r, k, false);
        if (!(t_net < 0.35)) {
            ok = false;
            why << coeff_name(k) << " TIC " << t_net << " >= 0.35; ";
        }
        if (k == CoeffKind::CL && !(t_net < 0.05)) {
            ok = false;
            why << "CL TIC " << t_net << " >= 0.05; ";
        }
        if (!(t_net <= 2.0 * t_ols)) {
            ok = false;
            why << coeff_name(k) << " TIC " << t_net << " > 2x OLS " << t_ols << "; ";
        }
    }
    if (!(r.elapsed < 120.0)) {
        ok = false;
        why << "runtime " << r.elapsed << " s";
    }
    report(5, "end-to-end synthetic identification", ok, why.str());
}

void criterion_delta_recovery(const EndToEnd& r) {
    std::ostringstream why;
    bool ok = true;
    const auto truth = table_v_ols_params();
    for (const AeroParams& p : truth) {
        const auto& regs = coeff_regressors(p.kind);
        // three largest-|value| generator parameters for this coefficient
        std::vector<int> order(regs.size());
        for (std::size_t i = 0; i < regs.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(p.slopes[a]) > std::abs(p.slopes[b]);
        });
        const std::size_t top = std::min<std::size_t>(3, order.size());
        for (std::size_t o = 0; o < top; ++o) {
            const int i = order[o];
            const int reg = regs[i];
            const std::string input = kInputNames[reg];
            const auto series = delta_derivatives(r.nets.at(p.kind).network, p.kind,
                                                  r.train_set, input,
                                                  r.train_stats.stddev[reg]);
            const double truth_v = p.slopes[i];
            const double err = std::abs(series.mean - truth_v);
            const bool fine = std::abs(truth_v) < 0.2 ? err <= 0.05
                                                      : err <= 0.25 * std::abs(truth_v);
            if (!fine) {
                ok = false;
                why << coeff_name(p.kind) << "_" << input << " mean " << series.mean
                    << " vs " << truth_v << "; ";
            }
        }
        // OLS delta derivatives equal the fitted slopes
        const AeroParams& fit = r.ols.at(p.kind);
        for (std::size_t i = 0; i < regs.size(); ++i) {
            const std::string input = kInputNames[regs[i]];
            const auto s = delta_derivatives(fit, r.train_set, input,
                                             r.train_stats.stddev[regs[i]]);
            if (std::abs(s.mean - fit.slopes[i]) >= 1e-8) {
                ok = false;
                why << "OLS " << coeff_name(p.kind) << "_" << input << " delta " << s.mean
                    << " vs slope " << fit.slopes[i] << "; ";
            }
        }
    }
    report(6, "delta-method recovery", ok, why.str());
}

void criterion_rule_economy(const EndToEnd& r) {
    std::ostringstream why;
    bool ok = true;
    std::vector<int> counts;
    for (CoeffKind k : kAllCoeffs) {
        const TrainResult& res = r.nets.at(k);
        counts.push_back(static_cast<int>(res.network.rules.size()));
        int prev = 0;
        for (const TrainStep& s : res.log) {
            if (s.rule_count < prev) {
                ok = false;
                why << coeff_name(k) << " rule count dropped at step " << s.step << "; ";
                break;
            }
            prev = s.rule_count;
        }
    }
    const double mean = rule_count_stats(counts);
    if (!(mean <= 12.0)) {
        ok = false;
        why << "mean rule count " << mean;
    }
    report(7, "rule economy", ok, why.str());
}

// ---------------------------------------------------------------- criterion 8
void criterion_metrics() {
    std::ostringstream why;
    bool ok = true;
    Eigen::VectorXd z(2), y(2);
    z << 1.0, 2.0;
    y << 1.0, 0.0;
    if (std::abs(tic(z, y) - 0.61803) > 1e-5) {
        ok = false;
        why << "tic([1,2],[1,0]) = " << tic(z, y) << "; ";
    }
    TicTable t1;
    t1.models = {"ols", "et1qfnn", "et2qfnn", "anfis", "nn"};
    t1.cells[CoeffKind::CL] = {0.00341, 0.003412, 0.003408, 0.00355, 0.003594};
    t1.cells[CoeffKind::CD] = {0.0162, 0.01177, 0.01155, 0.01858, 0.01189};
    t1.cells[CoeffKind::CM] = {0.25887, 0.25857, 0.16775, 0.2032, 0.19474};
    t1.cells[CoeffKind::CY] = {0.05795, 0.05817, 0.05668, 0.06158, 0.08962};
    t1.cells[CoeffKind::CR] = {0.23139, 0.17433, 0.15043, 0.16016, 0.29472};
    t1.cells[CoeffKind::CN] = {0.11202, 0.1172, 0.10968, 0.11966, 0.11886};
    if (std::abs(rank_models(t1).at("et2qfnn") - 1.0) > 1e-12) {
        ok = false;
        why << "setting-1 mean rank " << rank_models(t1).at("et2qfnn") << "; ";
    }
    TicTable t2;
    t2.models = t1.models;
    t2.cells[CoeffKind::CL] = {0.00501, 0.004975, 0.003906, 0.003909, 0.004707};
    t2.cells[CoeffKind::CD] = {0.01732, 0.01341, 0.01527, 0.02265, 0.01742};
    t2.cells[CoeffKind::CM] = {0.32644, 0.32608, 0.28153, 0.25846, 0.22514};
    t2.cells[CoeffKind::CY] = {0.05449, 0.0409, 0.0455, 0.093, 0.05379};
    t2.cells[CoeffKind::CR] = {0.26752, 0.28506, 0.23861, 0.39095, 0.23282};
    t2.cells[CoeffKind::CN] = {0.149, 0.08157, 0.11166, 0.1698, 0.31176};
    if (std::abs(rank_models(t2).at("et2qfnn") - 2.0) > 1e-12) {
        ok = false;
        why << "setting-2 mean rank " << rank_models(t2).at("et2qfnn");
    }
    report(8, "metrics fidelity", ok, why.str());
}

// ---------------------------------------------------------------- criterion 9
std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

bool run_cli(const std::string& args) {
    const std::string cmd = std::string(EVOLVID_CLI_PATH) + " " + args;
    return std::system(cmd.c_str()) == 0;
}

bool compare_trees(const fs::path& a, const fs::path& b, std::ostringstream& why) {
    std::vector<std::string> names;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), a).string();
        if (rel.find("manifest") != std::string::npos) continue;
        names.push_back(rel);
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
        why << "no files produced; ";
        return false;
    }
    for (const auto& rel : names) {
        if (!fs::exists(b / rel)) {
            why << rel << " missing from second run; ";
            return false;
        }
        if (read_bytes(a / rel) != read_bytes(b / rel)) {
            why << rel << " differs; ";
            return false;
        }
    }
    return true;
}

void criterion_determinism() {
    std::ostringstream why;
    bool ok = true;
    const fs::path root = fs::temp_directory_path() / "evolvid_acceptance";
    fs::remove_all(root);
    const fs::path run_a = root / "a", run_b = root / "b";
    fs::create_directories(run_a);
    fs::create_directories(run_b);
#ifdef _WIN32
#else
    setenv("EVOLVID_THREADS", "2", 1);
#endif
    for (const fs::path& run : {run_a, run_b}) {
        const std::string data = (run / "flight.csv").string();
        ok = ok && run_cli("synth --n 400 --noise 0.01 --seed 7 --out " + data);
        ok = ok &&
             run_cli("train --data " + data + " --model et2qfnn --seed 7 --out " +
                     (run / "models").string());
        ok = ok && run_cli("train --data " + data + " --model ols --seed 7 --out " +
                           (run / "models").string());
        ok = ok && run_cli("eval --models " + (run / "models").string() + " --data " + data +
                           " --out " + (run / "reports").string());
        ok = ok && run_cli("derivatives --model " + (run / "models" / "CL_et2qfnn.json").string() +
                           " --data " + data + " --out-dir " + (run / "derivs").string());
    }
    if (!ok)
        why << "CLI invocation failed; ";
    else
        ok = compare_trees(run_a, run_b, why);
    fs::remove_all(root);
    report(9, "CLI determinism", ok, why.str());
}

}  // namespace

int main() {
    criterion_qmf();
    criterion_type1_collapse();
    criterion_dekf();
    criterion_ols_roundtrip();
    const EndToEnd e2e = run_end_to_end();
    criterion_end_to_end(e2e);
    criterion_delta_recovery(e2e);
    criterion_rule_economy(e2e);
    criterion_metrics();
    criterion_determinism();
    if (g_failures) {
        std::cout << g_failures << " criteria failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
