#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>

#include "evolvid/aero.hpp"
#include "evolvid/flight_data.hpp"
#include "evolvid/metrics.hpp"
#include "evolvid/snapshot.hpp"
#include "evolvid/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evolvid;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    std::uint64_t seed, const std::string& data_path, double elapsed_ms) {
    json m;
    m["tool"] = "evolvid";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    if (!data_path.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(data_path)));
        m["dataset_fingerprint"] = buf;
    }
    m["elapsed_ms"] = elapsed_ms;
    m["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    std::ofstream out(path);
    out << m.dump(2) << '\n';
}

std::array<AeroParams, 6> load_generator_params(const std::string& spec) {
    if (spec == "table-v-defaults") return table_v_ols_params();
    std::ifstream in(spec);
    if (!in) throw std::runtime_error("cannot open parameter file: " + spec);
    json j;
    in >> j;
    std::array<AeroParams, 6> out = table_v_ols_params();
    for (auto& p : out) {
        const json& cj = j.at(coeff_name(p.kind));
        p.bias = cj.value("bias", 0.0);
        p.slopes.clear();
        for (int reg : coeff_regressors(p.kind))
            p.slopes.push_back(cj.at("slopes").at(kInputNames[reg]).get<double>());
    }
    return out;
}

SplitSetting setting_from_int(int s) {
    if (s == 1) return SplitSetting::Setting1;
    if (s == 2) return SplitSetting::Setting2;
    throw CLI::ValidationError("--setting must be 1 or 2");
}

struct TrainedModel {
    std::string name;  // et2qfnn / et1qfnn / ols
    CoeffKind kind;
};

void train_one(const Dataset& train, CoeffKind kind, const std::string& model,
               const TrainConfig& cfg, const fs::path& out_dir) {
    const std::string stem = std::string(coeff_name(kind)) + "_" + model;
    if (model == "ols") {
        save_aero_params(ols_fit(train, kind), (out_dir / (stem + ".json")).string());
        return;
    }
    const auto& regs = coeff_regressors(kind);
    const int I = static_cast<int>(regs.size());
    Eigen::MatrixXd x(train.size(), I);
    Eigen::MatrixXd t(train.size(), 1);
    const int ti = coeff_target_index(kind);
    for (std::size_t n = 0; n < train.size(); ++n) {
        for (int i = 0; i < I; ++i) x(n, i) = train[n].input(regs[i]);
        t(n, 0) = train[n].target(ti);
    }
    const NormStats full = fit_normalization(train);
    NormStats sub;
    sub.mean.resize(I);
    sub.stddev.resize(I);
    std::vector<std::string> names;
    for (int i = 0; i < I; ++i) {
        sub.mean[i] = full.mean[regs[i]];
        sub.stddev[i] = full.stddev[regs[i]];
        names.emplace_back(kInputNames[regs[i]]);
    }
    TrainResult res = train_online(x, t, cfg, model == "et1qfnn", &sub, names);
    save_network(res.network, kind, (out_dir / (stem + ".json")).string());
    write_training_log(res.log, (out_dir / (stem + "_log.csv")).string());
}

int run(int argc, char** argv) {
    CLI::App app{"Evolving type-2 quantum fuzzy identification of aerodynamic coefficients"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic flight dataset");
    std::string synth_params = "table-v-defaults", synth_out;
    int synth_n = 2128;
    double synth_noise = 0.0;
    std::uint64_t synth_seed = 0;
    synth->add_option("--params", synth_params, "JSON parameter file or 'table-v-defaults'");
    synth->add_option("--n", synth_n, "sample count")->check(CLI::PositiveNumber);
    synth->add_option("--noise", synth_noise, "relative noise scale")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "Train models on a flight dataset");
    std::string tr_data, tr_coeff = "all", tr_model = "et2qfnn", tr_out;
    int tr_setting = 1;
    TrainConfig tr_cfg;
    train->add_option("--data", tr_data, "dataset CSV")->required();
    train->add_option("--coeff", tr_coeff, "CL|CD|CM|CY|CR|CN|all");
    train->add_option("--model", tr_model, "et2qfnn|et1qfnn|ols")
        ->check(CLI::IsMember({"et2qfnn", "et1qfnn", "ols"}));
    train->add_option("--setting", tr_setting, "train/test split setting")
        ->check(CLI::IsMember({1, 2}));
    train->add_option("--rho", tr_cfg.rho, "vigilance parameter");
    train->add_option("--delta1", tr_cfg.delta1, "FOU factor");
    train->add_option("--eta", tr_cfg.eta, "DEKF measurement noise");
    train->add_option("--seed", tr_cfg.seed, "seed");
    train->add_option("--out", tr_out, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate snapshots: TIC table and mean ranks");
    std::string ev_models, ev_data, ev_out = ".";
    int ev_setting = 1;
    eval->add_option("--models", ev_models, "snapshot directory")->required();
    eval->add_option("--data", ev_data, "dataset CSV")->required();
    eval->add_option("--setting", ev_setting, "split setting")->check(CLI::IsMember({1, 2}));
    eval->add_option("--out", ev_out, "output directory");

    // derivatives
    auto* deriv = app.add_subcommand("derivatives", "Delta-method derivative extraction");
    std::string dv_model, dv_data, dv_out = ".";
    double dv_perturb = 0.01;
    deriv->add_option("--model", dv_model, "model snapshot")->required();
    deriv->add_option("--data", dv_data, "dataset CSV")->required();
    deriv->add_option("--perturb", dv_perturb, "perturbation scale")
        ->check(CLI::PositiveNumber);
    deriv->add_option("--out-dir", dv_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2
    }
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t_start]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t_start)
            .count();
    };

    if (synth->parsed()) {
        const auto params = load_generator_params(synth_params);
        const Dataset data = synthesize(params, ManeuverConfig{}, synth_n, synth_noise,
                                        synth_seed);
        save_flight_csv(data, synth_out);
        write_manifest(synth_out + ".manifest.json", "synth",
                       {{"params", synth_params}, {"n", synth_n}, {"noise", synth_noise}},
                       synth_seed, synth_out, elapsed_ms());
        return 0;
    }

    if (train->parsed()) {
        const Dataset data = load_flight_csv(tr_data);
        const auto [train_set, test_set] = split(data, setting_from_int(tr_setting));
        fs::create_directories(tr_out);
        std::vector<CoeffKind> kinds;
        if (tr_coeff == "all")
            kinds.assign(kAllCoeffs.begin(), kAllCoeffs.end());
        else
            kinds.push_back(coeff_from_name(tr_coeff));

        std::size_t max_threads = 6;
        if (const char* env = std::getenv("EVOLVID_THREADS"))
            max_threads = std::max(1, std::atoi(env));
        std::vector<std::future<void>> jobs;
        for (CoeffKind k : kinds) {
            jobs.push_back(std::async(std::launch::async, [&, k] {
                train_one(train_set, k, tr_model, tr_cfg, tr_out);
            }));
            if (jobs.size() >= max_threads) {
                for (auto& j : jobs) j.get();
                jobs.clear();
            }
        }
        for (auto& j : jobs) j.get();
        write_manifest(fs::path(tr_out) / "manifest.json", "train",
                       {{"coeff", tr_coeff},
                        {"model", tr_model},
                        {"setting", tr_setting},
                        {"rho", tr_cfg.rho},
                        {"delta1", tr_cfg.delta1},
                        {"eta", tr_cfg.eta}},
                       tr_cfg.seed, tr_data, elapsed_ms());
        return 0;
    }

    if (eval->parsed()) {
        const Dataset data = load_flight_csv(ev_data);
        const auto [train_set, test_set] = split(data, setting_from_int(ev_setting));
        fs::create_directories(ev_out);
        // snapshots grouped as (model name) x (coefficient)
        std::map<std::string, std::map<CoeffKind, Eigen::VectorXd>> predictions;
        for (const auto& entry : fs::directory_iterator(ev_models)) {
            if (entry.path().extension() != ".json") continue;
            if (entry.path().filename().string().find("manifest") != std::string::npos)
                continue;
            const std::string kind_str = snapshot_model_kind(entry.path().string());
            Eigen::VectorXd pred(test_set.size());
            CoeffKind coeff;
            if (kind_str == "ols") {
                const AeroParams p = load_aero_params(entry.path().string());
                coeff = p.kind;
                for (std::size_t n = 0; n < test_set.size(); ++n)
                    pred[n] = eval_coefficient_model(p, test_set[n]);
            } else {
                auto [net, k] = load_network(entry.path().string());
                coeff = k;
                const auto& regs = coeff_regressors(k);
                if (net.input_dim != static_cast<int>(regs.size()))
                    throw std::runtime_error("snapshot/dataset dimension mismatch: " +
                                             entry.path().string());
                for (std::size_t n = 0; n < test_set.size(); ++n) {
                    Eigen::VectorXd x(net.input_dim);
                    for (int i = 0; i < net.input_dim; ++i)
                        x[i] = test_set[n].input(regs[i]);
                    pred[n] = forward(x, net).y_out[0];
                }
            }
            predictions[kind_str][coeff] = std::move(pred);
        }
        if (predictions.empty()) throw std::runtime_error("no model snapshots in " + ev_models);
        TicTable table;
        for (const auto& [name, _] : predictions) table.models.push_back(name);
        for (CoeffKind k : kAllCoeffs) {
            Eigen::VectorXd measured(test_set.size());
            for (std::size_t n = 0; n < test_set.size(); ++n)
                measured[n] = test_set[n].target(coeff_target_index(k));
            std::vector<double> row;
            bool complete = true;
            for (const auto& name : table.models) {
                auto it = predictions.at(name).find(k);
                if (it == predictions.at(name).end()) {
                    complete = false;
                    break;
                }
                row.push_back(tic(measured, it->second));
            }
            if (complete) table.cells[k] = std::move(row);
        }
        const auto ranks = rank_models(table);  // throws on incomplete tables
        write_tic_table(table, (fs::path(ev_out) / "tic.csv").string());
        write_rank_table(ranks, (fs::path(ev_out) / "mean_rank.csv").string());
        write_manifest(fs::path(ev_out) / "eval.manifest.json", "eval",
                       {{"models", ev_models}, {"setting", ev_setting}}, 0, ev_data,
                       elapsed_ms());
        return 0;
    }

    if (deriv->parsed()) {
        const Dataset data = load_flight_csv(dv_data);
        fs::create_directories(dv_out);
        const NormStats stats = fit_normalization(data);
        const std::string kind_str = snapshot_model_kind(dv_model);
        std::map<std::pair<CoeffKind, std::string>, DerivativeSeries> series;
        CoeffKind coeff;
        if (kind_str == "ols") {
            const AeroParams p = load_aero_params(dv_model);
            coeff = p.kind;
            for (int reg : coeff_regressors(coeff)) {
                const std::string input = kInputNames[reg];
                series[{coeff, input}] =
                    delta_derivatives(p, data, input, stats.stddev[reg], dv_perturb);
            }
        } else {
            auto [net, k] = load_network(dv_model);
            coeff = k;
            for (int reg : coeff_regressors(coeff)) {
                const std::string input = kInputNames[reg];
                series[{coeff, input}] =
                    delta_derivatives(net, k, data, input, stats.stddev[reg], dv_perturb);
            }
        }
        // table restricted to this model's coefficient
        std::vector<ParameterSummary> table;
        for (int reg : coeff_regressors(coeff)) {
            const auto& s = series.at({coeff, kInputNames[reg]});
            table.push_back({std::string(coeff_name(coeff)) + "_" + kInputNames[reg], s.mean,
                             s.median});
            write_histogram_csv(s, (fs::path(dv_out) / ("hist_" + std::string(coeff_name(coeff)) +
                                                        "_" + kInputNames[reg] + ".csv"))
                                       .string());
        }
        write_parameter_table(table, (fs::path(dv_out) / "parameters.csv").string());
        write_manifest(fs::path(dv_out) / "derivatives.manifest.json", "derivatives",
                       {{"model", dv_model}, {"perturb", dv_perturb}}, 0, dv_data,
                       elapsed_ms());
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error&) {
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
