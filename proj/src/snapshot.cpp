#include "evolvid/snapshot.hpp"

#include <fstream>

#include <json.hpp>

namespace evolvid {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
    const std::size_t nr = rows.size();
    const std::size_t nc = nr ? rows[0].size() : 0;
    Eigen::MatrixXd m(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) m(r, c) = rows[r][c].get<double>();
    return m;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    json j;
    in >> j;
    return j;
}

void dump_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

void save_network(const Network& net, CoeffKind kind, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["model"] = net.type1 ? "et1qfnn" : "et2qfnn";
    j["coeff"] = coeff_name(kind);
    j["input_dim"] = net.input_dim;
    j["output_dim"] = net.output_dim;
    j["type1"] = net.type1;
    j["q_logit"] = net.q_logit;
    j["skipped_updates"] = net.skipped_updates;
    j["input_names"] = net.input_names;
    j["norm_stats"] = {{"mean", vec_to_json(net.norm.mean)},
                       {"std", vec_to_json(net.norm.stddev)}};
    j["config"] = {{"rho", net.config.rho},     {"delta1", net.config.delta1},
                   {"n_s", net.config.n_s},     {"gamma", net.config.gamma},
                   {"eta", net.config.eta},     {"sigma0", net.config.sigma0},
                   {"seed", net.config.seed}};
    json rules = json::array();
    for (const auto& r : net.rules) {
        json ants = json::array();
        for (const auto& a : r.antecedents)
            ants.push_back({{"mean", a.mean},
                            {"gamma", a.gamma},
                            {"upper_jumps", a.upper_jumps},
                            {"lower_jumps", a.lower_jumps}});
        rules.push_back({{"antecedents", std::move(ants)},
                         {"upper_weights", mat_to_json(r.upper_weights)},
                         {"lower_weights", mat_to_json(r.lower_weights)},
                         {"covariance", mat_to_json(r.covariance)},
                         {"support_count", r.support_count}});
    }
    j["rules"] = std::move(rules);
    dump_json(j, path);
}

std::pair<Network, CoeffKind> load_network(const std::string& path) {
    const json j = load_json(path);
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("unsupported snapshot schema version in " + path);
    Network net;
    net.input_dim = j.at("input_dim").get<int>();
    net.output_dim = j.at("output_dim").get<int>();
    net.type1 = j.at("type1").get<bool>();
    net.q_logit = j.at("q_logit").get<double>();
    net.skipped_updates = j.value("skipped_updates", 0L);
    net.input_names = j.value("input_names", std::vector<std::string>{});
    net.norm.mean = vec_from_json(j.at("norm_stats").at("mean"));
    net.norm.stddev = vec_from_json(j.at("norm_stats").at("std"));
    const json& c = j.at("config");
    net.config.rho = c.at("rho").get<double>();
    net.config.delta1 = c.at("delta1").get<double>();
    net.config.n_s = c.at("n_s").get<int>();
    net.config.gamma = c.at("gamma").get<double>();
    net.config.eta = c.at("eta").get<double>();
    net.config.sigma0 = c.at("sigma0").get<double>();
    net.config.seed = c.at("seed").get<std::uint64_t>();
    for (const json& rj : j.at("rules")) {
        Rule r;
        for (const json& aj : rj.at("antecedents")) {
            QuantumMFParams a;
            a.mean = aj.at("mean").get<double>();
            a.gamma = aj.at("gamma").get<double>();
            a.upper_jumps = aj.at("upper_jumps").get<std::vector<double>>();
            a.lower_jumps = aj.at("lower_jumps").get<std::vector<double>>();
            r.antecedents.push_back(std::move(a));
        }
        r.upper_weights = mat_from_json(rj.at("upper_weights"));
        r.lower_weights = mat_from_json(rj.at("lower_weights"));
        r.covariance = mat_from_json(rj.at("covariance"));
        r.support_count = rj.at("support_count").get<long>();
        net.rules.push_back(std::move(r));
    }
    return {std::move(net), coeff_from_name(j.at("coeff").get<std::string>())};
}

void save_aero_params(const AeroParams& params, const std::string& path) {
    params.validate();
    json j;
    j["schema_version"] = 1;
    j["model"] = "ols";
    j["coeff"] = coeff_name(params.kind);
    j["bias"] = params.bias;
    json slopes;
    const auto& regs = coeff_regressors(params.kind);
    for (std::size_t i = 0; i < regs.size(); ++i)
        slopes[kInputNames[regs[i]]] = params.slopes[i];
    j["slopes"] = std::move(slopes);
    dump_json(j, path);
}

AeroParams load_aero_params(const std::string& path) {
    const json j = load_json(path);
    AeroParams p;
    p.kind = coeff_from_name(j.at("coeff").get<std::string>());
    p.bias = j.at("bias").get<double>();
    for (int reg : coeff_regressors(p.kind))
        p.slopes.push_back(j.at("slopes").at(kInputNames[reg]).get<double>());
    return p;
}

std::string snapshot_model_kind(const std::string& path) {
    return load_json(path).at("model").get<std::string>();
}

}  // namespace evolvid
