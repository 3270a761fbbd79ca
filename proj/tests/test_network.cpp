#include <doctest.h>

#include <random>

#include "evolvid/network.hpp"
#include "test_util.hpp"

using namespace evolvid;

namespace {

// single-rule network with given consequent rows, identity normalization
Network single_rule_net(int input_dim, const Eigen::RowVectorXd& upper,
                        const Eigen::RowVectorXd& lower, double q_logit = 0.0) {
    std::mt19937 rng(7);
    Network net = testutil::random_network(rng, input_dim, 1);
    net.q_logit = q_logit;
    net.rules[0].upper_weights = upper;
    net.rules[0].lower_weights = lower;
    return net;
}

}  // namespace

TEST_CASE("firing strengths are membership products") {
    std::mt19937 rng(11);
    const Network net1 = testutil::random_network(rng, 1, 2);
    const auto tr1 = firing_strengths(Eigen::VectorXd::Constant(1, 0.3), net1);
    for (int j = 0; j < 2; ++j) {
        CHECK(tr1.upper_firing[j] == tr1.upper_memberships(j, 0));
        CHECK(tr1.lower_firing[j] == tr1.lower_memberships(j, 0));
    }

    const Network net2 = testutil::random_network(rng, 2, 3);
    const auto tr2 = firing_strengths(testutil::random_input(rng, 2), net2);
    for (int j = 0; j < 3; ++j) {
        CHECK(tr2.upper_firing[j] ==
              doctest::Approx(tr2.upper_memberships(j, 0) * tr2.upper_memberships(j, 1))
                  .epsilon(1e-15));
        CHECK(tr2.upper_firing[j] <= tr2.upper_memberships.row(j).minCoeff() + 1e-15);
        CHECK(tr2.lower_firing[j] <= tr2.lower_memberships.row(j).minCoeff() + 1e-15);
        CHECK(tr2.lower_firing[j] <= tr2.upper_firing[j] + 1e-15);
    }
}

TEST_CASE("firing_strengths on an empty network fails") {
    Network net;
    net.input_dim = 1;
    CHECK_THROWS_AS(firing_strengths(Eigen::VectorXd::Zero(1), net), UntrainedNetworkError);
}

TEST_CASE("type reduction: single rule, firing cancels in the ratio") {
    Eigen::RowVectorXd w(2);
    w << 1.0, 2.0;
    Network net = single_rule_net(1, w, w, 0.0);  // q = 0.5
    const auto tr = forward(Eigen::VectorXd::Constant(1, 3.0), net);
    CHECK(tr.y_upper[0] == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(tr.y_lower[0] == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(tr.y_out[0] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("type reduction: q -> 0 keeps only the upper path") {
    Eigen::RowVectorXd wu(2), wl(2);
    wu << 1.0, 2.0;
    wl << -5.0, 4.0;
    Network net = single_rule_net(1, wu, wl, -40.0);
    const auto tr = forward(Eigen::VectorXd::Constant(1, 3.0), net);
    CHECK(std::abs(tr.y_lower[0]) < 1e-12);
    CHECK(tr.y_out[0] == doctest::Approx(7.0).epsilon(1e-10));
}

TEST_CASE("type reduction: two-rule weighted average") {
    std::mt19937 rng(3);
    Network net = testutil::random_network(rng, 1, 2);
    net.q_logit = 0.0;
    // consequent outputs at x_e = [1, 0]: biases 4 and 8 on both sides
    net.rules[0].upper_weights << 4.0, 0.0;
    net.rules[0].lower_weights << 4.0, 0.0;
    net.rules[1].upper_weights << 8.0, 0.0;
    net.rules[1].lower_weights << 8.0, 0.0;
    FiringTrace tr;
    tr.upper_firing = Eigen::Vector2d(0.75, 0.25);
    tr.lower_firing = Eigen::Vector2d(0.75, 0.25);
    tr.x_ext = Eigen::Vector2d(1.0, 0.0);
    type_reduce(tr, net);
    CHECK(tr.y_out[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("degenerate firing raises with the offending sample") {
    std::mt19937 rng(5);
    Network net = testutil::random_network(rng, 1, 2);
    CHECK_THROWS_AS(forward(Eigen::VectorXd::Constant(1, 1e6), net), DegenerateFiringError);
}

TEST_CASE("forward matches a fixed 2-rule fixture against the oracle") {
    Network net;
    net.input_dim = 2;
    net.output_dim = 1;
    net.q_logit = 0.7;
    net.config.n_s = 3;
    net.norm.mean = Eigen::Vector2d(0.0, 0.0);
    net.norm.stddev = Eigen::Vector2d(1.0, 1.0);
    for (int j = 0; j < 2; ++j) {
        Rule r;
        for (int i = 0; i < 2; ++i) {
            QuantumMFParams a;
            a.mean = j == 0 ? -0.5 + 0.2 * i : 0.8 - 0.3 * i;
            a.gamma = 2.0;
            a.upper_jumps = {0.5, 1.0, 1.5};
            a.lower_jumps = {0.4, 0.8, 1.2};
            r.antecedents.push_back(a);
        }
        r.upper_weights.resize(1, 3);
        r.lower_weights.resize(1, 3);
        r.upper_weights << 1.0 + j, -0.5, 2.0;
        r.lower_weights << 0.5 - j, 1.5, -1.0;
        r.covariance = Eigen::MatrixXd::Identity(1, 1);
        net.rules.push_back(r);
    }
    for (double x1 : {-1.2, 0.0, 0.4, 1.7})
        for (double x2 : {-0.9, 0.3, 1.1}) {
            const auto tr = forward(Eigen::Vector2d(x1, x2), net);
            CHECK(tr.y_out[0] ==
                  doctest::Approx(testutil::oracle_forward(net, {x1, x2})).epsilon(1e-12));
        }
}

TEST_CASE("forward properties on random networks") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const Network net = testutil::random_network(rng, 2, 3);
        const Eigen::VectorXd x = testutil::random_input(rng, 2);
        const auto tr = forward(x, net);
        // additivity is exact
        CHECK(tr.y_out[0] == tr.y_upper[0] + tr.y_lower[0]);
        // oracle agreement
        CHECK(std::abs(tr.y_out[0] - testutil::oracle_forward(net, {x[0], x[1]})) < 1e-12);
        // y_upper / (1-q) is a convex combination of the upper consequents
        double lo = 1e300, hi = -1e300;
        for (const auto& r : net.rules) {
            const double yj = (r.upper_weights * tr.x_ext)(0);
            lo = std::min(lo, yj);
            hi = std::max(hi, yj);
        }
        const double a = tr.y_upper[0] / (1.0 - net.q());
        CHECK(a >= lo - 1e-10);
        CHECK(a <= hi + 1e-10);
    }
}

TEST_CASE("type-1 collapse: degenerate FOU with q = 0.5 gives y_upper == y_lower") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        Network net = testutil::random_network(rng, 2, 3, false, true);
        net.q_logit = 0.0;
        const Eigen::VectorXd x = testutil::random_input(rng, 2);
        const auto tr = forward(x, net);
        CHECK(std::abs(tr.y_upper[0] - tr.y_lower[0]) < 1e-12);
    }
}
