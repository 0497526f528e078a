#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mobeq/solvers/capped_simplex.hpp"
#include "mobeq/solvers/qp.hpp"
#include "mobeq/solvers/root_finding.hpp"
#include "mobeq/solvers/scalar_optimize.hpp"
#include "support/qp_reference.hpp"

using namespace mobeq;

TEST_CASE("root finder solves the affine first-order condition") {
    // g(p) = (2.4 - 2p)/3 vanishes at 1.2.
    auto r = find_root([](double p) { return (2.4 - 2.0 * p) / 3.0; }, 0.2, 2.7, 1e-12);
    REQUIRE(std::abs(r.x - 1.2) < 1e-10);
    REQUIRE(std::abs(r.residual) <= 1e-12);
}

TEST_CASE("root finder tolerates an infinite endpoint value") {
    auto f = [](double x) { return 1.0 / std::sqrt(1.0 - x) - 2.0; };
    auto r = find_root(f, 0.0, 1.0, 1e-12);
    REQUIRE(std::abs(r.x - 0.75) < 1e-9);
}

TEST_CASE("root finder rejects bad brackets") {
    auto pos = [](double) { return 1.0; };
    REQUIRE_THROWS_AS(find_root(pos, 0.0, 1.0), std::invalid_argument);
    auto nan = [](double x) { return x == 0.0 ? std::nan("") : 1.0; };
    REQUIRE_THROWS_AS(find_root(nan, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("root finder handles steep non-affine conditions") {
    auto f = [](double x) { return std::exp(3.0 * x) - 40.0; };
    auto r = find_root(f, 0.0, 3.0, 1e-10);
    REQUIRE(std::abs(r.x - std::log(40.0) / 3.0) < 1e-10);
    REQUIRE(std::abs(r.residual) <= 1e-10);
}

TEST_CASE("scalar maximizer finds smooth interior peaks precisely") {
    const double star = 2.3456789;
    auto f = [&](double x) { return -(x - star) * (x - star); };
    auto r = maximize_1d(f, 0.0, 10.0);
    REQUIRE(std::abs(r.x - star) < 1e-8);
}

TEST_CASE("scalar maximizer returns the left endpoint on plateaus") {
    auto r = maximize_1d([](double) { return 3.5; }, 1.0, 9.0, 100);
    REQUIRE(r.x == 1.0);
    REQUIRE(r.value == 3.5);
    // Two equal peaks: the first one scanned wins.
    auto twin = [](double x) { return -std::min(std::abs(x - 1.0), std::abs(x - 3.0)); };
    auto t = maximize_1d(twin, 0.0, 4.0, 5);
    REQUIRE(t.x == 1.0);
}

TEST_CASE("scalar maximizer finds boundary optima") {
    auto r = maximize_1d([](double x) { return 2.0 * x; }, 0.0, 1.0, 1000);
    REQUIRE(r.x == 1.0);
    REQUIRE_THROWS_AS(maximize_1d([](double x) { return x; }, 0.0, 1.0, 1),
                      std::invalid_argument);
}

namespace {

std::vector<std::function<double(double)>> affine_marginals(
    const std::vector<std::pair<double, double>>& ab) {
    std::vector<std::function<double(double)>> out;
    for (auto [a, b] : ab)
        out.push_back([a, b](double x) { return a + b * x; });
    return out;
}

// Literal 2-arc KKT case analysis for strictly increasing affine marginals.
std::pair<double, double> two_arc_reference(double a0, double b0, double cap0, double a1,
                                            double b1, double cap1, double total) {
    auto c0 = [&](double x) { return a0 + b0 * x; };
    auto c1 = [&](double x) { return a1 + b1 * x; };
    // Shared interior level.
    if (b0 + b1 > 0) {
        const double x0 = (a1 - a0 + b1 * total) / (b0 + b1);
        const double x1 = total - x0;
        if (x0 >= -1e-12 && x1 >= -1e-12 && x0 <= cap0 + 1e-12 && x1 <= cap1 + 1e-12)
            return {std::clamp(x0, 0.0, cap0), std::clamp(x1, 0.0, cap1)};
    }
    if (total <= cap0 && c0(total) <= c1(0)) return {total, 0.0};
    if (total <= cap1 && c1(total) <= c0(0)) return {0.0, total};
    if (total - cap0 >= 0 && total - cap0 <= cap1 && c0(cap0) <= c1(total - cap0))
        return {cap0, total - cap0};
    if (total - cap1 >= 0 && total - cap1 <= cap0 && c1(cap1) <= c0(total - cap1))
        return {total - cap1, cap1};
    throw std::logic_error("two-arc reference found no case");
}

} // namespace

TEST_CASE("capped simplex reproduces the hand-solved two-arc split") {
    // Arc 0: constant 2.7; arc 1: 1.5 + 3z. Level 2.7 at z = 0.4.
    auto x = minimize_capped_simplex_potential(
        affine_marginals({{2.7, 0.0}, {1.5, 3.0}}),
        {std::numeric_limits<double>::infinity(), 1.0}, 1.0);
    REQUIRE(std::abs(x[0] - 0.6) < 1e-9);
    REQUIRE(std::abs(x[1] - 0.4) < 1e-9);
    // Binding cap on arc 1 re-routes the remainder.
    x = minimize_capped_simplex_potential(affine_marginals({{2.7, 0.0}, {1.5, 3.0}}),
                                          {std::numeric_limits<double>::infinity(), 0.3}, 1.0);
    REQUIRE(std::abs(x[0] - 0.7) < 1e-9);
    REQUIRE(std::abs(x[1] - 0.3) < 1e-9);
}

TEST_CASE("capped simplex splits flat ties in index order") {
    auto x = minimize_capped_simplex_potential(affine_marginals({{2.0, 0.0}, {2.0, 0.0}}),
                                               {0.7, 0.7}, 1.0);
    REQUIRE(std::abs(x[0] - 0.7) < 1e-9);
    REQUIRE(std::abs(x[1] - 0.3) < 1e-9);
}

TEST_CASE("capped simplex matches the two-arc case analysis on random data") {
    std::mt19937 rng(90210);
    std::uniform_real_distribution<double> a(0.0, 3.0), b(0.05, 4.0), cap(0.1, 1.5);
    for (int trial = 0; trial < 300; ++trial) {
        const double a0 = a(rng), b0 = b(rng), a1 = a(rng), b1 = b(rng);
        double c0 = cap(rng), c1 = cap(rng);
        if (c0 + c1 < 1.0) c1 = 1.0 - c0 + 0.05; // keep it feasible
        auto want = two_arc_reference(a0, b0, c0, a1, b1, c1, 1.0);
        auto got = minimize_capped_simplex_potential(affine_marginals({{a0, b0}, {a1, b1}}),
                                                     {c0, c1}, 1.0);
        REQUIRE(std::abs(got[0] - want.first) < 1e-8);
        REQUIRE(std::abs(got[1] - want.second) < 1e-8);
    }
}

TEST_CASE("capped simplex satisfies the level condition on larger instances") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> a(0.0, 2.0), b(0.1, 5.0), cap(0.05, 0.8);
    std::uniform_int_distribution<int> arcs(2, 7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = arcs(rng);
        std::vector<std::function<double(double)>> cm;
        std::vector<double> caps;
        double cap_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double aj = a(rng), bj = b(rng);
            if (trial % 2 == 0)
                cm.push_back([aj, bj](double x) { return aj + bj * x; });
            else
                cm.push_back([aj, bj](double x) { return aj + bj * x * x; });
            caps.push_back(cap(rng));
            cap_sum += caps.back();
        }
        if (cap_sum < 1.0) {
            caps[0] += 1.0 - cap_sum + 0.1;
        }
        auto x = minimize_capped_simplex_potential(cm, caps, 1.0);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            REQUIRE(x[j] >= -1e-12);
            REQUIRE(x[j] <= caps[j] + 1e-12);
            sum += x[j];
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-9);
        // Used arcs never exceed the entry level of any arc with slack.
        double used_max = -std::numeric_limits<double>::infinity();
        double slack_min = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (x[j] > 1e-9) used_max = std::max(used_max, cm[j](x[j]));
            if (x[j] < caps[j] - 1e-9) slack_min = std::min(slack_min, cm[j](x[j]));
        }
        REQUIRE(used_max <= slack_min + 1e-7);
    }
}

TEST_CASE("capped simplex rejects infeasible or empty input") {
    auto cm = affine_marginals({{1.0, 1.0}});
    REQUIRE_THROWS_AS(minimize_capped_simplex_potential(cm, {0.5}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(minimize_capped_simplex_potential(cm, {2.0}, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(minimize_capped_simplex_potential({}, {}, 1.0), std::invalid_argument);
}

namespace {

QpProblem simple_problem(int n) {
    QpProblem p;
    p.P = Eigen::MatrixXd::Zero(n, n);
    p.q = Eigen::VectorXd::Zero(n);
    p.A = Eigen::MatrixXd(0, n);
    p.b = Eigen::VectorXd(0);
    p.G = Eigen::MatrixXd(0, n);
    p.h = Eigen::VectorXd(0);
    return p;
}

} // namespace

TEST_CASE("qp: scalar bound example") {
    // min x^2 s.t. x >= 1
    auto p = simple_problem(1);
    p.P << 2.0;
    p.lower = Eigen::VectorXd::Constant(1, 1.0);
    p.upper = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
    auto s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    REQUIRE(std::abs(s.x[0] - 1.0) < 1e-8);
    REQUIRE(std::abs(s.objective - 1.0) < 1e-8);
    REQUIRE(std::abs(s.lower_duals[0] - 2.0) < 1e-6);
    REQUIRE(s.kkt_residual() <= 1e-9);
}

TEST_CASE("qp: equality-only and redundant rows") {
    auto p = simple_problem(2);
    p.P = Eigen::MatrixXd::Identity(2, 2);
    p.A = Eigen::MatrixXd(1, 2);
    p.A << 1, 1;
    p.b = Eigen::VectorXd::Constant(1, 2.0);
    auto s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    REQUIRE(std::abs(s.x[0] - 1.0) < 1e-9);
    REQUIRE(std::abs(s.x[1] - 1.0) < 1e-9);
    REQUIRE(std::abs(s.eq_duals[0] + 1.0) < 1e-7);

    // Duplicating the row must not break anything.
    p.A = Eigen::MatrixXd(2, 2);
    p.A << 1, 1, 1, 1;
    p.b = Eigen::VectorXd::Constant(2, 2.0);
    s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    REQUIRE(std::abs(s.x[0] - 1.0) < 1e-8);
}

TEST_CASE("qp: inconsistent equalities give status infeasible, no exception") {
    auto p = simple_problem(2);
    p.P = Eigen::MatrixXd::Identity(2, 2);
    p.A = Eigen::MatrixXd(2, 2);
    p.A << 1, 1, 1, 1;
    p.b = Eigen::VectorXd(2);
    p.b << 1.0, 2.0;
    REQUIRE(solve_qp(p).status == QpStatus::infeasible);
    // Crossed boxes are inconsistent data too.
    auto p2 = simple_problem(1);
    p2.P << 2.0;
    p2.lower = Eigen::VectorXd::Constant(1, 1.0);
    p2.upper = Eigen::VectorXd::Constant(1, 0.0);
    REQUIRE(solve_qp(p2).status == QpStatus::infeasible);
}

TEST_CASE("qp: semidefinite objective with a linear variable") {
    // min x1^2 - 4 x1 + x2 s.t. x1 = x2, x >= 0  ->  t^2 - 3t, t = 1.5
    auto p = simple_problem(2);
    p.P(0, 0) = 2.0;
    p.q << -4.0, 1.0;
    p.A = Eigen::MatrixXd(1, 2);
    p.A << 1, -1;
    p.b = Eigen::VectorXd::Zero(1);
    p.lower = Eigen::VectorXd::Zero(2);
    p.upper = Eigen::VectorXd::Constant(2, std::numeric_limits<double>::infinity());
    auto s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    REQUIRE(std::abs(s.x[0] - 1.5) < 1e-7);
    REQUIRE(std::abs(s.x[1] - 1.5) < 1e-7);
    REQUIRE(std::abs(s.objective + 2.25) < 1e-8);
}

TEST_CASE("qp: tolerance is applied in scaled units") {
    auto p = simple_problem(1);
    p.P << 2.0e6;
    p.q << -2.0e6;
    p.lower = Eigen::VectorXd::Constant(1, 0.0);
    p.upper = Eigen::VectorXd::Constant(1, 10.0);
    auto s = solve_qp(p);
    REQUIRE(s.status == QpStatus::optimal);
    REQUIRE(std::abs(s.x[0] - 1.0) < 1e-8);
}

TEST_CASE("qp: iteration limit reported honestly") {
    auto p = simple_problem(2);
    p.P = Eigen::MatrixXd::Identity(2, 2);
    p.q << -3.0, 1.0;
    p.G = Eigen::MatrixXd(1, 2);
    p.G << 1, 1;
    p.h = Eigen::VectorXd::Constant(1, 1.0);
    QpOptions opt;
    opt.max_iterations = 0;
    opt.polish = false;
    auto s = solve_qp(p, opt);
    REQUIRE(s.status == QpStatus::iteration_limit);
    REQUIRE(s.kkt_residual() > 1e-9);
}

TEST_CASE("qp: dimension mismatches throw") {
    auto p = simple_problem(2);
    p.q = Eigen::VectorXd::Zero(3);
    REQUIRE_THROWS_AS(solve_qp(p), std::invalid_argument);
    auto p2 = simple_problem(2);
    p2.A = Eigen::MatrixXd::Zero(1, 3);
    p2.b = Eigen::VectorXd::Zero(1);
    REQUIRE_THROWS_AS(solve_qp(p2), std::invalid_argument);
}

TEST_CASE("qp matches subset-enumeration reference on random convex programs") {
    std::mt19937 rng(20240815);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 4;
        Eigen::MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = g(rng);
        QpProblem p = simple_problem(n);
        p.P = R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i) p.q[i] = g(rng);
        Eigen::VectorXd anchor(n);
        for (int i = 0; i < n; ++i) anchor[i] = g(rng);
        if (trial % 3 == 0) {
            p.A = Eigen::MatrixXd(1, n);
            for (int i = 0; i < n; ++i) p.A(0, i) = g(rng);
            p.b = p.A * anchor;
        }
        const int rows = 1 + trial % 3;
        p.G = Eigen::MatrixXd(rows, n);
        p.h = Eigen::VectorXd(rows);
        for (int r = 0; r < rows; ++r) {
            for (int i = 0; i < n; ++i) p.G(r, i) = g(rng);
            p.h[r] = p.G.row(r).dot(anchor) + 0.3 * u(rng); // anchor stays feasible
        }
        if (trial % 2 == 0) {
            p.lower = anchor.array() - 0.2;
            p.upper = anchor.array() + 1.5;
        }
        auto ref = oracles::qp_by_subset_enumeration(p);
        REQUIRE(ref.found);
        auto s = solve_qp(p);
        INFO("trial " << trial);
        REQUIRE(s.status == QpStatus::optimal);
        REQUIRE(std::abs(s.objective - ref.objective) < 1e-6);
        REQUIRE((s.x - ref.x).cwiseAbs().maxCoeff() < 1e-5);
        REQUIRE(s.kkt_residual() <= 1e-9);
    }
}
