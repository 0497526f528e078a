#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

// Dense convex QP:  min 1/2 x'Px + q'x  s.t.  Ax = b,  Gx <= h,  l <= x <= u.
// P must be symmetric positive semidefinite (zero rows/columns are fine, so
// linear variables cost nothing extra). Solved by a Mehrotra-style primal-dual
// interior-point method with an active-set polish pass for sharp KKT
// certificates. Equality blocks may contain redundant rows (incidence-matrix
// style); inconsistent equalities are detected up front and reported as
// status infeasible rather than thrown. General inequality infeasibility that
// escapes the cheap checks surfaces as iteration-limit.

namespace mobeq {

enum class QpStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        default: return "iteration-limit";
    }
}

struct QpProblem {
    Eigen::MatrixXd P; // n x n
    Eigen::VectorXd q; // n
    Eigen::MatrixXd A; // me x n (may be 0 x n)
    Eigen::VectorXd b;
    Eigen::MatrixXd G; // mi x n (may be 0 x n)
    Eigen::VectorXd h;
    Eigen::VectorXd lower; // size n or empty
    Eigen::VectorXd upper;

    void validate() const {
        const auto n = q.size();
        if (P.rows() != n || P.cols() != n) throw std::invalid_argument("P dimension mismatch");
        if (!P.isApprox(P.transpose(), 1e-12) && (P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("P must be symmetric");
        if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n))
            throw std::invalid_argument("equality block dimension mismatch");
        if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != n))
            throw std::invalid_argument("inequality block dimension mismatch");
        if (lower.size() != 0 && lower.size() != n)
            throw std::invalid_argument("lower bound dimension mismatch");
        if (upper.size() != 0 && upper.size() != n)
            throw std::invalid_argument("upper bound dimension mismatch");
        if (!q.allFinite()) throw std::invalid_argument("q must be finite");
        if (!P.allFinite()) throw std::invalid_argument("P must be finite");
    }
};

struct QpSolution {
    QpStatus status = QpStatus::iteration_limit;
    Eigen::VectorXd x;
    Eigen::VectorXd eq_duals;    // one per A row
    Eigen::VectorXd ineq_duals;  // one per G row, >= 0
    Eigen::VectorXd lower_duals; // one per variable (0 where bound absent)
    Eigen::VectorXd upper_duals;
    double objective = std::numeric_limits<double>::quiet_NaN();
    // KKT residuals in scaled units (cost scaled by max coefficient, rows
    // equilibrated); primal_ineq is the largest constraint violation.
    double stationarity = std::numeric_limits<double>::infinity();
    double primal_eq = 0.0;
    double primal_ineq = 0.0;
    double complementarity = 0.0;
    int iterations = 0;

    double kkt_residual() const {
        return std::max({stationarity, primal_eq, primal_ineq, complementarity});
    }
};

struct QpOptions {
    double tolerance = 1e-9;
    int max_iterations = 100;
    bool polish = true;
    Eigen::VectorXd warm_start; // optional initial x
};

namespace qp_detail {

// Solves the symmetric saddle system [M C'; C 0] by factorizing the
// regularized operator [M+dI C'; C -dI] (Schur complement, Cholesky) and
// refining the answer against the TRUE operator. The regularization only
// preconditions; residuals are driven to the unperturbed system, which is
// what the KKT certificates are measured against.
struct SaddleSolver {
    const Eigen::MatrixXd& M; // true primal block (may be merely PSD)
    const Eigen::MatrixXd& C;
    Eigen::MatrixXd Mreg;
    Eigen::LLT<Eigen::MatrixXd> lltM;
    Eigen::LLT<Eigen::MatrixXd> lltS;
    bool ok = false;

    SaddleSolver(const Eigen::MatrixXd& M_, const Eigen::MatrixXd& C_, double delta)
        : M(M_), C(C_) {
        Mreg = M;
        Mreg.diagonal().array() += delta;
        lltM.compute(Mreg);
        if (lltM.info() != Eigen::Success) return;
        if (C.rows() > 0) {
            Eigen::MatrixXd S = C * lltM.solve(C.transpose());
            S.diagonal().array() += delta;
            lltS.compute(S);
            if (lltS.info() != Eigen::Success) return;
        }
        ok = true;
    }

    void solve_once(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
                    Eigen::VectorXd& dy) const {
        if (C.rows() == 0) {
            dx = lltM.solve(r1);
            dy.resize(0);
            return;
        }
        dy = lltS.solve(C * lltM.solve(r1) - r2);
        dx = lltM.solve(r1 - C.transpose() * dy);
    }

    void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
               Eigen::VectorXd& dy, int refinements = 2) const {
        solve_once(r1, r2, dx, dy);
        for (int it = 0; it < refinements; ++it) {
            Eigen::VectorXd e1 = r1 - (M * dx);
            if (C.rows() > 0) e1 -= C.transpose() * dy;
            Eigen::VectorXd e2 = (C.rows() > 0) ? (r2 - C * dx).eval() : Eigen::VectorXd();
            Eigen::VectorXd cx, cy;
            solve_once(e1, e2, cx, cy);
            dx += cx;
            if (C.rows() > 0) dy += cy;
        }
    }
};

// Factorization with escalating regularization: near degenerate optimal
// faces the sharply regularized system can lose positive definiteness in
// floating point, and since refinement targets the true operator anyway, a
// larger delta only weakens the preconditioner, never the answer.
struct RegularizedSaddle {
    std::unique_ptr<SaddleSolver> solver;
    bool ok = false;

    RegularizedSaddle(const Eigen::MatrixXd& base, const Eigen::MatrixXd& C, double delta0) {
        for (double d = delta0; d <= 1.01e-2; d *= 100.0) {
            solver = std::make_unique<SaddleSolver>(base, C, d);
            if (solver->ok) {
                ok = true;
                return;
            }
        }
    }

    void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
               Eigen::VectorXd& dy, int refinements = 2) const {
        solver->solve(r1, r2, dx, dy, refinements);
    }
};

inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
}

} // namespace qp_detail

inline QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {}) {
    problem.validate();
    const Eigen::Index n = problem.q.size();
    const Eigen::Index me = problem.A.rows();
    const Eigen::Index mg = problem.G.rows();

    QpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.eq_duals = Eigen::VectorXd::Zero(me);
    sol.ineq_duals = Eigen::VectorXd::Zero(mg);
    sol.lower_duals = Eigen::VectorXd::Zero(n);
    sol.upper_duals = Eigen::VectorXd::Zero(n);

    // Inverted boxes are data inconsistency, not a shape error.
    if (problem.lower.size() && problem.upper.size())
        for (Eigen::Index i = 0; i < n; ++i)
            if (problem.lower[i] > problem.upper[i]) {
                sol.status = QpStatus::infeasible;
                return sol;
            }

    // Fold finite bounds into the inequality block; remember provenance.
    struct FoldedRow {
        int kind; // 0 = G row, 1 = upper bound, 2 = lower bound
        Eigen::Index index;
    };
    std::vector<FoldedRow> rows;
    for (Eigen::Index i = 0; i < mg; ++i) rows.push_back({0, i});
    if (problem.upper.size())
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isfinite(problem.upper[i])) rows.push_back({1, i});
    if (problem.lower.size())
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isfinite(problem.lower[i])) rows.push_back({2, i});
    const Eigen::Index mi = static_cast<Eigen::Index>(rows.size());

    // Objective scaling.
    double cost_scale = std::max(1.0, problem.q.cwiseAbs().maxCoeff());
    if (n > 0 && problem.P.size() > 0)
        cost_scale = std::max(cost_scale, problem.P.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd P = problem.P / cost_scale;
    const Eigen::VectorXd q = problem.q / cost_scale;

    // Row-equilibrated equality block.
    Eigen::MatrixXd A(me, n);
    Eigen::VectorXd b(me), eq_row_scale(me);
    for (Eigen::Index i = 0; i < me; ++i) {
        const double r = std::max(1.0, problem.A.row(i).cwiseAbs().maxCoeff());
        A.row(i) = problem.A.row(i) / r;
        b[i] = problem.b[i] / r;
        eq_row_scale[i] = r;
    }

    // Row-equilibrated folded inequality block.
    Eigen::MatrixXd G(mi, n);
    Eigen::VectorXd h(mi), ineq_row_scale(mi);
    for (Eigen::Index k = 0; k < mi; ++k) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        double rhs = 0.0;
        switch (rows[static_cast<std::size_t>(k)].kind) {
            case 0:
                row = problem.G.row(rows[static_cast<std::size_t>(k)].index);
                rhs = problem.h[rows[static_cast<std::size_t>(k)].index];
                break;
            case 1:
                row[rows[static_cast<std::size_t>(k)].index] = 1.0;
                rhs = problem.upper[rows[static_cast<std::size_t>(k)].index];
                break;
            default:
                row[rows[static_cast<std::size_t>(k)].index] = -1.0;
                rhs = -problem.lower[rows[static_cast<std::size_t>(k)].index];
                break;
        }
        const double r = std::max(1.0, row.cwiseAbs().maxCoeff());
        G.row(k) = row / r;
        h[k] = rhs / r;
        ineq_row_scale[k] = r;
        // A zero row with negative rhs can never hold.
        if (row.cwiseAbs().maxCoeff() == 0.0 && rhs < 0.0) {
            sol.status = QpStatus::infeasible;
            return sol;
        }
    }

    const double tol = options.tolerance;

    // Inconsistent equalities are a property of the data; detect them first.
    // Redundant rows (incidence-matrix style blocks are always rank-deficient)
    // are then dropped for the factorizations: a maximal independent subset
    // spans the same constraint set, and the dropped rows keep zero duals,
    // which certifies the same KKT point.
    std::vector<Eigen::Index> eq_keep;
    if (me > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
        const Eigen::Index rank = qr.rank();
        Eigen::VectorXd xls = A.colPivHouseholderQr().solve(b);
        const double resid = (A * xls - b).cwiseAbs().maxCoeff();
        if (resid > std::max(tol, 1e-8) * (1.0 + b.cwiseAbs().maxCoeff())) {
            sol.status = QpStatus::infeasible;
            return sol;
        }
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index k = 0; k < rank; ++k) eq_keep.push_back(perm[k]);
        std::sort(eq_keep.begin(), eq_keep.end());
    }
    const Eigen::Index mr = static_cast<Eigen::Index>(eq_keep.size());
    Eigen::MatrixXd Ar(mr, n);
    Eigen::VectorXd br(mr);
    for (Eigen::Index k = 0; k < mr; ++k) {
        Ar.row(k) = A.row(eq_keep[static_cast<std::size_t>(k)]);
        br[k] = b[eq_keep[static_cast<std::size_t>(k)]];
    }

    const double delta = 1e-10;

    auto finish = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& z, int iterations) {
        sol.x = x;
        sol.iterations = iterations;
        Eigen::VectorXd rd = P * x + q;
        if (mr > 0) rd += Ar.transpose() * y;
        if (mi > 0) rd += G.transpose() * z;
        sol.stationarity = (n > 0) ? rd.cwiseAbs().maxCoeff() : 0.0;
        sol.primal_eq = (me > 0) ? (A * x - b).cwiseAbs().maxCoeff() : 0.0;
        sol.primal_ineq = 0.0;
        sol.complementarity = 0.0;
        if (mi > 0) {
            const Eigen::VectorXd slack = h - G * x;
            sol.primal_ineq = std::max(0.0, (-slack).maxCoeff());
            for (Eigen::Index k = 0; k < mi; ++k)
                sol.complementarity = std::max(sol.complementarity, std::abs(z[k] * slack[k]));
        }
        // Unscale duals back to the original problem (dropped rows keep 0).
        for (Eigen::Index k = 0; k < mr; ++k) {
            const Eigen::Index i = eq_keep[static_cast<std::size_t>(k)];
            sol.eq_duals[i] = y[k] * cost_scale / eq_row_scale[i];
        }
        for (Eigen::Index k = 0; k < mi; ++k) {
            const double zk = std::max(0.0, z[k]) * cost_scale / ineq_row_scale[k];
            const auto& fr = rows[static_cast<std::size_t>(k)];
            if (fr.kind == 0)
                sol.ineq_duals[fr.index] = zk;
            else if (fr.kind == 1)
                sol.upper_duals[fr.index] = zk;
            else
                sol.lower_duals[fr.index] = zk;
        }
        sol.objective = 0.5 * x.dot(problem.P * x) + problem.q.dot(x);
        sol.status = (sol.kkt_residual() <= tol) ? QpStatus::optimal : QpStatus::iteration_limit;
    };

    // No inequalities anywhere: one saddle solve settles it.
    if (mi == 0) {
        qp_detail::RegularizedSaddle kkt(P, Ar, delta);
        if (!kkt.ok) {
            sol.status = QpStatus::iteration_limit;
            return sol;
        }
        Eigen::VectorXd x, y;
        kkt.solve(-q, br, x, y, 3);
        finish(x, y, Eigen::VectorXd(), 0);
        return sol;
    }

    // Interior-point initialization.
    Eigen::VectorXd x;
    if (options.warm_start.size() == n && options.warm_start.allFinite() && n > 0) {
        x = options.warm_start;
    } else {
        qp_detail::SaddleSolver init(P, Ar, 1.0);
        Eigen::VectorXd y0;
        if (init.ok)
            init.solve_once(-q, br, x, y0);
        else
            x = Eigen::VectorXd::Zero(n);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(mr);
    Eigen::VectorXd s(mi), z(mi);
    {
        const Eigen::VectorXd slack0 = h - G * x;
        for (Eigen::Index k = 0; k < mi; ++k) {
            s[k] = std::max(1.0, std::abs(slack0[k]));
            z[k] = 1.0;
        }
    }

    int iter = 0;
    bool converged = false;
    for (; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd rd = P * x + q + G.transpose() * z;
        if (mr > 0) rd += Ar.transpose() * y;
        const Eigen::VectorXd rp = (mr > 0) ? (Ar * x - br).eval() : Eigen::VectorXd();
        const Eigen::VectorXd rg = G * x + s - h;
        const double mu = s.dot(z) / static_cast<double>(mi);
        const double rd_n = (n > 0) ? rd.cwiseAbs().maxCoeff() : 0.0;
        const double rp_n = (mr > 0) ? rp.cwiseAbs().maxCoeff() : 0.0;
        const double rg_n = rg.cwiseAbs().maxCoeff();
        // Complementarity is judged per row against the true slack h - Gx
        // (= s - rg), matching the certificate reported at the end; the
        // average gap alone can hide one loose product.
        double comp = 0.0;
        for (Eigen::Index k = 0; k < mi; ++k)
            comp = std::max(comp, std::abs(z[k] * (s[k] - rg[k])));
        if (rd_n <= tol && rp_n <= tol && rg_n <= tol && comp <= tol) {
            converged = true;
            break;
        }

        Eigen::VectorXd w(mi);
        for (Eigen::Index k = 0; k < mi; ++k)
            w[k] = std::min(std::max(z[k] / s[k], 1e-12), 1e12);
        const Eigen::MatrixXd Mw = P + G.transpose() * w.asDiagonal() * G;
        qp_detail::RegularizedSaddle kkt(Mw, Ar, delta);
        if (!kkt.ok) break;

        auto direction = [&](const Eigen::VectorXd& rsz, Eigen::VectorXd& dx,
                             Eigen::VectorXd& dy, Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
            // Eliminate ds, dz; see header comment for the block structure.
            Eigen::VectorXd rhs1 = -rd;
            Eigen::VectorXd tmp(mi);
            for (Eigen::Index k = 0; k < mi; ++k) tmp[k] = (z[k] * rg[k] - rsz[k]) / s[k];
            rhs1 -= G.transpose() * tmp;
            const Eigen::VectorXd rhs2 = (mr > 0) ? (-rp).eval() : Eigen::VectorXd();
            kkt.solve(rhs1, rhs2, dx, dy, 1);
            ds = -rg - G * dx;
            dz.resize(mi);
            for (Eigen::Index k = 0; k < mi; ++k) dz[k] = (-rsz[k] - z[k] * ds[k]) / s[k];
        };

        // Predictor.
        Eigen::VectorXd rsz = s.cwiseProduct(z);
        Eigen::VectorXd dx, dy, ds, dz;
        direction(rsz, dx, dy, ds, dz);
        const double ap_aff = qp_detail::max_step(s, ds);
        const double ad_aff = qp_detail::max_step(z, dz);
        const double mu_aff =
            (s + ap_aff * ds).dot(z + ad_aff * dz) / static_cast<double>(mi);
        const double ratio = std::max(0.0, mu_aff / mu);
        const double sigma = ratio * ratio * ratio;

        // Corrector.
        for (Eigen::Index k = 0; k < mi; ++k)
            rsz[k] = s[k] * z[k] + ds[k] * dz[k] - sigma * mu;
        direction(rsz, dx, dy, ds, dz);
        const double ap = 0.99 * qp_detail::max_step(s, ds);
        const double ad = 0.99 * qp_detail::max_step(z, dz);
        x += ap * dx;
        s += ap * ds;
        if (mr > 0) y += ad * dy;
        z += ad * dz;
    }

    finish(x, y, z, iter);

    // Polish: re-solve with the apparently active rows as equalities, then
    // keep the candidate if it certifies at least as well.
    if (options.polish) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index k = 0; k < mi; ++k)
            if (z[k] > s[k]) active.push_back(k);
        for (int round = 0; round < 6; ++round) {
            Eigen::MatrixXd C(mr + static_cast<Eigen::Index>(active.size()), n);
            Eigen::VectorXd rhs(C.rows());
            if (mr > 0) {
                C.topRows(mr) = Ar;
                rhs.head(mr) = br;
            }
            for (std::size_t a = 0; a < active.size(); ++a) {
                C.row(mr + static_cast<Eigen::Index>(a)) = G.row(active[a]);
                rhs[mr + static_cast<Eigen::Index>(a)] = h[active[a]];
            }
            qp_detail::RegularizedSaddle kkt(P, C, delta);
            if (!kkt.ok) break;
            Eigen::VectorXd px, pyz;
            kkt.solve(-q, rhs, px, pyz, 3);
            // Negative multipliers mean the working set is too large.
            std::vector<Eigen::Index> keep;
            bool all_nonneg = true;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (pyz[mr + static_cast<Eigen::Index>(a)] >= -tol)
                    keep.push_back(active[a]);
                else
                    all_nonneg = false;
            }
            if (!all_nonneg) {
                active = keep;
                continue;
            }
            Eigen::VectorXd pz = Eigen::VectorXd::Zero(mi);
            for (std::size_t a = 0; a < active.size(); ++a)
                pz[active[a]] = std::max(0.0, pyz[mr + static_cast<Eigen::Index>(a)]);
            const Eigen::VectorXd py = (mr > 0) ? pyz.head(mr).eval() : Eigen::VectorXd();
            QpSolution before = sol;
            finish(px, py, pz, iter);
            if (sol.kkt_residual() <= before.kkt_residual())
                converged = converged || sol.status == QpStatus::optimal;
            else
                sol = before;
            break;
        }
    }
    (void)converged;
    return sol;
}

} // namespace mobeq
