// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "vsie/solver.hpp"

namespace vsie::solver {

namespace {

// Complex Givens rotation [c s; -conj(s) c] with real c that zeroes b in (a, b).
void make_rotation(cplx a, cplx b, double& c, cplx& s) {
    const double aa = std::abs(a);
    const double bb = std::abs(b);
    if (bb == 0.0) {
        c = 1.0;
        s = 0.0;
    } else if (aa == 0.0) {
        c = 0.0;
        s = std::conj(b) / bb;
    } else {
        const double rho = std::hypot(aa, bb);
        c = aa / rho;
        s = (a / aa) * std::conj(b) / rho;
    }
}

}  // namespace

GmresResult gmres(const LinearOperator& a, const CVector& b, const GmresConfig& cfg, const CVector* x0) {
    if (!(cfg.tol > 0.0)) throw ArgumentError("gmres: tolerance must be positive");
    if (cfg.restart < 1) throw ArgumentError("gmres: restart must be at least 1");
    const double bnorm = b.norm();
    if (bnorm == 0.0) throw ArgumentError("gmres: right-hand side is zero");
    const Eigen::Index n = b.size();
    const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(cfg.restart, static_cast<std::size_t>(n)));

    GmresResult out;
    out.x = x0 ? *x0 : CVector::Zero(n);
    if (out.x.size() != n) throw ArgumentError("gmres: initial guess has the wrong length");
    CVector r = x0 ? CVector(b - a(out.x)) : b;
    double beta = r.norm();
    out.residual = beta / bnorm;
    if (out.residual <= cfg.tol) {
        out.converged = true;
        return out;
    }

    CMatrix v(n, m + 1);
    CMatrix h(m + 1, m);
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<cplx> sn(static_cast<std::size_t>(m));
    CVector g(m + 1);

    for (std::size_t cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
        out.cycles = cycle;
        out.cycle_starts.push_back(out.history.size());
        h.setZero();
        g.setZero();
        g(0) = beta;
        v.col(0) = r / beta;
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            CVector w = a(v.col(j));
            ++out.iterations;
            for (Eigen::Index i = 0; i <= j; ++i) {
                h(i, j) = v.col(i).dot(w);
                w -= h(i, j) * v.col(i);
            }
            const double hn = w.norm();
            h(j + 1, j) = hn;
            const bool breakdown = hn <= 1e-14 * h.col(j).head(j + 1).norm();
            if (!breakdown) v.col(j + 1) = w / hn;
            for (Eigen::Index i = 0; i < j; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                const cplx t = cs[iu] * h(i, j) + sn[iu] * h(i + 1, j);
                h(i + 1, j) = -std::conj(sn[iu]) * h(i, j) + cs[iu] * h(i + 1, j);
                h(i, j) = t;
            }
            const auto ju = static_cast<std::size_t>(j);
            make_rotation(h(j, j), h(j + 1, j), cs[ju], sn[ju]);
            h(j, j) = cs[ju] * h(j, j) + sn[ju] * h(j + 1, j);
            h(j + 1, j) = 0.0;
            g(j + 1) = -std::conj(sn[ju]) * g(j);
            g(j) = cs[ju] * g(j);
            k = j + 1;
            out.history.push_back(std::abs(g(j + 1)) / bnorm);
            if (out.history.back() <= cfg.tol || breakdown) break;
        }
        const CVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        out.x += v.leftCols(k) * y;
        r = b - a(out.x);
        const double beta_new = r.norm();
        out.residual = beta_new / bnorm;
        if (out.residual <= cfg.tol) {
            out.converged = true;
            break;
        }
        if (beta - beta_new < 1e-14 * beta) {
            out.stagnated = true;
            break;
        }
        beta = beta_new;
    }
    return out;
}

double relative_difference(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw ArgumentError("relative_difference: vectors differ in length");
    const double nb = b.norm();
    if (nb == 0.0) throw ArgumentError("relative_difference: reference vector is zero");
    return (a - b).norm() / nb;
}

}  // namespace vsie::solver
