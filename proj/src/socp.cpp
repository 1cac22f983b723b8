#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "limitql/conic.hpp"

namespace limitql {

void ConicProgram::validate() const {
    if (n_free < 0) throw Error("conic program: negative free block");
    for (const int d : cones)
        if (d < 2) throw Error("conic program: cone dimension must be >= 2");
    const int n = n_total();
    if (c.size() != n) throw Error("conic program: objective size mismatch");
    if (A.cols() != n) throw Error("conic program: A column count mismatch");
    if (A.rows() != b.size()) throw Error("conic program: A/b row mismatch");
    if (!c.allFinite() || !b.allFinite()) throw Error("conic program: non-finite data");
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            if (!std::isfinite(it.value())) throw Error("conic program: non-finite data");
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::primal_infeasible: return "primal_infeasible";
        case SolveStatus::dual_infeasible: return "dual_infeasible";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::numerical: return "numerical";
    }
    return "unknown";
}

namespace {

// Homogeneous self-dual interior-point solver for
//   min c'x  s.t.  A x = b,  G x + s = h,  s in a product of second-order
// cones, with Nesterov-Todd scaling and a Mehrotra predictor-corrector.
// The per-cone scaling blocks are stored in expanded sparse form (two extra
// rows per cone) inside a quasi-definite KKT matrix factored by LDL'.
class HsdSolver {
public:
    HsdSolver(const Eigen::SparseMatrix<double>& A_in, const Eigen::SparseMatrix<double>& G_in,
              const Eigen::VectorXd& c_in, const Eigen::VectorXd& b_in,
              const Eigen::VectorXd& h_in, const std::vector<int>& dims_in,
              const SolveOptions& opts_in)
        : A(A_in), G(G_in), c(c_in), b(b_in), h(h_in), dims(dims_in), opts(opts_in) {
        n = static_cast<int>(c.size());
        p = static_cast<int>(b.size());
        m = static_cast<int>(h.size());
        mtilde = m + 2 * static_cast<int>(dims.size());
        dim_K = n + p + mtilde;
        scalings.resize(dims.size());
        equilibrate();
        At = A.transpose();
        Gt = G.transpose();
        setupKKT();
    }

    SolveStatus run();

    // Solution in the original (unequilibrated, tau-scaled-out) space.
    Eigen::VectorXd x, y, z, s;
    double pcost = 0.0, dcost = 0.0, gap = 0.0, relgap = 0.0, pres = 0.0, dres = 0.0;
    int iterations = 0;

private:
    struct ConeScaling {
        double eta_sq = 1.0;
        double a = 0.0;
        double d1 = 1.0;
        double u0 = 0.0;
        double u1 = 0.0;
        double v1 = 0.0;
        Eigen::VectorXd q;  // dim-1
    };

    struct Iterate {
        Eigen::VectorXd x, y, z, s, lambda;
        double tau = 1.0, kap = 1.0;
        double gap = 0.0, mu = 0.0, kapovert = 0.0, pcost = 0.0, dcost = 0.0;
        std::optional<double> relgap, pinfres, dinfres;
        double pres = 0.0, dres = 0.0;
        int iter = 0;

        bool better_than(const Iterate& o) const {
            if (pinfres.has_value() && kapovert > 1.0)
                return gap > 0.0 && o.gap > 0.0 && gap < o.gap && mu > 0.0 && mu < o.mu &&
                       (!o.pinfres.has_value() || (*pinfres > 0.0 && *pinfres < o.pres));
            return gap > 0.0 && o.gap > 0.0 && gap < o.gap && pres > 0.0 && pres < o.pres &&
                   dres > 0.0 && dres < o.dres && kapovert > 0.0 && kapovert < o.kapovert &&
                   mu > 0.0 && mu < o.mu;
        }
    };

    void equilibrate();
    void setupKKT();
    void setIdentityScalings();
    void updateKKTValues();
    bool factorizeKKT();
    bool updateScalings(const Eigen::VectorXd& s_vec, const Eigen::VectorXd& z_vec,
                        Eigen::VectorXd& lambda);
    void scaleW(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;  // out = W v
    void bringToCone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const;
    double conicProduct(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        Eigen::VectorXd& out) const;
    void conicDivision(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       Eigen::VectorXd& out) const;
    double lineSearch(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                      const Eigen::VectorXd& dz, double tau, double dtau, double kap,
                      double dkap) const;
    int solveKKT(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                 Eigen::VectorXd& dz);
    void expandRHS(const Eigen::VectorXd& zpart, Eigen::VectorXd& rhs) const;
    void computeResiduals();
    void updateStatistics();
    SolveStatus checkExit(bool reduced) const;
    bool exactOptimal() const;
    void backscale(const Iterate& it);

    // Problem data (equilibrated in place).
    Eigen::SparseMatrix<double> A, G, At, Gt;
    Eigen::VectorXd c, b, h;
    std::vector<int> dims;
    SolveOptions opts;
    int n = 0, p = 0, m = 0, mtilde = 0, dim_K = 0;

    Eigen::VectorXd xe, Ae, Ge;  // equilibration scalings
    std::vector<ConeScaling> scalings;

    Eigen::SparseMatrix<double> K;
    std::vector<double*> kkt_scale_ptr;
    std::vector<double*> kkt_head_ptr;
    Eigen::VectorXd reg_diag, reg_sign;
    double delta = 1e-8;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt;
    bool analyzed = false;

    Iterate w, w_best;
    Eigen::VectorXd rx, ry, rz, rhs1, rhs2;
    double rt = 0.0, hresx = 0.0, hresy = 0.0, hresz = 0.0;
    double nx = 0.0, ny = 0.0, nz = 0.0, ns = 0.0;
    double resx0 = 1.0, resy0 = 1.0, resz0 = 1.0;

    static constexpr double delta_stat = 1e-8;
    static constexpr double step_gamma = 0.99;
    static constexpr double step_min = 1e-6;
    static constexpr double step_max = 0.999;
    static constexpr double sigma_min = 1e-4;
    static constexpr double sigma_max = 1.0;
    static constexpr double safeguard = 500.0;
    static constexpr int refine_steps = 2;
    static constexpr double refine_acc = 1e-14;
    static constexpr double refine_factor = 6.0;
    static constexpr int equil_iters = 3;
    static constexpr double tol_inacc = 1e-4;
};

void HsdSolver::equilibrate() {
    xe = Eigen::VectorXd::Ones(n);
    Ae = Eigen::VectorXd::Ones(p);
    Ge = Eigen::VectorXd::Ones(m);

    auto max_cols = [](Eigen::VectorXd& e, const Eigen::SparseMatrix<double>& mat) {
        for (int j = 0; j < mat.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it)
                e(j) = std::max(e(j), std::abs(it.value()));
    };
    auto max_rows = [](Eigen::VectorXd& e, const Eigen::SparseMatrix<double>& mat) {
        for (int j = 0; j < mat.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it)
                e(it.row()) = std::max(e(it.row()), std::abs(it.value()));
    };
    auto scale_rows = [](const Eigen::VectorXd& e, Eigen::SparseMatrix<double>& mat) {
        for (int j = 0; j < mat.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it)
                it.valueRef() /= e(it.row());
    };
    auto scale_cols = [](const Eigen::VectorXd& e, Eigen::SparseMatrix<double>& mat) {
        for (int j = 0; j < mat.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, j); it; ++it)
                it.valueRef() /= e(j);
    };
    auto sqrt_or_one = [](double v) { return std::abs(v) < 1e-6 ? 1.0 : std::sqrt(v); };

    for (int iter = 0; iter < equil_iters; ++iter) {
        Eigen::VectorXd xt = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd at = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd gt = Eigen::VectorXd::Zero(m);
        max_cols(xt, A);
        max_cols(xt, G);
        max_rows(at, A);
        max_rows(gt, G);

        int off = 0;
        for (const int d : dims) {
            const double total = gt.segment(off, d).sum();
            gt.segment(off, d).setConstant(total);
            off += d;
        }

        xt = xt.unaryExpr(sqrt_or_one);
        at = at.unaryExpr(sqrt_or_one);
        gt = gt.unaryExpr(sqrt_or_one);

        scale_rows(at, A);
        scale_rows(gt, G);
        scale_cols(xt, A);
        scale_cols(xt, G);

        xe = xe.cwiseProduct(xt);
        Ae = Ae.cwiseProduct(at);
        Ge = Ge.cwiseProduct(gt);
    }

    c = c.cwiseQuotient(xe);
    b = b.cwiseQuotient(Ae);
    h = h.cwiseQuotient(Ge);
}

void HsdSolver::setupKKT() {
    // Upper triangle of
    //   [ dI   A'   G'_expanded ]
    //   [  .  -dI       0       ]
    //   [  .    .      -V       ]
    // where V carries the expanded cone scaling blocks.
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::pair<int, int>> scale_pos;

    std::vector<std::pair<int, int>> head_pos;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, delta_stat);
        head_pos.emplace_back(i, i);
    }
    for (int j = 0; j < p; ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(At, j); it; ++it)
            trip.emplace_back(it.row(), n + j, it.value());
    for (int j = n; j < n + p; ++j) {
        trip.emplace_back(j, j, -delta_stat);
        head_pos.emplace_back(j, j);
    }

    int roff = 0;  // offset within m
    int eoff = 0;  // offset within mtilde
    for (const int d : dims) {
        for (int k = 0; k < d; ++k) {
            const int col = n + p + eoff + k;
            for (Eigen::SparseMatrix<double>::InnerIterator it(Gt, roff + k); it; ++it)
                trip.emplace_back(it.row(), col, it.value());
        }
        const int base = n + p + eoff;
        // D diagonal (d entries).
        for (int k = 0; k < d; ++k) {
            trip.emplace_back(base + k, base + k, -1.0);
            scale_pos.emplace_back(base + k, base + k);
        }
        // v column: rows base+1..base+d-1, col base+d; then its diagonal.
        for (int k = 1; k < d; ++k) {
            trip.emplace_back(base + k, base + d, 0.0);
            scale_pos.emplace_back(base + k, base + d);
        }
        trip.emplace_back(base + d, base + d, -1.0);
        scale_pos.emplace_back(base + d, base + d);
        // u column: rows base..base+d-1, col base+d+1; then its diagonal.
        for (int k = 0; k < d; ++k) {
            trip.emplace_back(base + k, base + d + 1, 0.0);
            scale_pos.emplace_back(base + k, base + d + 1);
        }
        trip.emplace_back(base + d + 1, base + d + 1, 1.0);
        scale_pos.emplace_back(base + d + 1, base + d + 1);

        roff += d;
        eoff += d + 2;
    }

    K.resize(dim_K, dim_K);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();

    kkt_scale_ptr.clear();
    for (const auto& [r, cidx] : scale_pos) kkt_scale_ptr.push_back(&K.coeffRef(r, cidx));
    kkt_head_ptr.clear();
    for (const auto& [r, cidx] : head_pos) kkt_head_ptr.push_back(&K.coeffRef(r, cidx));

    // Sign pattern of the static regularization: K = K0 + delta * reg_sign.
    reg_sign = Eigen::VectorXd::Zero(dim_K);
    reg_sign.head(n).setConstant(1.0);
    reg_sign.segment(n, p).setConstant(-1.0);
    eoff = 0;
    for (const int d : dims) {
        const int base = n + p + eoff;
        reg_sign.segment(base, d).setConstant(-1.0);
        reg_sign(base + d + 1) = 1.0;
        eoff += d + 2;
    }
    reg_diag = delta * reg_sign;
}

void HsdSolver::setIdentityScalings() {
    for (std::size_t ci = 0; ci < dims.size(); ++ci) {
        auto& sc = scalings[ci];
        sc.eta_sq = 1.0;
        sc.a = 0.0;
        sc.d1 = 1.0;
        sc.u0 = sc.u1 = sc.v1 = 0.0;
        sc.q = Eigen::VectorXd::Zero(dims[ci] - 1);
    }
    updateKKTValues();
}

void HsdSolver::updateKKTValues() {
    reg_diag = delta * reg_sign;
    for (int i = 0; i < n; ++i) *kkt_head_ptr[i] = delta;
    for (int j = 0; j < p; ++j) *kkt_head_ptr[n + j] = -delta;
    std::size_t ptr = 0;
    for (std::size_t ci = 0; ci < dims.size(); ++ci) {
        const int d = dims[ci];
        const auto& sc = scalings[ci];
        *kkt_scale_ptr[ptr++] = -sc.eta_sq * sc.d1 - delta;
        for (int k = 1; k < d; ++k) *kkt_scale_ptr[ptr++] = -sc.eta_sq - delta;
        for (int k = 1; k < d; ++k) *kkt_scale_ptr[ptr++] = -sc.eta_sq * sc.v1 * sc.q(k - 1);
        *kkt_scale_ptr[ptr++] = -sc.eta_sq;
        *kkt_scale_ptr[ptr++] = -sc.eta_sq * sc.u0;
        for (int k = 1; k < d; ++k) *kkt_scale_ptr[ptr++] = -sc.eta_sq * sc.u1 * sc.q(k - 1);
        *kkt_scale_ptr[ptr++] = sc.eta_sq + delta;
    }
}

// Factor the KKT matrix, escalating the static regularization if the
// unpivoted LDL' hits a zero pivot. The raised delta is kept for later
// factorizations; iterative refinement corrects for it.
bool HsdSolver::factorizeKKT() {
    for (int attempt = 0; attempt < 4; ++attempt) {
        updateKKTValues();
        ldlt.factorize(K);
        if (ldlt.info() == Eigen::Success) return true;
        delta *= 100.0;
    }
    delta = delta_stat;
    return false;
}

bool HsdSolver::updateScalings(const Eigen::VectorXd& s_vec, const Eigen::VectorXd& z_vec,
                               Eigen::VectorXd& lambda) {
    int off = 0;
    for (std::size_t ci = 0; ci < dims.size(); ++ci) {
        const int d = dims[ci];
        auto& sc = scalings[ci];

        const double sres =
            s_vec(off) * s_vec(off) - s_vec.segment(off + 1, d - 1).squaredNorm();
        const double zres =
            z_vec(off) * z_vec(off) - z_vec.segment(off + 1, d - 1).squaredNorm();
        if (sres <= 0.0 || zres <= 0.0) return false;

        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);
        const Eigen::VectorXd sbar = s_vec.segment(off, d) / snorm;
        const Eigen::VectorXd zbar = z_vec.segment(off, d) / znorm;
        sc.eta_sq = snorm / znorm;

        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        sc.a = 0.5 / gamma * (sbar(0) + zbar(0));
        sc.q = 0.5 / gamma * (sbar.tail(d - 1) - zbar.tail(d - 1));
        const double wq = sc.q.squaredNorm();

        const double cc = (1.0 + sc.a) + wq / (1.0 + sc.a);
        const double dd = 1.0 + 2.0 / (1.0 + sc.a) + wq / ((1.0 + sc.a) * (1.0 + sc.a));
        const double d1 =
            std::max(0.0, 0.5 * (sc.a * sc.a + wq * (1.0 - cc * cc / (1.0 + wq * dd))));
        const double u0_sq = sc.a * sc.a + wq - d1;
        const double c2byu02 = cc * cc / u0_sq;
        if (c2byu02 - dd <= 0.0) return false;

        sc.d1 = d1;
        sc.u0 = std::sqrt(u0_sq);
        sc.u1 = std::sqrt(c2byu02);
        sc.v1 = std::sqrt(c2byu02 - dd);
        off += d;
    }
    scaleW(z_vec, lambda);
    return true;
}

void HsdSolver::scaleW(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.resize(m);
    int off = 0;
    for (std::size_t ci = 0; ci < dims.size(); ++ci) {
        const int d = dims[ci];
        const auto& sc = scalings[ci];
        const double eta = std::sqrt(sc.eta_sq);
        const double zeta = sc.q.dot(v.segment(off + 1, d - 1));
        const double factor = v(off) + zeta / (1.0 + sc.a);
        out(off) = eta * (sc.a * v(off) + zeta);
        out.segment(off + 1, d - 1) = eta * (v.segment(off + 1, d - 1) + factor * sc.q);
        off += d;
    }
}

void HsdSolver::bringToCone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const {
    double alpha = -step_gamma;
    int off = 0;
    for (const int d : dims) {
        const double cres = r(off) - r.segment(off + 1, d - 1).norm();
        if (cres <= 0.0 && -cres > alpha) alpha = -cres;
        off += d;
    }
    alpha += 1.0;
    out = r;
    off = 0;
    for (const int d : dims) {
        out(off) += alpha;
        off += d;
    }
}

double HsdSolver::conicProduct(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                               Eigen::VectorXd& out) const {
    out.resize(m);
    double mu = 0.0;
    int off = 0;
    for (const int d : dims) {
        out(off) = u.segment(off, d).dot(v.segment(off, d));
        mu += std::abs(out(off));
        out.segment(off + 1, d - 1) =
            u(off) * v.segment(off + 1, d - 1) + v(off) * u.segment(off + 1, d - 1);
        off += d;
    }
    return mu;
}

void HsdSolver::conicDivision(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              Eigen::VectorXd& out) const {
    out.resize(m);
    int off = 0;
    for (const int d : dims) {
        const double u0 = u(off);
        const double v0 = v(off);
        const double rho = u0 * u0 - u.segment(off + 1, d - 1).squaredNorm();
        const double zeta = u.segment(off + 1, d - 1).dot(v.segment(off + 1, d - 1));
        const double factor = (zeta / u0 - v0) / rho;
        out(off) = (u0 * v0 - zeta) / rho;
        out.segment(off + 1, d - 1) =
            factor * u.segment(off + 1, d - 1) + v.segment(off + 1, d - 1) / u0;
        off += d;
    }
}

double HsdSolver::lineSearch(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                             const Eigen::VectorXd& dz, double tau, double dtau, double kap,
                             double dkap) const {
    double alpha = 10.0;
    const double mtau = -tau / dtau;
    const double mkap = -kap / dkap;
    if (mtau > 0.0 && mtau < alpha) alpha = mtau;
    if (mkap > 0.0 && mkap < alpha) alpha = mkap;

    int off = 0;
    for (const int d : dims) {
        const double lknorm2 =
            lambda(off) * lambda(off) - lambda.segment(off + 1, d - 1).squaredNorm();
        if (lknorm2 <= 0.0) {
            off += d;
            continue;
        }
        const double lknorm = std::sqrt(lknorm2);
        const Eigen::VectorXd lkbar = lambda.segment(off, d) / lknorm;
        const double lk_ds =
            lkbar(0) * ds(off) - lkbar.tail(d - 1).dot(ds.segment(off + 1, d - 1));
        const double lk_dz =
            lkbar(0) * dz(off) - lkbar.tail(d - 1).dot(dz.segment(off + 1, d - 1));

        double factor = (lk_ds + ds(off)) / (lkbar(0) + 1.0);
        const double rho_norm =
            ((ds.segment(off + 1, d - 1) - factor * lkbar.tail(d - 1)) / lknorm).norm() -
            lk_ds / lknorm;

        factor = (lk_dz + dz(off)) / (lkbar(0) + 1.0);
        const double sigma_norm =
            ((dz.segment(off + 1, d - 1) - factor * lkbar.tail(d - 1)) / lknorm).norm() -
            lk_dz / lknorm;

        const double conic_step = std::max(0.0, std::max(rho_norm, sigma_norm));
        if (conic_step != 0.0) alpha = std::min(alpha, 1.0 / conic_step);
        off += d;
    }
    // No lower clamp: forcing a longer step than the cone allows would push
    // tau or s,z through the boundary. The caller treats alpha < step_min as
    // a stall.
    return std::min(alpha, step_max);
}

void HsdSolver::expandRHS(const Eigen::VectorXd& zpart, Eigen::VectorXd& rhs) const {
    int roff = 0, eoff = 0;
    for (const int d : dims) {
        rhs.segment(n + p + eoff, d) = zpart.segment(roff, d);
        rhs.segment(n + p + eoff + d, 2).setZero();
        roff += d;
        eoff += d + 2;
    }
}

int HsdSolver::solveKKT(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                        Eigen::VectorXd& dz) {
    Eigen::VectorXd sol = ldlt.solve(rhs);
    const double error_threshold = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * refine_acc;

    double nerr_prev = std::numeric_limits<double>::max();
    Eigen::VectorXd correction(dim_K);
    int k_ref;
    for (k_ref = 0; k_ref <= refine_steps; ++k_ref) {
        // Residual against the unregularized KKT matrix.
        Eigen::VectorXd err =
            rhs - K.selfadjointView<Eigen::Upper>() * sol + reg_diag.cwiseProduct(sol);
        const double nerr = err.lpNorm<Eigen::Infinity>();

        if (k_ref > 0 && nerr > nerr_prev) {
            sol -= correction;
            --k_ref;
            break;
        }
        if (k_ref == refine_steps || nerr < error_threshold ||
            (k_ref > 0 && nerr_prev < refine_factor * nerr))
            break;
        nerr_prev = nerr;
        correction = ldlt.solve(err);
        sol += correction;
    }

    dx = sol.head(n);
    dy = sol.segment(n, p);
    dz.resize(m);
    int roff = 0, eoff = 0;
    for (const int d : dims) {
        dz.segment(roff, d) = sol.segment(n + p + eoff, d);
        roff += d;
        eoff += d + 2;
    }
    return k_ref;
}

void HsdSolver::computeResiduals() {
    rx = -Gt * w.z;
    if (p > 0) rx -= At * w.y;
    hresx = rx.norm();
    rx -= w.tau * c;

    if (p > 0) {
        ry = A * w.x;
        hresy = ry.norm();
        ry -= w.tau * b;
    } else {
        ry.resize(0);
        hresy = 0.0;
    }

    rz = w.s + G * w.x;
    hresz = rz.norm();
    rz -= w.tau * h;

    w.pcost = c.dot(w.x);  // scaled by tau below in updateStatistics
    rt = w.kap + c.dot(w.x) + (p > 0 ? b.dot(w.y) : 0.0) + h.dot(w.z);

    nx = w.x.norm();
    ny = w.y.norm();
    nz = w.z.norm();
    ns = w.s.norm();
}

void HsdSolver::updateStatistics() {
    const double cx = c.dot(w.x);
    const double by = p > 0 ? b.dot(w.y) : 0.0;
    const double hz = h.dot(w.z);

    w.gap = w.s.dot(w.z);
    w.mu = (w.gap + w.kap * w.tau) / (static_cast<double>(dims.size()) + 1.0);
    w.kapovert = w.kap / w.tau;
    w.pcost = cx / w.tau;
    w.dcost = -(hz + by) / w.tau;

    if (w.pcost < 0.0)
        w.relgap = w.gap / (-w.pcost);
    else if (w.dcost > 0.0)
        w.relgap = w.gap / w.dcost;
    else
        w.relgap.reset();

    const double nry = p > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
    const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
    w.pres = std::max(nry, nrz) / w.tau;
    w.dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / w.tau;

    w.pinfres.reset();
    w.dinfres.reset();
    if ((hz + by) / std::max(ny + nz, 1.0) < -opts.gap_tol)
        w.pinfres = hresx / std::max(ny + nz, 1.0);
    if (cx / std::max(nx, 1.0) < -opts.gap_tol)
        w.dinfres = std::max(hresy / std::max(nx, 1.0), hresz / std::max(nx + ns, 1.0));

    if (opts.verbose)
        std::fprintf(stderr,
                     "iter %3d  pcost % .6e  dcost % .6e  gap %.3e  pres %.3e  dres %.3e  "
                     "k/t %.3e  mu %.3e\n",
                     w.iter, w.pcost, w.dcost, w.gap, w.pres, w.dres, w.kapovert, w.mu);
}

// Cone and equality feasibility of the unscaled candidate at user tolerance.
bool HsdSolver::exactOptimal() const {
    const Eigen::VectorXd xc = w.x.cwiseQuotient(xe) / w.tau;
    const Eigen::VectorXd sc = w.s.cwiseProduct(Ge) / w.tau;
    const Eigen::VectorXd zc = w.z.cwiseQuotient(Ge) / w.tau;
    const Eigen::VectorXd yc = w.y.cwiseQuotient(Ae) / w.tau;

    const Eigen::VectorXd c0 = c.cwiseProduct(xe);
    const Eigen::VectorXd b0 = b.cwiseProduct(Ae);
    const Eigen::VectorXd h0 = h.cwiseProduct(Ge);

    Eigen::VectorXd Ax(p);
    double pres_exact = 0.0;
    if (p > 0) {
        Eigen::VectorXd ryc = -b0;
        for (int j = 0; j < A.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
                ryc(it.row()) += it.value() * Ae(it.row()) * xe(j) * xc(j);
        pres_exact = ryc.norm() / (1.0 + b0.norm());
    }
    Eigen::VectorXd rzc = sc - h0;
    for (int j = 0; j < G.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(G, j); it; ++it)
            rzc(it.row()) += it.value() * Ge(it.row()) * xe(j) * xc(j);
    pres_exact = std::max(pres_exact, rzc.norm() / (1.0 + h0.norm()));

    double cone_viol = 0.0;
    int off = 0;
    for (const int d : dims) {
        cone_viol = std::max(cone_viol, sc.segment(off + 1, d - 1).norm() - sc(off));
        cone_viol = std::max(cone_viol, zc.segment(off + 1, d - 1).norm() - zc(off));
        off += d;
    }

    const double pobj = c0.dot(xc);
    const double dobj = -(p > 0 ? b0.dot(yc) : 0.0) - h0.dot(zc);
    const double gap_exact = std::abs(pobj - dobj);
    const double relgap_exact = gap_exact / std::max(1.0, std::abs(pobj));

    return pres_exact <= opts.feas_tol && cone_viol <= opts.feas_tol &&
           relgap_exact <= opts.gap_tol;
}

SolveStatus HsdSolver::checkExit(bool reduced) const {
    const double feastol = reduced ? tol_inacc : opts.feas_tol;
    const double abstol = reduced ? tol_inacc : opts.gap_tol;
    const double reltol = reduced ? tol_inacc : opts.gap_tol;

    const double cx = c.dot(w.x);
    const double by = p > 0 ? b.dot(w.y) : 0.0;
    const double hz = h.dot(w.z);

    if ((-cx > 0.0 || -by - hz >= -abstol) && w.pres < feastol && w.dres < feastol &&
        (w.gap < abstol || (w.relgap.has_value() && *w.relgap < reltol))) {
        if (reduced || exactOptimal()) return SolveStatus::optimal;
    }
    if (w.dinfres.has_value() && *w.dinfres < feastol && w.tau < w.kap)
        return SolveStatus::dual_infeasible;
    if ((w.pinfres.has_value() && *w.pinfres < feastol && w.tau < w.kap) ||
        (w.tau < feastol && w.kap < feastol && w.pinfres.has_value() && *w.pinfres < feastol))
        return SolveStatus::primal_infeasible;
    return SolveStatus::max_iter;  // used as "not converged yet"
}

void HsdSolver::backscale(const Iterate& it) {
    x = it.x.cwiseQuotient(xe) / it.tau;
    y = it.y.cwiseQuotient(Ae) / it.tau;
    z = it.z.cwiseQuotient(Ge) / it.tau;
    s = it.s.cwiseProduct(Ge) / it.tau;
    pcost = it.pcost;
    dcost = it.dcost;
    gap = it.gap;
    relgap = it.relgap.value_or(0.0);
    pres = it.pres;
    dres = it.dres;
    iterations = it.iter;
}

SolveStatus HsdSolver::run() {
    setIdentityScalings();
    w.x = Eigen::VectorXd::Zero(n);
    w.y = Eigen::VectorXd::Zero(p);
    w.z = Eigen::VectorXd::Zero(m);
    w.s = Eigen::VectorXd::Zero(m);

    rhs1 = Eigen::VectorXd::Zero(dim_K);
    rhs1.segment(n, p) = b;
    expandRHS(h, rhs1);
    rhs2 = Eigen::VectorXd::Zero(dim_K);
    rhs2.head(n) = -c;

    resx0 = std::max(1.0, c.norm());
    resy0 = std::max(1.0, b.norm());
    resz0 = std::max(1.0, h.norm());

    ldlt.analyzePattern(K);
    if (!factorizeKKT()) {
        if (opts.verbose) std::fprintf(stderr, "initial KKT factorization failed\n");
        return SolveStatus::numerical;
    }

    Eigen::VectorXd dx1(n), dy1(p), dz1(m), dx2(n), dy2(p), dz2(m);

    // Initial primal guess: minimize ||Gx - h|| subject to Ax = b.
    solveKKT(rhs1, dx1, dy1, dz1);
    w.x = dx1;
    bringToCone(-dz1, w.s);

    // Initial dual guess.
    solveKKT(rhs2, dx2, dy2, dz2);
    w.y = dy2;
    bringToCone(dz2, w.z);

    rhs1.head(n) = -c;
    w.kap = 1.0;
    w.tau = 1.0;
    w.lambda.resize(m);

    Eigen::VectorXd W_dzaff(m), ds_by_W(m), ds1(m), ds2(m), dsfin(m);
    double pres_prev = std::numeric_limits<double>::max();
    SolveStatus code = SolveStatus::numerical;
    double last_step = 1.0;

    for (w.iter = 0; w.iter <= opts.max_iter; ++w.iter) {
        computeResiduals();
        updateStatistics();

        if (w.iter > 0 && (w.pres > safeguard * pres_prev || w.gap < 0.0)) {
            w = w_best;
            code = checkExit(true);
            if (code == SolveStatus::max_iter) code = SolveStatus::numerical;
            break;
        }
        pres_prev = w.pres;

        code = checkExit(false);
        if (code != SolveStatus::max_iter) break;

        if (w.iter == opts.max_iter) {
            if (!(w.iter == 0 || w.better_than(w_best))) w = w_best;
            code = checkExit(true);
            if (code == SolveStatus::max_iter) code = SolveStatus::max_iter;
            break;
        }
        if (std::isnan(w.pcost)) {
            if (!(w.iter == 0 || w.better_than(w_best))) {
                w = w_best;
                code = checkExit(true);
            }
            if (code == SolveStatus::max_iter) code = SolveStatus::numerical;
            break;
        }

        if (w.iter == 0 || w.better_than(w_best)) w_best = w;

        if (!updateScalings(w.s, w.z, w.lambda)) {
            w = w_best;
            code = checkExit(true);
            if (code == SolveStatus::max_iter) code = SolveStatus::numerical;
            break;
        }
        if (!factorizeKKT()) {
            w = w_best;
            code = checkExit(true);
            if (code == SolveStatus::max_iter) code = SolveStatus::numerical;
            break;
        }

        solveKKT(rhs1, dx1, dy1, dz1);

        // Affine (predictor) direction.
        rhs2.head(n) = rx;
        rhs2.segment(n, p) = -ry;
        expandRHS(w.s - rz, rhs2);
        solveKKT(rhs2, dx2, dy2, dz2);

        const double dtau_denom =
            w.kap / w.tau - c.dot(dx1) - (p > 0 ? b.dot(dy1) : 0.0) - h.dot(dz1);
        const double dtauaff =
            (rt - w.kap + c.dot(dx2) + (p > 0 ? b.dot(dy2) : 0.0) + h.dot(dz2)) / dtau_denom;

        dz2 += dtauaff * dz1;
        scaleW(dz2, W_dzaff);
        ds_by_W = -W_dzaff - w.lambda;
        const double dkapaff = -w.kap - w.kap / w.tau * dtauaff;

        const double step_aff =
            lineSearch(w.lambda, ds_by_W, W_dzaff, w.tau, dtauaff, w.kap, dkapaff);
        const double sigma =
            std::clamp((1.0 - step_aff) * (1.0 - step_aff) * (1.0 - step_aff), sigma_min,
                       sigma_max);

        // Combined (corrector) direction.
        conicProduct(w.lambda, w.lambda, ds1);
        conicProduct(ds_by_W, W_dzaff, ds2);
        const double sigmamu = sigma * w.mu;
        ds1 += ds2;
        int off = 0;
        for (const int d : dims) {
            ds1(off) -= sigmamu;
            off += d;
        }
        conicDivision(w.lambda, ds1, ds_by_W);
        scaleW(ds_by_W, ds1);

        const double one_minus_sigma = 1.0 - sigma;
        rhs2.head(n) *= one_minus_sigma;
        rhs2.segment(n, p) *= one_minus_sigma;
        expandRHS(-one_minus_sigma * rz + ds1, rhs2);
        solveKKT(rhs2, dx2, dy2, dz2);

        const double bkap = w.kap * w.tau + dkapaff * dtauaff - sigmamu;
        const double dtau = (one_minus_sigma * rt - bkap / w.tau + c.dot(dx2) +
                             (p > 0 ? b.dot(dy2) : 0.0) + h.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        dy2 += dtau * dy1;
        dz2 += dtau * dz1;

        scaleW(dz2, W_dzaff);
        ds_by_W = -(ds_by_W + W_dzaff);
        const double dkap = -(bkap + w.kap * dtau) / w.tau;

        const double step_comb =
            lineSearch(w.lambda, ds_by_W, W_dzaff, w.tau, dtau, w.kap, dkap);
        if (step_comb < step_min) {  // stalled at the cone boundary
            if (!w.better_than(w_best)) w = w_best;
            code = checkExit(true);
            if (code == SolveStatus::max_iter) code = SolveStatus::numerical;
            break;
        }
        last_step = step_gamma * step_comb;
        scaleW(ds_by_W, dsfin);

        w.x += last_step * dx2;
        w.y += last_step * dy2;
        w.z += last_step * dz2;
        w.s += last_step * dsfin;
        w.kap += last_step * dkap;
        w.tau += last_step * dtau;
    }

    backscale(w);
    return code;
}

}  // namespace

SolveReport solve_direct(const ConicProgram& program, const SolveOptions& opts) {
    program.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const int n = program.n_total();
    const int m = program.cone_total();
    if (m == 0) throw Error("solve: program has no cone variables");

    // Embed the cone blocks as inequality slacks: G x + s = 0 with
    // G = -selection of cone columns, so s equals the cone part of x.
    Eigen::SparseMatrix<double> G(m, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(m);
        for (int i = 0; i < m; ++i) trip.emplace_back(i, program.n_free + i, -1.0);
        G.setFromTriplets(trip.begin(), trip.end());
    }
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(m);

    HsdSolver solver(program.A, G, program.c, program.b, h, program.cones, opts);
    const SolveStatus status = solver.run();

    SolveReport report;
    report.status = status;
    report.x = solver.x;
    report.y = solver.y;
    report.z = solver.z;
    report.s = solver.s;
    report.primal_obj = solver.pcost;
    report.dual_obj = solver.dcost;
    report.gap = solver.gap;
    report.rel_gap = solver.relgap;
    report.pres = solver.pres;
    report.dres = solver.dres;
    report.iterations = solver.iterations;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SolveReport solve(const ConicProgram& program, const SolveOptions& opts) {
    if (!opts.presolve) return solve_direct(program, opts);

    Presolved pre = presolve(program);
    if (pre.infeasible) {
        SolveReport report;
        report.status = SolveStatus::primal_infeasible;
        report.message = pre.message;
        report.x = Eigen::VectorXd::Zero(program.n_total());
        return report;
    }
    SolveReport report = solve_direct(pre.program, opts);
    report.x = restore_primal(pre, report.x);
    report.primal_obj += pre.obj_offset;
    report.dual_obj += pre.obj_offset;
    if (report.y.size() > 0) {
        Eigen::VectorXd y_full = Eigen::VectorXd::Zero(program.A.rows());
        for (std::size_t r = 0; r < pre.kept_rows.size(); ++r)
            y_full(pre.kept_rows[r]) = report.y(r) * pre.row_scale(r);
        report.y = y_full;
    }
    // The presolve row scaling occasionally tips an ill-conditioned program
    // over the solver's numerical cliff even though the raw program solves
    // fine; fall back to the untransformed program before giving up.
    if (report.status == SolveStatus::numerical ||
        report.status == SolveStatus::max_iter) {
        SolveReport direct = solve_direct(program, opts);
        if (direct.status == SolveStatus::optimal ||
            (report.status == SolveStatus::numerical &&
             direct.status != SolveStatus::numerical))
            return direct;
    }
    return report;
}

}  // namespace limitql
