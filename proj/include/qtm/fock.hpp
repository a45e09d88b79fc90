// fock.hpp - Full nonlinear two-oscillator engine on a truncated Fock space:
// operators, Lindblad generator, steady state and transport observables.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "qtm/errors.hpp"
#include "qtm/params.hpp"
#include "qtm/units.hpp"

namespace qtm::fock {

using cd = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cd>;

// Highest retained Fock level per mode. Composite index is n_c * (n_max_h + 1) + n_h.
struct FockCutoff {
    int n_max_c{2};
    int n_max_h{2};

    int levels_c() const { return n_max_c + 1; }
    int levels_h() const { return n_max_h + 1; }
    int dim() const { return levels_c() * levels_h(); }
    int index(int n_c, int n_h) const { return n_c * levels_h() + n_h; }
    int n_c_of(int k) const { return k / levels_h(); }
    int n_h_of(int k) const { return k % levels_h(); }

    friend bool operator==(const FockCutoff&, const FockCutoff&) = default;
};

struct DenseOperator {
    Eigen::MatrixXcd matrix;
    std::string label;
};

// Associated Laguerre polynomial L_n^(1)(x) by the three-term recurrence.
inline double laguerre_assoc(int n, double x) {
    if (n < 0) throw DomainError("laguerre_assoc: negative order");
    double prev = 1.0;
    if (n == 0) return prev;
    double curr = 2.0 - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 2.0 - x) * curr - (k + 1.0) * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

// Diagonal of the nonlinear junction operator A for one mode.
inline Eigen::VectorXd junction_profile(double lambda, int n_max) {
    if (!(lambda > 0.0)) throw DomainError("junction_profile: lambda must be positive");
    Eigen::VectorXd d(n_max + 1);
    const double pref = 2.0 * lambda * std::exp(-2.0 * lambda * lambda);
    const double x = 4.0 * lambda * lambda;
    for (int n = 0; n <= n_max; ++n) d[n] = pref * laguerre_assoc(n, x) / (n + 1.0);
    return d;
}

inline DenseOperator build_A_operator(double lambda, int n_max) {
    return {junction_profile(lambda, n_max).cast<cd>().asDiagonal(), "A(lambda=" + std::to_string(lambda) + ")"};
}

enum class Interaction {
    josephson,   // (E_J/2)(a_h^+ A_h A_c a_c + h.c.)
    bilinear,    // g (a_h^+ a_c + h.c.), the Gaussian approximation
};

struct EngineOptions {
    Interaction interaction{Interaction::josephson};
    double bilinear_g{0.0};
    // Use kappa_h n_c on D[a_c^+] instead
    // of the detailed-balance rate kappa_c n_c. Comparison only.
    bool hot_rate_on_cold_pump{false};
    // Solve on all D^2 matrix elements instead of the excitation-balanced sector.
    bool full_space{false};
};

// H = strength * (X^+ + X) with X = a_c^+ P_c P_h a_h and diagonal profiles P.
struct Coupling {
    double strength{0.0};
    Eigen::VectorXd profile_c;
    Eigen::VectorXd profile_h;
};

inline Coupling make_coupling(const MachineParams& p, const FockCutoff& cut, const EngineOptions& opt = {}) {
    if (opt.interaction == Interaction::bilinear)
        return {opt.bilinear_g, Eigen::VectorXd::Ones(cut.levels_c()), Eigen::VectorXd::Ones(cut.levels_h())};
    return {0.5 * p.ej, junction_profile(p.lambda_c, cut.n_max_c), junction_profile(p.lambda_h, cut.n_max_h)};
}

namespace detail {

inline void check_cutoff(const FockCutoff& cut) {
    if (cut.n_max_c < 1 || cut.n_max_h < 1) throw DomainError("Fock cutoff must be at least 1 per mode");
}

inline SparseMatrix identity(int n) {
    SparseMatrix m(n, n);
    m.setIdentity();
    return m;
}

// Truncated annihilation operator: a|n> = sqrt(n)|n-1>.
inline SparseMatrix annihilation(int n_max) {
    std::vector<Eigen::Triplet<cd>> t;
    for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(double(n)));
    SparseMatrix m(n_max + 1, n_max + 1);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline SparseMatrix diagonal(const Eigen::VectorXd& d) {
    std::vector<Eigen::Triplet<cd>> t;
    for (Eigen::Index n = 0; n < d.size(); ++n) t.emplace_back(n, n, d[n]);
    SparseMatrix m(d.size(), d.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    std::vector<Eigen::Triplet<cd>> t;
    t.reserve(std::size_t(a.nonZeros() * b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
                    t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                   ia.value() * ib.value());
    SparseMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline SparseMatrix mode_c(const SparseMatrix& op, const FockCutoff& cut) {
    return kron(op, identity(cut.levels_h()));
}
inline SparseMatrix mode_h(const SparseMatrix& op, const FockCutoff& cut) {
    return kron(identity(cut.levels_c()), op);
}

// X = a_c^+ P_c P_h a_h
inline SparseMatrix hop_operator(const Coupling& c, const FockCutoff& cut) {
    const SparseMatrix ac = mode_c(annihilation(cut.n_max_c), cut);
    const SparseMatrix ah = mode_h(annihilation(cut.n_max_h), cut);
    const SparseMatrix pc = mode_c(diagonal(c.profile_c), cut);
    const SparseMatrix ph = mode_h(diagonal(c.profile_h), cut);
    return SparseMatrix(ac.adjoint()) * pc * ph * ah;
}

inline SparseMatrix hamiltonian(const Coupling& c, const FockCutoff& cut) {
    const SparseMatrix x = hop_operator(c, cut);
    return c.strength * (SparseMatrix(x.adjoint()) + x);
}

// Photon flow c -> h (1/ns); the charge current is 2e times this.
inline SparseMatrix flow_operator(const Coupling& c, const FockCutoff& cut) {
    const SparseMatrix x = hop_operator(c, cut);
    return cd(0.0, c.strength) * (x - SparseMatrix(x.adjoint()));
}

} // namespace detail

inline DenseOperator build_hamiltonian(const MachineParams& p, const FockCutoff& cut, const EngineOptions& opt = {}) {
    detail::check_cutoff(cut);
    return {Eigen::MatrixXcd(detail::hamiltonian(make_coupling(p, cut, opt), cut)), "H"};
}

// Charge-current operator in pA.
inline DenseOperator build_current_operator(const MachineParams& p, const FockCutoff& cut, const EngineOptions& opt = {}) {
    detail::check_cutoff(cut);
    const double scale = units::flow_to_pa(1.0, 2.0 * units::elementary_charge);
    return {scale * Eigen::MatrixXcd(detail::flow_operator(make_coupling(p, cut, opt), cut)), "I [pA]"};
}

struct DissipatorRates {
    double down_c{0.0};   // on D[a_c]
    double up_c{0.0};     // on D[a_c^+]
    double down_h{0.0};
    double up_h{0.0};
};

inline DissipatorRates dissipator_rates(const MachineParams& p, const BathState& b, const EngineOptions& opt = {}) {
    return {p.kappa_c * (b.n_c + 1.0), (opt.hot_rate_on_cold_pump ? p.kappa_h : p.kappa_c) * b.n_c,
            p.kappa_h * (b.n_h + 1.0), p.kappa_h * b.n_h};
}

// Generator acting on vectorized density operators. By default only matrix
// elements |i><j| with equal total excitation are kept: the Hamiltonian
// conserves n_c + n_h and every dissipator shifts both sides together, so
// that sector is invariant and contains the steady state.
struct Liouvillian {
    FockCutoff cutoff;
    SparseMatrix generator;
    std::vector<std::pair<int, int>> basis;  // (row, col) of rho per vector slot
    std::vector<int> diagonal;               // slot of rho(k, k)
    std::vector<int> slot_of;                // row + col * D -> slot, or -1
    DissipatorRates rates;
    bool full_space{false};

    int size() const { return int(basis.size()); }

    Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) const {
        Eigen::VectorXcd v(size());
        for (int s = 0; s < size(); ++s) v[s] = rho(basis[s].first, basis[s].second);
        return v;
    }

    Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v) const {
        const int d = cutoff.dim();
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
        for (int s = 0; s < size(); ++s) rho(basis[s].first, basis[s].second) = v[s];
        return rho;
    }

    Eigen::VectorXcd apply(const Eigen::MatrixXcd& rho) const { return generator * vectorize(rho); }

    // max over columns of |sum_k L(diag k, column)|; zero for a trace-preserving generator.
    double trace_residual() const {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(size());
        std::vector<char> is_diag(size(), 0);
        for (int s : diagonal) is_diag[s] = 1;
        for (int k = 0; k < generator.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(generator, k); it; ++it)
                if (is_diag[it.row()]) acc[it.col()] += it.value();
        return acc.cwiseAbs().maxCoeff();
    }

    // Induced 1-norm (max absolute column sum).
    double norm() const {
        double best = 0.0;
        for (int k = 0; k < generator.outerSize(); ++k) {
            double col = 0.0;
            for (SparseMatrix::InnerIterator it(generator, k); it; ++it) col += std::abs(it.value());
            best = std::max(best, col);
        }
        return best;
    }
};

namespace detail {

// Adds coeff * (rho -> A rho B) restricted to the slots of L.
inline void add_product(std::vector<Eigen::Triplet<cd>>& out, const Liouvillian& L,
                        const SparseMatrix& a, const Eigen::SparseMatrix<cd, Eigen::RowMajor>& b, cd coeff) {
    const int d = L.cutoff.dim();
    for (int s = 0; s < L.size(); ++s) {
        const auto [k, l] = L.basis[s];
        for (SparseMatrix::InnerIterator ia(a, k); ia; ++ia) {
            for (Eigen::SparseMatrix<cd, Eigen::RowMajor>::InnerIterator ib(b, l); ib; ++ib) {
                const int target = L.slot_of[std::size_t(ia.row()) + std::size_t(ib.col()) * d];
                if (target >= 0) out.emplace_back(target, s, coeff * ia.value() * ib.value());
            }
        }
    }
}

} // namespace detail

inline Liouvillian build_liouvillian(const MachineParams& p, const BathState& baths, const FockCutoff& cut,
                                     const EngineOptions& opt = {}) {
    detail::check_cutoff(cut);
    Liouvillian L;
    L.cutoff = cut;
    L.full_space = opt.full_space;
    L.rates = dissipator_rates(p, baths, opt);

    const int d = cut.dim();
    L.slot_of.assign(std::size_t(d) * d, -1);
    L.diagonal.assign(d, -1);
    auto total = [&](int k) { return cut.n_c_of(k) + cut.n_h_of(k); };
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            if (!opt.full_space && total(i) != total(j)) continue;
            const int s = int(L.basis.size());
            L.slot_of[std::size_t(i) + std::size_t(j) * d] = s;
            L.basis.emplace_back(i, j);
            if (i == j) L.diagonal[i] = s;
        }
    }

    using RowSparse = Eigen::SparseMatrix<cd, Eigen::RowMajor>;
    const SparseMatrix id = detail::identity(d);
    const RowSparse id_r = id;
    const SparseMatrix h = detail::hamiltonian(make_coupling(p, cut, opt), cut);

    std::vector<Eigen::Triplet<cd>> t;
    detail::add_product(t, L, h, id_r, cd(0.0, -1.0));
    detail::add_product(t, L, id, RowSparse(h), cd(0.0, 1.0));

    const SparseMatrix ac = detail::mode_c(detail::annihilation(cut.n_max_c), cut);
    const SparseMatrix ah = detail::mode_h(detail::annihilation(cut.n_max_h), cut);
    const std::pair<SparseMatrix, double> jumps[] = {
        {ac, L.rates.down_c}, {SparseMatrix(ac.adjoint()), L.rates.up_c},
        {ah, L.rates.down_h}, {SparseMatrix(ah.adjoint()), L.rates.up_h},
    };
    for (const auto& [j, rate] : jumps) {
        if (rate == 0.0) continue;
        const SparseMatrix jd = j.adjoint();
        const SparseMatrix jdj = jd * j;
        detail::add_product(t, L, j, RowSparse(jd), rate);
        detail::add_product(t, L, jdj, id_r, -0.5 * rate);
        detail::add_product(t, L, id, RowSparse(jdj), -0.5 * rate);
    }

    L.generator.resize(L.size(), L.size());
    L.generator.setFromTriplets(t.begin(), t.end());
    L.generator.prune(cd(0.0), 0.0);
    return L;
}

struct DensityOperator {
    Eigen::MatrixXcd matrix;
    FockCutoff cutoff;
    double residual{0.0};        // ||L rho|| / (||L|| ||rho||)
    double min_eigenvalue{0.0};

    double trace() const { return matrix.trace().real(); }

    Eigen::VectorXd marginal_c() const {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(cutoff.levels_c());
        for (int k = 0; k < cutoff.dim(); ++k) p[cutoff.n_c_of(k)] += matrix(k, k).real();
        return p;
    }
    Eigen::VectorXd marginal_h() const {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(cutoff.levels_h());
        for (int k = 0; k < cutoff.dim(); ++k) p[cutoff.n_h_of(k)] += matrix(k, k).real();
        return p;
    }
    // Population of the two highest retained levels.
    double tail_c() const { auto p = marginal_c(); return p[p.size() - 1] + p[p.size() - 2]; }
    double tail_h() const { auto p = marginal_h(); return p[p.size() - 1] + p[p.size() - 2]; }
};

inline constexpr double steady_residual_tol = 1e-10;
inline constexpr double positivity_tol = 1e-8;

namespace detail {

inline double min_eigenvalue(const Eigen::MatrixXcd& rho, const FockCutoff& cut, bool full_space) {
    if (full_space) return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    // Block diagonal in total excitation number.
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= cut.n_max_c + cut.n_max_h; ++n) {
        std::vector<int> idx;
        for (int k = 0; k < cut.dim(); ++k)
            if (cut.n_c_of(k) + cut.n_h_of(k) == n) idx.push_back(k);
        Eigen::MatrixXcd block(idx.size(), idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = rho(idx[a], idx[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
        best = std::min(best, es.eigenvalues().minCoeff());
    }
    return best;
}

} // namespace detail

// Unique steady state. The null-space problem is replaced by a full-rank
// system in which the equation for rho(0,0) is exchanged for tr(rho) = 1.
inline DensityOperator steady_state(const Liouvillian& L) {
    const int r0 = L.diagonal.at(0);
    std::vector<Eigen::Triplet<cd>> t;
    t.reserve(std::size_t(L.generator.nonZeros()) + L.diagonal.size());
    for (int k = 0; k < L.generator.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(L.generator, k); it; ++it)
            if (it.row() != r0) t.emplace_back(it.row(), it.col(), it.value());
    for (int s : L.diagonal) t.emplace_back(r0, s, 1.0);
    SparseMatrix m(L.size(), L.size());
    m.setFromTriplets(t.begin(), t.end());

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw NumericalFailure("steady_state: singular trace-constrained system");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(L.size());
    rhs[r0] = 1.0;
    const Eigen::VectorXcd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalFailure("steady_state: solve failed");

    DensityOperator rho;
    rho.cutoff = L.cutoff;
    Eigen::MatrixXcd raw = L.unvectorize(x);
    if ((raw - raw.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw NumericalFailure("steady_state: solution is not Hermitian");
    rho.matrix = 0.5 * (raw + raw.adjoint());
    rho.matrix /= rho.matrix.trace().real();

    const Eigen::VectorXcd v = L.vectorize(rho.matrix);
    rho.residual = (L.generator * v).norm() / (L.norm() * v.norm());
    if (!(rho.residual < steady_residual_tol))
        throw NumericalFailure("steady_state: residual " + std::to_string(rho.residual) + " above tolerance");
    rho.min_eigenvalue = detail::min_eigenvalue(rho.matrix, L.cutoff, L.full_space);
    if (rho.min_eigenvalue < -positivity_tol)
        throw NumericalFailure("steady_state: negative eigenvalue " + std::to_string(rho.min_eigenvalue) +
                               "; increase the Fock cutoff");
    return rho;
}

struct SteadyObservables {
    double charge_current_pa{0.0};
    double occupation_c{0.0};
    double occupation_h{0.0};
    double heat_current_c_aw{0.0};   // into the cold bath
    double heat_current_h_aw{0.0};   // into the hot bath
    double power_aw{0.0};            // I V
    double photon_flow{0.0};         // c -> h, 1/ns
};

// Heat currents use the energy each dissipator removes from its mode,
// Omega (Gamma_down <n> - Gamma_up <a a^+>). Without truncation this is
// Omega kappa (<n> - n_B) exactly; on the truncated space it keeps the first
// law exact instead of leaving a tail-population error.
inline SteadyObservables observables(const DensityOperator& rho, const MachineParams& p, const BathState& b,
                                     const EngineOptions& opt = {}) {
    const FockCutoff& cut = rho.cutoff;
    const Coupling c = make_coupling(p, cut, opt);
    const SparseMatrix flow = detail::flow_operator(c, cut);
    cd flow_avg = 0.0;
    for (int k = 0; k < flow.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(flow, k); it; ++it) flow_avg += it.value() * rho.matrix(it.col(), it.row());

    double n_c = 0.0, n_h = 0.0, aad_c = 0.0, aad_h = 0.0;
    for (int k = 0; k < cut.dim(); ++k) {
        const double pk = rho.matrix(k, k).real();
        const int nc = cut.n_c_of(k), nh = cut.n_h_of(k);
        n_c += nc * pk;
        n_h += nh * pk;
        if (nc < cut.n_max_c) aad_c += (nc + 1) * pk;
        if (nh < cut.n_max_h) aad_h += (nh + 1) * pk;
    }
    const DissipatorRates r = dissipator_rates(p, b, opt);

    SteadyObservables o;
    o.photon_flow = flow_avg.real();
    o.charge_current_pa = units::flow_to_pa(o.photon_flow, 2.0 * units::elementary_charge);
    o.occupation_c = n_c;
    o.occupation_h = n_h;
    o.heat_current_c_aw = units::energy_flow_to_aw(p.omega_c * (r.down_c * n_c - r.up_c * aad_c));
    o.heat_current_h_aw = units::energy_flow_to_aw(p.omega_h * (r.down_h * n_h - r.up_h * aad_h));
    o.power_aw = units::watt_to_aw(units::pa_to_ampere(o.charge_current_pa) * resonance_voltage(p));
    return o;
}

inline constexpr int default_cutoff_cap = 40;

// Highest level N at which a thermal state of occupation n keeps the
// population of levels >= N - 1 below tail_tol, at least 2.
inline int thermal_cutoff_guess(double n, double tail_tol, int cap) {
    if (!(n > 0.0)) return 2;
    const double q = n / (n + 1.0);
    const double levels = 1.0 + std::log(tail_tol) / std::log(q);
    return std::clamp(int(std::ceil(levels)), 2, cap);
}

// Smallest cutoff whose steady state keeps the population of the top two
// levels of each mode below tail_tol. Both modes start from the thermal
// estimate at the larger bath occupation (the mode occupations lie between
// the two), are doubled until the tails pass, then bisected back down with
// the other mode held fixed.
inline FockCutoff choose_cutoff(const MachineParams& p, const BathState& b, double tail_tol,
                                const EngineOptions& opt = {}, int cap = default_cutoff_cap) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("choose_cutoff: tail_tol must lie in (0, 1)");
    auto tails = [&](const FockCutoff& cut) {
        const DensityOperator rho = steady_state(build_liouvillian(p, b, cut, opt));
        return std::pair{rho.tail_c() < tail_tol, rho.tail_h() < tail_tol};
    };

    const int start = thermal_cutoff_guess(std::max(b.n_c, b.n_h), tail_tol, cap);
    FockCutoff cut{start, start};
    FockCutoff last_fail{1, 1};
    FockCutoff doubled;
    for (;;) {
        const auto [ok_c, ok_h] = tails(cut);
        if (ok_c && ok_h) break;
        if ((!ok_c && cut.n_max_c >= cap) || (!ok_h && cut.n_max_h >= cap))
            throw NumericalFailure("choose_cutoff: tail population above " + std::to_string(tail_tol) +
                                   " at the cap of " + std::to_string(cap) + " levels");
        if (!ok_c) { last_fail.n_max_c = cut.n_max_c; cut.n_max_c = std::min(2 * cut.n_max_c, cap); }
        if (!ok_h) { last_fail.n_max_h = cut.n_max_h; cut.n_max_h = std::min(2 * cut.n_max_h, cap); }
    }

    doubled = cut;

    // Invariant: hi passes, lo fails (or lies below the minimum of 2).
    for (int lo = std::max(last_fail.n_max_c, 1), hi = cut.n_max_c; hi - lo > 1;) {
        const int mid = (lo + hi) / 2;
        if (tails({mid, cut.n_max_h}).first) hi = mid; else lo = mid;
        cut.n_max_c = hi;
    }
    for (int lo = std::max(last_fail.n_max_h, 1), hi = cut.n_max_h; hi - lo > 1;) {
        const int mid = (lo + hi) / 2;
        if (tails({cut.n_max_c, mid}).second) hi = mid; else lo = mid;
        cut.n_max_h = hi;
    }
    if (cut == doubled) return cut;
    const auto [ok_c, ok_h] = tails(cut);
    return ok_c && ok_h ? cut : doubled;
}

struct EngineSolution {
    FockCutoff cutoff;
    DensityOperator rho;
    SteadyObservables obs;
};

inline EngineSolution solve_at(const MachineParams& p, const BathState& b, const FockCutoff& cut,
                               const EngineOptions& opt = {}) {
    DensityOperator rho = steady_state(build_liouvillian(p, b, cut, opt));
    SteadyObservables o = observables(rho, p, b, opt);
    return {cut, std::move(rho), o};
}

inline EngineSolution solve(const MachineParams& p, const BathState& b, double tail_tol,
                            const EngineOptions& opt = {}) {
    return solve_at(p, b, choose_cutoff(p, b, tail_tol, opt), opt);
}

// Plain-text dump: header line, then one row per matrix row of "re,im" pairs.
inline void dump_operator(std::ostream& os, const DenseOperator& op) {
    os << "# " << op.label << " " << op.matrix.rows() << "x" << op.matrix.cols() << "\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) {
            if (j) os << ' ';
            os << op.matrix(i, j).real() << ',' << op.matrix(i, j).imag();
        }
        os << '\n';
    }
}

} // namespace qtm::fock
