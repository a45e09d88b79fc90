// test_fock.cpp - Full nonlinear model: operators, generator, steady state,
// observables and the thermodynamic identities they obey.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qtm/fock.hpp"
#include "qtm/gaussian.hpp"

namespace {

using namespace qtm;
using namespace qtm::fock;
using cd = std::complex<double>;

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Series definition of L_n^(1): sum_m (-1)^m C(n+1, n-m) x^m / m!.
double laguerre_series(int n, double x) {
    double s = 0.0, fact = 1.0;
    for (int m = 0; m <= n; ++m) {
        if (m > 0) fact *= m;
        s += (m % 2 ? -1.0 : 1.0) * binom(n + 1, n - m) * std::pow(x, m) / fact;
    }
    return s;
}

// Product of truncated geometric distributions, each normalized on its own levels.
Eigen::MatrixXcd thermal_product(const FockCutoff& cut, double nc, double nh) {
    auto geometric = [](int levels, double n) {
        Eigen::VectorXd p(levels);
        const double q = n / (n + 1.0);
        for (int k = 0; k < levels; ++k) p[k] = std::pow(q, k);
        return Eigen::VectorXd(p / p.sum());
    };
    const Eigen::VectorXd pc = geometric(cut.levels_c(), nc), ph = geometric(cut.levels_h(), nh);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(cut.dim(), cut.dim());
    for (int k = 0; k < cut.dim(); ++k) rho(k, k) = pc[cut.n_c_of(k)] * ph[cut.n_h_of(k)];
    return rho;
}

double relative_residual(const Liouvillian& L, const Eigen::MatrixXcd& rho) {
    const Eigen::VectorXcd v = L.vectorize(rho);
    return (L.generator * v).norm() / (L.norm() * v.norm());
}

const MachineParams nominal{};

TEST(Laguerre, LowOrders) {
    for (double x : {0.0, 0.36, 1.7, 5.0}) {
        EXPECT_EQ(laguerre_assoc(0, x), 1.0);
        EXPECT_NEAR(laguerre_assoc(1, x), 2.0 - x, 1e-15);
    }
    const double x = 0.36;
    EXPECT_NEAR(laguerre_assoc(2, x), 3.0 - 3.0 * x + x * x / 2.0, 1e-14);
}

TEST(Laguerre, RecurrenceMatchesSeries) {
    for (int n = 0; n <= 12; ++n)
        for (double x : {0.1, 0.36, 1.0, 2.5, 4.0}) EXPECT_NEAR(laguerre_assoc(n, x), laguerre_series(n, x), 1e-9) << n;
}

TEST(Laguerre, NegativeOrderIsAnError) { EXPECT_THROW(laguerre_assoc(-1, 0.3), DomainError); }

TEST(JunctionOperator, Entries) {
    const DenseOperator a = build_A_operator(0.3, 6);
    EXPECT_NEAR(a.matrix(0, 0).real(), 0.6 * std::exp(-0.18), 1e-15);
    for (int n = 0; n <= 6; ++n) {
        const double oracle = 0.6 * std::exp(-0.18) * laguerre_series(n, 0.36) / (n + 1);
        EXPECT_NEAR(a.matrix(n, n).real(), oracle, 1e-12);
    }
    Eigen::MatrixXcd off = a.matrix;
    off.diagonal().setZero();
    EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.matrix.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, ZeroCouplingIsZero) {
    MachineParams p = nominal;
    p.ej = 0.0;
    EXPECT_EQ(build_hamiltonian(p, {4, 4}).matrix.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, SingleExcitationElement) {
    const FockCutoff cut{4, 4};
    const DenseOperator h = build_hamiltonian(nominal, cut);
    EXPECT_EQ(std::abs(h.matrix(cut.index(0, 0), cut.index(0, 0))), 0.0);
    const double a0 = 0.6 * std::exp(-0.18);
    const cd elem = h.matrix(cut.index(0, 1), cut.index(1, 0));
    EXPECT_NEAR(elem.real(), 0.5 * nominal.ej * a0 * a0, 1e-14);
    EXPECT_NEAR(elem.imag(), 0.0, 1e-15);
}

TEST(Hamiltonian, HermitianAndExcitationConserving) {
    const FockCutoff cut{6, 5};
    const DenseOperator h = build_hamiltonian(nominal, cut);
    EXPECT_LT((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    for (int i = 0; i < cut.dim(); ++i)
        for (int j = 0; j < cut.dim(); ++j)
            if (std::abs(h.matrix(i, j)) > 0.0)
                EXPECT_EQ(cut.n_c_of(i) + cut.n_h_of(i), cut.n_c_of(j) + cut.n_h_of(j));
    const DenseOperator i_op = build_current_operator(nominal, cut);
    EXPECT_LT((i_op.matrix - i_op.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hamiltonian, CutoffBelowOneIsAnError) {
    EXPECT_THROW(build_hamiltonian(nominal, {0, 3}), DomainError);
    EXPECT_THROW(build_liouvillian(nominal, BathState::from_mk(nominal, 15, 100), {3, 0}), DomainError);
}

TEST(Liouvillian, DecoupledThermalProductIsStationary) {
    MachineParams p = nominal;
    p.ej = 0.0;
    const FockCutoff cut{6, 6};
    const BathState b = BathState::from_mk(p, 40.0, 300.0);
    const Liouvillian L = build_liouvillian(p, b, cut);
    EXPECT_LT(relative_residual(L, thermal_product(cut, b.n_c, b.n_h)), 1e-10);
}

TEST(Liouvillian, TracePreserving) {
    for (bool full : {false, true}) {
        EngineOptions opt;
        opt.full_space = full;
        const Liouvillian L = build_liouvillian(nominal, BathState::from_mk(nominal, 30, 150), {5, 6}, opt);
        EXPECT_LT(L.trace_residual(), 1e-10 * L.norm());
    }
}

TEST(Liouvillian, CarnotThermalProductIsStationaryWithCoupling) {
    const FockCutoff cut{6, 6};
    for (double tc : {15.0, 40.0}) {
        const BathState b = BathState::from_mk(nominal, tc, carnot_hot_temperature_mk(tc, nominal));
        const Liouvillian L = build_liouvillian(nominal, b, cut);
        EXPECT_LT(relative_residual(L, thermal_product(cut, b.n_c, b.n_h)), 1e-8) << tc;
    }
}

TEST(Liouvillian, SectorAndFullSpaceAgree) {
    const FockCutoff cut{4, 4};
    const BathState b = BathState::from_mk(nominal, 30, 100);
    EngineOptions full;
    full.full_space = true;
    const auto a = steady_state(build_liouvillian(nominal, b, cut));
    const auto f = steady_state(build_liouvillian(nominal, b, cut, full));
    EXPECT_LT((a.matrix - f.matrix).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Liouvillian, SwappedColdRateOnlyMattersForUnequalDamping) {
    EngineOptions swapped;
    swapped.hot_rate_on_cold_pump = true;
    const BathState b = BathState::from_mk(nominal, 30, 100);
    const FockCutoff cut{6, 6};
    const double i0 = solve_at(nominal, b, cut).obs.charge_current_pa;
    EXPECT_NEAR(solve_at(nominal, b, cut, swapped).obs.charge_current_pa, i0, 1e-12);

    MachineParams p = nominal;
    p.kappa_h = units::ghz(0.03);
    const double i1 = solve_at(p, b, cut).obs.charge_current_pa;
    const double i2 = solve_at(p, b, cut, swapped).obs.charge_current_pa;
    EXPECT_GT(std::abs(i1 - i2), 1e-6);
    // Only the detailed-balance rate leaves the decoupled system thermal.
    p.ej = 0.0;
    const BathState hot = BathState::from_mk(p, 60, 100);
    EXPECT_LT(relative_residual(build_liouvillian(p, hot, cut), thermal_product(cut, hot.n_c, hot.n_h)), 1e-10);
    EXPECT_GT(relative_residual(build_liouvillian(p, hot, cut, swapped), thermal_product(cut, hot.n_c, hot.n_h)), 1e-6);
}

TEST(SteadyState, DecoupledLimitIsThermal) {
    MachineParams p = nominal;
    p.ej = 0.0;
    const FockCutoff cut{8, 8};
    const BathState b = BathState::from_mk(p, 50, 200);
    const DensityOperator rho = steady_state(build_liouvillian(p, b, cut));
    EXPECT_LT((rho.matrix - thermal_product(cut, b.n_c, b.n_h)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SteadyState, ValidDensityOperator) {
    const BathState b = BathState::from_mk(nominal, 20, 100);
    const DensityOperator rho = steady_state(build_liouvillian(nominal, b, {8, 8}));
    EXPECT_NEAR(rho.trace(), 1.0, 1e-10);
    EXPECT_LT((rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(rho.min_eigenvalue, -1e-8);
    EXPECT_LT(rho.residual, 1e-10);
}

TEST(SteadyState, CarnotPointCarriesNoCurrent) {
    const BathState b = BathState::from_mk(nominal, 15.0, 127.5);
    const EngineSolution s = solve(nominal, b, 1e-8);
    EXPECT_LT(std::abs(s.obs.charge_current_pa), 1e-6);
    EXPECT_LT((s.rho.matrix - thermal_product(s.cutoff, b.n_c, b.n_h)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SteadyState, RefrigeratorCurrentMatchesGaussianModel) {
    const Config cfg;
    const BathState b = BathState::from_mk(nominal, 15.0, 100.0);
    const EngineSolution s = solve(nominal, b, 1e-8);
    const auto gp = gaussian::GaussianParams::from(cfg);
    const double ig = gaussian::mean_current(gp, b);
    EXPECT_NEAR(ig, 0.63, 0.02);
    EXPECT_GT(s.obs.charge_current_pa, 0.0);
    EXPECT_LT(std::abs(s.obs.charge_current_pa / ig - 1.0), 0.10);
    const auto cov = gaussian::steady_covariance(gp, b);
    EXPECT_LT(std::abs(s.obs.occupation_c / cov.occupation_c() - 1.0), 0.10);
    EXPECT_LT(std::abs(s.obs.occupation_h / cov.occupation_h() - 1.0), 0.10);
}

TEST(Observables, DecoupledMachineIsIdle) {
    MachineParams p = nominal;
    p.ej = 0.0;
    const EngineSolution s = solve_at(p, BathState::from_mk(p, 30, 200), {8, 8});
    EXPECT_EQ(s.obs.charge_current_pa, 0.0);
    EXPECT_LT(std::abs(s.obs.heat_current_c_aw), 1e-9);
    EXPECT_LT(std::abs(s.obs.heat_current_h_aw), 1e-9);
    EXPECT_EQ(s.obs.power_aw, 0.0);
}

// (T_c, T_h) grid away from the Carnot line.
std::vector<std::pair<double, double>> grid20() {
    std::vector<std::pair<double, double>> g;
    for (double tc : {15.0, 20.0, 25.0, 30.0})
        for (double th : {40.0, 80.0, 110.0, 160.0, 200.0}) g.emplace_back(tc, th);
    return g;
}

TEST(Thermodynamics, FirstLaw) {
    for (const auto& [tc, th] : grid20()) {
        const SteadyObservables o = solve(nominal, BathState::from_mk(nominal, tc, th), 1e-8).obs;
        const double scale = std::max({std::abs(o.power_aw), std::abs(o.heat_current_c_aw),
                                       std::abs(o.heat_current_h_aw), 1e-12});
        EXPECT_LT(std::abs(o.power_aw - (o.heat_current_c_aw + o.heat_current_h_aw)), 1e-8 * scale) << tc << "," << th;
    }
}

TEST(Thermodynamics, OttoExchangeRatio) {
    const double wc = nominal.omega_c, wh = nominal.omega_h;
    for (const auto& [tc, th] : grid20()) {
        const SteadyObservables o = solve(nominal, BathState::from_mk(nominal, tc, th), 1e-8).obs;
        const double c = std::abs(o.heat_current_c_aw) / wc, h = std::abs(o.heat_current_h_aw) / wh,
                     w = std::abs(o.power_aw) / (wh - wc);
        EXPECT_LT(std::abs(c - h), 1e-6 * c) << tc << "," << th;
        EXPECT_LT(std::abs(c - w), 1e-6 * c) << tc << "," << th;
    }
}

TEST(Thermodynamics, RefrigeratorSigns) {
    const SteadyObservables o = solve(nominal, BathState::from_mk(nominal, 15, 80), 1e-8).obs;
    EXPECT_GT(o.charge_current_pa, 0.0);
    EXPECT_LT(o.heat_current_c_aw, 0.0);   // heat leaves the cold bath
    EXPECT_GT(o.heat_current_h_aw, 0.0);
    EXPECT_GT(o.power_aw, 0.0);
}

TEST(Thermodynamics, SingleMonotoneSignChangeAcrossCarnot) {
    std::vector<double> i;
    for (double th = 40.0; th <= 250.0; th += 10.0)
        i.push_back(solve(nominal, BathState::from_mk(nominal, 15, th), 1e-8).obs.charge_current_pa);
    int changes = 0;
    for (std::size_t k = 1; k < i.size(); ++k) {
        EXPECT_LT(i[k], i[k - 1]);
        if ((i[k] < 0) != (i[k - 1] < 0)) ++changes;
    }
    EXPECT_EQ(changes, 1);
    EXPECT_GT(i[8], 0.0);   // 120 mK
    EXPECT_LT(i[9], 0.0);   // 130 mK
}

TEST(Symmetry, RelabelingModes) {
    MachineParams p = nominal;
    p.omega_c = units::ghz(2.0);
    p.kappa_h = units::ghz(0.04);
    p.lambda_h = 0.25;
    MachineParams q = p;
    std::swap(q.omega_c, q.omega_h);
    std::swap(q.kappa_c, q.kappa_h);
    std::swap(q.lambda_c, q.lambda_h);
    const BathState b = BathState::from_mk(p, 40, 150);
    const BathState s{b.t_h, b.t_c, b.n_h, b.n_c};
    const FockCutoff cut{7, 5}, swapped{5, 7};
    const DensityOperator r1 = steady_state(build_liouvillian(p, b, cut));
    const DensityOperator r2 = steady_state(build_liouvillian(q, s, swapped));
    auto perm = [&](int k) { return swapped.index(cut.n_h_of(k), cut.n_c_of(k)); };
    double worst = 0.0;
    for (int i = 0; i < cut.dim(); ++i)
        for (int j = 0; j < cut.dim(); ++j) worst = std::max(worst, std::abs(r1.matrix(i, j) - r2.matrix(perm(i), perm(j))));
    EXPECT_LT(worst, 1e-10);
    const double i1 = (r1.matrix * build_current_operator(p, cut).matrix).trace().real();
    const double i2 = (r2.matrix * build_current_operator(q, swapped).matrix).trace().real();
    EXPECT_NEAR(i1, -i2, 1e-10 * std::abs(i1));
}

TEST(Cutoff, NominalAtFifteenMillikelvin) {
    const FockCutoff cut = choose_cutoff(nominal, BathState::from_mk(nominal, 15, 100), 1e-8);
    EXPECT_LE(cut.n_max_c, 10);
    EXPECT_LE(cut.n_max_h, 10);
    EXPECT_GE(cut.n_max_c, 2);
}

TEST(Cutoff, VacuumGivesTheMinimum) {
    const BathState zero{0.0, 0.0, 0.0, 0.0};
    EXPECT_EQ(choose_cutoff(nominal, zero, 1e-8), (FockCutoff{2, 2}));
}

TEST(Cutoff, TighterToleranceNeverShrinks) {
    const BathState b = BathState::from_mk(nominal, 25, 150);
    FockCutoff prev{0, 0};
    for (double tol : {1e-4, 5e-5, 1e-6, 5e-7, 1e-8, 5e-9}) {
        const FockCutoff c = choose_cutoff(nominal, b, tol);
        EXPECT_GE(c.n_max_c, prev.n_max_c);
        EXPECT_GE(c.n_max_h, prev.n_max_h);
        prev = c;
    }
}

TEST(Cutoff, ResultIsTheSmallestPassing) {
    const BathState b = BathState::from_mk(nominal, 25, 150);
    const double tol = 1e-8;
    const FockCutoff c = choose_cutoff(nominal, b, tol);
    const auto at = [&](FockCutoff k) { return steady_state(build_liouvillian(nominal, b, k)); };
    const auto ok = at(c);
    EXPECT_LT(ok.tail_c(), tol);
    EXPECT_LT(ok.tail_h(), tol);
    EXPECT_GE(at({c.n_max_c - 1, c.n_max_h}).tail_c(), tol);
    EXPECT_GE(at({c.n_max_c, c.n_max_h - 1}).tail_h(), tol);
}

TEST(Cutoff, CapAndToleranceErrors) {
    EXPECT_THROW(choose_cutoff(nominal, BathState::from_mk(nominal, 15, 100), 0.0), DomainError);
    EXPECT_THROW(choose_cutoff(nominal, BathState::from_mk(nominal, 15, 100), 1.0), DomainError);
    EXPECT_THROW(choose_cutoff(nominal, BathState::from_mk(nominal, 200, 1000), 1e-8, {}, 6), NumericalFailure);
}

TEST(Cutoff, ObservablesConvergedUnderRefinement) {
    for (double tc : {15.0, 25.0}) {
        const BathState b = BathState::from_mk(nominal, tc, 100);
        const EngineSolution a = solve(nominal, b, 1e-8);
        const EngineSolution r = solve_at(nominal, b, {a.cutoff.n_max_c + 2, a.cutoff.n_max_h + 2});
        auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); };
        EXPECT_LT(rel(a.obs.charge_current_pa, r.obs.charge_current_pa), 1e-6);
        EXPECT_LT(rel(a.obs.occupation_c, r.obs.occupation_c), 1e-6);
        EXPECT_LT(rel(a.obs.occupation_h, r.obs.occupation_h), 1e-6);
        EXPECT_LT(rel(a.obs.heat_current_c_aw, r.obs.heat_current_c_aw), 1e-6);
        EXPECT_LT(rel(a.obs.heat_current_h_aw, r.obs.heat_current_h_aw), 1e-6);
    }
}

TEST(Dump, PlainTextMatrix) {
    const FockCutoff cut{2, 1};
    std::ostringstream os;
    dump_operator(os, build_hamiltonian(nominal, cut));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line.rfind("# H 6x6", 0), 0u);
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string c;
        int n = 0;
        while (cells >> c) {
            EXPECT_NE(c.find(','), std::string::npos);
            ++n;
        }
        EXPECT_EQ(n, 6);
    }
    EXPECT_EQ(rows, 6);
}

} // namespace
