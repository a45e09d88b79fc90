// metrology.hpp - Quantum Fisher information for T_c: Williamson decomposition,
// the Gaussian QFI, its closed form at the Carnot point, a spectral SLD
// cross-check on density matrices, and the two precision bounds.

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "qtm/errors.hpp"
#include "qtm/gaussian.hpp"
#include "qtm/params.hpp"
#include "qtm/units.hpp"

namespace qtm::metrology {

using gaussian::CovarianceMatrix;
using gaussian::GaussianParams;

// A symplectic eigenvalue at (or below) 1/2: the Phi_S denominators vanish.
class SingularCovariance : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

// [r_i, r_j] = i Omega_ij for r = (x_c, x_h, p_c, p_h).
inline Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
    w(0, 2) = 1.0;
    w(1, 3) = 1.0;
    w(2, 0) = -1.0;
    w(3, 1) = -1.0;
    return w;
}

struct SymplecticDecomposition {
    Eigen::Matrix4d s;    // S Omega S^T = Omega, S Gamma S^T = diag(nu_1, nu_2, nu_1, nu_2)
    double nu_1{0.0};     // nu_1 >= nu_2
    double nu_2{0.0};

    Eigen::Vector4d eigenvalues() const { return {nu_1, nu_2, nu_1, nu_2}; }
};

inline constexpr double williamson_tol = 1e-10;
inline constexpr double singular_margin = 1e-9;

// Construction: A = Gamma^{-1/2} Omega Gamma^{-1/2} is antisymmetric; the
// positive-eigenvalue eigenvectors w = u + i v of iA give an orthogonal O with
// O^T A O = [[0, D], [-D, 0]], and S = N^{1/2} O^T Gamma^{-1/2} with N = D^{-1}.
// Eigenvector phases are fixed so the largest-magnitude component is real
// and positive; S is still not unique for degenerate nu.
inline SymplecticDecomposition williamson(const CovarianceMatrix& gamma) {
    const Eigen::Matrix4d& g = gamma.m;
    const double scale = g.cwiseAbs().maxCoeff();
    if (!g.allFinite() || (g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DomainError("williamson: covariance matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(g);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw SingularCovariance("williamson: covariance is not positive definite");
    const Eigen::Matrix4d inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const Eigen::Matrix4d omega = symplectic_form();
    const Eigen::Matrix4d a = inv_sqrt * omega * inv_sqrt;

    const Eigen::Matrix4cd ia = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> hs(ia);
    // Ascending: -d2, -d1, d1, d2 with d1 <= d2, so nu = 1/d comes out descending.
    const double d[2] = {hs.eigenvalues()[2], hs.eigenvalues()[3]};
    if (!(d[0] > 0.0)) throw SingularCovariance("williamson: degenerate symplectic spectrum");

    Eigen::Matrix4d o;
    for (int k = 0; k < 2; ++k) {
        Eigen::Vector4cd w = hs.eigenvectors().col(2 + k);
        Eigen::Index big = 0;
        w.cwiseAbs().maxCoeff(&big);
        w *= std::conj(w[big]) / std::abs(w[big]);
        o.col(k) = std::sqrt(2.0) * w.imag();
        o.col(2 + k) = std::sqrt(2.0) * w.real();
    }

    SymplecticDecomposition dec;
    dec.nu_1 = 1.0 / d[0];
    dec.nu_2 = 1.0 / d[1];
    if (dec.nu_2 <= 0.5 + singular_margin)
        throw SingularCovariance("williamson: symplectic eigenvalue " + std::to_string(dec.nu_2) +
                                 " at the pure-state bound 1/2");
    dec.s = dec.eigenvalues().cwiseSqrt().asDiagonal() * o.transpose() * inv_sqrt;

    const double err_omega = (dec.s * omega * dec.s.transpose() - omega).cwiseAbs().maxCoeff();
    Eigen::Matrix4d diag = dec.s * g * dec.s.transpose();
    const double err_diag = (diag - Eigen::Matrix4d(dec.eigenvalues().asDiagonal())).cwiseAbs().maxCoeff();
    if (err_omega > williamson_tol * std::max(1.0, dec.s.squaredNorm()) || err_diag > williamson_tol * scale * 16.0)
        throw NumericalFailure("williamson: decomposition failed its invariants");
    return dec;
}

enum class QfiMethod { closed_form, symplectic_numeric, sld_oracle };

inline const char* to_string(QfiMethod m) {
    switch (m) {
    case QfiMethod::closed_form: return "closed-form";
    case QfiMethod::symplectic_numeric: return "symplectic-numeric";
    case QfiMethod::sld_oracle: return "sld-oracle";
    }
    return "?";
}

struct QfiResult {
    double fisher_information{0.0};   // 1/mK^2 unless the caller's derivative says otherwise
    QfiMethod method{QfiMethod::closed_form};
    double step_mk{0.0};              // finite-difference step, 0 when none was used
};

// Gaussian QFI from Gamma and its parameter derivative. The derivative is
// carried into the diagonal frame with S frozen at the base point.
inline QfiResult qfi_gaussian(const CovarianceMatrix& gamma, const CovarianceMatrix& dgamma, double step_mk = 0.0) {
    const SymplecticDecomposition dec = williamson(gamma);
    const Eigen::Matrix4d omega = symplectic_form();
    const Eigen::Vector4d lam = dec.eigenvalues();
    const Eigen::Matrix4d gs = lam.asDiagonal();
    const Eigen::Matrix4d dgs = dec.s * dgamma.m * dec.s.transpose();
    const Eigen::Matrix4d num = omega.transpose() * gs * dgs * gs * omega + 0.25 * dgs;
    Eigen::Matrix4d phi_s;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) phi_s(i, j) = num(i, j) / (2.0 * lam[i] * lam[i] * lam[j] * lam[j] - 0.125);
    const Eigen::Matrix4d s_inv = dec.s.inverse();
    const Eigen::Matrix4d phi = s_inv * phi_s * s_inv.transpose();
    double f = (omega.transpose() * dgamma.m * omega * phi).trace();

    const double scale = dgamma.m.squaredNorm() / (lam.minCoeff() * lam.minCoeff());
    if (f < -1e-9 * std::max(scale, 1e-300)) throw NumericalFailure("qfi_gaussian: negative Fisher information");
    return {std::max(f, 0.0), QfiMethod::symplectic_numeric, step_mk};
}

inline constexpr double default_step_mk = 1e-3;

// Central difference of the steady covariance in T_c (per mK) at fixed T_h.
inline CovarianceMatrix covariance_derivative(const GaussianParams& gp, double tc_mk, double th_mk,
                                              double step_mk = default_step_mk) {
    const MachineParams p = gp.machine();
    const auto plus = gaussian::steady_covariance(gp, BathState::from_mk(p, tc_mk + step_mk, th_mk));
    const auto minus = gaussian::steady_covariance(gp, BathState::from_mk(p, tc_mk - step_mk, th_mk));
    return {(plus.m - minus.m) / (2.0 * step_mk)};
}

inline QfiResult qfi_symplectic(const GaussianParams& gp, double tc_mk, double th_mk,
                                double step_mk = default_step_mk) {
    const MachineParams p = gp.machine();
    const auto gamma = gaussian::steady_covariance(gp, BathState::from_mk(p, tc_mk, th_mk));
    return qfi_gaussian(gamma, covariance_derivative(gp, tc_mk, th_mk, step_mk), step_mk);
}

// (T_c^2 / Omega_c) sinh(Omega_c / 2 T_c), returned in mK.
inline double precision_shape_mk(double omega_c, double tc_mk) {
    const double t = units::mk(tc_mk);
    return units::to_mk(t * t / omega_c * std::sinh(omega_c / (2.0 * t)));
}

// Carnot-point QFI of the Gaussian model, 1/mK^2.
inline QfiResult qfi_carnot_closed(const GaussianParams& gp, const BathState& at_carnot) {
    if (std::abs(at_carnot.n_c - at_carnot.n_h) > 1e-9 * std::max(at_carnot.n_c, 1e-300))
        throw DomainError("qfi_carnot_closed: baths are not at the Carnot point");
    const double kc = gp.kappa_c, kh = gp.kappa_h, g2 = gp.g * gp.g;
    const double ks = kc + kh, kk = kc * kh + 4.0 * g2;
    const double coeff = kc * kc * (8.0 * g2 * kh * (kc + 2.0 * kh) + kh * kh * ks * ks + 32.0 * g2 * g2) /
                         (4.0 * ks * ks * kk * kk);
    const double t = at_carnot.t_c;
    const double s = std::sinh(gp.omega_c / (2.0 * t));
    const double f = coeff * gp.omega_c * gp.omega_c / (t * t * t * t) / (s * s);
    return {f * units::millikelvin * units::millikelvin, QfiMethod::closed_form, 0.0};
}

// (dT_c)_QFI = beta (T_c^2/Omega_c) sinh(Omega_c/2T_c), mK.
inline double delta_tc_qfi_mk(const GaussianParams& gp, double tc_mk) {
    return gaussian::beta(gp).value * precision_shape_mk(gp.omega_c, tc_mk);
}

// (dT_c)_I = alpha (T_c^2/Omega_c) sinh(Omega_c/2T_c), mK.
inline double delta_tc_current_mk(const GaussianParams& gp, double tc_mk) {
    return gaussian::alpha(gp).value * precision_shape_mk(gp.omega_c, tc_mk);
}

// Spectral SLD form F = 2 sum_ij |<i|drho|j>|^2 / (p_i + p_j), skipping
// pairs with p_i + p_j below 1e-12.
inline QfiResult qfi_sld_oracle(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho, double step_mk = 0.0) {
    if (rho.rows() != rho.cols() || drho.rows() != rho.rows() || drho.cols() != rho.cols())
        throw DomainError("qfi_sld_oracle: shape mismatch");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10 ||
        (drho - drho.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, drho.cwiseAbs().maxCoeff()))
        throw DomainError("qfi_sld_oracle: non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const Eigen::VectorXd& p = es.eigenvalues();
    const Eigen::MatrixXcd d = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    double f = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            const double sum = p[i] + p[j];
            if (sum < 1e-12) continue;
            f += 2.0 * std::norm(d(i, j)) / sum;
        }
    return {f, QfiMethod::sld_oracle, step_mk};
}

// Quantum Cramer-Rao bound 1/sqrt(repetitions F).
inline double cramer_rao(double fisher_information, int repetitions = 1) {
    if (!(fisher_information > 0.0)) throw DomainError("cramer_rao: Fisher information must be positive");
    if (repetitions < 1) throw DomainError("cramer_rao: repetitions must be >= 1");
    return 1.0 / std::sqrt(repetitions * fisher_information);
}

// Precision of an observable: sqrt(variance) / (sqrt(repetitions) |d<O>/dT_c|).
inline double error_propagation(double mean_sensitivity, double variance, int repetitions = 1) {
    if (mean_sensitivity == 0.0) throw NumericalFailure("error_propagation: zero sensitivity");
    if (variance < 0.0) throw DomainError("error_propagation: negative variance");
    if (repetitions < 1) throw DomainError("error_propagation: repetitions must be >= 1");
    return std::sqrt(variance) / (std::sqrt(double(repetitions)) * std::abs(mean_sensitivity));
}

} // namespace qtm::metrology
