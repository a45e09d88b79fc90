// protocol.hpp - The Carnot-point thermometry procedure: start the machine as a
// refrigerator, raise T_h until the current vanishes, read T_h and convert it
// with T_c = (Omega_c / Omega_h) T_h. Readings are noisy, the search is a
// bracketed bisection, and a Monte Carlo driver checks the error budget.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qtm/config.hpp"
#include "qtm/errors.hpp"
#include "qtm/fock.hpp"
#include "qtm/gaussian.hpp"
#include "qtm/metrology.hpp"
#include "qtm/params.hpp"
#include "qtm/sweep.hpp"
#include "qtm/units.hpp"

namespace qtm::protocol {

using gaussian::ErrorBudget;

enum class Model { fock, gaussian };

inline const char* to_string(Model m) { return m == Model::fock ? "fock" : "gaussian"; }

inline Model parse_model(const std::string& s) {
    if (s == "fock") return Model::fock;
    if (s == "gaussian") return Model::gaussian;
    throw ConfigError("unknown model '" + s + "'");
}

// The search could not run to completion (bad bracket, no convergence).
class ProtocolFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

inline constexpr double default_tail_tol = 1e-8;

// Noiseless current I(T_c, T_h) of either model, in pA. Fock solves are
// memoized, so repeated bisection midpoints cost nothing. Thread-safe.
class CurrentModel {
public:
    CurrentModel(Config cfg, Model model, double tail_tol = default_tail_tol)
        : cfg_(std::move(cfg)), model_(model), tail_tol_(tail_tol) {}

    const Config& config() const { return cfg_; }
    Model model() const { return model_; }
    const MachineParams& machine() const { return cfg_.machine; }
    gaussian::GaussianParams gaussian_params() const { return gaussian::GaussianParams::from(cfg_); }

    double current(double tc_mk, double th_mk) const {
        if (!(tc_mk > 0.0) || !(th_mk > 0.0)) throw DomainError("current: temperatures must be positive");
        const BathState b = BathState::from_mk(cfg_.machine, tc_mk, th_mk);
        if (model_ == Model::gaussian) return gaussian::mean_current(gaussian_params(), b);
        const std::pair key{tc_mk, th_mk};
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const double i = fock::solve(cfg_.machine, b, tail_tol_).obs.charge_current_pa;
        std::lock_guard lock(mutex_);
        cache_.emplace(key, i);
        return i;
    }

    // dI/dT_c at fixed T_h, pA/mK. The Fock derivative is a central
    // difference on the cutoff chosen at the base point.
    double slope_tc(double tc_mk, double th_mk, double step_mk = metrology::default_step_mk) const {
        const MachineParams& p = cfg_.machine;
        if (model_ == Model::gaussian) return gaussian::dI_dTc(gaussian_params(), BathState::from_mk(p, tc_mk, th_mk));
        if (!(tc_mk > step_mk)) throw DomainError("slope_tc: T_c must exceed the difference step");
        const fock::FockCutoff cut = fock::choose_cutoff(p, BathState::from_mk(p, tc_mk, th_mk), tail_tol_);
        auto at = [&](double t) {
            return fock::solve_at(p, BathState::from_mk(p, t, th_mk), cut).obs.charge_current_pa;
        };
        return (at(tc_mk + step_mk) - at(tc_mk - step_mk)) / (2.0 * step_mk);
    }

    // Two-term budget at the Carnot point of tc_mk, memoized per T_c.
    ErrorBudget budget(double tc_mk) const {
        {
            std::lock_guard lock(mutex_);
            if (auto it = budgets_.find(tc_mk); it != budgets_.end()) return it->second;
        }
        const MachineParams& p = cfg_.machine;
        const double slope = slope_tc(tc_mk, carnot_hot_temperature_mk(tc_mk, p));
        const ErrorBudget e =
            gaussian::combine_budget(cfg_.noise.delta_i_pa, slope, cfg_.noise.delta_th_mk, p.omega_c / p.omega_h);
        std::lock_guard lock(mutex_);
        budgets_.emplace(tc_mk, e);
        return e;
    }

private:
    Config cfg_;
    Model model_;
    double tail_tol_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, double> cache_;
    mutable std::map<double, ErrorBudget> budgets_;
};

struct ProtocolConfig {
    double tc_true_mk{15.0};
    double th_lo_mk{0.0};           // refrigerator side of the bracket
    double th_hi_mk{0.0};
    MeasurementNoise noise{};
    std::uint64_t seed{0};
    int readings_per_point{1};
    double tolerance_mk{0.01};      // stop once the bracket is narrower than this
    int max_iterations{60};

    // Bracket [T*/2, 2T*] around the Carnot point T* of tc_true_mk.
    static ProtocolConfig around(const Config& cfg, double tc_true_mk) {
        ProtocolConfig pc;
        pc.tc_true_mk = tc_true_mk;
        const double th = carnot_hot_temperature_mk(tc_true_mk, cfg.machine);
        pc.th_lo_mk = 0.5 * th;
        pc.th_hi_mk = 2.0 * th;
        pc.noise = cfg.noise;
        return pc;
    }
};

struct TracePoint {
    double th_mk{0.0};
    double reading_pa{0.0};   // average of readings_per_point noisy readings

    bool operator==(const TracePoint&) const = default;
};

enum class StopReason { current_resolved, bracket_width };

inline const char* to_string(StopReason s) {
    return s == StopReason::current_resolved ? "current-resolved" : "bracket-width";
}

struct ProtocolResult {
    double th_setpoint_mk{0.0};   // where the search stopped
    double th_located_mk{0.0};    // the hot-thermometer reading at that setpoint
    double tc_estimate_mk{0.0};   // (Omega_c / Omega_h) th_located_mk
    ErrorBudget predicted{};
    int iterations{0};
    StopReason stop{StopReason::bracket_width};
    std::vector<TracePoint> trace;

    bool operator==(const ProtocolResult&) const = default;
};

inline double omega_ratio(const MachineParams& p) { return p.omega_c / p.omega_h; }

inline void check(const ProtocolConfig& pc) {
    if (!(pc.tc_true_mk > 0.0)) throw DomainError("protocol: T_c must be positive");
    if (!(pc.th_lo_mk > 0.0 && pc.th_hi_mk > pc.th_lo_mk)) throw DomainError("protocol: need 0 < th_lo < th_hi");
    if (pc.readings_per_point < 1) throw DomainError("protocol: readings_per_point must be >= 1");
    if (!(pc.tolerance_mk > 0.0)) throw DomainError("protocol: tolerance must be positive");
    if (pc.max_iterations < 1) throw DomainError("protocol: max_iterations must be >= 1");
    if (pc.noise.delta_i_pa < 0.0 || pc.noise.delta_th_mk < 0.0) throw DomainError("protocol: negative noise");
}

// One pass of steps 1-4. The current falls through zero as T_h rises, so a
// positive averaged reading moves the lower end up. The search stops when the
// reading is within its own noise, |I| < dI / sqrt(readings), or when the
// bracket is narrower than the tolerance; the midpoint is the setpoint.
inline ProtocolResult locate_carnot(const CurrentModel& model, const ProtocolConfig& pc) {
    check(pc);
    std::mt19937_64 rng(pc.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    ProtocolResult r;

    auto read = [&](double th) {
        const double mean = model.current(pc.tc_true_mk, th);
        double sum = 0.0;
        for (int k = 0; k < pc.readings_per_point; ++k) sum += mean + pc.noise.delta_i_pa * unit(rng);
        const double avg = sum / pc.readings_per_point;
        r.trace.push_back({th, avg});
        return avg;
    };

    double lo = pc.th_lo_mk, hi = pc.th_hi_mk;
    const double r_lo = read(lo), r_hi = read(hi);
    if (!(r_lo > 0.0 && r_hi < 0.0))
        throw ProtocolFailure("locate_carnot: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              "] mK does not straddle the zero crossing (readings " + std::to_string(r_lo) +
                              " pA, " + std::to_string(r_hi) + " pA)");

    const double resolution = pc.noise.delta_i_pa / std::sqrt(double(pc.readings_per_point));
    bool done = false;
    for (int it = 1; it <= pc.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double reading = read(mid);
        r.iterations = it;
        if (std::abs(reading) < resolution) {
            r.th_setpoint_mk = mid;
            r.stop = StopReason::current_resolved;
            done = true;
            break;
        }
        (reading > 0.0 ? lo : hi) = mid;
        if (hi - lo < pc.tolerance_mk) {
            r.th_setpoint_mk = 0.5 * (lo + hi);
            r.stop = StopReason::bracket_width;
            done = true;
            break;
        }
    }
    if (!done)
        throw ProtocolFailure("locate_carnot: no convergence after " + std::to_string(pc.max_iterations) +
                              " iterations");

    r.th_located_mk = r.th_setpoint_mk + pc.noise.delta_th_mk * unit(rng);
    r.tc_estimate_mk = omega_ratio(model.machine()) * r.th_located_mk;
    r.predicted = model.budget(pc.tc_true_mk);
    return r;
}

// Two-term error budget at the Carnot point of tc_mk.
inline ErrorBudget error_budget(const CurrentModel& model, double tc_mk) {
    if (!(tc_mk > 0.0)) throw DomainError("error_budget: T_c must be positive");
    return model.budget(tc_mk);
}

struct PrecisionRow {
    double tc_mk{0.0};
    std::optional<ErrorBudget> gaussian;
    std::optional<ErrorBudget> fock;
    double dtc_current_mk{0.0};   // single-shot current measurement, alpha law
    double dtc_qfi_mk{0.0};       // quantum Cramer-Rao bound, beta law
};

// Error budget and bound comparison over a T_c grid. The single-shot columns come
// from the Gaussian model: error propagation of the current and 1/sqrt(F).
inline std::vector<PrecisionRow> precision_curve(const Config& cfg, bool with_gaussian, bool with_fock,
                                                 const std::vector<double>& tc_grid_mk) {
    const CurrentModel gm(cfg, Model::gaussian), fm(cfg, Model::fock);
    const gaussian::GaussianParams gp = gaussian::GaussianParams::from(cfg);
    return parallel_map(tc_grid_mk, [&](double tc) {
        PrecisionRow row;
        row.tc_mk = tc;
        if (with_gaussian) row.gaussian = gm.budget(tc);
        if (with_fock) row.fock = fm.budget(tc);
        const BathState b = BathState::from_mk(cfg.machine, tc, carnot_hot_temperature_mk(tc, cfg.machine));
        row.dtc_current_mk =
            metrology::error_propagation(gaussian::dI_dTc(gp, b), gaussian::current_variance(gp, b));
        row.dtc_qfi_mk = metrology::cramer_rao(metrology::qfi_carnot_closed(gp, b).fisher_information);
        return row;
    });
}

// SplitMix64 step, used to derive independent per-run seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t run_seed(std::uint64_t master, std::uint64_t run) {
    return splitmix64(master ^ splitmix64(run));
}

struct RunRecord {
    int run{0};
    std::uint64_t seed{0};
    std::optional<ProtocolResult> result;   // empty when the search failed
    std::string failure;
};

struct MonteCarloSummary {
    int runs{0};
    int failures{0};
    double mean_mk{0.0};
    double std_mk{0.0};
    double stderr_mk{0.0};
    double bias_mk{0.0};
    double predicted_mk{0.0};
    std::vector<RunRecord> records;
};

// Independent runs with seeds derived from the master seed. A run whose
// search fails (the noisy bracket check can flip) is kept as a failure record
// and left out of the statistics.
inline MonteCarloSummary monte_carlo(const CurrentModel& model, const ProtocolConfig& base, int runs,
                                     std::uint64_t master_seed) {
    if (runs < 0) throw DomainError("monte_carlo: runs must be >= 0");
    std::vector<int> idx(runs);
    for (int i = 0; i < runs; ++i) idx[i] = i;
    MonteCarloSummary s;
    s.runs = runs;
    s.predicted_mk = model.budget(base.tc_true_mk).total_mk;
    s.records = parallel_map(idx, [&](int i) {
        RunRecord rec;
        rec.run = i;
        rec.seed = run_seed(master_seed, std::uint64_t(i));
        ProtocolConfig pc = base;
        pc.seed = rec.seed;
        try {
            rec.result = locate_carnot(model, pc);
        } catch (const ProtocolFailure& e) {
            rec.failure = e.what();
        }
        return rec;
    });

    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (const auto& rec : s.records) {
        if (!rec.result) { ++s.failures; continue; }
        sum += rec.result->tc_estimate_mk;
        ++n;
    }
    if (n == 0) return s;
    s.mean_mk = sum / n;
    for (const auto& rec : s.records)
        if (rec.result) sq += std::pow(rec.result->tc_estimate_mk - s.mean_mk, 2);
    s.std_mk = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
    s.stderr_mk = s.std_mk / std::sqrt(double(n));
    s.bias_mk = s.mean_mk - base.tc_true_mk;
    return s;
}

inline nlohmann::json to_json(const ErrorBudget& e) {
    return {{"total_mk", e.total_mk}, {"current_term_mk", e.current_term_mk},
            {"temperature_term_mk", e.temperature_term_mk}};
}

inline nlohmann::json to_json(const ProtocolResult& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& t : r.trace) trace.push_back({t.th_mk, t.reading_pa});
    return {{"th_setpoint_mk", r.th_setpoint_mk}, {"th_located_mk", r.th_located_mk},
            {"tc_estimate_mk", r.tc_estimate_mk}, {"predicted", to_json(r.predicted)},
            {"iterations", r.iterations},         {"stop", to_string(r.stop)},
            {"trace", trace}};
}

inline nlohmann::json to_json(const MonteCarloSummary& s) {
    return {{"runs", s.runs},           {"failures", s.failures}, {"mean_mk", s.mean_mk},
            {"std_mk", s.std_mk},       {"stderr_mk", s.stderr_mk}, {"bias_mk", s.bias_mk},
            {"predicted_mk", s.predicted_mk}};
}

} // namespace qtm::protocol
