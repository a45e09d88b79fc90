// cli.hpp - The qtm command line: current sweeps, precision curves, QFI
// comparison and protocol Monte Carlo, each writing a CSV, a gnuplot script
// and a JSON run manifest into the output directory.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qtm/config.hpp"
#include "qtm/errors.hpp"
#include "qtm/fock.hpp"
#include "qtm/gaussian.hpp"
#include "qtm/metrology.hpp"
#include "qtm/protocol.hpp"
#include "qtm/sweep.hpp"
#include "qtm/version.hpp"

#ifndef QTM_DEFAULT_CONFIG
#define QTM_DEFAULT_CONFIG ""
#endif

namespace qtm::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

struct Options {
    std::string command;
    std::string config_path;
    std::string model{"both"};
    std::optional<double> tc_mk;
    std::optional<double> th_min_mk;
    std::optional<double> th_max_mk;
    double tc_min_mk{15.0};
    double tc_max_mk{50.0};
    std::optional<int> grid;
    std::uint64_t seed{1};
    int runs{1000};
    int readings{1};
    double tolerance_mk{0.01};
    std::string out{"."};
    bool dump_operators{false};
};

// Shortest round-trip form, so identical runs give identical bytes.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 0) throw ConfigError("--grid must be >= 0");
    if (hi < lo) throw ConfigError("range maximum below its minimum");
    if (n == 0) return {};
    if (n == 1 || lo == hi) return {lo};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

inline bool want(const Options& o, protocol::Model m) {
    return o.model == "both" || o.model == protocol::to_string(m);
}

inline std::vector<protocol::Model> models_of(const Options& o) {
    if (o.model != "both" && o.model != "fock" && o.model != "gaussian")
        throw ConfigError("--model must be fock, gaussian or both");
    std::vector<protocol::Model> m;
    if (want(o, protocol::Model::fock)) m.push_back(protocol::Model::fock);
    if (want(o, protocol::Model::gaussian)) m.push_back(protocol::Model::gaussian);
    return m;
}

// Output files of one command plus the manifest block that heads each CSV.
class Run {
public:
    Run(const Options& o, const Config& cfg, nlohmann::json args) : opt_(o), cfg_(cfg), args_(std::move(args)) {
        std::filesystem::create_directories(o.out);
    }

    std::string path(const std::string& name) const { return (std::filesystem::path(opt_.out) / name).string(); }

    // Comment block without a timestamp: reruns must be byte-identical.
    std::string header() const {
        std::ostringstream h;
        h << "# qtm " << version << " " << opt_.command << "\n";
        h << "# schema " << csv_schema << "\n";
        for (const auto& [k, v] : cfg_.key_values()) h << "# config " << k << " = " << num(v) << "\n";
        for (const auto& [k, v] : args_.items()) h << "# arg " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        return h.str();
    }

    void write(const std::string& name, const std::string& body) {
        std::ofstream f(path(name), std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + path(name) + "'");
        f << body;
        outputs_.push_back(path(name));
    }

    void write_csv(const std::string& name, const std::string& body) { write(name, header() + body); }

    void finish(const std::string& stem, nlohmann::json extra = nlohmann::json::object()) {
        nlohmann::json m;
        m["artifact"] = "qtm";
        m["version"] = version;
        m["schema"] = csv_schema;
        m["command"] = opt_.command;
        m["config_path"] = opt_.config_path;
        nlohmann::json c;
        for (const auto& [k, v] : cfg_.key_values()) c[k] = v;
        m["config"] = c;
        m["arguments"] = args_;
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char ts[32];
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        m["timestamp"] = ts;
        auto outputs = outputs_;
        outputs.push_back(path(stem + ".manifest.json"));
        m["outputs"] = outputs;
        for (const auto& [k, v] : extra.items()) m[k] = v;
        std::ofstream f(path(stem + ".manifest.json"), std::ios::binary);
        f << m.dump(2) << "\n";
    }

private:
    const Options& opt_;
    const Config& cfg_;
    nlohmann::json args_;
    std::vector<std::string> outputs_;
};

inline std::string gnuplot(const std::string& csv, const std::string& png, const std::string& xlabel,
                           const std::string& ylabel, const std::string& plots, bool logy = false) {
    std::ostringstream g;
    g << "set datafile separator ','\n"
      << "set terminal pngcairo size 800,560\n"
      << "set output '" << png << "'\n"
      << "set xlabel '" << xlabel << "'\n"
      << "set ylabel '" << ylabel << "'\n"
      << (logy ? "set logscale y\n" : "")
      << "set key top right\n"
      << "plot " << plots << "\n";
    (void)csv;
    return g.str();
}

// Rethrow a solver failure with the grid point that caused it.
template <class F>
auto at_point(const std::string& what, double value, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const NumericalFailure& e) {
        throw NumericalFailure("at " + what + " = " + num(value) + " mK: " + e.what());
    }
}

inline int cmd_sweep_current(const Options& o, const Config& cfg, std::ostream& out) {
    models_of(o);
    const double tc = o.tc_mk.value_or(cfg.tc_mk);
    const double lo = o.th_min_mk.value_or(20.0), hi = o.th_max_mk.value_or(200.0);
    if (!(tc > 0.0) || !(lo > 0.0)) throw ConfigError("temperatures must be positive");
    const auto grid = linspace(lo, hi, o.grid.value_or(37));
    const bool fock_on = want(o, protocol::Model::fock), gauss_on = want(o, protocol::Model::gaussian);
    const MachineParams& p = cfg.machine;
    const auto gp = gaussian::GaussianParams::from(cfg);

    struct Row { double th, i_f, i_g, jc, jh, pw; };
    const auto rows = parallel_map(grid, [&](double th) {
        return at_point("T_h", th, [&] {
            const BathState b = BathState::from_mk(p, tc, th);
            Row r{th, NAN, NAN, NAN, NAN, NAN};
            if (gauss_on) {
                r.i_g = gaussian::mean_current(gp, b);
                const auto cov = gaussian::steady_covariance(gp, b);
                r.jc = gaussian::heat_current_c(gp, b, cov);
                r.jh = gaussian::heat_current_h(gp, b, cov);
                r.pw = units::watt_to_aw(units::pa_to_ampere(r.i_g) * resonance_voltage(p));
            }
            if (fock_on) {
                const auto s = fock::solve(p, b, protocol::default_tail_tol);
                r.i_f = s.obs.charge_current_pa;
                r.jc = s.obs.heat_current_c_aw;
                r.jh = s.obs.heat_current_h_aw;
                r.pw = s.obs.power_aw;
            }
            return r;
        });
    });

    nlohmann::json args{{"model", o.model}, {"tc_mk", tc}, {"th_min_mk", lo}, {"th_max_mk", hi},
                        {"grid", int(grid.size())}};
    Run run(o, cfg, args);
    std::ostringstream csv;
    csv << "# heat and power columns come from the Fock model when it runs, else the Gaussian model\n";
    csv << "T_h_mK,I_pA_fock,I_pA_gaussian,Jc_aW,Jh_aW,P_aW\n";
    for (const auto& r : rows)
        csv << num(r.th) << ',' << num(r.i_f) << ',' << num(r.i_g) << ',' << num(r.jc) << ',' << num(r.jh) << ','
            << num(r.pw) << '\n';
    run.write_csv("sweep_current.csv", csv.str());
    run.write("sweep_current.gp",
              gnuplot("sweep_current.csv", "sweep_current.png", "T_h [mK]", "I [pA]",
                      "'sweep_current.csv' using 1:2 with lines lw 2 title 'Fock', "
                      "'' using 1:3 with lines dt 2 lw 2 title 'Gaussian', 0 notitle lc 'gray'"));

    if (o.dump_operators && !grid.empty()) {
        const BathState b = BathState::from_mk(p, tc, grid.front());
        const auto cut = fock::choose_cutoff(p, b, protocol::default_tail_tol);
        std::ostringstream d;
        fock::dump_operator(d, fock::build_hamiltonian(p, cut));
        fock::dump_operator(d, fock::build_current_operator(p, cut));
        run.write("operators.txt", d.str());
    }
    run.finish("sweep_current");
    out << "wrote " << rows.size() << " rows to " << run.path("sweep_current.csv") << "\n";
    return exit_ok;
}

inline int cmd_precision_curve(const Options& o, const Config& cfg, std::ostream& out) {
    models_of(o);
    if (!(o.tc_min_mk > 0.0)) throw ConfigError("temperatures must be positive");
    const auto grid = linspace(o.tc_min_mk, o.tc_max_mk, o.grid.value_or(8));
    const bool fock_on = want(o, protocol::Model::fock), gauss_on = want(o, protocol::Model::gaussian);
    std::vector<protocol::PrecisionRow> rows;
    for (double tc : grid)
        rows.push_back(at_point("T_c", tc, [&] { return protocol::precision_curve(cfg, gauss_on, fock_on, {tc}).front(); }));

    nlohmann::json args{{"model", o.model}, {"tc_min_mk", o.tc_min_mk}, {"tc_max_mk", o.tc_max_mk},
                        {"grid", int(grid.size())}};
    Run run(o, cfg, args);
    std::ostringstream csv;
    csv << "T_c_mK,dTc_total_mK_gaussian,current_term_mK_gaussian,dTc_total_mK_fock,current_term_mK_fock,"
           "temperature_term_mK,dTc_current_mK,dTc_qfi_mK\n";
    const double temp_term = cfg.machine.omega_c / cfg.machine.omega_h * cfg.noise.delta_th_mk;
    for (const auto& r : rows) {
        csv << num(r.tc_mk) << ',' << num(r.gaussian ? r.gaussian->total_mk : NAN) << ','
            << num(r.gaussian ? r.gaussian->current_term_mk : NAN) << ',' << num(r.fock ? r.fock->total_mk : NAN)
            << ',' << num(r.fock ? r.fock->current_term_mk : NAN) << ',' << num(temp_term) << ','
            << num(r.dtc_current_mk) << ',' << num(r.dtc_qfi_mk) << '\n';
    }
    run.write_csv("precision_curve.csv", csv.str());
    run.write("precision_curve.gp",
              gnuplot("precision_curve.csv", "precision_curve.png", "T_c [mK]", "Delta T_c [mK]",
                      "'precision_curve.csv' using 1:4 with lines lw 2 title 'Fock', "
                      "'' using 1:2 with lines dt 2 lw 2 title 'Gaussian', "
                      "'' using 1:6 with lines dt 3 title 'T_h term'"));
    run.finish("precision_curve");
    out << "wrote " << rows.size() << " rows to " << run.path("precision_curve.csv") << "\n";
    return exit_ok;
}

inline int cmd_qfi_compare(const Options& o, const Config& cfg, std::ostream& out) {
    if (!(o.tc_min_mk > 0.0)) throw ConfigError("temperatures must be positive");
    const auto grid = linspace(o.tc_min_mk, o.tc_max_mk, o.grid.value_or(50));
    const auto gp = gaussian::GaussianParams::from(cfg);
    const auto rows = protocol::precision_curve(cfg, false, false, grid);

    nlohmann::json args{{"tc_min_mk", o.tc_min_mk}, {"tc_max_mk", o.tc_max_mk}, {"grid", int(grid.size())},
                        {"g_ghz", units::to_ghz(gp.g)}};
    Run run(o, cfg, args);
    std::ostringstream csv;
    csv << "T_c_mK,dTc_current_mK,dTc_qfi_mK,ratio\n";
    for (const auto& r : rows)
        csv << num(r.tc_mk) << ',' << num(r.dtc_current_mk) << ',' << num(r.dtc_qfi_mk) << ','
            << num(r.dtc_current_mk / r.dtc_qfi_mk) << '\n';
    run.write_csv("qfi_compare.csv", csv.str());
    run.write("qfi_compare.gp",
              gnuplot("qfi_compare.csv", "qfi_compare.png", "T_c [mK]", "Delta T_c [mK]",
                      "'qfi_compare.csv' using 1:2 with lines lw 2 title 'current', "
                      "'' using 1:3 with lines dt 2 lw 2 title 'QFI'",
                      true));
    run.finish("qfi_compare", {{"alpha", gaussian::alpha(gp).value}, {"beta", gaussian::beta(gp).value}});
    out << "wrote " << rows.size() << " rows to " << run.path("qfi_compare.csv") << "\n";
    return exit_ok;
}

inline int cmd_protocol(const Options& o, const Config& cfg, std::ostream& out) {
    const auto models = models_of(o);
    const double tc = o.tc_mk.value_or(cfg.tc_mk);
    if (!(tc > 0.0)) throw ConfigError("temperatures must be positive");
    if (o.runs < 0) throw ConfigError("--runs must be >= 0");
    protocol::ProtocolConfig pc = protocol::ProtocolConfig::around(cfg, tc);
    if (o.th_min_mk) pc.th_lo_mk = *o.th_min_mk;
    if (o.th_max_mk) pc.th_hi_mk = *o.th_max_mk;
    pc.readings_per_point = o.readings;
    pc.tolerance_mk = o.tolerance_mk;
    try {
        protocol::check(pc);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    nlohmann::json args{{"model", o.model},          {"tc_mk", tc},           {"th_min_mk", pc.th_lo_mk},
                        {"th_max_mk", pc.th_hi_mk},  {"seed", std::to_string(o.seed)}, {"runs", o.runs},
                        {"readings", o.readings},    {"tolerance_mk", o.tolerance_mk}};
    Run run(o, cfg, args);
    std::ostringstream runs_csv, summary_csv;
    runs_csv << "model,run,seed,status,iterations,stop,th_setpoint_mK,th_located_mK,tc_estimate_mK\n";
    summary_csv << "model,runs,failures,mean_mK,std_mK,stderr_mK,bias_mK,predicted_dTc_mK,current_term_mK,"
                   "temperature_term_mK\n";
    nlohmann::json summaries = nlohmann::json::object();
    for (const auto m : models) {
        const protocol::CurrentModel cm(cfg, m);
        const auto s = at_point("T_c", tc, [&] { return protocol::monte_carlo(cm, pc, o.runs, o.seed); });
        const auto budget = cm.budget(tc);
        for (const auto& rec : s.records) {
            runs_csv << protocol::to_string(m) << ',' << rec.run << ',' << rec.seed << ',';
            if (rec.result) {
                const auto& r = *rec.result;
                runs_csv << "ok," << r.iterations << ',' << protocol::to_string(r.stop) << ',' << num(r.th_setpoint_mk)
                         << ',' << num(r.th_located_mk) << ',' << num(r.tc_estimate_mk) << '\n';
            } else {
                runs_csv << "failed,,,nan,nan,nan\n";
            }
        }
        summary_csv << protocol::to_string(m) << ',' << s.runs << ',' << s.failures << ',' << num(s.mean_mk) << ','
                    << num(s.std_mk) << ',' << num(s.stderr_mk) << ',' << num(s.bias_mk) << ','
                    << num(s.predicted_mk) << ',' << num(budget.current_term_mk) << ','
                    << num(budget.temperature_term_mk) << '\n';
        auto js = protocol::to_json(s);
        if (!s.records.empty() && s.records.front().result) js["first_run"] = protocol::to_json(*s.records.front().result);
        summaries[protocol::to_string(m)] = js;
        out << protocol::to_string(m) << ": runs " << s.runs << ", failures " << s.failures << ", mean "
            << num(s.mean_mk) << " mK, std " << num(s.std_mk) << " mK, predicted " << num(s.predicted_mk)
            << " mK, bias " << num(s.bias_mk) << " mK (" << num(s.stderr_mk > 0 ? s.bias_mk / s.stderr_mk : NAN)
            << " SE)\n";
    }
    run.write_csv("protocol_runs.csv", runs_csv.str());
    run.write_csv("protocol_summary.csv", summary_csv.str());
    run.write("protocol.gp",
              gnuplot("protocol_runs.csv", "protocol.png", "T_c estimate [mK]", "runs",
                      "'protocol_runs.csv' using (bin($9)):(1.0) smooth freq with boxes title 'estimates'")
                  .insert(0, "binwidth = 0.25\nbin(x) = binwidth * floor(x / binwidth)\n"));
    run.finish("protocol", {{"summary", summaries}});
    return exit_ok;
}

// Parse argv and run one subcommand. Output text goes to out, errors to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"qtm - Carnot-point thermometry with a Josephson quantum thermal machine"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Options o;
    o.config_path = QTM_DEFAULT_CONFIG;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "key = value parameter file")->capture_default_str();
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--grid", o.grid, "number of grid points");
    };
    auto model_flag = [&](CLI::App* sub) {
        sub->add_option("--model", o.model, "fock, gaussian or both")
            ->check(CLI::IsMember({"fock", "gaussian", "both"}))
            ->capture_default_str();
    };
    auto tc_range = [&](CLI::App* sub) {
        sub->add_option("--tc-min-mk", o.tc_min_mk, "lowest T_c [mK]")->capture_default_str();
        sub->add_option("--tc-max-mk", o.tc_max_mk, "highest T_c [mK]")->capture_default_str();
    };

    auto* sweep = app.add_subcommand("sweep-current", "charge current and energy flows versus T_h");
    common(sweep);
    model_flag(sweep);
    sweep->add_option("--tc-mk", o.tc_mk, "cold temperature [mK], default from the config");
    sweep->add_option("--th-min-mk", o.th_min_mk, "lowest T_h [mK], default 20");
    sweep->add_option("--th-max-mk", o.th_max_mk, "highest T_h [mK], default 200");
    sweep->add_flag("--dump-operators", o.dump_operators, "also write H and I on the cutoff of the first point");

    auto* prec = app.add_subcommand("precision-curve", "error budget versus T_c");
    common(prec);
    model_flag(prec);
    tc_range(prec);

    auto* qfi = app.add_subcommand("qfi-compare", "current-measurement precision against the QFI bound");
    common(qfi);
    tc_range(qfi);

    auto* proto = app.add_subcommand("protocol", "Monte Carlo of the noisy Carnot-point search");
    common(proto);
    model_flag(proto);
    proto->add_option("--tc-mk", o.tc_mk, "true cold temperature [mK], default from the config");
    proto->add_option("--th-min-mk", o.th_min_mk, "refrigerator end of the T_h bracket [mK], default T*/2");
    proto->add_option("--th-max-mk", o.th_max_mk, "far end of the T_h bracket [mK], default 2T*");
    proto->add_option("--seed", o.seed, "master seed")->capture_default_str();
    proto->add_option("--runs", o.runs, "number of runs")->capture_default_str();
    proto->add_option("--readings", o.readings, "current readings averaged per setpoint")->capture_default_str();
    proto->add_option("--tolerance-mk", o.tolerance_mk, "bisection tolerance [mK]")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }
    o.command = app.get_subcommands().front()->get_name();

    try {
        const Config cfg = load_config(o.config_path);
        if (o.command == "sweep-current") return cmd_sweep_current(o, cfg, out);
        if (o.command == "precision-curve") return cmd_precision_curve(o, cfg, out);
        if (o.command == "qfi-compare") return cmd_qfi_compare(o, cfg, out);
        return cmd_protocol(o, cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
}

} // namespace qtm::cli
