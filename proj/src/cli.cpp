#include "tds/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "tds/demos.hpp"
#include "tds/format.hpp"
#include "tds/frequency.hpp"
#include "tds/interconnect.hpp"
#include "tds/json_io.hpp"
#include "tds/pid.hpp"
#include "tds/simulate.hpp"
#include "tds/stability.hpp"

namespace tds {

namespace {

std::vector<std::string> channel_headers(const char* stem, int p, int mi) {
    std::vector<std::string> h;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < mi; ++j)
            h.push_back(std::string(stem) + "_" + std::to_string(i + 1) + std::to_string(j + 1));
    return h;
}

void cmd_sim(const std::string& model_path, const std::string& u_path, const std::string& ref,
             double t1, double dt, const std::string& out) {
    GltiModel m = load_model(model_path);
    Vec t;
    Mat u;
    if (!ref.empty()) {
        if (ref != "tank-tracking")
            throw ModelError("unknown reference generator '" + ref + "'");
        if (m.num_inputs() != 1) throw ModelError("tank-tracking drives a single-input model");
        t = uniform_grid(t1, dt);
        u = tank_reference(t);
    } else {
        if (u_path.empty()) throw ModelError("sim needs --u or --ref");
        CsvTable tab = read_csv(u_path);
        if (tab.data.cols() != 1 + m.num_inputs())
            throw ModelError("input CSV must have columns t,u1..um matching the model");
        if (tab.data.rows() < 2) throw ModelError("input CSV needs at least two samples");
        t = tab.data.col(0);
        u = tab.data.rightCols(tab.data.cols() - 1);
    }
    SimulationResult r = simulate(m, u, t);
    std::vector<std::string> header{"t"};
    for (int j = 0; j < m.num_inputs(); ++j) header.push_back("u" + std::to_string(j + 1));
    for (int i = 0; i < m.num_outputs(); ++i) header.push_back("y" + std::to_string(i + 1));
    Mat data(r.t.size(), 1 + r.u.cols() + r.y.cols());
    data.col(0) = r.t;
    data.middleCols(1, r.u.cols()) = r.u;
    data.rightCols(r.y.cols()) = r.y;
    write_csv(out, header, data);
    std::cout << "wrote " << out << " (" << data.rows() << " samples)\n";
}

void cmd_step(const std::string& model_path, double t1, double dt, const std::string& out,
              const std::string& metrics_path) {
    GltiModel m = load_model(model_path);
    SimulationResult r = step_response(m, t1, dt);
    std::vector<std::string> header{"t"};
    for (int i = 0; i < m.num_outputs(); ++i) header.push_back("y" + std::to_string(i + 1));
    Mat data(r.t.size(), 1 + r.y.cols());
    data.col(0) = r.t;
    data.rightCols(r.y.cols()) = r.y;
    write_csv(out, header, data);
    std::cout << "wrote " << out << " (" << data.rows() << " samples)\n";
    if (!metrics_path.empty()) {
        StepMetrics sm = step_metrics(r);
        save_json(to_json(sm), metrics_path);
        std::cout << "overshoot " << format_float(sm.overshoot_pct) << "%, rise "
                  << format_float(sm.rise_time) << ", settle " << format_float(sm.settling_time)
                  << "\n";
    }
}

void cmd_bode(const std::string& model_path, int points, const std::string& out) {
    GltiModel m = load_model(model_path);
    BodeTable t = bode_data(m, points);
    std::vector<std::string> header{"omega"};
    for (const auto& h : channel_headers("mag_db", m.num_outputs(), m.num_inputs()))
        header.push_back(h);
    for (const auto& h : channel_headers("phase_deg", m.num_outputs(), m.num_inputs()))
        header.push_back(h);
    Mat data(t.omega.size(), 1 + t.mag_db.cols() + t.phase_deg.cols());
    data.col(0) = t.omega;
    data.middleCols(1, t.mag_db.cols()) = t.mag_db;
    data.rightCols(t.phase_deg.cols()) = t.phase_deg;
    write_csv(out, header, data);
    std::cout << "wrote " << out << " (" << data.rows() << " points)\n";
}

void cmd_nyquist(const std::string& model_path, int points, const std::string& out) {
    GltiModel m = load_model(model_path);
    NyquistTable t = nyquist_data(m, points);
    std::vector<std::string> header{"omega"};
    for (const auto& h : channel_headers("re", m.num_outputs(), m.num_inputs())) header.push_back(h);
    for (const auto& h : channel_headers("im", m.num_outputs(), m.num_inputs())) header.push_back(h);
    Mat data(t.omega.size(), 1 + t.re.cols() + t.im.cols());
    data.col(0) = t.omega;
    data.middleCols(1, t.re.cols()) = t.re;
    data.rightCols(t.im.cols()) = t.im;
    write_csv(out, header, data);
    std::cout << "wrote " << out << " (" << data.rows() << " points)\n";
}

void cmd_margin(const std::string& model_path, const std::string& out) {
    MarginReport r = margins(load_model(model_path));
    std::cout << "gm " << format_float(r.gm_min) << " at " << format_float(r.omega_gm)
              << " rad/s, pm " << format_float(r.pm_min) << " deg at " << format_float(r.omega_pm)
              << " rad/s" << (r.truncated ? " (band-limited search)" : "") << "\n";
    if (!out.empty()) save_json(to_json(r), out);
}

void cmd_bandwidth(const std::string& model_path, const std::string& out) {
    const double bw = bandwidth(load_model(model_path));
    std::cout << format_float(bw) << "\n";
    if (!out.empty()) save_json(Json{{"bandwidth", round_trip_12(bw)}}, out);
}

void cmd_dcgain(const std::string& model_path, const std::string& out) {
    DcGain g = dcgain(load_model(model_path));
    if (g.integrator) {
        std::cout << "infinite (integrator)\n";
    } else {
        for (long i = 0; i < g.value.rows(); ++i) {
            for (long j = 0; j < g.value.cols(); ++j)
                std::cout << (j ? "," : "") << format_float(g.value(i, j));
            std::cout << "\n";
        }
    }
    if (!out.empty()) save_json(to_json(g), out);
}

void cmd_pade(const std::string& model_path, int order, const std::string& out) {
    GltiModel m = pade_model(load_model(model_path), order);
    save_model(m, out);
    std::cout << "wrote " << out << " (order " << m.order() << " rational model)\n";
}

void cmd_roots(const std::string& model_path, int k, double tol, const std::string& out) {
    SpectrumResult r = rightmost_roots(load_model(model_path), k, tol);
    if (r.roots.size() > 0)
        std::cout << "rightmost " << format_float(r.roots(0).real()) << " + "
                  << format_float(r.roots(0).imag()) << "j";
    else
        std::cout << "no characteristic roots (static model)";
    std::cout << (r.converged ? ", converged" : ", NOT converged") << " (nodes " << r.n_cheb
              << ")\n";
    if (!out.empty()) {
        Mat data(r.roots.size(), 2);
        for (long i = 0; i < r.roots.size(); ++i) {
            data(i, 0) = r.roots(i).real();
            data(i, 1) = r.roots(i).imag();
        }
        write_csv(out, {"re", "im"}, data);
    }
}

void cmd_pidtune(const std::string& model_path, const std::string& type, double wc, double pm,
                 const std::string& out) {
    PidType t;
    if (type == "p")
        t = PidType::kP;
    else if (type == "pi")
        t = PidType::kPI;
    else if (type == "pid")
        t = PidType::kPID;
    else
        throw ModelError("unknown controller type '" + type + "' (expected p, pi or pid)");
    TuneReport r = tune_pid(load_model(model_path), t, wc, pm);
    std::cout << "kp " << format_float(r.controller.kp) << ", ki " << format_float(r.controller.ki)
              << ", kd " << format_float(r.controller.kd) << ", t_filter "
              << format_float(r.controller.t_filter) << "\n"
              << "crossover " << format_float(r.crossover) << " rad/s"
              << (r.crossover_clamped ? " (clamped to band)" : "") << ", measured pm "
              << format_float(r.phase_margin) << " deg, closed loop "
              << (r.stable ? "stable" : "NOT stable") << "\n";
    if (!out.empty()) save_json(to_json(r), out);
}

void cmd_connect(const std::string& netlist_path, const std::string& out) {
    GltiModel m = load_netlist(netlist_path);
    save_model(m, out);
    std::cout << "wrote " << out << " (" << m.order() << " states, " << m.num_channels()
              << " delay channels)\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Delay-system toolbox: analysis, simulation and tuning for LTI models with "
                 "internal time delays"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    std::string model, out, upath, ref, metrics_path, netlist, type = "pid", demo_name, out_dir = ".";
    double t1 = 0.0, dt = 0.0, tol = 1e-6, wc = 0.0, pm = 60.0;
    int points = 500, order = 0, k = 10;

    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", model, "model JSON file")->required();
    };

    CLI::App* sim = app.add_subcommand("sim", "simulate a model against input samples");
    add_model(sim);
    sim->add_option("--u", upath, "input CSV (t,u1..um)");
    sim->add_option("--ref", ref, "built-in reference generator (tank-tracking)");
    sim->add_option("--t1", t1, "reference horizon (default 2000)");
    sim->add_option("--dt", dt, "reference step (default 0.1)");
    sim->add_option("--out", out, "output CSV")->required();

    CLI::App* step = app.add_subcommand("step", "unit step response");
    add_model(step);
    step->add_option("--t1", t1, "horizon")->required();
    step->add_option("--dt", dt, "step size (default: automatic)");
    step->add_option("--out", out, "output CSV")->required();
    step->add_option("--metrics", metrics_path, "also write step metrics JSON");

    CLI::App* bode = app.add_subcommand("bode", "gain/phase over the auto frequency grid");
    add_model(bode);
    bode->add_option("--points", points, "grid size (default 500)");
    bode->add_option("--out", out, "output CSV")->required();

    CLI::App* nyq = app.add_subcommand("nyquist", "real/imaginary response locus");
    add_model(nyq);
    nyq->add_option("--points", points, "grid size (default 500)");
    nyq->add_option("--out", out, "output CSV")->required();

    CLI::App* margin = app.add_subcommand("margin", "gain and phase margins");
    add_model(margin);
    margin->add_option("--out", out, "margin report JSON");

    CLI::App* bwc = app.add_subcommand("bandwidth", "-3 dB bandwidth");
    add_model(bwc);
    bwc->add_option("--out", out, "JSON output");

    CLI::App* dcg = app.add_subcommand("dcgain", "steady-state gain");
    add_model(dcg);
    dcg->add_option("--out", out, "JSON output");

    CLI::App* pade = app.add_subcommand("pade", "rational delay approximation of a model");
    add_model(pade);
    pade->add_option("--order", order, "Pade order")->required();
    pade->add_option("--out", out, "model JSON output")->required();

    CLI::App* roots = app.add_subcommand("roots", "rightmost characteristic roots");
    add_model(roots);
    roots->add_option("--k", k, "number of roots (default 10)");
    roots->add_option("--tol", tol, "convergence tolerance (default 1e-6)");
    roots->add_option("--out", out, "roots CSV (re,im)");

    CLI::App* tune = app.add_subcommand("pidtune", "phase-margin PID design");
    add_model(tune);
    tune->add_option("--type", type, "p, pi or pid (default pid)");
    tune->add_option("--wc", wc, "crossover rad/s (default: automatic)");
    tune->add_option("--pm", pm, "target phase margin deg (default 60)");
    tune->add_option("--out", out, "tuning report JSON");

    CLI::App* conn = app.add_subcommand("connect", "build a model from a block-diagram netlist");
    conn->add_option("--netlist", netlist, "netlist JSON file")->required();
    conn->add_option("--out", out, "model JSON output")->required();

    CLI::App* demo = app.add_subcommand("demo", "write a worked example (tank-pi, smith, pidtune)");
    demo->add_option("name", demo_name, "demo name")->required();
    demo->add_option("--out-dir", out_dir, "output directory (default .)");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) {
            if (!ref.empty()) {
                if (t1 <= 0.0) t1 = 2000.0;
                if (dt <= 0.0) dt = 0.1;
            }
            cmd_sim(model, upath, ref, t1, dt, out);
        } else if (step->parsed()) {
            cmd_step(model, t1, dt, out, metrics_path);
        } else if (bode->parsed()) {
            cmd_bode(model, points, out);
        } else if (nyq->parsed()) {
            cmd_nyquist(model, points, out);
        } else if (margin->parsed()) {
            cmd_margin(model, out);
        } else if (bwc->parsed()) {
            cmd_bandwidth(model, out);
        } else if (dcg->parsed()) {
            cmd_dcgain(model, out);
        } else if (pade->parsed()) {
            cmd_pade(model, order, out);
        } else if (roots->parsed()) {
            cmd_roots(model, k, tol, out);
        } else if (tune->parsed()) {
            cmd_pidtune(model, type, wc, pm, out);
        } else if (conn->parsed()) {
            cmd_connect(netlist, out);
        } else if (demo->parsed()) {
            std::cout << run_demo(demo_name, out_dir) << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    } catch (const ModelError& e) {
        std::cerr << "error: model: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace tds
