#include "tds/demos.hpp"

#include <cmath>
#include <sstream>

#include "tds/format.hpp"
#include "tds/frequency.hpp"
#include "tds/json_io.hpp"
#include "tds/pid.hpp"
#include "tds/simulate.hpp"

namespace tds {

GltiModel tank_plant(int variant) {
    switch (variant) {
        case 0: return to_glti(make_tf({5.6}, {40.2, 1.0}, 93.9));
        case 1: return to_glti(make_tf({5.0}, {38.0, 1.0}, 90.0));
        case 2: return to_glti(make_tf({6.0}, {42.0, 1.0}, 100.0));
        default: throw ModelError("unknown tank plant variant");
    }
}

GltiModel tank_pi_controller() {
    PidController c;
    c.type = PidType::kPI;
    c.kp = 0.12;
    c.ki = 0.12 / 100.0;
    return to_glti(c);
}

GltiModel tank_pi_loop() {
    return feedback(series(tank_pi_controller(), tank_plant()), static_gain(1.0));
}

Json smith_netlist(int plant_variant) {
    Json pj;
    switch (plant_variant) {
        case 0:
            pj = {{"kind", "tf"}, {"num", {5.6}}, {"den", {40.2, 1.0}}, {"io_delay", 93.9}};
            break;
        case 1:
            pj = {{"kind", "tf"}, {"num", {5.0}}, {"den", {38.0, 1.0}}, {"io_delay", 90.0}};
            break;
        case 2:
            pj = {{"kind", "tf"}, {"num", {6.0}}, {"den", {42.0, 1.0}}, {"io_delay", 100.0}};
            break;
        default:
            throw ModelError("unknown tank plant variant");
    }
    Json j;
    j["blocks"] = Json::array();
    auto block = [&](Json model, const std::string& in, const std::string& out) {
        j["blocks"].push_back({{"model", std::move(model)},
                               {"inputs", Json::array({in})},
                               {"outputs", Json::array({out})}});
    };
    block({{"kind", "tf"}, {"num", {0.5, 0.0125}}, {"den", {1.0, 0.0}}}, "e2", "uc");
    block({{"kind", "tf"}, {"num", {5.6}}, {"den", {40.2, 1.0}}}, "uc", "yg");
    block({{"kind", "tf"}, {"num", {1.0}}, {"den", {1.0}}, {"io_delay", 93.9}}, "yg", "ydg");
    block({{"kind", "tf"}, {"num", {1.0}}, {"den", {20.0, 1.0}}}, "ef", "yf");
    block(std::move(pj), "uc", "yp");
    j["sums"] = Json::array({
        Json{{"signs", {1, -1}}, {"inputs", {"yp", "ydg"}}, {"output", "ef"}},
        Json{{"signs", {1, -1, -1}}, {"inputs", {"r", "yg", "yf"}}, {"output", "e2"}},
    });
    j["from"] = Json::array({"r"});
    j["to"] = Json::array({"yp"});
    return j;
}

GltiModel smith_loop(int plant_variant) { return netlist_from_json(smith_netlist(plant_variant)); }

Mat tank_reference(const Vec& t) {
    Mat r(t.size(), 1);
    for (long i = 0; i < t.size(); ++i) r(i, 0) = t(i) < 1000.0 ? 4.0 : 8.0;
    return r;
}

Vec uniform_grid(double t_final, double dt) {
    if (!(t_final > 0.0) || !(dt > 0.0)) throw ModelError("grid needs positive t_final and dt");
    const long nt = static_cast<long>(std::floor(t_final / dt + 1e-9)) + 1;
    Vec t(nt);
    for (long i = 0; i < nt; ++i) t(i) = dt * static_cast<double>(i);
    return t;
}

namespace {

void write_tracking(const std::string& path, const Vec& t, const Mat& ref, const Mat& y) {
    Mat out(t.size(), 3);
    out.col(0) = t;
    out.col(1) = ref.col(0);
    out.col(2) = y.col(0);
    write_csv(path, {"t", "ref", "y"}, out);
}

}  // namespace

std::string run_demo(const std::string& name, const std::string& out_dir) {
    auto path = [&](const char* f) { return out_dir + "/" + f; };
    std::ostringstream summary;
    if (name == "tank-pi") {
        GltiModel loop = tank_pi_loop();
        save_model(tank_plant(), path("tank.json"));
        save_model(loop, path("tpi.json"));
        const Vec t = uniform_grid(2000.0, 0.1);
        const Mat ref = tank_reference(t);
        SimulationResult r = simulate(loop, ref, t);
        write_tracking(path("tpi_track.csv"), t, ref, r.y);
        summary << "tank-pi: tank.json, tpi.json, tpi_track.csv";
    } else if (name == "smith") {
        save_json(smith_netlist(0), path("smith_netlist.json"));
        const Vec t = uniform_grid(2000.0, 0.1);
        const Mat ref = tank_reference(t);
        const char* files[3] = {"tsp_track.csv", "tsp_track_p1.csv", "tsp_track_p2.csv"};
        Json bw = Json::array();
        Json gm = Json::array(), pm = Json::array(), wgm = Json::array(), wpm = Json::array();
        for (int v = 0; v < 3; ++v) {
            GltiModel loop = smith_loop(v);
            SimulationResult r = simulate(loop, ref, t);
            write_tracking(path(files[v]), t, ref, r.y);
            bw.push_back(round_trip_12(bandwidth(loop)));
            MarginReport mr = margins(loop);
            gm.push_back(round_trip_12(mr.gm_min));
            pm.push_back(round_trip_12(mr.pm_min));
            wgm.push_back(round_trip_12(mr.omega_gm));
            wpm.push_back(round_trip_12(mr.omega_pm));
        }
        save_json(Json{{"bandwidth", bw}}, path("bandwidth.json"));
        save_json(Json{{"gm", gm}, {"pm_deg", pm}, {"omega_gm", wgm}, {"omega_pm", wpm}},
                  path("margins.json"));
        summary << "smith: smith_netlist.json, tsp_track{,_p1,_p2}.csv, bandwidth.json, margins.json";
    } else if (name == "pidtune") {
        GltiModel plant = tank_plant();
        TuneReport slow = tune_pid(plant, PidType::kPID, 0.0067);
        TuneReport fast = tune_pid(plant, PidType::kPID, 0.0074);
        save_json(to_json(slow), path("cpid.json"));
        save_json(to_json(fast), path("cpidf.json"));
        Json metrics;
        const char* step_files[2] = {"tpid_step.csv", "tpidf_step.csv"};
        const char* keys[2] = {"cpid", "cpidf"};
        const TuneReport* reps[2] = {&slow, &fast};
        for (int i = 0; i < 2; ++i) {
            GltiModel loop =
                feedback(series(to_glti(reps[i]->controller), plant), static_gain(1.0));
            SimulationResult r = step_response(loop, 1200.0, 0.1);
            Mat out(r.t.size(), 2);
            out.col(0) = r.t;
            out.col(1) = r.y.col(0);
            write_csv(path(step_files[i]), {"t", "y"}, out);
            metrics[keys[i]] = to_json(step_metrics(r));
            if (i == 0) {
                const Vec t = uniform_grid(2000.0, 0.1);
                const Mat ref = tank_reference(t);
                SimulationResult tr = simulate(loop, ref, t);
                write_tracking(path("tpid_track.csv"), t, ref, tr.y);
            }
        }
        save_json(metrics, path("metrics.json"));
        summary << "pidtune: cpid.json, cpidf.json, tpid_step.csv, tpidf_step.csv, "
                   "tpid_track.csv, metrics.json";
    } else {
        throw ModelError("unknown demo '" + name + "' (expected tank-pi, smith or pidtune)");
    }
    return summary.str();
}

}  // namespace tds
