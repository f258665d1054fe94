#include "tds/json_io.hpp"

#include <fstream>

#include "tds/format.hpp"
#include "tds/interconnect.hpp"

namespace tds {

namespace {

Json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round_trip_12(x);
}

Json mat_json(const Mat& m) {
    Json rows = Json::array();
    for (long r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
}

[[noreturn]] void bad(const std::string& what) { throw ModelError("model JSON: " + what); }

Mat parse_matrix(const Json& j, const std::string& name) {
    if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
    if (!j.is_array()) bad("'" + name + "' must be a matrix (array of rows)");
    if (j.empty()) return Mat(0, 0);
    if (!j[0].is_array()) bad("'" + name + "' must be nested rows, e.g. [[1,2],[3,4]]");
    const long rows = static_cast<long>(j.size());
    const long cols = static_cast<long>(j[0].size());
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (!j[static_cast<size_t>(r)].is_array() ||
            static_cast<long>(j[static_cast<size_t>(r)].size()) != cols)
            bad("'" + name + "' has ragged rows");
        for (long c = 0; c < cols; ++c) {
            const Json& cell = j[static_cast<size_t>(r)][static_cast<size_t>(c)];
            if (!cell.is_number()) bad("'" + name + "' has a non-numeric entry");
            m(r, c) = cell.get<double>();
        }
    }
    return m;
}

Vec parse_vector(const Json& j, const std::string& name) {
    if (j.is_number()) return Vec::Constant(1, j.get<double>());
    if (!j.is_array()) bad("'" + name + "' must be an array of numbers");
    Vec v(static_cast<long>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) bad("'" + name + "' has a non-numeric entry");
        v(static_cast<long>(i)) = j[i].get<double>();
    }
    return v;
}

Poly parse_poly(const Json& j, const std::string& name) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) bad("'" + name + "' must be an array of coefficients");
    Poly p;
    for (const Json& c : j) {
        if (!c.is_number()) bad("'" + name + "' has a non-numeric coefficient");
        p.push_back(c.get<double>());
    }
    return p;
}

std::vector<std::vector<Poly>> parse_poly_matrix(const Json& j, const std::string& name) {
    if (j.is_number()) return {{{j.get<double>()}}};
    if (!j.is_array() || j.empty()) bad("'" + name + "' must be a polynomial or matrix of them");
    if (j[0].is_number()) return {{parse_poly(j, name)}};  // SISO shorthand
    std::vector<std::vector<Poly>> out;
    for (const Json& row : j) {
        if (!row.is_array() || row.empty()) bad("'" + name + "' has an empty or non-array row");
        std::vector<Poly> r;
        for (const Json& cell : row) {
            if (!cell.is_array()) bad("each channel of '" + name + "' must be an array of coefficients");
            r.push_back(parse_poly(cell, name));
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::string> parse_names(const Json& j, const std::string& name) {
    if (!j.is_array()) bad("'" + name + "' must be an array of strings");
    std::vector<std::string> out;
    for (const Json& s : j) {
        if (!s.is_string()) bad("'" + name + "' has a non-string entry");
        out.push_back(s.get<std::string>());
    }
    return out;
}

GltiModel tf_from_json(const Json& j) {
    if (!j.contains("num") || !j.contains("den")) bad("tf model needs 'num' and 'den'");
    auto nums = parse_poly_matrix(j["num"], "num");
    auto dens = parse_poly_matrix(j["den"], "den");
    Mat io = j.contains("io_delay") ? parse_matrix(j["io_delay"], "io_delay") : Mat();
    Vec ind = j.contains("input_delay") ? parse_vector(j["input_delay"], "input_delay") : Vec();
    Vec outd = j.contains("output_delay") ? parse_vector(j["output_delay"], "output_delay") : Vec();
    TransferFunction tf = make_tf(std::move(nums), std::move(dens), io, ind, outd);
    if (j.contains("input_names")) tf.input_names = parse_names(j["input_names"], "input_names");
    if (j.contains("output_names")) tf.output_names = parse_names(j["output_names"], "output_names");
    return to_glti(tf);
}

GltiModel ss_from_json(const Json& j) {
    GltiModel m;
    if (!j.contains("a")) bad("ss model needs 'a'");
    m.a = parse_matrix(j["a"], "a");
    auto block = [&](const char* primary, const char* alias) -> Json {
        if (j.contains(primary)) return j[primary];
        if (alias && j.contains(alias)) return j[alias];
        return nullptr;
    };
    const Json jb = block("b1", "b"), jc = block("c1", "c"), jd = block("d11", "d");
    const int n = static_cast<int>(m.a.rows());
    Mat b1 = jb.is_null() ? Mat() : parse_matrix(jb, "b1");
    Mat c1 = jc.is_null() ? Mat() : parse_matrix(jc, "c1");
    Mat d11 = jd.is_null() ? Mat() : parse_matrix(jd, "d11");
    int mi, p;
    if (!jd.is_null()) {
        mi = static_cast<int>(d11.cols());
        p = static_cast<int>(d11.rows());
    } else if (!jb.is_null() && !jc.is_null()) {
        mi = static_cast<int>(b1.cols());
        p = static_cast<int>(c1.rows());
    } else {
        bad("ss model needs 'd11' or both 'b1' and 'c1' to fix the dimensions");
    }
    m.b1 = jb.is_null() ? Mat::Zero(n, mi) : b1;
    m.c1 = jc.is_null() ? Mat::Zero(p, n) : c1;
    m.d11 = jd.is_null() ? Mat::Zero(p, mi) : d11;

    if (j.contains("tau")) {
        m.tau = parse_vector(j["tau"], "tau");
        if (j.contains("delay_widths")) {
            const Vec w = parse_vector(j["delay_widths"], "delay_widths");
            for (long i = 0; i < w.size(); ++i) {
                if (w(i) != std::floor(w(i)) || w(i) < 1.0) bad("'delay_widths' must be positive integers");
                m.delay_widths.push_back(static_cast<int>(w(i)));
            }
        } else {
            m.delay_widths.assign(static_cast<size_t>(m.tau.size()), 1);
        }
        int q = 0;
        for (int w : m.delay_widths) q += w;
        m.b2 = j.contains("b2") ? parse_matrix(j["b2"], "b2") : Mat::Zero(n, q);
        m.c2 = j.contains("c2") ? parse_matrix(j["c2"], "c2") : Mat::Zero(q, n);
        m.d12 = j.contains("d12") ? parse_matrix(j["d12"], "d12") : Mat::Zero(p, q);
        m.d21 = j.contains("d21") ? parse_matrix(j["d21"], "d21") : Mat::Zero(q, mi);
        m.d22 = j.contains("d22") ? parse_matrix(j["d22"], "d22") : Mat::Zero(q, q);
    } else {
        m.b2 = Mat::Zero(n, 0);
        m.c2 = Mat::Zero(0, n);
        m.d12 = Mat::Zero(p, 0);
        m.d21 = Mat::Zero(0, mi);
        m.d22 = Mat::Zero(0, 0);
        m.tau = Vec::Zero(0);
    }
    if (j.contains("input_names")) m.input_names = parse_names(j["input_names"], "input_names");
    if (j.contains("output_names")) m.output_names = parse_names(j["output_names"], "output_names");
    validate(m);
    return m;
}

GltiModel dde_from_json(const Json& j) {
    DelayDdeForm f;
    if (!j.contains("a0")) bad("dde model needs 'a0'");
    f.a0 = parse_matrix(j["a0"], "a0");
    const int n = static_cast<int>(f.a0.rows());
    f.b0 = j.contains("b0") ? parse_matrix(j["b0"], "b0") : Mat::Zero(n, 0);
    const int mi = static_cast<int>(f.b0.cols());
    f.c0 = j.contains("c0") ? parse_matrix(j["c0"], "c0") : Mat::Identity(n, n);
    const int p = static_cast<int>(f.c0.rows());
    f.d0 = j.contains("d0") ? parse_matrix(j["d0"], "d0") : Mat::Zero(p, mi);
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) bad("'terms' must be an array");
        for (const Json& tj : j["terms"]) {
            DelayDdeTerm t;
            if (!tj.contains("theta") || !tj["theta"].is_number()) bad("each term needs a numeric 'theta'");
            t.theta = tj["theta"].get<double>();
            t.a = tj.contains("a") ? parse_matrix(tj["a"], "term a") : Mat::Zero(n, n);
            t.b = tj.contains("b") ? parse_matrix(tj["b"], "term b") : Mat::Zero(n, mi);
            t.c = tj.contains("c") ? parse_matrix(tj["c"], "term c") : Mat::Zero(p, n);
            t.d = tj.contains("d") ? parse_matrix(tj["d"], "term d") : Mat::Zero(p, mi);
            f.terms.push_back(std::move(t));
        }
    }
    GltiModel m = from_delay_dde(f);
    if (j.contains("input_names")) m.input_names = parse_names(j["input_names"], "input_names");
    if (j.contains("output_names")) m.output_names = parse_names(j["output_names"], "output_names");
    validate(m);
    return m;
}

}  // namespace

GltiModel model_from_json(const Json& j) {
    try {
        if (!j.is_object()) bad("model must be a JSON object");
        if (!j.contains("kind") || !j["kind"].is_string())
            bad("model needs a string 'kind' (tf, ss or dde)");
        const std::string kind = j["kind"].get<std::string>();
        if (kind == "tf") return tf_from_json(j);
        if (kind == "ss") return ss_from_json(j);
        if (kind == "dde") return dde_from_json(j);
        bad("unknown model kind '" + kind + "'");
    } catch (const Json::exception& e) {
        bad(e.what());
    }
}

Json model_to_json(const GltiModel& m) {
    validate(m);
    Json j;
    j["kind"] = "ss";
    j["a"] = mat_json(m.a);
    j["b1"] = mat_json(m.b1);
    j["c1"] = mat_json(m.c1);
    j["d11"] = mat_json(m.d11);
    if (m.has_delays()) {
        j["b2"] = mat_json(m.b2);
        j["c2"] = mat_json(m.c2);
        j["d12"] = mat_json(m.d12);
        j["d21"] = mat_json(m.d21);
        j["d22"] = mat_json(m.d22);
        j["tau"] = vec_json(m.tau);
        j["delay_widths"] = m.delay_widths;
    }
    if (!m.input_names.empty()) j["input_names"] = m.input_names;
    if (!m.output_names.empty()) j["output_names"] = m.output_names;
    return j;
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot read file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ModelError("invalid JSON in '" + path + "': " + e.what());
    }
}

void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write file '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw ModelError("write failed for '" + path + "'");
}

GltiModel load_model(const std::string& path) { return model_from_json(load_json(path)); }

void save_model(const GltiModel& m, const std::string& path) {
    save_json(model_to_json(m), path);
}

GltiModel netlist_from_json(const Json& j) {
    try {
        if (!j.is_object()) bad("netlist must be a JSON object");
        for (const char* key : {"blocks", "from", "to"})
            if (!j.contains(key)) bad(std::string("netlist needs '") + key + "'");
        std::vector<GltiModel> blocks;
        for (const Json& bj : j["blocks"]) {
            if (!bj.contains("model")) bad("each block needs a 'model'");
            GltiModel m = model_from_json(bj["model"]);
            if (bj.contains("inputs")) m.input_names = parse_names(bj["inputs"], "inputs");
            if (bj.contains("outputs")) m.output_names = parse_names(bj["outputs"], "outputs");
            validate(m);
            blocks.push_back(std::move(m));
        }
        std::vector<SumJunction> sums;
        if (j.contains("sums")) {
            for (const Json& sj : j["sums"]) {
                SumJunction s;
                if (!sj.contains("inputs") || !sj.contains("output"))
                    bad("each sum needs 'inputs' and 'output'");
                s.inputs = parse_names(sj["inputs"], "sum inputs");
                s.output = sj["output"].get<std::string>();
                if (sj.contains("signs")) {
                    for (const Json& g : sj["signs"]) s.signs.push_back(g.get<int>());
                } else {
                    s.signs.assign(s.inputs.size(), 1);
                }
                sums.push_back(std::move(s));
            }
        }
        return connect(blocks, sums, parse_names(j["from"], "from"), parse_names(j["to"], "to"));
    } catch (const Json::exception& e) {
        bad(e.what());
    }
}

GltiModel load_netlist(const std::string& path) { return netlist_from_json(load_json(path)); }

Json to_json(const MarginReport& r) {
    Json j;
    Json gms = Json::array();
    for (const auto& [w, gm] : r.gain_margins) gms.push_back({{"omega", num(w)}, {"gm", num(gm)}});
    Json pms = Json::array();
    for (const auto& [w, pm] : r.phase_margins)
        pms.push_back({{"omega", num(w)}, {"pm_deg", num(pm)}});
    j["gain_margins"] = std::move(gms);
    j["phase_margins"] = std::move(pms);
    j["gm_min"] = num(r.gm_min);
    j["omega_gm"] = num(r.omega_gm);
    j["pm_min_deg"] = num(r.pm_min);
    j["omega_pm"] = num(r.omega_pm);
    j["search_band"] = {num(r.search_band.first), num(r.search_band.second)};
    j["truncated"] = r.truncated;
    return j;
}

Json to_json(const TuneReport& r) {
    Json j;
    switch (r.controller.type) {
        case PidType::kP: j["type"] = "p"; break;
        case PidType::kPI: j["type"] = "pi"; break;
        case PidType::kPID: j["type"] = "pid"; break;
    }
    j["kp"] = num(r.controller.kp);
    j["ki"] = num(r.controller.ki);
    j["kd"] = num(r.controller.kd);
    j["t_filter"] = num(r.controller.t_filter);
    j["crossover"] = num(r.crossover);
    j["phase_margin_deg"] = num(r.phase_margin);
    j["gain_margin"] = num(r.gain_margin);
    j["stable"] = r.stable;
    j["crossover_clamped"] = r.crossover_clamped;
    return j;
}

Json to_json(const StepMetrics& m) {
    Json j;
    j["final_value"] = num(m.final_value);
    j["overshoot_pct"] = num(m.overshoot_pct);
    j["rise_time"] = num(m.rise_time);
    j["settling_time"] = num(m.settling_time);
    j["peak"] = num(m.peak);
    j["peak_time"] = num(m.peak_time);
    j["settled"] = m.settled;
    return j;
}

Json to_json(const SpectrumResult& r) {
    Json j;
    Json roots = Json::array();
    for (long i = 0; i < r.roots.size(); ++i)
        roots.push_back({{"re", num(r.roots(i).real())}, {"im", num(r.roots(i).imag())}});
    j["roots"] = std::move(roots);
    j["n_cheb"] = r.n_cheb;
    j["converged"] = r.converged;
    j["max_residual"] = num(r.max_residual);
    return j;
}

Json to_json(const DcGain& g) {
    Json j;
    j["value"] = mat_json(g.value);
    j["integrator"] = g.integrator;
    return j;
}

}  // namespace tds
