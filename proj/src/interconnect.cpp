#include "tds/interconnect.hpp"

#include <map>
#include <sstream>

namespace tds {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

Mat blkdiag(const Mat& a, const Mat& b) {
    Mat r = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    r.topLeftCorner(a.rows(), a.cols()) = a;
    r.bottomRightCorner(b.rows(), b.cols()) = b;
    return r;
}

}  // namespace

GltiModel append(const GltiModel& a, const GltiModel& b) {
    validate(a);
    validate(b);
    GltiModel r;
    r.a = blkdiag(a.a, b.a);
    r.b1 = blkdiag(a.b1, b.b1);
    r.b2 = blkdiag(a.b2, b.b2);
    r.c1 = blkdiag(a.c1, b.c1);
    r.d11 = blkdiag(a.d11, b.d11);
    r.d12 = blkdiag(a.d12, b.d12);
    r.c2 = blkdiag(a.c2, b.c2);
    r.d21 = blkdiag(a.d21, b.d21);
    r.d22 = blkdiag(a.d22, b.d22);
    r.tau = Vec(a.tau.size() + b.tau.size());
    r.tau << a.tau, b.tau;
    r.delay_widths = a.delay_widths;
    r.delay_widths.insert(r.delay_widths.end(), b.delay_widths.begin(), b.delay_widths.end());
    if (!a.input_names.empty() && !b.input_names.empty()) {
        r.input_names = a.input_names;
        r.input_names.insert(r.input_names.end(), b.input_names.begin(), b.input_names.end());
    }
    if (!a.output_names.empty() && !b.output_names.empty()) {
        r.output_names = a.output_names;
        r.output_names.insert(r.output_names.end(), b.output_names.begin(), b.output_names.end());
    }
    validate(r);
    return r;
}

GltiModel close_interconnection(const GltiModel& m, const Mat& k, const Mat& e, const Mat& f,
                                const Mat& fu) {
    validate(m);
    const int n = m.order();
    const int mi = m.num_inputs();
    const int p = m.num_outputs();
    const int q = m.delay_signal_count();
    require(k.rows() == mi && k.cols() == p, "close_interconnection: K must be inputs x outputs");
    require(e.rows() == mi, "close_interconnection: E must have one row per input");
    require(f.cols() == p, "close_interconnection: F must have one column per output");
    const int mext = static_cast<int>(e.cols());
    const int pext = static_cast<int>(f.rows());
    Mat fu_ = fu.size() == 0 ? Mat::Zero(pext, mext) : fu;
    require(fu_.rows() == pext && fu_.cols() == mext,
            "close_interconnection: Fu must be external outputs x external inputs");

    Eigen::FullPivLU<Mat> lu(Mat::Identity(mi, mi) - k * m.d11);
    if (!lu.isInvertible())
        throw NumericalError("ill-posed interconnection: singular algebraic loop");
    Mat rhs(mi, n + q + mext);
    rhs << k * m.c1, k * m.d12, e;
    Mat u = lu.solve(rhs);  // u = Ux x + Uw w + Ue u_ext
    Mat ux = u.leftCols(n), uw = u.middleCols(n, q), ue = u.rightCols(mext);

    GltiModel r;
    r.a = m.a + m.b1 * ux;
    r.b1 = m.b1 * ue;
    r.b2 = m.b2 + m.b1 * uw;
    Mat cy = m.c1 + m.d11 * ux;   // closed-loop internal outputs
    Mat dyw = m.d12 + m.d11 * uw;
    r.c1 = f * cy;
    r.d11 = f * m.d11 * ue + fu_;
    r.d12 = f * dyw;
    r.c2 = m.c2 + m.d21 * ux;
    r.d21 = m.d21 * ue;
    r.d22 = m.d22 + m.d21 * uw;
    r.tau = m.tau;
    r.delay_widths = m.delay_widths;
    validate(r);
    return r;
}

GltiModel series(const GltiModel& g1, const GltiModel& g2) {
    require(g1.num_outputs() == g2.num_inputs(),
            "series: first block's outputs must match second block's inputs");
    GltiModel all = append(g1, g2);
    const int m1 = g1.num_inputs(), p1 = g1.num_outputs();
    const int m2 = g2.num_inputs(), p2 = g2.num_outputs();
    Mat k = Mat::Zero(m1 + m2, p1 + p2);
    k.block(m1, 0, m2, p1) = Mat::Identity(m2, p1);
    Mat e = Mat::Zero(m1 + m2, m1);
    e.topRows(m1) = Mat::Identity(m1, m1);
    Mat f = Mat::Zero(p2, p1 + p2);
    f.rightCols(p2) = Mat::Identity(p2, p2);
    GltiModel r = close_interconnection(all, k, e, f);
    r.input_names = g1.input_names;
    r.output_names = g2.output_names;
    return r;
}

GltiModel parallel(const GltiModel& g1, const GltiModel& g2) {
    require(g1.num_inputs() == g2.num_inputs() && g1.num_outputs() == g2.num_outputs(),
            "parallel: blocks must share input and output dimensions");
    GltiModel all = append(g1, g2);
    const int m1 = g1.num_inputs(), p1 = g1.num_outputs();
    Mat k = Mat::Zero(2 * m1, 2 * p1);
    Mat e(2 * m1, m1);
    e << Mat::Identity(m1, m1), Mat::Identity(m1, m1);
    Mat f(p1, 2 * p1);
    f << Mat::Identity(p1, p1), Mat::Identity(p1, p1);
    GltiModel r = close_interconnection(all, k, e, f);
    r.input_names = g1.input_names;
    r.output_names = g1.output_names;
    return r;
}

GltiModel feedback(const GltiModel& g, const GltiModel& h, int sign) {
    require(sign == 1 || sign == -1, "feedback: sign must be +1 or -1");
    require(h.num_inputs() == g.num_outputs() && h.num_outputs() == g.num_inputs(),
            "feedback: loop dimensions do not close");
    GltiModel all = append(g, h);
    const int mg = g.num_inputs(), pg = g.num_outputs();
    const int mh = h.num_inputs(), ph = h.num_outputs();
    Mat k = Mat::Zero(mg + mh, pg + ph);
    k.block(0, pg, mg, ph) = sign * Mat::Identity(mg, ph);
    k.block(mg, 0, mh, pg) = Mat::Identity(mh, pg);
    Mat e = Mat::Zero(mg + mh, mg);
    e.topRows(mg) = Mat::Identity(mg, mg);
    Mat f = Mat::Zero(pg, pg + ph);
    f.leftCols(pg) = Mat::Identity(pg, pg);
    GltiModel r = close_interconnection(all, k, e, f);
    r.input_names = g.input_names;
    r.output_names = g.output_names;
    return r;
}

GltiModel connect(const std::vector<GltiModel>& blocks, const std::vector<SumJunction>& sums,
                  const std::vector<std::string>& from, const std::vector<std::string>& to) {
    require(!blocks.empty(), "connect: at least one block required");
    GltiModel all = blocks[0];
    validate(all);
    require(!all.input_names.empty() && !all.output_names.empty(),
            "connect: every block needs signal names");
    for (size_t i = 1; i < blocks.size(); ++i) {
        require(!blocks[i].input_names.empty() && !blocks[i].output_names.empty(),
                "connect: every block needs signal names");
        all = append(all, blocks[i]);
    }
    const int ptot = all.num_outputs();
    const int mtot = all.num_inputs();
    const int mext = static_cast<int>(from.size());
    require(mext > 0, "connect: at least one external input required");
    require(!to.empty(), "connect: at least one external output required");

    // Every named signal is a fixed linear combination of the block outputs
    // and the external inputs.
    struct Source {
        Eigen::RowVectorXd y, u;
    };
    std::map<std::string, Source> table;
    auto add_source = [&](const std::string& name, Source src) {
        require(!name.empty(), "connect: empty signal name");
        require(table.emplace(name, std::move(src)).second,
                "connect: duplicate signal name '" + name + "'");
    };
    for (int i = 0; i < ptot; ++i) {
        Source s{Eigen::RowVectorXd::Zero(ptot), Eigen::RowVectorXd::Zero(mext)};
        s.y(i) = 1.0;
        add_source(all.output_names[static_cast<size_t>(i)], std::move(s));
    }
    for (int j = 0; j < mext; ++j) {
        Source s{Eigen::RowVectorXd::Zero(ptot), Eigen::RowVectorXd::Zero(mext)};
        s.u(j) = 1.0;
        add_source(from[static_cast<size_t>(j)], std::move(s));
    }
    // Adders may feed each other as long as no pure-adder cycle exists.
    std::vector<bool> placed(sums.size(), false);
    size_t remaining = sums.size();
    bool progress = true;
    while (remaining > 0 && progress) {
        progress = false;
        for (size_t si = 0; si < sums.size(); ++si) {
            if (placed[si]) continue;
            const SumJunction& sj = sums[si];
            require(sj.signs.size() == sj.inputs.size() && !sj.inputs.empty(),
                    "connect: adder needs matching signs and inputs");
            bool ready = true;
            for (const std::string& in : sj.inputs)
                if (!table.count(in)) ready = false;
            if (!ready) continue;
            Source s{Eigen::RowVectorXd::Zero(ptot), Eigen::RowVectorXd::Zero(mext)};
            for (size_t t = 0; t < sj.inputs.size(); ++t) {
                require(sj.signs[t] == 1 || sj.signs[t] == -1, "connect: adder signs must be +/-1");
                const Source& in = table.at(sj.inputs[t]);
                s.y += sj.signs[t] * in.y;
                s.u += sj.signs[t] * in.u;
            }
            add_source(sj.output, std::move(s));
            placed[si] = true;
            --remaining;
            progress = true;
        }
    }
    if (remaining > 0) {
        std::string missing;
        for (size_t si = 0; si < sums.size() && missing.empty(); ++si)
            if (!placed[si])
                for (const std::string& in : sums[si].inputs)
                    if (!table.count(in)) {
                        missing = in;
                        break;
                    }
        throw ModelError(missing.empty() ? std::string("connect: adders form a cycle")
                                         : "connect: unknown adder input '" + missing + "'");
    }

    Mat k = Mat::Zero(mtot, ptot), e = Mat::Zero(mtot, mext);
    for (int i = 0; i < mtot; ++i) {
        const std::string& name = all.input_names[static_cast<size_t>(i)];
        auto it = table.find(name);
        require(it != table.end(), "connect: no signal drives block input '" + name + "'");
        k.row(i) = it->second.y;
        e.row(i) = it->second.u;
    }
    Mat f = Mat::Zero(static_cast<int>(to.size()), ptot);
    Mat fusel = Mat::Zero(static_cast<int>(to.size()), mext);
    for (size_t i = 0; i < to.size(); ++i) {
        auto it = table.find(to[i]);
        require(it != table.end(), "connect: unknown external output '" + to[i] + "'");
        f.row(static_cast<int>(i)) = it->second.y;
        fusel.row(static_cast<int>(i)) = it->second.u;
    }
    GltiModel r = close_interconnection(all, k, e, f, fusel);
    r.input_names = from;
    r.output_names = to;
    return r;
}

}  // namespace tds
