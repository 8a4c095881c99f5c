#include "presets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "decohist/analysis.hpp"
#include "decohist/discrimination.hpp"
#include "decohist/ensembles.hpp"
#include "decohist/linalg.hpp"
#include "decohist/packing.hpp"
#include "decohist/rmt.hpp"
#include "decohist/rng.hpp"

namespace decohist::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---- parameter access ------------------------------------------------------

double num(const Json& p, const char* key) { return p.at(key).get<double>(); }

long count(const Json& p, const char* key, long lo = 1) {
    const double v = num(p, key);
    require(std::floor(v) == v && v >= double(lo), ErrorKind::InvalidConfig,
            std::string(key) + " must be an integer >= " + std::to_string(lo));
    return static_cast<long>(v);
}

std::string text(const Json& p, const char* key) { return p.at(key).get<std::string>(); }

std::vector<double> list(const Json& p, const char* key) { return parse_grid(p.at(key)); }

std::vector<long> counts(const Json& p, const char* key, long lo = 1) {
    std::vector<long> out;
    for (double v : list(p, key)) {
        require(std::floor(v) == v && v >= double(lo), ErrorKind::InvalidConfig,
                std::string(key) + " entries must be integers >= " + std::to_string(lo));
        out.push_back(static_cast<long>(v));
    }
    require(!out.empty(), ErrorKind::InvalidConfig, std::string(key) + " is empty");
    return out;
}

std::vector<std::string> texts(const Json& p, const char* key) {
    const Json& v = p.at(key);
    if (v.is_string()) {
        std::vector<std::string> out;
        std::stringstream ss(v.get<std::string>());
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) out.push_back(item);
        return out;
    }
    return v.get<std::vector<std::string>>();
}

ModelOptions model_options(const Json& p) {
    ModelOptions o;
    if (p.contains("diagonal")) {
        const std::string d = text(p, "diagonal");
        require(d == "even" || d == "uniform", ErrorKind::InvalidConfig, "diagonal must be even or uniform");
        o.diagonal = d == "even" ? DiagonalLayout::EvenlySpaced : DiagonalLayout::UniformRandom;
    }
    return o;
}

void check_model_size(long d0) {
    // eigenvectors, dense propagator and its temporaries
    const double bytes = 48.0 * 9.0 * double(d0) * double(d0);
    require(bytes <= 4e9, ErrorKind::TooLarge,
            "memory: model with D0=" + std::to_string(d0) + " needs about " + std::to_string(bytes / 1e9) + " GB");
}

void check_gram_size(long n) {
    const double bytes = 16.0 * 4.0 * double(n) * double(n);
    require(bytes <= 3e9, ErrorKind::TooLarge,
            "memory: Gram matrix with N=" + std::to_string(n) + " needs about " + std::to_string(bytes / 1e9) + " GB");
}

std::uint64_t model_seed(std::uint64_t seed, long d0) { return derive_seed(seed, "model", std::uint64_t(d0)); }

const ModelSpec& model_for(const RunContext& c, long d0) {
    check_model_size(d0);
    progress("model D0=" + std::to_string(d0));
    return shared_model(d0, model_seed(c.seed, d0), model_options(c.params));
}

CVector psi0_for(const RunContext& c, const ModelSpec& m) {
    const std::string kind = c.params.contains("initial") ? text(c.params, "initial") : "haar-in-H1";
    return initial_state(m, parse_initial_kind(kind), derive_seed(c.seed, "psi0", std::uint64_t(m.d0)));
}

std::vector<long> n_of(const std::vector<double>& gammas, long d) {
    std::vector<long> out;
    for (double g : gammas) {
        require(g > 0.0, ErrorKind::InvalidConfig, "gamma grid must be positive");
        out.push_back(std::max(1L, std::lround(g * double(d))));
    }
    return out;
}

double mu_sqrt_sq(double gamma) { return gamma <= 1.0 ? std::pow(mu_sqrt(gamma), 2) : kNaN; }

StateFamily make_family(const std::string& name, long d, long n, std::uint64_t seed) {
    if (name == "haar") return haar_family(d, n, seed);
    if (name == "perm") return permutation_family(d, n, seed);
    if (name == "sign") {
        DigitStream s = DigitStream::pi();
        return sign_family(d, n, s);
    }
    if (name == "mub") return mub_family(d, n, seed);
    throw Error(ErrorKind::InvalidConfig, "unknown family " + name);
}

int family_code(const std::string& name) {
    static const std::map<std::string, int> codes{{"haar", 0}, {"perm", 1}, {"sign", 2}, {"mub", 3}};
    auto it = codes.find(name);
    require(it != codes.end(), ErrorKind::InvalidConfig, "unknown family " + name);
    return it->second;
}

std::vector<double> to_doubles(const std::vector<long>& v) { return {v.begin(), v.end()}; }

Json bins_json(const std::vector<BinRow>& rows) {
    Json j = {{"center", Json::array()}, {"mean_x", Json::array()}, {"mean_y", Json::array()}, {"count", Json::array()}};
    for (const auto& r : rows) {
        j["center"].push_back(r.center);
        j["mean_x"].push_back(std::isnan(r.mean_x) ? Json(nullptr) : Json(r.mean_x));
        j["mean_y"].push_back(std::isnan(r.mean_y) ? Json(nullptr) : Json(r.mean_y));
        j["count"].push_back(r.count);
    }
    return j;
}

// Off-diagonal |G| against the product of a per-history metric, binned on a
// log axis.
std::vector<BinRow> pair_bins(const GramMatrix& g, const std::vector<double>& metric, int bins) {
    std::vector<double> xs, ys;
    const Eigen::Index n = g.size();
    xs.reserve(std::size_t(n * (n - 1) / 2));
    ys.reserve(xs.capacity());
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            xs.push_back(metric[std::size_t(i)] * metric[std::size_t(j)]);
            ys.push_back(std::abs(g.entries(i, j)));
        }
    return binned_correlation(xs, ys, bins, true);
}

double top_bottom_ratio(const std::vector<BinRow>& rows) {
    const BinRow* lo = nullptr;
    const BinRow* hi = nullptr;
    for (const auto& r : rows)
        if (r.count > 0) {
            if (!lo) lo = &r;
            hi = &r;
        }
    return lo && hi && lo->mean_y > 0.0 ? hi->mean_y / lo->mean_y : kNaN;
}

// Branches of one label set, with null histories removed.
struct Ensemble {
    BranchStates branches;
    GramMatrix g;
    long nulls = 0;
};

Ensemble ensemble(const Propagator& u, const CVector& psi0, const HistorySet& set) {
    Ensemble e;
    BranchStates all = branch_states(u, psi0, set);
    const auto keep = all.non_null();
    e.nulls = long(all.count()) - long(keep.size());
    e.branches = keep.size() == std::size_t(all.count()) ? std::move(all) : all.select(keep);
    e.g = ndf(e.branches);
    return e;
}

std::vector<double> localizations(const BranchStates& b) {
    std::vector<double> out(std::size_t(b.count()));
    for (Eigen::Index i = 0; i < b.count(); ++i) out[std::size_t(i)] = localization(b.normalized(i));
    return out;
}

double safe_fit(const std::vector<double>& dims, const std::vector<double>& values, double ScalingFit::*field) {
    if (dims.size() < 2) return kNaN;
    for (double v : values)
        if (!(v > 0.0)) return kNaN;
    return scaling_fit(dims, values).*field;
}

double fit_d_eff(const GramMatrix& g) {
    try {
        return mp_fit(eigvalsh(g.entries)).d_eff;
    } catch (const Error&) {
        return kNaN;
    }
}

// ---- discrimination presets -----------------------------------------------

ResultTable qsd_curves(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 1);
    const auto gammas = list(c.params, "gamma_grid");
    const std::string family = text(c.params, "family");
    const long reps = count(c.params, "realizations");
    struct Point {
        long d, n;
        double gamma;
        double mean = 0, sd = kNaN;
    };
    std::vector<Point> pts;
    for (long d : dims)
        for (std::size_t k = 0; k < gammas.size(); ++k) pts.push_back({d, n_of({gammas[k]}, d)[0], gammas[k]});
    for (auto& p : pts) check_gram_size(p.n);
    parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        Point& p = pts[i];
        std::vector<double> vals;
        for (long r = 0; r < reps; ++r) {
            const auto s = derive_seed(derive_seed(c.seed, "qsd:" + family, std::uint64_t(p.d)), "point",
                                       std::uint64_t(i) * std::uint64_t(reps) + std::uint64_t(r));
            const StateFamily f = make_family(family, p.d, p.n, s);
            vals.push_back(average_success(gram_matrix(f), WeightVector::uniform(p.n)));
        }
        Accumulator a;
        for (double v : vals) a.add(v);
        p.mean = a.mean();
        if (reps > 1) {
            Accumulator v2;
            for (double v : vals) v2.add((v - p.mean) * (v - p.mean));
            p.sd = std::sqrt(v2.sum() / double(reps - 1));
        }
        progress("qsd d=" + std::to_string(p.d) + " N=" + std::to_string(p.n));
    });
    ResultTable t;
    std::vector<double> cd, cg, cn, cp, cs, cm;
    Json dev = Json::object();
    for (const auto& p : pts) {
        cd.push_back(double(p.d));
        cg.push_back(p.gamma);
        cn.push_back(double(p.n));
        cp.push_back(p.mean);
        cs.push_back(p.sd);
        cm.push_back(mu_sqrt_sq(p.gamma));
        if (p.gamma <= 1.0) {
            const std::string key = std::to_string(p.d);
            const double e = std::abs(p.mean - cm.back());
            dev[key] = dev.contains(key) ? std::max(dev[key].get<double>(), e) : e;
        }
    }
    t.add_column("d", cd);
    t.add_column("gamma", cg);
    t.add_column("n", cn);
    t.add_column("p_s", cp);
    t.add_column("p_s_std", cs);
    t.add_column("mu_sqrt_sq", cm);
    t.summary["max_abs_dev_by_d"] = dev;
    return t;
}

ResultTable det_bounds(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 1);
    const auto gammas = list(c.params, "gamma_grid");
    struct Point {
        long d, n;
        double gamma, det_g = 0, det_w = 0, p_un = 0;
    };
    std::vector<Point> pts;
    for (long d : dims)
        for (double g : gammas) pts.push_back({d, n_of({g}, d)[0], g});
    for (auto& p : pts) check_gram_size(p.n);
    parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        Point& p = pts[i];
        Rng rng(derive_seed(derive_seed(c.seed, "det", std::uint64_t(p.d)), "point", i));
        CMatrix x = gaussian_columns(p.d, p.n, rng);
        const GramMatrix w = gram_matrix(x);
        x.colwise().normalize();
        const auto bg = unambiguous_bounds_from_spectrum(eigvalsh(gram_matrix(x).entries));
        p.det_g = bg.det_root;
        p.p_un = bg.p_un;
        p.det_w = unambiguous_bounds_from_spectrum(eigvalsh(w.entries)).det_root;
    });
    ResultTable t;
    std::vector<double> cd, cg, cn, dg, dw, pu, ref;
    for (const auto& p : pts) {
        cd.push_back(double(p.d));
        cg.push_back(p.gamma);
        cn.push_back(double(p.n));
        dg.push_back(p.det_g);
        dw.push_back(p.det_w);
        pu.push_back(p.p_un);
        ref.push_back(p.gamma <= 1.0 ? std::exp(mu_ln(p.gamma)) : kNaN);
    }
    t.add_column("d", cd);
    t.add_column("gamma", cg);
    t.add_column("n", cn);
    t.add_column("det_root", dg);
    t.add_column("det_root_w", dw);
    t.add_column("p_un", pu);
    t.add_column("exp_mu_ln", ref);
    return t;
}

ResultTable slp_gap(const RunContext& c) {
    const long d = count(c.params, "d", 2);
    const auto gammas = list(c.params, "gamma_grid");
    const auto ns = n_of(gammas, d);
    for (long n : ns) check_gram_size(n);
    std::vector<SlpSolution> sols(ns.size());
    parallel_for(ns.size(), c.threads, [&](std::size_t i) {
        const StateFamily f = haar_family(d, ns[i], derive_seed(derive_seed(c.seed, "slp", std::uint64_t(d)), "point", i));
        const WeightVector q = WeightVector::uniform(ns[i]);
        sols[i] = slp_solve(gram_matrix(f), f, global_state(f, q), q);
        progress("slp N=" + std::to_string(ns[i]));
    });
    ResultTable t;
    std::vector<double> ps, qs, gap, bound, fid, ov, mu;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ps.push_back(sols[i].success_qsd);
        qs.push_back(sols[i].success_slp);
        gap.push_back(sols[i].success_qsd - sols[i].success_slp);
        bound.push_back(sols[i].gap_bound);
        fid.push_back(sols[i].fidelity);
        ov.push_back(sols[i].overlap_t);
        mu.push_back(gammas[i] <= 1.0 ? mu_sqrt(gammas[i]) : kNaN);
    }
    t.add_column("gamma", gammas);
    t.add_column("n", to_doubles(ns));
    t.add_column("p_s", ps);
    t.add_column("q_s", qs);
    t.add_column("gap", gap);
    t.add_column("gap_bound", bound);
    t.add_column("fidelity", fid);
    t.add_column("overlap_t", ov);
    t.add_column("mu_sqrt", mu);

    const auto slope_n = counts(c.params, "slope_n", 2);
    std::vector<double> xn, yg;
    for (long n : slope_n)
        for (std::size_t i = 0; i < ns.size(); ++i)
            if (ns[i] == n) {
                xn.push_back(double(n));
                yg.push_back(gap[i]);
                break;
            }
    const double alpha = xn.size() == slope_n.size() ? safe_fit(xn, yg, &ScalingFit::alpha) : kNaN;
    t.summary["gap_slope"] = std::isnan(alpha) ? Json(nullptr) : Json(-alpha);
    t.summary["slope_points"] = xn.size();

    // the same N values at fixed gamma, d = N / gamma
    const double fixed = num(c.params, "fixed_gamma");
    require(fixed > 0.0, ErrorKind::InvalidConfig, "fixed_gamma must be positive");
    std::vector<double> fn(slope_n.size()), fg(slope_n.size());
    parallel_for(slope_n.size(), c.threads, [&](std::size_t i) {
        const long n = slope_n[i];
        const long dd = std::max(n, std::lround(double(n) / fixed));
        check_gram_size(n);
        const StateFamily f = haar_family(dd, n, derive_seed(derive_seed(c.seed, "slp-fixed", std::uint64_t(dd)), "point", i));
        const WeightVector q = WeightVector::uniform(n);
        const SlpSolution s = slp_solve(gram_matrix(f), f, global_state(f, q), q);
        fn[i] = double(n);
        fg[i] = s.success_qsd - s.success_slp;
    });
    const double a_fixed = safe_fit(fn, fg, &ScalingFit::alpha);
    t.summary["gap_slope_fixed_gamma"] = std::isnan(a_fixed) ? Json(nullptr) : Json(-a_fixed);
    t.summary["fixed_gamma_gaps"] = fg;
    return t;
}

ResultTable mi_curves(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const auto gammas = list(c.params, "gamma_grid");
    struct Point {
        long d, n;
        double gamma, p_s = kNaN, mi = kNaN;
    };
    std::vector<Point> pts;
    for (long d : dims)
        for (double g : gammas) {
            Point p{d, n_of({g}, d)[0], g};
            require(p.n >= 2, ErrorKind::InvalidConfig, "mutual information needs N >= 2");
            pts.push_back(p);
        }
    for (auto& p : pts)
        if (p.n <= p.d) check_gram_size(p.n);
    parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        Point& p = pts[i];
        if (p.n > p.d) return;
        const StateFamily f = haar_family(p.d, p.n, derive_seed(derive_seed(c.seed, "mi", std::uint64_t(p.d)), "point", i));
        const WeightVector q = WeightVector::uniform(p.n);
        const CMatrix sq = sqrt_gram(gram_matrix(f));
        p.p_s = average_success_from_sqrt(sq, q);
        p.mi = mutual_information(joint_table_from_sqrt(sq, q));
        progress("mi d=" + std::to_string(p.d) + " N=" + std::to_string(p.n));
    });
    ResultTable t;
    std::vector<double> cd, cg, cn, ps, mi, mf, fl, mfa, ln;
    double worst_fluct = 0.0, worst_mf = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        cd.push_back(double(p.d));
        cg.push_back(p.gamma);
        cn.push_back(double(p.n));
        ps.push_back(p.p_s);
        mi.push_back(p.mi);
        const double lnn = std::log(double(p.n));
        ln.push_back(lnn);
        if (p.n <= p.d) {
            mf.push_back(mi_mean_field(p.p_s, p.n));
            fl.push_back(mi_fluct(p.p_s, p.n));
            worst_fluct = std::max(worst_fluct, std::abs(p.mi - fl.back()) / lnn);
            worst_mf = std::min(worst_mf, (p.mi - mf.back()) / lnn);
        } else {
            mf.push_back(kNaN);
            fl.push_back(kNaN);
        }
        mfa.push_back(mean_field_mi_curve(p.d, p.n));
    }
    t.add_column("d", cd);
    t.add_column("gamma", cg);
    t.add_column("n", cn);
    t.add_column("p_s", ps);
    t.add_column("mi", mi);
    t.add_column("mi_mf", mf);
    t.add_column("mi_fluct", fl);
    t.add_column("mi_mf_analytic", mfa);
    t.add_column("ln_n", ln);
    t.summary["max_fluct_dev_over_ln_n"] = worst_fluct;
    t.summary["min_mi_minus_mf_over_ln_n"] = worst_mf;
    return t;
}

ResultTable mi_large_n(const RunContext& c) {
    const auto ks = counts(c.params, "k_grid", 2);
    const double max_ratio = num(c.params, "max_ratio");
    const long points = count(c.params, "points", 2);
    require(max_ratio > 1.0, ErrorKind::InvalidConfig, "max_ratio must exceed 1");
    ResultTable t;
    std::vector<double> ck, cd, cn, cr, cmi, cb, cmax;
    Json peaks = Json::object();
    for (long k : ks) {
        require(k <= 40, ErrorKind::TooLarge, "k_grid: d = 2^k overflows the scan");
        const long d = 1L << k;
        std::vector<long> ns;
        for (long i = 0; i < points; ++i) {
            const double r = std::exp(std::log(2.0 / double(d)) + (std::log(max_ratio) - std::log(2.0 / double(d))) * double(i) / double(points - 1));
            const long n = std::max(2L, std::lround(r * double(d)));
            if (ns.empty() || n > ns.back()) ns.push_back(n);
        }
        std::vector<double> vals;
        for (long n : ns) vals.push_back(mean_field_mi_curve(d, n));
        const auto best = std::size_t(std::max_element(vals.begin(), vals.end()) - vals.begin());
        for (std::size_t i = 0; i < ns.size(); ++i) {
            ck.push_back(double(k));
            cd.push_back(double(d));
            cn.push_back(double(ns[i]));
            cr.push_back(double(ns[i]) / double(d));
            cmi.push_back(vals[i]);
            cb.push_back(vals[i] / std::log(2.0));
            cmax.push_back(i == best ? 1.0 : 0.0);
        }
        const MiMaxEstimate e = mi_max_estimate(double(k));
        peaks[std::to_string(k)] = {{"n_argmax", ns[best]},
                                    {"i_max_bits", vals[best] / std::log(2.0)},
                                    {"estimate_n_star", e.n_star},
                                    {"estimate_i_max_bits", e.i_max}};
    }
    t.add_column("k", ck);
    t.add_column("d", cd);
    t.add_column("n", cn);
    t.add_column("ratio", cr);
    t.add_column("mi_mf", cmi);
    t.add_column("mi_mf_bits", cb);
    t.add_column("is_max", cmax);
    t.summary["peaks"] = peaks;
    return t;
}

ResultTable ensemble_compare(const RunContext& c) {
    const long d = count(c.params, "d", 2);
    const long d_mub = count(c.params, "d_mub", 2);
    const auto gammas = list(c.params, "gamma_grid");
    const auto families = texts(c.params, "families");
    for (double g : gammas) require(g <= 1.0, ErrorKind::InvalidConfig, "ensemble comparison needs gamma <= 1");
    struct Point {
        std::string family;
        long d, n;
        double gamma, p_s = 0;
        std::size_t k;
    };
    std::vector<Point> pts;
    for (const auto& f : families) {
        family_code(f);
        const long dd = f == "mub" ? d_mub : d;
        for (std::size_t k = 0; k < gammas.size(); ++k) pts.push_back({f, dd, n_of({gammas[k]}, dd)[0], gammas[k], 0.0, k});
    }
    for (auto& p : pts) check_gram_size(p.n);
    parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        Point& p = pts[i];
        const auto s = derive_seed(derive_seed(c.seed, "ensemble:" + p.family, std::uint64_t(p.d)), "point", p.k);
        p.p_s = average_success(gram_matrix(make_family(p.family, p.d, p.n, s)), WeightVector::uniform(p.n));
        progress(p.family + " d=" + std::to_string(p.d) + " N=" + std::to_string(p.n));
    });
    std::vector<double> haar(gammas.size(), kNaN);
    for (const auto& p : pts)
        if (p.family == "haar") haar[p.k] = p.p_s;
    ResultTable t;
    std::vector<double> cf, cd, cg, cn, cp, cm, ch;
    Json dev = Json::object();
    for (const auto& p : pts) {
        cf.push_back(family_code(p.family));
        cd.push_back(double(p.d));
        cg.push_back(p.gamma);
        cn.push_back(double(p.n));
        cp.push_back(p.p_s);
        cm.push_back(mu_sqrt_sq(p.gamma));
        ch.push_back(haar[p.k]);
        const double e = std::abs(p.p_s - (std::isnan(haar[p.k]) ? cm.back() : haar[p.k]));
        dev[p.family] = dev.contains(p.family) ? std::max(dev[p.family].get<double>(), e) : e;
    }
    t.add_column("family", cf);
    t.add_column("d", cd);
    t.add_column("gamma", cg);
    t.add_column("n", cn);
    t.add_column("p_s", cp);
    t.add_column("mu_sqrt_sq", cm);
    t.add_column("haar_p_s", ch);
    t.summary["family_codes"] = {{"haar", 0}, {"perm", 1}, {"sign", 2}, {"mub", 3}};
    t.summary["max_dev_vs_haar"] = dev;
    return t;
}

ResultTable packing(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const auto eps = list(c.params, "epsilons");
    const long budget = count(c.params, "budget");
    struct Point {
        long d;
        double e;
        PackingBound b;
        PackingResult r;
    };
    std::vector<Point> pts;
    for (long d : dims)
        for (double e : eps) pts.push_back({d, e, {}, {}});
    parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        Point& p = pts[i];
        p.b = lower_bounds(p.d, p.e);
        p.r = greedy_pack(p.d, p.e, budget, derive_seed(c.seed, "packing", std::uint64_t(p.d)));
    });
    ResultTable t;
    std::vector<double> cd, ce, ge, ga, pr, gr, mo;
    for (const auto& p : pts) {
        cd.push_back(double(p.d));
        ce.push_back(p.e);
        ge.push_back(p.b.geometric_exact);
        ga.push_back(p.b.geometric_approx);
        pr.push_back(p.b.probabilistic);
        gr.push_back(double(p.r.achieved));
        mo.push_back(p.r.max_overlap);
    }
    t.add_column("d", cd);
    t.add_column("epsilon", ce);
    t.add_column("geometric_exact", ge);
    t.add_column("geometric_approx", ga);
    t.add_column("probabilistic", pr);
    t.add_column("greedy", gr);
    t.add_column("max_overlap", mo);
    return t;
}

ResultTable concentration(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 1);
    const auto eps = list(c.params, "epsilons");
    const long samples = count(c.params, "samples");
    std::vector<std::vector<long>> hits(dims.size(), std::vector<long>(eps.size(), 0));
    parallel_for(dims.size(), c.threads, [&](std::size_t i) {
        Rng rng(derive_seed(c.seed, "norms", std::uint64_t(dims[i])));
        for (long s = 0; s < samples; ++s) {
            const double dev = std::abs(gaussian_vector(dims[i], rng).squared_norm() - 1.0);
            for (std::size_t k = 0; k < eps.size(); ++k)
                if (dev > eps[k]) ++hits[i][k];
        }
        progress("norm samples d=" + std::to_string(dims[i]));
    });
    ResultTable t;
    std::vector<double> cd, ce, cs, cv, cf, cb;
    for (std::size_t i = 0; i < dims.size(); ++i)
        for (std::size_t k = 0; k < eps.size(); ++k) {
            cd.push_back(double(dims[i]));
            ce.push_back(eps[k]);
            cs.push_back(double(samples));
            cv.push_back(double(hits[i][k]));
            cf.push_back(double(hits[i][k]) / double(samples));
            cb.push_back(2.0 * std::exp(-eps[k] * eps[k] * double(dims[i]) / 6.0));
        }
    t.add_column("d", cd);
    t.add_column("epsilon", ce);
    t.add_column("samples", cs);
    t.add_column("violations", cv);
    t.add_column("frequency", cf);
    t.add_column("bound", cb);

    // squared fidelity against a fixed state vs Beta(1, D-1)
    const long kd = count(c.params, "ks_dim", 2);
    const long ks = count(c.params, "ks_samples");
    Rng rng(derive_seed(c.seed, "fidelity", std::uint64_t(kd)));
    const CVector chi = haar_state(kd, rng).coefficients();
    std::vector<double> f2(static_cast<std::size_t>(ks));
    for (auto& v : f2) v = std::norm(chi.dot(haar_state(kd, rng).coefficients()));
    std::sort(f2.begin(), f2.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < f2.size(); ++i) {
        const double cdf = 1.0 - std::pow(1.0 - f2[i], double(kd - 1));
        worst = std::max({worst, cdf - double(i) / double(ks), double(i + 1) / double(ks) - cdf});
    }
    t.summary["ks_dim"] = kd;
    t.summary["ks_samples"] = ks;
    t.summary["ks_statistic"] = worst;
    return t;
}

// ---- history presets -----------------------------------------------------

ResultTable relaxation(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const double horizon = num(c.params, "horizon_tau");
    const long points = count(c.params, "points", 2);
    ResultTable t;
    std::vector<double> cd, ct, cu, c0, c1;
    Json at8 = Json::object();
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        const CVector psi0 = psi0_for(c, m);
        const double tu = tau(m);
        std::vector<double> times;
        for (long i = 0; i < points; ++i) times.push_back(horizon * tu * double(i) / double(points - 1));
        const ExpectationTable e = evolve_expectations(m, psi0, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            cd.push_back(double(d0));
            ct.push_back(times[i]);
            cu.push_back(times[i] / tu);
            c0.push_back(e.p0[i]);
            c1.push_back(e.p1[i]);
        }
        at8[std::to_string(d0)] = evolve_expectations(m, psi0, {8.0 * tu}).p0[0];
    }
    t.add_column("d0", cd);
    t.add_column("t", ct);
    t.add_column("t_over_tau", cu);
    t.add_column("p0", c0);
    t.add_column("p1", c1);
    t.summary["p0_at_8tau"] = at8;
    return t;
}

ResultTable ndf_scaling(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const long len = count(c.params, "length");
    const HistorySet set = full_tree(len);
    ResultTable t;
    std::vector<double> cd, cn, cz, gb, gm, de, ge, res;
    Json spectra = Json::object();
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const Ensemble e = ensemble(u, psi0_for(c, m), set);
        const auto s = decoherence_summary(e.g);
        const RVector ev = eigvalsh(e.g.entries);
        double d_eff = kNaN, g_eff = kNaN;
        try {
            const SpectralFit f = mp_fit(ev);
            d_eff = f.d_eff;
            g_eff = f.gamma_eff;
        } catch (const Error&) {
        }
        cd.push_back(double(d0));
        cn.push_back(double(e.branches.count()));
        cz.push_back(double(e.nulls));
        gb.push_back(s.g_bar);
        gm.push_back(s.g_max);
        de.push_back(d_eff);
        ge.push_back(g_eff);
        res.push_back(e.branches.telescoping_residual);
        spectra[std::to_string(d0)] = std::vector<double>(ev.data(), ev.data() + ev.size());
        progress("ndf D0=" + std::to_string(d0) + " done");
    }
    t.add_column("d0", cd);
    t.add_column("n_histories", cn);
    t.add_column("n_null", cz);
    t.add_column("g_bar", gb);
    t.add_column("g_max", gm);
    t.add_column("d_eff", de);
    t.add_column("gamma_eff", ge);
    t.add_column("telescoping_residual", res);
    t.summary["alpha_bar"] = safe_fit(cd, gb, &ScalingFit::alpha);
    t.summary["alpha_max"] = safe_fit(cd, gm, &ScalingFit::alpha);
    t.summary["d_eff_over_d0_largest"] = de.back() / cd.back();
    t.summary["eigenvalues"] = spectra;
    return t;
}

// Shared by the localization and petz presets: full ensemble statistics plus
// the subset with the lowest metric.
struct SubsetRow {
    double g_bar, g_max, g_bar_low, g_max_low, n_low, d_eff, d_eff_low;
};

SubsetRow subset_stats(const GramMatrix& g, const std::vector<double>& metric, double fraction) {
    const auto s = decoherence_summary(g);
    const auto low = subset_filter(metric, fraction, Extreme::Lowest);
    require(low.size() >= 2, ErrorKind::InvalidConfig, "subset fraction leaves fewer than two histories");
    const GramMatrix gl = restrict_gram(g, low);
    const auto sl = decoherence_summary(gl);
    return {s.g_bar, s.g_max, sl.g_bar, sl.g_max, double(low.size()), fit_d_eff(g), fit_d_eff(gl)};
}

ResultTable localization_preset(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const long len = count(c.params, "length", 2);
    const double fraction = num(c.params, "fraction");
    const int bins = int(count(c.params, "bins"));
    const HistorySet set = sample_history_set(len, count(c.params, "count", 2), derive_seed(c.seed, "histories", std::uint64_t(len)));
    ResultTable t;
    std::vector<double> cd, cn, gb, gm, gbl, gml, nl, de, del, ml, hl, snr;
    Json bins_by_d = Json::object(), ratio = Json::object();
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const Ensemble e = ensemble(u, psi0_for(c, m), set);
        const auto loc = localizations(e.branches);
        const SubsetRow r = subset_stats(e.g, loc, fraction);
        const auto br = pair_bins(e.g, loc, bins);
        cd.push_back(double(d0));
        cn.push_back(double(e.branches.count()));
        gb.push_back(r.g_bar);
        gm.push_back(r.g_max);
        gbl.push_back(r.g_bar_low);
        gml.push_back(r.g_max_low);
        nl.push_back(r.n_low);
        de.push_back(r.d_eff);
        del.push_back(r.d_eff_low);
        Accumulator a;
        for (double v : loc) a.add(v);
        ml.push_back(a.mean());
        hl.push_back(2.0 / double(d0 + 1));
        snr.push_back(inverse_snr(e.g));
        bins_by_d[std::to_string(d0)] = bins_json(br);
        ratio[std::to_string(d0)] = top_bottom_ratio(br);
        progress("localization D0=" + std::to_string(d0) + " done");
    }
    t.add_column("d0", cd);
    t.add_column("n_histories", cn);
    t.add_column("g_bar", gb);
    t.add_column("g_max", gm);
    t.add_column("g_bar_low", gbl);
    t.add_column("g_max_low", gml);
    t.add_column("n_low", nl);
    t.add_column("d_eff", de);
    t.add_column("d_eff_low", del);
    t.add_column("mean_localization", ml);
    t.add_column("haar_localization", hl);
    t.add_column("inverse_snr", snr);
    t.summary["alpha_bar"] = safe_fit(cd, gb, &ScalingFit::alpha);
    t.summary["alpha_max"] = safe_fit(cd, gm, &ScalingFit::alpha);
    t.summary["alpha_bar_low"] = safe_fit(cd, gbl, &ScalingFit::alpha);
    t.summary["alpha_max_low"] = safe_fit(cd, gml, &ScalingFit::alpha);
    t.summary["bins"] = bins_by_d;
    t.summary["bin_ratio_top_bottom"] = ratio;
    return t;
}

ResultTable petz_preset(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const long len = count(c.params, "length", 2);
    const double fraction = num(c.params, "fraction");
    const int bins = int(count(c.params, "bins"));
    const HistorySet set = sample_history_set(len, count(c.params, "count", 2), derive_seed(c.seed, "histories", std::uint64_t(len)));
    ResultTable t;
    std::vector<double> cd, cn, gb, gm, gbl, gml, nl, del, mp, lo, hi;
    Json bins_by_d = Json::object();
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const Ensemble e = ensemble(u, psi0_for(c, m), set);
        const auto pur = petz_purities(u, e.branches.labels);
        const SubsetRow r = subset_stats(e.g, pur, fraction);
        cd.push_back(double(d0));
        cn.push_back(double(e.branches.count()));
        gb.push_back(r.g_bar);
        gm.push_back(r.g_max);
        gbl.push_back(r.g_bar_low);
        gml.push_back(r.g_max_low);
        nl.push_back(r.n_low);
        del.push_back(r.d_eff_low);
        Accumulator a;
        for (double v : pur) a.add(v);
        mp.push_back(a.mean());
        lo.push_back(*std::min_element(pur.begin(), pur.end()));
        hi.push_back(*std::max_element(pur.begin(), pur.end()));
        bins_by_d[std::to_string(d0)] = bins_json(pair_bins(e.g, pur, bins));
        progress("petz D0=" + std::to_string(d0) + " done");
    }
    t.add_column("d0", cd);
    t.add_column("n_histories", cn);
    t.add_column("g_bar", gb);
    t.add_column("g_max", gm);
    t.add_column("g_bar_low", gbl);
    t.add_column("g_max_low", gml);
    t.add_column("n_low", nl);
    t.add_column("d_eff_low", del);
    t.add_column("mean_purity", mp);
    t.add_column("min_purity", lo);
    t.add_column("max_purity", hi);
    t.summary["alpha_bar_low"] = safe_fit(cd, gbl, &ScalingFit::alpha);
    t.summary["alpha_max_low"] = safe_fit(cd, gml, &ScalingFit::alpha);
    t.summary["bins"] = bins_by_d;
    return t;
}

ResultTable hamming_preset(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const auto lens = counts(c.params, "lengths", 2);
    const long l_max = *std::max_element(lens.begin(), lens.end());
    const HistorySet full = sample_history_set(l_max, count(c.params, "count", 2), derive_seed(c.seed, "histories", std::uint64_t(l_max)));
    ResultTable t;
    std::vector<double> cd, cl, ch, cnh, cc, cm, cx;
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const CVector psi0 = psi0_for(c, m);
        for (long len : lens) {
            const Ensemble e = ensemble(u, psi0, truncate(full, len));
            std::vector<Accumulator> acc(static_cast<std::size_t>(len));
            std::vector<double> mx(std::size_t(len), 0.0);
            const auto& lab = e.branches.labels;
            for (Eigen::Index j = 1; j < e.g.size(); ++j)
                for (Eigen::Index i = 0; i < j; ++i) {
                    const auto h = std::size_t(hamming(lab[std::size_t(i)], lab[std::size_t(j)]));
                    const double v = std::abs(e.g.entries(i, j));
                    acc[h].add(v);
                    mx[h] = std::max(mx[h], v);
                }
            for (std::size_t h = 0; h < acc.size(); ++h) {
                if (acc[h].count() == 0) continue;
                cd.push_back(double(d0));
                cl.push_back(double(len));
                ch.push_back(double(h));
                cnh.push_back(len > 1 ? double(h) / double(len - 1) : 0.0);
                cc.push_back(double(acc[h].count()));
                cm.push_back(acc[h].mean());
                cx.push_back(mx[h]);
            }
            progress("hamming D0=" + std::to_string(d0) + " L=" + std::to_string(len));
        }
    }
    t.add_column("d0", cd);
    t.add_column("length", cl);
    t.add_column("hamming", ch);
    t.add_column("hamming_normalized", cnh);
    t.add_column("pairs", cc);
    t.add_column("mean_abs_g", cm);
    t.add_column("max_abs_g", cx);
    return t;
}

ResultTable heatmap_preset(const RunContext& c) {
    const long d0 = count(c.params, "d0", 2);
    const long len = count(c.params, "length", 2);
    const HistorySet set = sample_history_set(len, count(c.params, "count", 2), derive_seed(c.seed, "histories", std::uint64_t(len)));
    const ModelSpec& m = model_for(c, d0);
    Propagator u(m, resolve_dt(m, text(c.params, "dt")));
    const Ensemble e = ensemble(u, psi0_for(c, m), set);
    const NnHeatmap h = heatmap_nn(e.g, e.branches.labels);
    const double n_bar = n_profile(e.branches).n_bar;
    ResultTable t;
    std::vector<double> c1, c2, cb, cm;
    Accumulator corner, center;
    for (Eigen::Index j = 0; j < h.g_bar.cols(); ++j)
        for (Eigen::Index i = 0; i < h.g_bar.rows(); ++i) {
            c1.push_back(double(i));
            c2.push_back(double(j));
            cb.push_back(h.g_bar(i, j));
            cm.push_back(h.g_max(i, j));
            if (h.g_max(i, j) <= 0.0) continue;  // empty cell
            const double a = std::abs(double(i) - n_bar), b = std::abs(double(j) - n_bar);
            if (a > double(len) / 4.0 && b > double(len) / 4.0) corner.add(h.g_max(i, j));
            if (a <= double(len) / 8.0 && b <= double(len) / 8.0) center.add(h.g_max(i, j));
        }
    t.add_column("n", c1);
    t.add_column("n2", c2);
    t.add_column("g_bar", cb);
    t.add_column("g_max", cm);
    t.summary["n_bar"] = n_bar;
    t.summary["corner_mean_g_max"] = corner.count() ? Json(corner.mean()) : Json(nullptr);
    t.summary["center_mean_g_max"] = center.count() ? Json(center.mean()) : Json(nullptr);
    t.summary["corner_cells"] = corner.count();
    t.summary["center_cells"] = center.count();
    return t;
}

ResultTable n_profile_preset(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const long len = count(c.params, "length", 2);
    const long petz_max = count(c.params, "petz_max_d0", 0);
    const HistorySet set = sample_history_set(len, count(c.params, "count", 2), derive_seed(c.seed, "histories", std::uint64_t(len)));
    ResultTable t;
    std::vector<double> cd, cn, cc, cq, cs, cw, cb, cr, cl, ch, cp;
    Json nbar = Json::object(), ratio_at = Json::object();
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const Ensemble e = ensemble(u, psi0_for(c, m), set);
        std::vector<double> pur;
        if (d0 <= petz_max) pur = petz_purities(u, e.branches.labels);
        const NProfile p = n_profile(e.branches, pur.empty() ? nullptr : &pur);
        const double p1 = double(m.d1) / double(m.dim());
        std::vector<double> lr(p.counts.size(), kNaN);
        for (std::size_t n = 0; n < p.counts.size(); ++n) {
            const double bern = std::pow(p1, double(n)) * std::pow(1.0 - p1, double(len - 1) - double(n));
            const double mw = p.counts[n] > 0 ? p.q[n] / double(p.counts[n]) : kNaN;
            if (p.counts[n] > 0 && mw > 0.0) lr[n] = std::log(mw / bern);
            cd.push_back(double(d0));
            cn.push_back(double(n));
            cc.push_back(double(p.counts[n]));
            cq.push_back(p.q[n]);
            cs.push_back(p.q_sector[n]);
            cw.push_back(mw);
            cb.push_back(bern);
            cr.push_back(lr[n]);
            cl.push_back(p.counts[n] > 0 ? p.mean_localization[n] : kNaN);
            ch.push_back(2.0 / double(d0 + 1));
            cp.push_back(!pur.empty() && p.counts[n] > 0 ? p.mean_purity[n] : kNaN);
        }
        nbar[std::to_string(d0)] = p.n_bar;
        // log ratio at the occupied n closest to n_bar
        double best = kNaN, gap = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < lr.size(); ++n)
            if (!std::isnan(lr[n]) && std::abs(double(n) - p.n_bar) < gap) {
                gap = std::abs(double(n) - p.n_bar);
                best = lr[n];
            }
        ratio_at[std::to_string(d0)] = std::isnan(best) ? Json(nullptr) : Json(best);
        progress("n-profile D0=" + std::to_string(d0) + " done");
    }
    t.add_column("d0", cd);
    t.add_column("n", cn);
    t.add_column("count", cc);
    t.add_column("q", cq);
    t.add_column("q_sector", cs);
    t.add_column("mean_weight", cw);
    t.add_column("bernoulli_label", cb);
    t.add_column("log_ratio", cr);
    t.add_column("mean_localization", cl);
    t.add_column("haar_localization", ch);
    t.add_column("mean_purity", cp);
    t.summary["n_bar"] = nbar;
    t.summary["log_ratio_at_n_bar"] = ratio_at;
    return t;
}

ResultTable born_preset(const RunContext& c) {
    const long d0 = count(c.params, "d0", 2);
    const long len = count(c.params, "length");
    const double threshold = num(c.params, "window");
    const ModelSpec& m = model_for(c, d0);
    Propagator u(m, resolve_dt(m, text(c.params, "dt")));
    const CVector psi0 = psi0_for(c, m);
    const InhomogeneousFamily fam = inhomogeneous_sweep(u, psi0, len);
    const auto gmax = g_max_by_n(fam);
    const Eigen::Matrix2d tm = markov_transition(u, count(c.params, "samples"), derive_seed(c.seed, "markov", std::uint64_t(d0)));
    const Eigen::Vector2d p0(psi0.head(m.d0).squaredNorm(), psi0.tail(m.d1).squaredNorm());
    double conservation = 0.0;
    const auto pm = markov_distribution(tm, len, p0 / p0.sum(), &conservation);
    double mean_n = 0.0;
    for (std::size_t n = 0; n < pm.size(); ++n) mean_n += double(n) * pm[n];
    const auto pb = bernoulli_distribution(len, std::clamp(mean_n / double(len), 0.0, 1.0));
    std::vector<double> q(fam.weights.data(), fam.weights.data() + fam.weights.size());
    std::vector<bool> window(q.size());
    double outside = kNaN;
    long in = 0;
    for (std::size_t n = 0; n < q.size(); ++n) {
        window[n] = !std::isnan(gmax[n]) && gmax[n] < threshold;
        in += window[n];
        if (!window[n] && !std::isnan(gmax[n])) outside = std::isnan(outside) ? gmax[n] : std::max(outside, gmax[n]);
    }
    ResultTable t;
    std::vector<double> cn, cw;
    for (std::size_t n = 0; n < q.size(); ++n) {
        cn.push_back(double(n));
        cw.push_back(window[n] ? 1.0 : 0.0);
    }
    t.add_column("n", cn);
    t.add_column("g_max", gmax);
    t.add_column("q", q);
    t.add_column("p_markov", pm);
    t.add_column("p_bernoulli", pb);
    t.add_column("in_window", cw);
    const Eigen::Vector2d st = stationary_distribution(tm);
    t.summary["transition"] = {{"t00", tm(0, 0)}, {"t10", tm(1, 0)}, {"t01", tm(0, 1)}, {"t11", tm(1, 1)}};
    t.summary["jump_ratio_t10_over_t01"] = tm(1, 0) / tm(0, 1);
    t.summary["stationary"] = {st[0], st[1]};
    t.summary["window_threshold"] = threshold;
    t.summary["window_size"] = in;
    t.summary["tv_window_q_markov"] = total_variation(q, pm, window);
    t.summary["max_g_max_outside_window"] = std::isnan(outside) ? Json(nullptr) : Json(outside);
    t.summary["tv_markov_bernoulli"] = total_variation(pm, pb, std::vector<bool>(pm.size(), true));
    t.summary["markov_conservation_error"] = conservation;
    t.summary["q_total"] = fam.weights.sum();
    return t;
}

ResultTable snr_preset(const RunContext& c) {
    const auto dims = counts(c.params, "dims", 2);
    const auto lens = counts(c.params, "lengths", 2);
    const long l_max = *std::max_element(lens.begin(), lens.end());
    const HistorySet full = sample_history_set(l_max, count(c.params, "count", 3), derive_seed(c.seed, "histories", std::uint64_t(l_max)));
    ResultTable t;
    std::vector<double> cd, cl, cn, cs, cb, cm;
    for (long d0 : dims) {
        const ModelSpec& m = model_for(c, d0);
        Propagator u(m, resolve_dt(m, text(c.params, "dt")));
        const CVector psi0 = psi0_for(c, m);
        for (long len : lens) {
            const Ensemble e = ensemble(u, psi0, truncate(full, len));
            const auto s = decoherence_summary(e.g);
            cd.push_back(double(d0));
            cl.push_back(double(len));
            cn.push_back(double(e.branches.count()));
            cs.push_back(inverse_snr(e.g));
            cb.push_back(s.g_bar);
            cm.push_back(s.g_max);
            progress("snr D0=" + std::to_string(d0) + " L=" + std::to_string(len));
        }
    }
    t.add_column("d0", cd);
    t.add_column("length", cl);
    t.add_column("n_histories", cn);
    t.add_column("inverse_snr", cs);
    t.add_column("g_bar", cb);
    t.add_column("g_max", cm);
    return t;
}

Json grid(double a, double b, int steps) {
    Json out = Json::array();
    for (int i = 0; i < steps; ++i) out.push_back(std::round((a + (b - a) * i / (steps - 1)) * 1e12) / 1e12);
    return out;
}

}  // namespace

}  // namespace decohist::detail

namespace decohist {

std::vector<double> parse_grid(const Json& v) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& x : v) {
            require(x.is_number(), ErrorKind::InvalidConfig, "list entries must be numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    require(v.is_string(), ErrorKind::InvalidConfig, "expected a number list");
    const std::string s = v.get<std::string>();
    auto to_num = [&](const std::string& x) {
        try {
            std::size_t used = 0;
            const double d = std::stod(x, &used);
            require(used == x.size(), ErrorKind::InvalidConfig, "bad number '" + x + "'");
            return d;
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::InvalidConfig, "bad number '" + x + "'");
        }
    };
    std::vector<std::string> parts;
    const char sep = s.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
    if (sep == ':') {
        require(parts.size() == 3, ErrorKind::InvalidConfig, "grid must be a:b:steps");
        const double steps = to_num(parts[2]);
        require(steps >= 1 && std::floor(steps) == steps, ErrorKind::InvalidConfig, "grid steps must be a positive integer");
        if (steps == 1) return {to_num(parts[0])};
        std::vector<double> out;
        for (const auto& x : detail::grid(to_num(parts[0]), to_num(parts[1]), int(steps))) out.push_back(x.get<double>());
        return out;
    }
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(to_num(p));
    return out;
}

}  // namespace decohist

namespace decohist::detail {

const std::vector<PresetEntry>& preset_registry() {
    static const std::vector<PresetEntry> r = [] {
        const Json g10 = grid(0.1, 1.0, 10);
        std::vector<PresetEntry> v;
        v.push_back({{"qsd-curves", "Fig. 2", "sqrt-measurement success probability vs gamma",
                      {{"dims", {20, 100, 500, 2500}}, {"gamma_grid", g10}, {"family", "haar"}, {"realizations", 1}}},
                     qsd_curves});
        v.push_back({{"det-bounds", "Fig. 1", "N-th root of det G and det W vs gamma",
                      {{"dims", {20, 400}}, {"gamma_grid", g10}}},
                     det_bounds});
        v.push_back({{"slp-gap", "Fig. 3", "QSD vs SLP success and the gap bound",
                      {{"d", 400}, {"gamma_grid", grid(0.125, 1.0, 8)}, {"slope_n", {50, 100, 200, 400}}, {"fixed_gamma", 0.5}}},
                     slp_gap});
        v.push_back({{"mi-curves", "Fig. 4", "exact, mean-field and fluctuation mutual information",
                      {{"dims", {60, 2000}}, {"gamma_grid", g10}}},
                     mi_curves});
        v.push_back({{"ensemble-compare", "Fig. 5", "success probability for permutation, pi-sign and MUB families",
                      {{"d", 2500}, {"d_mub", 499}, {"gamma_grid", g10}, {"families", {"haar", "perm", "sign", "mub"}}}},
                     ensemble_compare});
        v.push_back({{"mi-large-n", "Fig. 7", "mean-field mutual information for N beyond d",
                      {{"k_grid", {4, 6, 8, 10, 12, 14}}, {"max_ratio", 8.0}, {"points", 120}}},
                     mi_large_n});
        v.push_back({{"packing", "packing bounds", "lower bounds on nearly orthogonal states and a greedy witness",
                      {{"dims", {10, 30, 50}}, {"epsilons", {0.2, 0.3, 0.4, 0.5}}, {"budget", 10000}}},
                     packing});
        v.push_back({{"concentration", "norm and fidelity concentration",
                      "norm deviation frequencies vs the concentration bound; fidelity KS test",
                      {{"dims", {600, 6000}}, {"epsilons", {0.05, 0.1}}, {"samples", 100000}, {"ks_dim", 50}, {"ks_samples", 100000}}},
                     concentration});
        v.push_back({{"relaxation", "Fig. averages", "subspace probabilities vs time",
                      {{"dims", {200}}, {"horizon_tau", 16.0}, {"points", 65}, {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     relaxation});
        v.push_back({{"ndf-scaling", "Fig. 6(a)", "NDF decay with D0 for the full L=10 tree, with MP fits",
                      {{"dims", {20, 200, 2000}}, {"length", 10}, {"dt", "eq"}, {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     ndf_scaling});
        v.push_back({{"localization", "Fig. 6(b)-(c), dec loc",
                      "NDF statistics for sampled long histories and the lowest-localization subset",
                      {{"dims", {20, 200, 2000}}, {"length", 100}, {"count", 1000}, {"dt", "eq"}, {"fraction", 0.2}, {"bins", 10},
                       {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     localization_preset});
        v.push_back({{"petz", "Fig. dec pur, sub dec Petz", "Petz purity of sampled histories and the lowest-purity subset",
                      {{"dims", {20, 60}}, {"length", 100}, {"count", 1000}, {"dt", "eq"}, {"fraction", 0.2}, {"bins", 10},
                       {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     petz_preset});
        v.push_back({{"hamming", "Fig. dec Ham", "NDF magnitude vs Hamming distance",
                      {{"dims", {20, 200}}, {"lengths", {25, 100}}, {"count", 1000}, {"dt", "eq"}, {"initial", "haar-in-H1"},
                       {"diagonal", "even"}}},
                     hamming_preset});
        v.push_back({{"heatmap", "Fig. heat map", "mean and max coherence by numbers of ones (n, n')",
                      {{"d0", 200}, {"length", 150}, {"count", 1000}, {"dt", "eq"}, {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     heatmap_preset});
        v.push_back({{"n-profile", "Fig. 9", "localization, purity and weights resolved by the number of ones",
                      {{"dims", {20, 200}}, {"length", 150}, {"count", 1000}, {"dt", "eq"}, {"petz_max_d0", 20},
                       {"initial", "haar-in-H1"}, {"diagonal", "even"}}},
                     n_profile_preset});
        v.push_back({{"born", "Fig. Born neq", "inhomogeneous histories vs Markov and Bernoulli probabilities",
                      {{"d0", 200}, {"length", 200}, {"dt", "neq"}, {"samples", 100}, {"window", 0.1}, {"initial", "haar-in-H1"},
                       {"diagonal", "even"}}},
                     born_preset});
        v.push_back({{"born-eq", "Fig. Born eq (supplement)", "born preset at the equilibrium time step",
                      {{"d0", 200}, {"length", 200}, {"dt", "eq"}, {"samples", 100}, {"window", 0.1}, {"initial", "haar-in-H1"},
                       {"diagonal", "even"}}},
                     born_preset});
        v.push_back({{"snr", "Fig. inverse SNR", "inverse SNR of off-diagonal NDF magnitudes vs D0",
                      {{"dims", {20, 200, 2000}}, {"lengths", {25, 100}}, {"count", 1000}, {"dt", "eq"}, {"initial", "haar-in-H1"},
                       {"diagonal", "even"}}},
                     snr_preset});
        return v;
    }();
    return r;
}

}  // namespace decohist::detail
