// Acceptance runs at full scale. Each criterion prints one PASS/FAIL line with
// its elapsed time against the runtime budget; the exit code is nonzero when
// any criterion in the selected groups fails.
//
//   acceptance [--group primitives|discrimination|histories|born]... [--list]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "decohist/analysis.hpp"
#include "decohist/discrimination.hpp"
#include "decohist/ensembles.hpp"
#include "decohist/linalg.hpp"
#include "decohist/model.hpp"
#include "decohist/rng.hpp"
#include "decohist/runner.hpp"
#include "oracles.hpp"

using namespace decohist;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Check {
    std::string what;
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string group;
    std::string name;
    double budget;  // seconds
    std::function<std::vector<Check>()> body;
    std::function<void()> untimed = [] {};  // setup excluded from the budget
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Json load_criteria(const std::string& preset) {
    std::ifstream f(fs::path(DECOHIST_CRITERIA_DIR) / (preset + ".json"));
    if (!f) throw Error(ErrorKind::InvalidConfig, "no criteria file for " + preset);
    return Json::parse(f);
}

ResultTable run_preset(const std::string& preset, Json params) {
    ExperimentConfig c;
    c.experiment = preset;
    c.params = std::move(params);
    c.seed = kSeed;
    fs::create_directories("acceptance_results");
    c.out = (fs::path("acceptance_results") / (preset + ".csv")).string();
    return run(c);
}

// Evaluates the preset's criteria file against the table.
void add_verify(std::vector<Check>& out, const ResultTable& t, const std::string& preset) {
    for (const auto& r : verify(t, load_criteria(preset)).results) out.push_back({r.name, r.pass, r.detail});
}

double summary_number(const ResultTable& t, const std::string& key) {
    const Json& v = t.summary.at(key);
    return v.is_number() ? v.get<double>() : std::nan("");
}

std::vector<double> rows_where(const ResultTable& t, const std::string& col, const std::string& key, double value) {
    std::vector<double> out;
    const auto& k = t.column(key);
    const auto& c = t.column(col);
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::abs(k[i] - value) < 1e-9) out.push_back(c[i]);
    return out;
}

// ---- primitives -----------------------------------------------------------------

std::vector<Check> concentration() {
    std::vector<Check> out;
    const ResultTable t = run_preset("concentration", {{"dims", {600, 6000}}, {"epsilons", {0.05, 0.1}},
                                                       {"samples", 100000}, {"ks_dim", 50}, {"ks_samples", 100000}});
    add_verify(out, t, "concentration");
    double worst = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double d = t.column("d")[i], e = t.column("epsilon")[i];
        worst = std::max(worst, std::abs(t.column("bound")[i] - 2.0 * std::exp(-e * e * d / 6.0)));
    }
    out.push_back({"bound column matches 2 exp(-eps^2 D / 6)", worst < 1e-15, "max deviation " + fmt(worst)});

    // independent draw, scored with the reference KS routine
    Rng rng(derive_seed(kSeed, "acceptance-ks"));
    const long dim = 50;
    const CVector chi = haar_state(dim, rng).coefficients();
    std::vector<double> f2(100000);
    for (auto& v : f2) v = std::norm(chi.dot(haar_state(dim, rng).coefficients()));
    const double ks = oracle::ks_statistic(f2, [&](double x) { return 1.0 - std::pow(1.0 - x, double(dim - 1)); });
    out.push_back({"reference KS vs Beta(1, D-1) < 0.01", ks < 0.01, "KS " + fmt(ks)});
    return out;
}

std::vector<Check> relaxation() {
    std::vector<Check> out;
    const ResultTable t = run_preset("relaxation", {{"dims", {200}}});
    add_verify(out, t, "relaxation");
    const auto p0 = t.column("p0"), p1 = t.column("p1");
    double worst = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) worst = std::max(worst, std::abs(p0[i] + p1[i] - 1.0));
    out.push_back({"p0 + p1 = 1", worst < 1e-10, "max deviation " + fmt(worst)});
    return out;
}

std::vector<Check> property_suites() {
    std::vector<Check> out;
    const ModelSpec m = build_model(40, derive_seed(kSeed, "acceptance-properties"));
    const CVector psi0 = initial_state(m, InitialKind::HaarInH1, 2);
    Propagator u(m, resolve_dt(m, "eq"));

    const BranchStates b = branch_states(u, psi0, full_tree(10));
    out.push_back({"branch sums telescope to 1e-8", b.telescoping_residual >= 0.0 && b.telescoping_residual <= 1e-8,
                   "residual " + fmt(b.telescoping_residual)});
    // both final bits, against an independent dense evolution
    const BranchStates both = branch_states(u, psi0, full_tree(10, false));
    const CVector direct = evolve(m, psi0, 10.0 * u.dt());
    const double tele = (both.states.rowwise().sum() - direct).norm();
    out.push_back({"branch sum equals direct evolution to 1e-8", tele <= 1e-8, "residual " + fmt(tele)});

    CVector psi = initial_state(m, InitialKind::HaarFull, 3);
    double drift = 0.0;
    for (int s = 0; s < 200; ++s) {
        psi = u.apply(psi);
        drift = std::max(drift, std::abs(psi.norm() - 1.0));
    }
    const CMatrix& ud = u.dense();
    const double defect = (ud.adjoint() * ud - CMatrix::Identity(m.dim(), m.dim())).cwiseAbs().maxCoeff();
    out.push_back({"norm preserved to 1e-10 over 200 steps", drift <= 1e-10, "max drift " + fmt(drift)});
    out.push_back({"propagator unitary to 1e-10", defect <= 1e-10, "max |U^dag U - 1| " + fmt(defect)});

    const StateFamily f = haar_family(300, 200, derive_seed(kSeed, "acceptance-sqrt"));
    const GramMatrix g = gram_matrix(f);
    const CMatrix s = sqrt_gram(g);
    const double sq = (s * s - g.entries).cwiseAbs().maxCoeff();
    out.push_back({"(sqrt G)^2 = G to 1e-8", sq <= 1e-8, "max deviation " + fmt(sq)});

    const HistorySet set = sample_history_set(30, 60, derive_seed(kSeed, "acceptance-petz"));
    const auto pur = petz_purities(u, set.labels);
    double lo = 1.0, hi = 0.0;
    for (double p : pur) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double floor = 1.0 / double(m.d1);
    out.push_back({"Petz purity in [1/D1, 1]", lo >= floor - 1e-10 && hi <= 1.0 + 1e-10,
                   "range [" + fmt(lo) + ", " + fmt(hi) + "], 1/D1 = " + fmt(floor)});

    const Eigen::Matrix2d tm = markov_transition(u, 100, derive_seed(kSeed, "acceptance-markov"));
    double cons = 0.0;
    const auto pm = markov_distribution(tm, 200, Eigen::Vector2d(0.0, 1.0), &cons);
    double total = 0.0;
    for (double p : pm) total += p;
    out.push_back({"Markov probability conserved to 1e-12", cons <= 1e-12 && std::abs(total - 1.0) <= 1e-12,
                   "step error " + fmt(cons) + ", total - 1 = " + fmt(total - 1.0)});

    const DilationModel d = dilation_model(4, 2, 3, derive_seed(kSeed, "acceptance-dilation"));
    CMatrix states(d.problem.psi0.size(), 8);
    for (int code = 0; code < 8; ++code) states.col(code) = history_state(d.problem, {(code >> 2) & 1, (code >> 1) & 1, code & 1});
    const bool dhc = dhc_check(gram_matrix(states), 1e-8);
    const bool comm = commutativity_check(d.problem, 1e-8);
    out.push_back({"dilation model: DHC holds while projectors do not commute", dhc && !comm,
                   std::string("dhc ") + (dhc ? "true" : "false") + ", commutativity " + (comm ? "true" : "false")});
    return out;
}

// ---- discrimination ---------------------------------------------------------------

std::vector<Check> qsd() {
    std::vector<Check> out;
    const ResultTable t = run_preset("qsd-curves", {{"dims", {2500}}, {"gamma_grid", "0.1:1.0:10"}, {"family", "haar"}});
    add_verify(out, t, "qsd-curves");
    double worst = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double g = t.column("gamma")[i];
        const double ref = std::pow(oracle::mp_integral([](double x) { return std::sqrt(x); }, g), 2);
        worst = std::max(worst, std::abs(t.column("mu_sqrt_sq")[i] - ref));
    }
    out.push_back({"mu_sqrt^2 column matches reference quadrature", worst < 1e-4, "max deviation " + fmt(worst)});
    return out;
}

std::vector<Check> det() {
    std::vector<Check> out;
    const ResultTable t = run_preset("det-bounds", {{"dims", {400}}, {"gamma_grid", "0.1:1.0:10"}});
    add_verify(out, t, "det-bounds");
    double worst = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double g = t.column("gamma")[i];
        const double ref = std::exp(oracle::mp_integral([](double x) { return std::log(x); }, g, 200000));
        worst = std::max(worst, std::abs(t.column("exp_mu_ln")[i] - ref));
    }
    out.push_back({"exp(mu_ln) column matches reference quadrature", worst < 2e-3, "max deviation " + fmt(worst)});
    return out;
}

std::vector<Check> ensembles() {
    std::vector<Check> out;
    const ResultTable t = run_preset("ensemble-compare", {{"d", 2500}, {"d_mub", 499}, {"gamma_grid", "0.1:1.0:10"},
                                                          {"families", {"haar", "perm", "sign", "mub"}}});
    add_verify(out, t, "ensemble-compare");
    for (const auto& [name, code] : std::vector<std::pair<std::string, int>>{{"perm", 1}, {"sign", 2}, {"mub", 3}}) {
        const auto p = rows_where(t, "p_s", "family", code), h = rows_where(t, "haar_p_s", "family", code);
        double worst = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - h[i]));
        out.push_back({name + " within 0.05 of Haar", !p.empty() && worst <= 0.05, "max deviation " + fmt(worst)});
    }
    return out;
}

std::vector<Check> mutual_info() {
    std::vector<Check> out;
    const ResultTable t = run_preset("mi-curves", {{"dims", {2000}}, {"gamma_grid", "0.1:1.0:10"}});
    add_verify(out, t, "mi-curves");
    double worst = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double mi = t.column("mi")[i], n = t.column("n")[i];
        if (!(mi >= -1e-12 && mi <= std::log(n) + 1e-12)) worst = 1.0;
    }
    out.push_back({"0 <= I <= ln N", worst == 0.0, worst == 0.0 ? "all points" : "violated"});
    return out;
}

std::vector<Check> slp() {
    std::vector<Check> out;
    const ResultTable t = run_preset("slp-gap", {{"d", 400}, {"gamma_grid", "0.125:1.0:8"}, {"slope_n", {50, 100, 200, 400}}});
    add_verify(out, t, "slp-gap");
    std::vector<double> n, gap;
    for (double x : {50.0, 100.0, 200.0, 400.0}) {
        n.push_back(x);
        gap.push_back(rows_where(t, "gap", "n", x).at(0));
    }
    const double slope = oracle::loglog_slope(n, gap);
    out.push_back({"reference log-log slope in [-1.4, -0.6]", slope >= -1.4 && slope <= -0.6, "slope " + fmt(slope)});
    out.push_back({"info: slope at fixed gamma=0.5, d = 2N", true, "slope " + fmt(summary_number(t, "gap_slope_fixed_gamma"))});
    return out;
}

// ---- histories --------------------------------------------------------------------

void warm_model(long d0) {
    shared_model(d0, derive_seed(kSeed, "model", std::uint64_t(d0)), ModelOptions{});
}

std::vector<Check> ndf_scaling() {
    std::vector<Check> out;
    const ResultTable t = run_preset("ndf-scaling", {{"dims", {20, 200, 2000}}, {"length", 10}, {"dt", "eq"}});
    add_verify(out, t, "ndf-scaling");
    const double slope = oracle::loglog_slope(t.column("d0"), t.column("g_bar"));
    out.push_back({"reference fit of g_bar vs D0 agrees with the summary", std::abs(-slope - summary_number(t, "alpha_bar")) < 1e-9,
                   "alpha " + fmt(-slope)});
    double tele = 0.0;
    for (double r : t.column("telescoping_residual")) tele = std::max(tele, r);
    out.push_back({"telescoping residual <= 1e-8", tele <= 1e-8, "max " + fmt(tele)});
    return out;
}

std::vector<Check> localization() {
    std::vector<Check> out;
    const ResultTable t = run_preset("localization", {{"dims", {20, 200, 2000}}, {"length", 100}, {"count", 1000}, {"dt", "eq"},
                                                      {"fraction", 0.2}});
    add_verify(out, t, "localization");
    const double a_max = -oracle::loglog_slope(t.column("d0"), t.column("g_max"));
    const double a_low = -oracle::loglog_slope(t.column("d0"), t.column("g_bar_low"));
    out.push_back({"reference fits agree with the summary",
                   std::abs(a_max - summary_number(t, "alpha_max")) < 1e-9 && std::abs(a_low - summary_number(t, "alpha_bar_low")) < 1e-9,
                   "alpha_max " + fmt(a_max) + ", alpha_bar_low " + fmt(a_low)});
    return out;
}

// ---- born ----------------------------------------------------------------------------

std::vector<Check> born() {
    std::vector<Check> out;
    const ResultTable t = run_preset("born", {{"d0", 200}, {"length", 200}, {"dt", "neq"}, {"window", 0.1}});
    add_verify(out, t, "born");
    // window statistics recomputed from the columns
    const auto& g = t.column("g_max");
    const auto& q = t.column("q");
    const auto& pm = t.column("p_markov");
    double tv = 0.0, outside = 0.0;
    long in = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::isnan(g[i])) continue;
        if (g[i] < 0.1) {
            tv += 0.5 * std::abs(q[i] - pm[i]);
            ++in;
        } else {
            outside = std::max(outside, g[i]);
        }
    }
    out.push_back({"reference window statistics", in >= 1 && tv < 0.1 && outside > 0.5,
                   "window " + std::to_string(in) + " sectors, TV " + fmt(tv) + ", max G_max outside " + fmt(outside)});
    double total = 0.0;
    for (double x : q) total += x;
    out.push_back({"sector weights sum to 1", std::abs(total - 1.0) < 1e-8, "sum - 1 = " + fmt(total - 1.0)});
    return out;
}

std::vector<Criterion> catalog() {
    return {
        {"primitives", "measure concentration (norm bound at D 600 and 6000, fidelity KS at D=50)", 120, concentration},
        {"primitives", "relaxation: <Pi_0>(8 tau) near 1/3 at D=600", 60, relaxation, [] { warm_model(200); }},
        {"primitives", "property suites", 300, property_suites},
        {"discrimination", "sqrt-measurement curve at d=2500", 600, qsd},
        {"discrimination", "determinant bounds at d=400", 120, det},
        {"discrimination", "ensemble universality (perm, pi-sign, MUB)", 900, ensembles},
        {"discrimination", "mutual information at d=2000", 600, mutual_info},
        {"discrimination", "QSD-SLP gap at d=400", 300, slp},
        {"histories", "NDF scaling, L=10 full tree, D up to 6000", 3600, ndf_scaling},
        {"histories", "recoherence structure and localization subset, L=100", 5400, localization},
        {"born", "Born-rule pattern, D=600, L=200, nonequilibrium", 1800, born},
    };
}

}  // namespace

int main(int argc, char** argv) {
    std::set<std::string> groups;
    bool list = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--group" && i + 1 < argc) groups.insert(argv[++i]);
        else if (a == "--list") list = true;
        else {
            std::cerr << "usage: acceptance [--group NAME]... [--list]\n";
            return 1;
        }
    }
    set_progress_sink([](const std::string& m) { std::fprintf(stderr, "  .. %s\n", m.c_str()); });

    int failed = 0, ran = 0;
    for (const auto& c : catalog()) {
        if (!groups.empty() && !groups.count(c.group)) continue;
        if (list) {
            std::cout << c.group << "\t" << c.name << "\n";
            continue;
        }
        ++ran;
        std::vector<Check> checks;
        double elapsed = 0.0;
        try {
            c.untimed();
            const auto start = std::chrono::steady_clock::now();
            checks = c.body();
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        } catch (const std::exception& e) {
            checks.push_back({"run", false, std::string("error: ") + e.what()});
        }
        checks.push_back({"runtime within budget", elapsed <= c.budget, fmt(elapsed) + " s of " + fmt(c.budget) + " s"});
        bool pass = true;
        for (const auto& k : checks) pass = pass && k.pass;
        failed += !pass;
        std::cout << (pass ? "PASS " : "FAIL ") << "[" << c.group << "] " << c.name << " (" << fmt(elapsed) << " s / "
                  << fmt(c.budget) << " s)\n";
        for (const auto& k : checks) {
            const bool info = k.what.rfind("info:", 0) == 0;
            std::cout << "      " << (info ? "     " : k.pass ? "ok   " : "FAIL ") << k.what << ": " << k.detail << "\n";
        }
        std::cout.flush();
    }
    if (!list) std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
    return failed ? 1 : 0;
}
