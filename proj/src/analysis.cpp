#include "decohist/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "decohist/linalg.hpp"
#include "decohist/rng.hpp"

namespace decohist {

namespace {

double log_binomial(long n, long k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

}  // namespace

DecoherenceSummary decoherence_summary(const GramMatrix& g) {
    const Eigen::Index n = g.size();
    require(n >= 2, ErrorKind::Invalid, "decoherence summary needs N >= 2");
    Accumulator acc;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == j) continue;
            const double v = std::abs(g.entries(i, j));
            acc.add(v);
            worst = std::max(worst, v);
        }
    return DecoherenceSummary{acc.mean(), worst, long(n)};
}

ScalingFit scaling_fit(const std::vector<double>& dims, const std::vector<double>& values) {
    require(dims.size() == values.size() && dims.size() >= 2, ErrorKind::Invalid, "need at least two paired points");
    const std::size_t n = dims.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(dims[i] > 0.0 && values[i] > 0.0, ErrorKind::Invalid, "scaling fit needs positive inputs");
        x[i] = std::log(dims[i]);
        y[i] = std::log(values[i]);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, ErrorKind::Invalid, "scaling fit needs distinct dimensions");
    const double slope = sxy / sxx;
    ScalingFit f;
    f.alpha = -slope;
    f.intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return f;
}

double localization(const CVector& c) {
    require(std::abs(c.squaredNorm() - 1.0) <= 1e-8, ErrorKind::Invalid, "localization needs a normalized state");
    return c.cwiseAbs2().squaredNorm();
}

double localization(const StateVector& s) { return localization(s.coefficients()); }

// ---- Petz purity ---------------------------------------------------------

namespace {

double purity_of(const CMatrix& m, long d1, std::size_t length) {
    const double tr = m.squaredNorm();
    require(tr >= null_threshold(length), ErrorKind::NullHistory, "Kraus string annihilates H1");
    const double num = m.rows() < m.cols() ? (m * m.adjoint()).squaredNorm() : (m.adjoint() * m).squaredNorm();
    return std::clamp(num / (tr * tr), 1.0 / double(d1), 1.0);
}

}  // namespace

double petz_purity(const Propagator& u, const HistoryLabel& label) {
    return petz_purities(u, {label})[0];
}

std::vector<double> petz_purities(const Propagator& u, const std::vector<HistoryLabel>& labels) {
    const ModelSpec& m = u.model();
    if (labels.empty()) return {};
    const std::size_t len = labels[0].length();
    for (const auto& l : labels) require(l.length() == len && len >= 1, ErrorKind::Invalid, "labels must share one length");
    const double bytes = double(len) * double(std::max(m.d0, m.d1)) * double(m.d1) * 16.0;
    require(bytes <= double(kPetzMemoryCap), ErrorKind::TooLarge,
            "Petz prefix stack needs " + std::to_string(long(bytes / 1e6)) + " MB (memory)");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a].bits < labels[b].bits; });

    // stack[k] = Π_{x_{k+1}} U ⋯ Π_{x_1} U restricted to columns in H1.
    std::vector<CMatrix> stack(len);
    const HistoryLabel* prev = nullptr;
    std::vector<double> out(labels.size());
    for (std::size_t idx : order) {
        const HistoryLabel& l = labels[idx];
        std::size_t common = 0;
        if (prev)
            while (common < len && prev->bits[common] == l.bits[common]) ++common;
        for (std::size_t k = common; k < len; ++k) {
            const int b = l.bits[k];
            if (k == 0) stack[0] = u.block(b, 1);
            else stack[k].noalias() = u.block(b, l.bits[k - 1]) * stack[k - 1];
        }
        out[idx] = purity_of(stack[len - 1], m.d1, len);
        prev = &l;
    }
    return out;
}

int hamming(const HistoryLabel& a, const HistoryLabel& b) {
    require(a.length() == b.length() && a.length() >= 1, ErrorKind::Invalid, "labels differ in length");
    int d = 0;
    for (std::size_t i = 0; i + 1 < a.length(); ++i) d += a.bits[i] != b.bits[i];
    return d;
}

std::vector<BinRow> binned_correlation(const std::vector<double>& xs, const std::vector<double>& ys, int bins, bool log_x) {
    require(xs.size() == ys.size() && !xs.empty(), ErrorKind::Invalid, "binned correlation needs paired samples");
    require(bins >= 1, ErrorKind::Invalid, "need at least one bin");
    auto tx = [&](double x) {
        if (log_x) {
            require(x > 0.0, ErrorKind::Invalid, "log binning needs positive x");
            return std::log(x);
        }
        return x;
    };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : xs) {
        lo = std::min(lo, tx(x));
        hi = std::max(hi, tx(x));
    }
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<Accumulator> ax(static_cast<std::size_t>(bins)), ay(static_cast<std::size_t>(bins));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        int b = hi > lo ? static_cast<int>((tx(xs[i]) - lo) / width) : 0;
        b = std::clamp(b, 0, bins - 1);
        ax[static_cast<std::size_t>(b)].add(xs[i]);
        ay[static_cast<std::size_t>(b)].add(ys[i]);
    }
    std::vector<BinRow> rows;
    for (int b = 0; b < bins; ++b) {
        BinRow r;
        const double c = lo + (b + 0.5) * width;
        r.center = log_x ? std::exp(c) : c;
        r.count = long(ax[static_cast<std::size_t>(b)].count());
        r.mean_x = r.count ? ax[static_cast<std::size_t>(b)].mean() : std::numeric_limits<double>::quiet_NaN();
        r.mean_y = r.count ? ay[static_cast<std::size_t>(b)].mean() : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(r);
    }
    return rows;
}

NProfile n_profile(const BranchStates& b, const std::vector<double>* purity) {
    require(b.count() >= 1, ErrorKind::Invalid, "empty branch set");
    require(!purity || purity->size() == std::size_t(b.count()), ErrorKind::Invalid, "purity list misaligned");
    const long len = long(b.labels[0].length());
    const auto slots = static_cast<std::size_t>(len + 1);
    NProfile p;
    p.counts.assign(slots, 0);
    p.mean_localization.assign(slots, 0.0);
    p.mean_purity.assign(slots, 0.0);
    p.q.assign(slots, 0.0);
    p.q_sector.assign(slots, 0.0);
    std::vector<Accumulator> loc(slots), pur(slots), q(slots);
    bool final_fixed = true;
    for (Eigen::Index i = 0; i < b.count(); ++i) {
        const auto& l = b.labels[static_cast<std::size_t>(i)];
        const auto n = static_cast<std::size_t>(l.ones());
        final_fixed = final_fixed && l.final_bit() == 0;
        ++p.counts[n];
        q[n].add(b.weights[i]);
        if (!b.null[static_cast<std::size_t>(i)]) loc[n].add(localization(b.normalized(i)));
        if (purity && std::isfinite((*purity)[static_cast<std::size_t>(i)])) pur[n].add((*purity)[static_cast<std::size_t>(i)]);
    }
    const long free_bits = final_fixed ? len - 1 : len;
    Accumulator num, den;
    for (std::size_t n = 0; n < slots; ++n) {
        p.mean_localization[n] = loc[n].mean();
        p.mean_purity[n] = pur[n].mean();
        p.q[n] = q[n].sum();
        if (p.counts[n] > 0 && long(n) <= free_bits) {
            const double total = std::exp(log_binomial(free_bits, long(n)));
            p.q_sector[n] = total / double(p.counts[n]) * p.q[n];
            if (double(p.counts[n]) == std::round(total)) p.q_sector[n] = p.q[n];
        }
        num.add(double(n) * p.q_sector[n]);
        den.add(p.q_sector[n]);
    }
    p.n_bar = den.sum() > 0.0 ? num.sum() / den.sum() : 0.0;
    return p;
}

NnHeatmap heatmap_nn(const GramMatrix& g, const std::vector<HistoryLabel>& labels) {
    require(std::size_t(g.size()) == labels.size() && !labels.empty(), ErrorKind::Invalid, "labels misaligned with G");
    const long len = long(labels[0].length());
    const Eigen::Index s = len + 1;
    RMatrix sum = RMatrix::Zero(s, s), cnt = RMatrix::Zero(s, s);
    NnHeatmap h{RMatrix::Zero(s, s), RMatrix::Zero(s, s)};
    for (Eigen::Index j = 0; j < g.size(); ++j)
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (i == j) continue;
            const int a = labels[static_cast<std::size_t>(i)].ones(), b = labels[static_cast<std::size_t>(j)].ones();
            const double v = std::abs(g.entries(i, j));
            sum(a, b) += v;
            cnt(a, b) += 1.0;
            h.g_max(a, b) = std::max(h.g_max(a, b), v);
        }
    for (Eigen::Index j = 0; j < s; ++j)
        for (Eigen::Index i = 0; i < s; ++i)
            if (cnt(i, j) > 0.0) h.g_bar(i, j) = sum(i, j) / cnt(i, j);
    return h;
}

// ---- inhomogeneous histories ---------------------------------------------

CMatrix InhomogeneousFamily::normalized() const {
    CMatrix out = CMatrix::Zero(states.rows(), states.cols());
    for (Eigen::Index n = 0; n < states.cols(); ++n)
        if (weights[n] >= null_threshold(std::size_t(states.cols() - 1))) out.col(n) = states.col(n) / std::sqrt(weights[n]);
    return out;
}

InhomogeneousFamily inhomogeneous_states(const BranchStates& b, long length) {
    require(b.count() >= 1 && long(b.labels[0].length()) == length, ErrorKind::Invalid, "label length mismatch");
    require(length < 62 && b.count() == (Eigen::Index(1) << length), ErrorKind::Invalid,
            "inhomogeneous regrouping needs the full tree over both final outcomes");
    InhomogeneousFamily f;
    f.states = CMatrix::Zero(b.states.rows(), length + 1);
    for (Eigen::Index i = 0; i < b.count(); ++i) f.states.col(b.labels[static_cast<std::size_t>(i)].ones()) += b.states.col(i);
    f.weights = f.states.colwise().squaredNorm().transpose();
    return f;
}

InhomogeneousFamily inhomogeneous_sweep(const Propagator& u, const CVector& psi0, long length) {
    const ModelSpec& m = u.model();
    require(length >= 1, ErrorKind::Invalid, "history length must be positive");
    require(psi0.size() == m.dim(), ErrorKind::InvalidDimension, "initial state dimension mismatch");
    CMatrix phi = CMatrix::Zero(m.dim(), length + 1);
    phi.col(0) = psi0;
    const CMatrix& dense = u.dense();
    for (long k = 1; k <= length; ++k) {
        // Columns 0..k-1 are populated before step k.
        const CMatrix y = dense * phi.leftCols(k);
        phi.leftCols(k + 1).setZero();
        phi.topLeftCorner(m.d0, k) = y.topRows(m.d0);
        phi.block(m.d0, 1, m.d1, k) = y.bottomRows(m.d1);
    }
    InhomogeneousFamily f;
    f.states = std::move(phi);
    f.weights = f.states.colwise().squaredNorm().transpose();
    return f;
}

std::vector<double> g_max_by_n(const InhomogeneousFamily& f) {
    const CMatrix x = f.normalized();
    const CMatrix g = x.adjoint() * x;
    const Eigen::Index s = g.rows();
    std::vector<double> out(static_cast<std::size_t>(s), std::numeric_limits<double>::quiet_NaN());
    const double floor = null_threshold(std::size_t(s - 1));
    for (Eigen::Index n = 0; n < s; ++n) {
        if (f.weights[n] < floor) continue;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < s; ++k)
            if (k != n && f.weights[k] >= floor) worst = std::max(worst, std::abs(g(n, k)));
        out[static_cast<std::size_t>(n)] = worst;
    }
    return out;
}

// ---- Markov and Bernoulli ------------------------------------------------

Eigen::Matrix2d markov_transition(const Propagator& u, long samples, std::uint64_t seed) {
    require(samples >= 1, ErrorKind::Invalid, "need at least one sample");
    const ModelSpec& m = u.model();
    CMatrix proj(m.dim(), 2 * samples);
    RVector norms(2 * samples);
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, "markov", std::uint64_t(s)));
        const CVector psi = haar_state(m.dim(), rng).coefficients();
        for (int x = 0; x < 2; ++x) {
            CVector v = CVector::Zero(m.dim());
            v.segment(m.offset(x), m.block_dim(x)) = psi.segment(m.offset(x), m.block_dim(x));
            norms[2 * s + x] = v.squaredNorm();
            proj.col(2 * s + x) = v;
        }
    }
    const CMatrix moved = u.apply(proj);
    Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
    for (long s = 0; s < samples; ++s)
        for (int x = 0; x < 2; ++x)
            for (int xp = 0; xp < 2; ++xp)
                t(xp, x) += moved.col(2 * s + x).segment(m.offset(xp), m.block_dim(xp)).squaredNorm() / norms[2 * s + x];
    return t / double(samples);
}

std::vector<double> markov_distribution(const Eigen::Matrix2d& t, long length, const Eigen::Vector2d& p0,
                                        double* max_conservation_error) {
    require(length >= 0, ErrorKind::Invalid, "length must be nonnegative");
    require((t.array() >= 0.0).all() && std::abs(t.col(0).sum() - 1.0) <= 1e-10 && std::abs(t.col(1).sum() - 1.0) <= 1e-10,
            ErrorKind::Invalid, "T is not column stochastic");
    require((p0.array() >= 0.0).all() && std::abs(p0.sum() - 1.0) <= 1e-10, ErrorKind::Invalid, "p0 is not a distribution");
    const auto s = static_cast<std::size_t>(length + 1);
    std::vector<double> a(s, 0.0), b(s, 0.0), na(s), nb(s);
    a[0] = p0[0];
    b[0] = p0[1];
    double worst = 0.0;
    for (long k = 0; k < length; ++k) {
        for (std::size_t n = 0; n < s; ++n) {
            na[n] = t(0, 0) * a[n] + t(0, 1) * b[n];
            nb[n] = n > 0 ? t(1, 0) * a[n - 1] + t(1, 1) * b[n - 1] : 0.0;
        }
        a.swap(na);
        b.swap(nb);
        Accumulator total;
        for (std::size_t n = 0; n < s; ++n) total.add(a[n] + b[n]);
        worst = std::max(worst, std::abs(total.sum() - 1.0));
    }
    if (max_conservation_error) *max_conservation_error = worst;
    std::vector<double> p(s);
    for (std::size_t n = 0; n < s; ++n) p[n] = a[n] + b[n];
    return p;
}

std::vector<double> bernoulli_distribution(long length, double p) {
    require(length >= 0, ErrorKind::Invalid, "length must be nonnegative");
    require(p >= 0.0 && p <= 1.0, ErrorKind::Invalid, "p must lie in [0,1]");
    std::vector<double> out(static_cast<std::size_t>(length + 1), 0.0);
    if (p == 0.0 || p == 1.0) {
        out[p == 0.0 ? 0 : static_cast<std::size_t>(length)] = 1.0;
        return out;
    }
    for (long n = 0; n <= length; ++n)
        out[static_cast<std::size_t>(n)] =
            std::exp(log_binomial(length, n) + double(length - n) * std::log1p(-p) + double(n) * std::log(p));
    return out;
}

Eigen::Vector2d stationary_distribution(const Eigen::Matrix2d& t) {
    const double up = t(1, 0), down = t(0, 1);
    require(up + down > 0.0, ErrorKind::Invalid, "T has no unique stationary state");
    return Eigen::Vector2d(down / (up + down), up / (up + down));
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q, const std::vector<bool>& window) {
    require(p.size() == q.size() && p.size() == window.size(), ErrorKind::Invalid, "distribution sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (window[i]) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

double inverse_snr(const GramMatrix& g) {
    const Eigen::Index n = g.size();
    require(n >= 3, ErrorKind::Invalid, "inverse SNR needs N >= 3");
    Accumulator s1;
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) s1.add(std::abs(g.entries(i, j)));
    const double mean = s1.mean();
    require(mean > 0.0, ErrorKind::UndefinedSnr, "off-diagonal magnitudes average to zero");
    Accumulator s2;
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const double d = std::abs(g.entries(i, j)) - mean;
            s2.add(d * d);
        }
    return std::sqrt(s2.mean()) / mean;
}

std::vector<Eigen::Index> subset_filter(const std::vector<double>& values, double fraction, Extreme direction) {
    require(fraction > 0.0 && fraction <= 1.0, ErrorKind::Invalid, "fraction must lie in (0,1]");
    std::vector<Eigen::Index> idx(values.size());
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return direction == Extreme::Lowest ? values[std::size_t(a)] < values[std::size_t(b)]
                                            : values[std::size_t(a)] > values[std::size_t(b)];
    });
    idx.resize(static_cast<std::size_t>(std::floor(fraction * double(values.size()) + 1e-9)));
    std::sort(idx.begin(), idx.end());
    return idx;
}

GramMatrix restrict_gram(const GramMatrix& g, const std::vector<Eigen::Index>& idx) {
    return GramMatrix{g.entries(idx, idx)};
}

}  // namespace decohist
