#include "decohist/model.hpp"

#include <cmath>
#include <set>
#include <string>
#include <unordered_map>

#include <unsupported/Eigen/KroneckerProduct>

#include "decohist/linalg.hpp"
#include "decohist/rng.hpp"

namespace decohist {

// ---- Hamiltonian ---------------------------------------------------------

ModelSpec model_skeleton(long d0, std::uint64_t seed, const ModelOptions& opts) {
    require(d0 >= 2, ErrorKind::InvalidDimension, "D0 must be at least 2");
    ModelSpec m;
    m.d0 = d0;
    m.d1 = opts.d1 > 0 ? opts.d1 : 2 * d0;
    require(m.d1 >= 2, ErrorKind::InvalidDimension, "D1 must be at least 2");
    m.delta_eps = opts.delta_eps;
    m.seed = seed;
    m.diagonal = opts.diagonal;
    const long d = m.dim();
    m.lambda = opts.conserved ? 0.0 : (opts.lambda >= 0.0 ? opts.lambda : m.delta_eps / (15.0 * std::sqrt(double(d))));

    m.diag.resize(d);
    Rng diag_rng(derive_seed(seed, "diagonal"));
    for (int x = 0; x < 2; ++x) {
        const long n = m.block_dim(x), off = m.offset(x);
        for (long i = 0; i < n; ++i) {
            m.diag[off + i] = opts.diagonal == DiagonalLayout::EvenlySpaced
                                  ? m.delta_eps * double(i) / double(n - 1)
                                  : m.delta_eps * diag_rng.uniform();
        }
    }
    Rng sign_rng(derive_seed(seed, "coupling"));
    m.signs.resize(m.d0, m.d1);
    std::uint64_t word = 0;
    int left = 0;
    for (long i = 0; i < m.d0; ++i)
        for (long j = 0; j < m.d1; ++j) {
            if (left == 0) {
                word = sign_rng.bits();
                left = 64;
            }
            m.signs(i, j) = (word & 1) ? -1 : 1;
            word >>= 1;
            --left;
        }
    return m;
}

RMatrix ModelSpec::hamiltonian() const {
    const long d = dim();
    RMatrix h = RMatrix::Zero(d, d);
    h.diagonal() = diag;
    h.block(0, d0, d0, d1) = lambda * signs.cast<double>();
    h.block(d0, 0, d1, d0) = h.block(0, d0, d0, d1).transpose();
    return h;
}

void diagonalize(ModelSpec& m) {
    SymmetricEigen e = eigh_real(m.hamiltonian());
    m.energies = std::move(e.values);
    m.eigenvectors = std::move(e.vectors);
}

ModelSpec build_model(long d0, std::uint64_t seed, const ModelOptions& opts) {
    ModelSpec m = model_skeleton(d0, seed, opts);
    diagonalize(m);
    return m;
}

double tau(const ModelSpec& m) {
    require(m.lambda > 0.0, ErrorKind::Invalid, "tau undefined without coupling");
    return m.delta_eps / (2.0 * M_PI * m.lambda * m.lambda * double(m.dim()));
}

double resolve_dt(const ModelSpec& m, std::string_view preset) {
    if (preset == "eq") return 8.0 * tau(m);
    if (preset == "neq") return tau(m) / 2.0;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(std::string(preset), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == preset.size() && used > 0, ErrorKind::InvalidConfig, "dt must be eq, neq or a number");
    return v;
}

// ---- propagation ---------------------------------------------------------

namespace {

CMatrix evolve_columns(const ModelSpec& m, const CMatrix& psi, double t) {
    const RMatrix& v = m.eigenvectors;
    RMatrix cr = v.transpose() * psi.real();
    RMatrix ci = v.transpose() * psi.imag();
    for (Eigen::Index k = 0; k < cr.rows(); ++k) {
        const double c = std::cos(m.energies[k] * t), s = -std::sin(m.energies[k] * t);
        for (Eigen::Index j = 0; j < cr.cols(); ++j) {
            const double re = cr(k, j), im = ci(k, j);
            cr(k, j) = c * re - s * im;
            ci(k, j) = s * re + c * im;
        }
    }
    CMatrix out(psi.rows(), psi.cols());
    out.real() = v * cr;
    out.imag() = v * ci;
    return out;
}

}  // namespace

Propagator::Propagator(const ModelSpec& model, double dt) : model_(&model), dt_(dt) {
    require(model.energies.size() == model.dim(), ErrorKind::Invalid, "model has no eigendecomposition");
}

CVector Propagator::apply(const CVector& psi) const { return evolve_columns(*model_, psi, dt_).col(0); }

CMatrix Propagator::apply(const CMatrix& psi) const { return evolve_columns(*model_, psi, dt_); }

const CMatrix& Propagator::dense() const {
    if (dense_.size() == 0) {
        const RMatrix& v = model_->eigenvectors;
        const RVector c = (model_->energies * dt_).array().cos();
        const RVector s = (model_->energies * dt_).array().sin();
        dense_.resize(v.rows(), v.cols());
        RMatrix tmp = v * c.asDiagonal();
        dense_.real() = tmp * v.transpose();
        tmp = v * (-s).asDiagonal();
        dense_.imag() = tmp * v.transpose();
    }
    return dense_;
}

CVector evolve(const ModelSpec& m, const CVector& psi, double t) { return evolve_columns(m, psi, t).col(0); }

InitialKind parse_initial_kind(std::string_view s) {
    if (s == "haar-in-H1") return InitialKind::HaarInH1;
    if (s == "random-eigenstate") return InitialKind::RandomEigenstate;
    if (s == "haar-full") return InitialKind::HaarFull;
    throw Error(ErrorKind::InvalidConfig, "unknown initial state kind " + std::string(s));
}

CVector initial_state(const ModelSpec& m, InitialKind kind, std::uint64_t seed) {
    Rng rng(seed);
    CVector psi = CVector::Zero(m.dim());
    switch (kind) {
        case InitialKind::HaarInH1: psi.segment(m.d0, m.d1) = haar_state(m.d1, rng).coefficients(); break;
        case InitialKind::RandomEigenstate:
            psi = m.eigenvectors.col(static_cast<Eigen::Index>(rng.index(std::uint64_t(m.dim())))).cast<cplx>();
            break;
        case InitialKind::HaarFull: psi = haar_state(m.dim(), rng).coefficients(); break;
    }
    return psi;
}

ExpectationTable evolve_expectations(const ModelSpec& m, const CVector& psi0, const std::vector<double>& times) {
    ExpectationTable t;
    t.times = times;
    const RMatrix& v = m.eigenvectors;
    const RVector c0r = v.transpose() * psi0.real();
    const RVector c0i = v.transpose() * psi0.imag();
    for (double time : times) {
        RVector cr(c0r.size()), ci(c0r.size());
        for (Eigen::Index k = 0; k < c0r.size(); ++k) {
            const double c = std::cos(m.energies[k] * time), s = -std::sin(m.energies[k] * time);
            cr[k] = c * c0r[k] - s * c0i[k];
            ci[k] = s * c0r[k] + c * c0i[k];
        }
        const RVector re = v * cr, im = v * ci;
        const double p0 = re.head(m.d0).squaredNorm() + im.head(m.d0).squaredNorm();
        const double p1 = re.tail(m.d1).squaredNorm() + im.tail(m.d1).squaredNorm();
        t.p0.push_back(p0);
        t.p1.push_back(p1);
    }
    return t;
}

// ---- labels and sets -----------------------------------------------------

int HistoryLabel::ones() const {
    int n = 0;
    for (auto b : bits) n += b;
    return n;
}

std::string HistoryLabel::str() const {
    std::string s;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) s.push_back(char('0' + *it));
    return s;
}

HistorySet full_tree(long length, bool final_fixed) {
    require(length >= 1, ErrorKind::Invalid, "history length must be positive");
    const long free_bits = final_fixed ? length - 1 : length;
    require(free_bits <= 24, ErrorKind::TooLarge, "full tree with 2^" + std::to_string(free_bits) + " labels (label count)");
    HistorySet set;
    set.l_max = length;
    set.provenance = SetProvenance::FullTree;
    set.final_fixed = final_fixed;
    const std::uint64_t count = std::uint64_t(1) << free_bits;
    set.labels.reserve(count);
    for (std::uint64_t code = 0; code < count; ++code) {
        HistoryLabel l;
        l.bits.resize(static_cast<std::size_t>(length), 0);
        for (long k = 0; k < free_bits; ++k) l.bits[static_cast<std::size_t>(k)] = std::uint8_t((code >> k) & 1);
        set.labels.push_back(std::move(l));
    }
    return set;
}

HistorySet sample_history_set(long l_max, long count, std::uint64_t seed) {
    require(l_max >= 1, ErrorKind::Invalid, "history length must be positive");
    require(count >= 1, ErrorKind::Invalid, "count must be positive");
    if (l_max - 1 < 62)
        require(count <= (long(1) << (l_max - 1)), ErrorKind::Invalid,
                "count exceeds the 2^(L-1) labels ending in 0");
    HistorySet set;
    set.l_max = l_max;
    set.provenance = SetProvenance::StratifiedSample;
    set.seed = seed;
    set.final_fixed = true;
    std::set<std::vector<std::uint8_t>> seen;
    auto add = [&](HistoryLabel l) {
        if (seen.insert(l.bits).second) set.labels.push_back(std::move(l));
    };
    const auto len = static_cast<std::size_t>(l_max);
    add(HistoryLabel{std::vector<std::uint8_t>(len, 0)});
    HistoryLabel ones{std::vector<std::uint8_t>(len, 1)};
    ones.bits.back() = 0;
    if (long(set.labels.size()) < count) add(ones);

    Rng rng(seed);
    std::vector<std::size_t> pos(len - 1);
    const long max_attempts = 1000 * count + 100000;
    for (long attempt = 0; long(set.labels.size()) < count; ++attempt) {
        require(attempt < max_attempts, ErrorKind::Invalid, "stratified sampling could not reach the requested count");
        const auto n = static_cast<std::size_t>(rng.index(std::uint64_t(l_max)));
        for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
        HistoryLabel l{std::vector<std::uint8_t>(len, 0)};
        for (std::size_t i = 0; i < n; ++i) {
            auto r = i + static_cast<std::size_t>(rng.index(pos.size() - i));
            std::swap(pos[i], pos[r]);
            l.bits[pos[i]] = 1;
        }
        add(std::move(l));
    }
    return set;
}

HistorySet truncate(const HistorySet& set, long length) {
    require(length >= 1 && length <= set.l_max, ErrorKind::Invalid, "truncation length out of range");
    HistorySet out = set;
    out.l_max = length;
    out.labels.clear();
    std::set<std::vector<std::uint8_t>> seen;
    for (const auto& l : set.labels) {
        HistoryLabel t{std::vector<std::uint8_t>(l.bits.begin(), l.bits.begin() + length)};
        t.bits.back() = 0;
        if (seen.insert(t.bits).second) out.labels.push_back(std::move(t));
    }
    if (set.provenance == SetProvenance::FullTree) out.final_fixed = true;
    return out;
}

// ---- branch states -------------------------------------------------------

CVector BranchStates::normalized(Eigen::Index i) const {
    require(!null[static_cast<std::size_t>(i)], ErrorKind::InvalidBranch, "null history has no normalized state");
    return states.col(i) / std::sqrt(weights[i]);
}

std::vector<Eigen::Index> BranchStates::non_null() const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < count(); ++i)
        if (!null[static_cast<std::size_t>(i)]) idx.push_back(i);
    return idx;
}

BranchStates BranchStates::select(const std::vector<Eigen::Index>& idx) const {
    BranchStates out;
    out.states.resize(states.rows(), static_cast<Eigen::Index>(idx.size()));
    out.weights.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::Index i = idx[k];
        out.labels.push_back(labels[static_cast<std::size_t>(i)]);
        out.states.col(Eigen::Index(k)) = states.col(i);
        out.weights[Eigen::Index(k)] = weights[i];
        out.null.push_back(null[static_cast<std::size_t>(i)]);
    }
    return out;
}

BranchStates branch_states(const Propagator& u, const CVector& psi0, const HistorySet& set) {
    const ModelSpec& m = u.model();
    require(!set.labels.empty(), ErrorKind::Invalid, "empty history set");
    require(psi0.size() == m.dim(), ErrorKind::InvalidDimension, "initial state dimension mismatch");
    const std::size_t n = set.labels.size();
    const std::size_t len = set.labels[0].length();
    for (const auto& l : set.labels)
        require(l.length() == len && len >= 1, ErrorKind::Invalid, "labels must share one positive length");

    struct Node {
        int sub;
        Eigen::Index col;
    };
    // Level 1: project U|ψ0⟩.
    const CVector phi = u.apply(psi0);
    CMatrix s[2];
    std::vector<Node> nodes;
    std::vector<int> node_of(n, -1);
    {
        int id[2] = {-1, -1};
        for (std::size_t i = 0; i < n; ++i) {
            const int b = set.labels[i].bits[0];
            if (id[b] < 0) {
                id[b] = static_cast<int>(nodes.size());
                nodes.push_back({b, 0});
            }
            node_of[i] = id[b];
        }
        for (int b = 0; b < 2; ++b)
            if (id[b] >= 0) s[b] = phi.segment(m.offset(b), m.block_dim(b));
    }

    for (std::size_t k = 1; k < len; ++k) {
        std::unordered_map<std::int64_t, int> index;
        std::vector<Node> next;
        std::vector<Eigen::Index> group[2][2];
        std::vector<std::pair<int, int>> child_group;  // per new node: (a, b)
        std::vector<Eigen::Index> child_slot;
        for (std::size_t i = 0; i < n; ++i) {
            const int b = set.labels[i].bits[k];
            const std::int64_t key = std::int64_t(node_of[i]) * 2 + b;
            auto it = index.find(key);
            if (it == index.end()) {
                const Node& p = nodes[static_cast<std::size_t>(node_of[i])];
                const int id = static_cast<int>(next.size());
                it = index.emplace(key, id).first;
                group[p.sub][b].push_back(p.col);
                next.push_back({b, -1});
                child_group.push_back({p.sub, b});
                child_slot.push_back(static_cast<Eigen::Index>(group[p.sub][b].size()) - 1);
            }
            node_of[i] = it->second;
        }
        // New columns per target subspace: group (0,b) first, then (1,b).
        CMatrix t[2];
        Eigen::Index base[2][2] = {{0, 0}, {0, 0}};
        for (int b = 0; b < 2; ++b) {
            const Eigen::Index cols = Eigen::Index(group[0][b].size() + group[1][b].size());
            if (cols == 0) continue;
            t[b].resize(m.block_dim(b), cols);
            Eigen::Index at = 0;
            for (int a = 0; a < 2; ++a) {
                base[a][b] = at;
                if (group[a][b].empty()) continue;
                const Eigen::Index w = Eigen::Index(group[a][b].size());
                t[b].middleCols(at, w).noalias() = u.block(b, a) * s[a](Eigen::all, group[a][b]);
                at += w;
            }
        }
        for (std::size_t c = 0; c < next.size(); ++c) {
            const auto [a, b] = child_group[c];
            next[c].col = base[a][b] + child_slot[c];
        }
        nodes = std::move(next);
        s[0] = std::move(t[0]);
        s[1] = std::move(t[1]);
    }

    BranchStates out;
    out.labels = set.labels;
    out.states = CMatrix::Zero(m.dim(), Eigen::Index(n));
    out.weights.resize(Eigen::Index(n));
    out.null.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Node& nd = nodes[static_cast<std::size_t>(node_of[i])];
        out.states.col(Eigen::Index(i)).segment(m.offset(nd.sub), m.block_dim(nd.sub)) = s[nd.sub].col(nd.col);
        const double w = out.states.col(Eigen::Index(i)).squaredNorm();
        out.weights[Eigen::Index(i)] = w;
        out.null[i] = w < null_threshold(len);
    }

    const auto free_bits = set.final_fixed ? len - 1 : len;
    const bool complete = free_bits < 63 && n == (std::size_t(1) << free_bits);
    if (set.provenance == SetProvenance::FullTree && complete) {
        CVector global = evolve(m, psi0, u.dt() * double(len));
        if (set.final_fixed) global.segment(m.d0, m.d1).setZero();
        const CVector sum = out.states.rowwise().sum();
        out.telescoping_residual = (sum - global).norm();
        require(out.telescoping_residual <= 1e-8 * std::max(1.0, psi0.norm()), ErrorKind::NumericFailure,
                "branch sum does not telescope, residual " + std::to_string(out.telescoping_residual));
    }
    return out;
}

GramMatrix ndf(const BranchStates& b) {
    require(b.count() >= 1, ErrorKind::Invalid, "no branches");
    CMatrix x(b.states.rows(), b.count());
    for (Eigen::Index i = 0; i < b.count(); ++i) {
        require(!b.null[static_cast<std::size_t>(i)], ErrorKind::InvalidBranch,
                "null history " + b.labels[static_cast<std::size_t>(i)].str() + " in NDF input");
        x.col(i) = b.states.col(i) / std::sqrt(b.weights[i]);
    }
    return gram_matrix(x);
}

bool dhc_check(const GramMatrix& g, double tol) {
    for (Eigen::Index j = 0; j < g.size(); ++j)
        for (Eigen::Index i = 0; i < g.size(); ++i)
            if (i != j && std::abs(g.entries(i, j)) > tol) return false;
    return true;
}

// ---- dense history problems ----------------------------------------------

CVector history_state(const DenseHistoryProblem& p, const std::vector<int>& label) {
    require(label.size() == p.steps.size(), ErrorKind::Invalid, "label length differs from step count");
    CVector psi = p.psi0;
    for (std::size_t k = 0; k < label.size(); ++k) {
        require(label[k] >= 0 && std::size_t(label[k]) < p.projectors.size(), ErrorKind::Invalid, "label outcome out of range");
        psi = p.projectors[static_cast<std::size_t>(label[k])] * (p.steps[k] * psi);
    }
    return psi;
}

CVector final_state(const DenseHistoryProblem& p) {
    CVector psi = p.psi0;
    for (const auto& w : p.steps) psi = w * psi;
    return psi;
}

double max_commutator(const DenseHistoryProblem& p) {
    const std::size_t len = p.steps.size();
    const Eigen::Index d = p.psi0.size();
    // a[j] = W_L ⋯ W_{j+1}, so the projection after step j sits at A_j Π A_j†.
    std::vector<CMatrix> a(len);
    a[len - 1] = CMatrix::Identity(d, d);
    for (std::size_t j = len - 1; j-- > 0;) a[j] = a[j + 1] * p.steps[j + 1];
    std::vector<std::vector<CMatrix>> h(len);
    for (std::size_t j = 0; j < len; ++j)
        for (const auto& proj : p.projectors) h[j].push_back(a[j] * proj * a[j].adjoint());
    double worst = 0.0;
    for (std::size_t j = 0; j < len; ++j)
        for (std::size_t k = j + 1; k < len; ++k)
            for (const auto& pj : h[j])
                for (const auto& pk : h[k]) worst = std::max(worst, max_abs(pj * pk - pk * pj));
    return worst;
}

bool commutativity_check(const DenseHistoryProblem& p, double tol) { return max_commutator(p) <= tol; }

DenseHistoryProblem model_problem(const ModelSpec& m, double dt, long length, const CVector& psi0) {
    require(length >= 1, ErrorKind::Invalid, "history length must be positive");
    require(m.dim() <= 2048, ErrorKind::TooLarge, "dense history problem beyond D = 2048 (memory)");
    Propagator u(m, dt);
    DenseHistoryProblem p;
    p.steps.assign(static_cast<std::size_t>(length), u.dense());
    for (int x = 0; x < 2; ++x) {
        CMatrix proj = CMatrix::Zero(m.dim(), m.dim());
        proj.diagonal().segment(m.offset(x), m.block_dim(x)).setOnes();
        p.projectors.push_back(std::move(proj));
    }
    p.psi0 = psi0;
    return p;
}

bool commutativity_check(const ModelSpec& m, double dt, long length, double tol) {
    return commutativity_check(model_problem(m, dt, length, CVector::Zero(m.dim())), tol);
}

namespace {

CMatrix haar_unitary(long n, Rng& rng) {
    CMatrix z = gaussian_columns(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (long i = 0; i < n; ++i) {
        const cplx d = r(i, i);
        if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

long ipow(long b, long e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

}  // namespace

DilationModel dilation_model(long system_dim, long m, long length, std::uint64_t seed, bool commuting_unitary) {
    require(m >= 2, ErrorKind::Invalid, "ancilla dimension must be at least 2");
    require(length >= 1, ErrorKind::Invalid, "history length must be positive");
    require(system_dim >= m, ErrorKind::InvalidDimension, "system dimension below outcome count");
    double total = double(system_dim);
    for (long k = 0; k < length; ++k) total *= double(m);
    require(total <= double(kDilationCap), ErrorKind::TooLarge,
            "composite dimension " + std::to_string(long(total)) + " above cap (memory)");

    DilationModel d;
    d.system_dim = system_dim;
    d.m = m;
    d.length = length;
    Rng rng(seed);
    if (commuting_unitary) {
        d.system_unitary = CMatrix::Zero(system_dim, system_dim);
        for (long i = 0; i < system_dim; ++i) {
            const double ph = 2.0 * M_PI * rng.uniform();
            d.system_unitary(i, i) = cplx(std::cos(ph), std::sin(ph));
        }
    } else {
        d.system_unitary = haar_unitary(system_dim, rng);
    }
    std::vector<long> outcome(static_cast<std::size_t>(system_dim));
    for (long x = 0; x < m; ++x) d.system_projectors.push_back(CMatrix::Zero(system_dim, system_dim));
    for (long i = 0; i < system_dim; ++i) {
        outcome[static_cast<std::size_t>(i)] = i * m / system_dim;
        d.system_projectors[static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)])](i, i) = 1.0;
    }
    d.system_psi0 = haar_state(system_dim, rng).coefficients();

    const long anc = ipow(m, length), dim = system_dim * anc;
    const CMatrix us_full = Eigen::kroneckerProduct(d.system_unitary, CMatrix::Identity(anc, anc));
    for (long k = 0; k < length; ++k) {
        // V_k shifts ancilla k (digit weight m^{L-1-k}) by the system outcome.
        const long weight = ipow(m, length - 1 - k);
        CMatrix v = CMatrix::Zero(dim, dim);
        for (long s = 0; s < system_dim; ++s)
            for (long a = 0; a < anc; ++a) {
                const long digit = (a / weight) % m;
                const long shifted = a + (((digit + outcome[static_cast<std::size_t>(s)]) % m) - digit) * weight;
                v(s * anc + shifted, s * anc + a) = 1.0;
            }
        d.problem.steps.push_back(v * us_full);
    }
    for (long x = 0; x < m; ++x)
        d.problem.projectors.push_back(
            Eigen::kroneckerProduct(d.system_projectors[static_cast<std::size_t>(x)], CMatrix::Identity(anc, anc)));
    d.problem.psi0 = CVector::Zero(dim);
    for (long s = 0; s < system_dim; ++s) d.problem.psi0[s * anc] = d.system_psi0[s];
    return d;
}

CVector system_history_state(const DilationModel& d, const std::vector<int>& label) {
    require(long(label.size()) == d.length, ErrorKind::Invalid, "label length differs from step count");
    CVector psi = d.system_psi0;
    for (int x : label) psi = d.system_projectors[static_cast<std::size_t>(x)] * (d.system_unitary * psi);
    return psi;
}

CVector record_component(const DilationModel& d, const CVector& composite, const std::vector<int>& label) {
    const long anc = ipow(d.m, d.length);
    long code = 0;
    for (int x : label) code = code * d.m + x;
    CVector out(d.system_dim);
    for (long s = 0; s < d.system_dim; ++s) out[s] = composite[s * anc + code];
    return out;
}

}  // namespace decohist
