#include "decohist/runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <exception>
#include <filesystem>
#include <limits>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "decohist/linalg.hpp"
#include "presets.hpp"

extern "C" void openblas_set_num_threads(int);

namespace decohist {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    require(!s.empty() && end == s.c_str() + s.size(), ErrorKind::InvalidResult, "bad number '" + s + "' in " + where);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

Json number(double v) {
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    return v;
}

// Coerces an override to the type of its default.
Json coerce(const std::string& key, const Json& def, const Json& v) {
    const auto bad = [&](const std::string& why) { return Error(ErrorKind::InvalidConfig, key + ": " + why); };
    if (def.is_boolean()) {
        if (v.is_boolean()) return v;
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "true" || s == "1") return true;
            if (s == "false" || s == "0") return false;
        }
        throw bad("expected a boolean");
    }
    if (def.is_number()) {
        if (v.is_number()) return number(v.get<double>());
        if (v.is_string()) {
            const auto g = parse_grid(v);
            if (g.size() == 1) return number(g[0]);
        }
        throw bad("expected a number");
    }
    if (def.is_string()) {
        if (v.is_string()) return v;
        throw bad("expected a string");
    }
    if (def.is_array() && !def.empty() && def.front().is_string()) {
        Json out = Json::array();
        if (v.is_string()) {
            for (const auto& s : split(v.get<std::string>(), ','))
                if (!s.empty()) out.push_back(s);
        } else if (v.is_array()) {
            for (const auto& s : v) {
                if (!s.is_string()) throw bad("expected a list of names");
                out.push_back(s);
            }
        } else {
            throw bad("expected a list of names");
        }
        if (out.empty()) throw bad("list is empty");
        return out;
    }
    if (def.is_array()) {
        const auto g = parse_grid(v);
        if (g.empty()) throw bad("list is empty");
        Json out = Json::array();
        for (double x : g) out.push_back(number(x));
        return out;
    }
    throw bad("unsupported parameter type");
}

ProgressSink& sink() {
    static ProgressSink s;
    return s;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

// ---- binary I/O for checkpoints ---------------------------------------------

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    require(bool(is), ErrorKind::InvalidResult, "checkpoint " + path + " is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

constexpr char kMagic[8] = {'D', 'H', 'E', 'I', 'G', 'v', '0', '1'};

// H v without forming H.
RVector apply_h(const ModelSpec& m, const RVector& v) {
    RVector out = m.diag.cwiseProduct(v);
    const RMatrix s = m.signs.cast<double>();
    out.head(m.d0) += m.lambda * (s * v.tail(m.d1));
    out.tail(m.d1) += m.lambda * (s.transpose() * v.head(m.d0));
    return out;
}

}  // namespace

// ---- ResultTable -----------------------------------------------------------

void ResultTable::add_column(const std::string& name, std::vector<double> values) {
    require(!has_column(name), ErrorKind::InvalidResult, "duplicate column " + name);
    require(name.find_first_of(",\n\r") == std::string::npos && !name.empty(), ErrorKind::InvalidResult,
            "bad column name '" + name + "'");
    require(columns.empty() || values.size() == rows(), ErrorKind::InvalidResult,
            "column " + name + " has " + std::to_string(values.size()) + " rows, expected " + std::to_string(rows()));
    names.push_back(name);
    columns.push_back(std::move(values));
}

bool ResultTable::has_column(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& ResultTable::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), ErrorKind::InvalidResult, "missing column " + name);
    return columns[std::size_t(it - names.begin())];
}

void ResultTable::validate() const {
    require(names.size() == columns.size(), ErrorKind::InvalidResult, "column names and data disagree");
    require(!names.empty(), ErrorKind::InvalidResult, "table has no columns");
    for (std::size_t i = 0; i < columns.size(); ++i)
        require(columns[i].size() == rows(), ErrorKind::InvalidResult, "ragged column " + names[i]);
    require(metadata.is_object() && summary.is_object(), ErrorKind::InvalidResult, "metadata and summary must be objects");
}

// ---- presets and configuration ----------------------------------------------

const std::vector<PresetInfo>& list_presets() {
    static const std::vector<PresetInfo> out = [] {
        std::vector<PresetInfo> v;
        for (const auto& e : detail::preset_registry()) v.push_back(e.info);
        return v;
    }();
    return out;
}

const PresetInfo& find_preset(const std::string& name) {
    for (const auto& p : list_presets())
        if (p.name == name) return p;
    throw Error(ErrorKind::InvalidConfig, "unknown experiment '" + name + "'");
}

Json resolve_config(const ExperimentConfig& config) {
    const PresetInfo& p = find_preset(config.experiment);
    require(config.params.is_object(), ErrorKind::InvalidConfig, "parameters must be an object");
    require(config.threads >= 1, ErrorKind::InvalidConfig, "threads must be at least 1");
    Json params = p.defaults;
    for (auto it = config.params.begin(); it != config.params.end(); ++it) {
        require(params.contains(it.key()), ErrorKind::InvalidConfig,
                "unknown parameter '" + it.key() + "' for " + p.name);
        params[it.key()] = coerce(it.key(), p.defaults[it.key()], it.value());
    }
    return Json{{"experiment", p.name}, {"seed", config.seed}, {"params", params}};
}

std::uint64_t config_hash(const Json& resolved) { return fnv1a(resolved.dump()); }

ResultTable run(const ExperimentConfig& config) {
    openblas_set_num_threads(1);
    const Json resolved = resolve_config(config);
    const auto& registry = detail::preset_registry();
    const auto it = std::find_if(registry.begin(), registry.end(),
                                 [&](const detail::PresetEntry& e) { return e.info.name == config.experiment; });
    detail::RunContext ctx{resolved["params"], config.seed, config.threads};
    const auto start = std::chrono::steady_clock::now();
    ResultTable t = it->fn(ctx);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(resolved)));
    t.metadata = Json{{"experiment", config.experiment},
                      {"figure", it->info.figure},
                      {"seed", config.seed},
                      {"config", resolved["params"]},
                      {"config_hash", hash},
                      {"tool_version", DECOHIST_VERSION},
                      {"timestamp", stamp},
                      {"elapsed_seconds", elapsed}};
    t.validate();
    if (!config.out.empty()) write_result(t, config.out);
    return t;
}

// ---- CSV ---------------------------------------------------------------------

std::string csv_body(const ResultTable& t) {
    t.validate();
    std::string out;
    for (std::size_t j = 0; j < t.names.size(); ++j) out += (j ? "," : "") + t.names[j];
    out += '\n';
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            if (j) out += ',';
            out += format_double(t.columns[j][i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_csv(const ResultTable& t) { return "# " + t.metadata.dump() + "\n" + csv_body(t); }

std::string sidecar_path(const std::string& csv_path) {
    std::filesystem::path p(csv_path);
    if (p.extension() == ".csv") return p.replace_extension(".json").string();
    return csv_path + ".json";
}

void write_result(const ResultTable& t, const std::string& csv_path) {
    const auto parent = std::filesystem::path(csv_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    {
        std::ofstream f(csv_path, std::ios::binary);
        require(bool(f), ErrorKind::InvalidConfig, "cannot write " + csv_path);
        f << to_csv(t);
    }
    std::ofstream j(sidecar_path(csv_path), std::ios::binary);
    require(bool(j), ErrorKind::InvalidConfig, "cannot write " + sidecar_path(csv_path));
    j << Json{{"metadata", t.metadata}, {"summary", t.summary}}.dump(2) << '\n';
}

ResultTable read_result(const std::string& csv_path) {
    std::ifstream f(csv_path, std::ios::binary);
    require(bool(f), ErrorKind::InvalidResult, "cannot read " + csv_path);
    ResultTable t;
    std::string line;
    require(bool(std::getline(f, line)), ErrorKind::InvalidResult, csv_path + " is empty");
    if (line.rfind("# ", 0) == 0) {
        try {
            t.metadata = Json::parse(line.substr(2));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::InvalidResult, "bad metadata line in " + csv_path + ": " + e.what());
        }
        require(bool(std::getline(f, line)), ErrorKind::InvalidResult, csv_path + " has no header");
    }
    const auto header = split(line, ',');
    std::vector<std::vector<double>> cols(header.size());
    std::size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        ++row;
        const auto cells = split(line, ',');
        require(cells.size() == header.size(), ErrorKind::InvalidResult,
                csv_path + " row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
        for (std::size_t j = 0; j < cells.size(); ++j) cols[j].push_back(parse_double(cells[j], csv_path));
    }
    for (std::size_t j = 0; j < header.size(); ++j) t.add_column(header[j], std::move(cols[j]));
    const std::string side = sidecar_path(csv_path);
    if (std::filesystem::exists(side)) {
        std::ifstream s(side);
        try {
            const Json j = Json::parse(s);
            if (j.contains("summary")) t.summary = j["summary"];
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::InvalidResult, "bad sidecar " + side + ": " + e.what());
        }
    }
    t.validate();
    return t;
}

// ---- verify --------------------------------------------------------------------

bool VerifyReport::pass() const {
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

namespace {

double as_number(const Json& v, const std::string& what) {
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    require(v.is_number(), ErrorKind::InvalidResult, what + " is not a number");
    return v.get<double>();
}

// Values named by a criterion: a column (optionally filtered by "where" and
// offset by a "reference" column) or a dotted summary path. Arrays in the summary contribute every element.
std::vector<double> select_values(const ResultTable& t, const Json& c) {
    std::vector<double> out;
    if (c.contains("column")) {
        const std::string name = c["column"].get<std::string>();
        const auto& col = t.column(name);
        std::vector<bool> keep(col.size(), true);
        if (c.contains("where"))
            for (auto it = c["where"].begin(); it != c["where"].end(); ++it) {
                const auto& w = t.column(it.key());
                const double target = it.value().get<double>();
                for (std::size_t i = 0; i < w.size(); ++i)
                    keep[i] = keep[i] && std::abs(w[i] - target) <= 1e-9 * std::max(1.0, std::abs(target));
            }
        const std::vector<double>* ref = c.contains("reference") ? &t.column(c["reference"].get<std::string>()) : nullptr;
        for (std::size_t i = 0; i < col.size(); ++i)
            if (keep[i]) out.push_back(ref ? col[i] - (*ref)[i] : col[i]);
        require(!out.empty(), ErrorKind::InvalidResult, "criterion selects no rows of " + name);
    } else if (c.contains("summary")) {
        const std::string path = c["summary"].get<std::string>();
        const Json* node = &t.summary;
        for (const auto& part : split(path, '.')) {
            require(node->is_object() && node->contains(part), ErrorKind::InvalidResult, "missing summary entry " + path);
            node = &(*node)[part];
        }
        if (node->is_array())
            for (const auto& x : *node) out.push_back(as_number(x, path));
        else
            out.push_back(as_number(*node, path));
    } else {
        throw Error(ErrorKind::InvalidConfig, "criterion needs a column or a summary entry");
    }
    const std::string reduce = c.value("reduce", "all");
    if (reduce == "all") return out;
    double r = out.front();
    if (reduce == "max")
        for (double v : out) r = std::isnan(v) || std::isnan(r) ? std::numeric_limits<double>::quiet_NaN() : std::max(r, v);
    else if (reduce == "min")
        for (double v : out) r = std::isnan(v) || std::isnan(r) ? std::numeric_limits<double>::quiet_NaN() : std::min(r, v);
    else if (reduce == "mean") {
        Accumulator a;
        for (double v : out) a.add(v);
        r = a.mean();
    } else if (reduce == "last")
        r = out.back();
    else
        throw Error(ErrorKind::InvalidConfig, "unknown reduce '" + reduce + "'");
    return {r};
}

}  // namespace

VerifyReport verify(const ResultTable& table, const Json& criteria) {
    require(criteria.contains("criteria") && criteria["criteria"].is_array(), ErrorKind::InvalidConfig,
            "criteria file needs a \"criteria\" array");
    VerifyReport report;
    for (const auto& c : criteria["criteria"]) {
        CriterionResult r;
        r.name = c.value("name", "unnamed");
        const std::string op = c.value("op", "");
        const auto values = select_values(table, c);
        bool ok = true;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double v : values) {
            bool good = false;
            double x = v;
            if (op == "abs_diff_le") {
                x = std::abs(v - c.at("target").get<double>());
                good = x <= c.at("tol").get<double>();
            } else if (op == "le") {
                good = v <= c.at("value").get<double>();
            } else if (op == "ge") {
                good = v >= c.at("value").get<double>();
            } else if (op == "in_range") {
                good = v >= c.at("lo").get<double>() && v <= c.at("hi").get<double>();
            } else {
                throw Error(ErrorKind::InvalidConfig, "unknown op '" + op + "' in " + r.name);
            }
            ok = ok && good;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            if (std::isnan(x)) lo = hi = x;
        }
        r.pass = ok;
        r.detail = op + " over " + std::to_string(values.size()) + " value(s), " +
                   (op == "abs_diff_le" ? "max deviation " + format_double(hi)
                                        : "range [" + format_double(lo) + ", " + format_double(hi) + "]");
        report.results.push_back(std::move(r));
    }
    return report;
}

VerifyReport verify(const std::string& result_path, const std::string& criteria_path) {
    std::ifstream f(criteria_path);
    require(bool(f), ErrorKind::InvalidConfig, "cannot read " + criteria_path);
    Json c;
    try {
        c = Json::parse(f);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "bad criteria file " + criteria_path + ": " + e.what());
    }
    return verify(read_result(result_path), c);
}

// ---- checkpoints -------------------------------------------------------------

void save_checkpoint(const ModelSpec& m, bool conserved, const std::string& path) {
    require(m.energies.size() == m.dim() && m.eigenvectors.rows() == m.dim(), ErrorKind::Invalid,
            "model is not diagonalized");
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        require(bool(f), ErrorKind::InvalidConfig, "cannot write " + tmp);
        f.write(kMagic, sizeof kMagic);
        put<std::uint64_t>(f, std::uint64_t(m.d0));
        put<std::uint64_t>(f, std::uint64_t(m.d1));
        put<std::uint64_t>(f, m.seed);
        put<double>(f, m.delta_eps);
        put<double>(f, m.lambda);
        put<std::uint8_t>(f, m.diagonal == DiagonalLayout::EvenlySpaced ? 0 : 1);
        put<std::uint8_t>(f, conserved ? 1 : 0);
        for (Eigen::Index i = 0; i < m.energies.size(); ++i) put<double>(f, m.energies[i]);
        for (Eigen::Index r = 0; r < m.dim(); ++r)
            for (Eigen::Index c = 0; c < m.dim(); ++c) {
                put<double>(f, m.eigenvectors(r, c));
                put<double>(f, 0.0);
            }
        require(bool(f), ErrorKind::InvalidConfig, "write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ModelSpec load_checkpoint(const std::string& path, long d0, std::uint64_t seed, const ModelOptions& opts) {
    std::ifstream f(path, std::ios::binary);
    require(bool(f), ErrorKind::InvalidResult, "cannot read checkpoint " + path);
    char magic[8];
    f.read(magic, sizeof magic);
    require(bool(f) && std::memcmp(magic, kMagic, 8) == 0, ErrorKind::InvalidResult, path + " is not a checkpoint");
    ModelSpec m = model_skeleton(d0, seed, opts);
    const auto fd0 = get<std::uint64_t>(f, path), fd1 = get<std::uint64_t>(f, path), fseed = get<std::uint64_t>(f, path);
    const double de = get<double>(f, path), lam = get<double>(f, path);
    const auto layout = get<std::uint8_t>(f, path), cons = get<std::uint8_t>(f, path);
    require(long(fd0) == m.d0 && long(fd1) == m.d1 && fseed == m.seed && de == m.delta_eps && lam == m.lambda &&
                layout == (m.diagonal == DiagonalLayout::EvenlySpaced ? 0 : 1) && bool(cons) == opts.conserved,
            ErrorKind::InvalidResult, "checkpoint " + path + " was written for a different model");
    const long d = m.dim();
    m.energies.resize(d);
    for (long i = 0; i < d; ++i) m.energies[i] = get<double>(f, path);
    m.eigenvectors.resize(d, d);
    for (long r = 0; r < d; ++r)
        for (long c = 0; c < d; ++c) {
            m.eigenvectors(r, c) = get<double>(f, path);
            require(get<double>(f, path) == 0.0, ErrorKind::InvalidResult, "checkpoint " + path + " has complex eigenvectors");
        }
    // spot check a few eigenpairs against H
    double worst = 0.0;
    for (long c : {0L, d / 3, d / 2, d - 1}) {
        const RVector v = m.eigenvectors.col(c);
        worst = std::max(worst, (apply_h(m, v) - m.energies[c] * v).norm());
    }
    require(worst <= 1e-8, ErrorKind::InvalidResult, "checkpoint " + path + " fails the eigenpair check");
    return m;
}

namespace {

using ModelKey = std::tuple<long, std::uint64_t, long, double, double, int, bool>;

std::map<ModelKey, std::unique_ptr<ModelSpec>>& model_cache() {
    static std::map<ModelKey, std::unique_ptr<ModelSpec>> cache;
    return cache;
}

std::mutex& model_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

const ModelSpec& shared_model(long d0, std::uint64_t seed, const ModelOptions& opts) {
    const ModelKey key{d0, seed, opts.d1, opts.delta_eps, opts.lambda, int(opts.diagonal), opts.conserved};
    std::lock_guard<std::mutex> lock(model_mutex());
    auto& cache = model_cache();
    if (auto it = cache.find(key); it != cache.end()) return *it->second;

    std::unique_ptr<ModelSpec> m;
    const char* dir = std::getenv("DECOHIST_CACHE");
    std::string path;
    if (dir && *dir) {
        const Json tag = {opts.d1, opts.delta_eps, opts.lambda, int(opts.diagonal), opts.conserved};
        char name[96];
        std::snprintf(name, sizeof name, "model-%ld-%016llx-%016llx.bin", d0, static_cast<unsigned long long>(seed),
                      static_cast<unsigned long long>(fnv1a(tag.dump())));
        path = (std::filesystem::path(dir) / name).string();
        if (std::filesystem::exists(path)) {
            try {
                m = std::make_unique<ModelSpec>(load_checkpoint(path, d0, seed, opts));
                progress("loaded " + path);
            } catch (const Error& e) {
                progress(std::string("ignoring checkpoint: ") + e.what());
            }
        }
    }
    if (!m) {
        m = std::make_unique<ModelSpec>(build_model(d0, seed, opts));
        if (!path.empty()) {
            std::filesystem::create_directories(std::filesystem::path(path).parent_path());
            save_checkpoint(*m, opts.conserved, path);
        }
    }
    return *cache.emplace(key, std::move(m)).first->second;
}

// References handed out earlier dangle after this.
void clear_model_cache() {
    std::lock_guard<std::mutex> lock(model_mutex());
    model_cache().clear();
}

// ---- execution helpers ---------------------------------------------------------

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex err;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err);
                    if (!first) first = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

void set_progress_sink(ProgressSink s) {
    std::lock_guard<std::mutex> lock(sink_mutex());
    sink() = std::move(s);
}

void progress(const std::string& message) {
    std::lock_guard<std::mutex> lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace decohist
