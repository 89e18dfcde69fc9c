#include "mfglab/config.hpp"

#include "mfglab/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mfglab {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(child(path, it.key()), "unknown field");
    }
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

// A number, or null for an infinite bound with the given sign.
double bound(const json& v, const std::string& path, double inf) {
    if (v.is_null()) return inf;
    return number(v, path);
}

long integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long>();
}

bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

const json& object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    return v;
}

int depth(const json& v) {
    int d = 0;
    const json* cur = &v;
    while (cur->is_array()) {
        ++d;
        if (cur->empty()) break;
        cur = &(*cur)[0];
    }
    return d;
}

Vec vector_value(const json& v, int n, const std::string& path) {
    if (v.is_number()) return Vec::Constant(n, number(v, path));
    if (!v.is_array()) fail(path, "expected a number or an array of " + std::to_string(n) + " numbers");
    if (static_cast<int>(v.size()) != n) fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = number(v[static_cast<std::size_t>(i)], index(path, static_cast<std::size_t>(i)));
    return out;
}

// A scalar s is s I for square matrices; nested arrays give the rows.
Mat matrix_value(const json& v, int rows, int cols, const std::string& path) {
    if (v.is_number()) {
        const double s = number(v, path);
        if (rows == cols) return s * Mat::Identity(rows, cols);
        if (rows * cols == 1) return Mat::Constant(1, 1, s);
        fail(path, "a scalar is only accepted for square matrices");
    }
    if (!v.is_array()) fail(path, "expected a number or nested arrays");
    if (static_cast<int>(v.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = v[static_cast<std::size_t>(r)];
        const std::string rp = index(path, static_cast<std::size_t>(r));
        if (row.is_number() && cols == 1) {
            out(r, 0) = number(row, rp);
            continue;
        }
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            fail(rp, "expected a row of " + std::to_string(cols) + " numbers");
        for (int c = 0; c < cols; ++c) out(r, c) = number(row[static_cast<std::size_t>(c)], index(rp, static_cast<std::size_t>(c)));
    }
    return out;
}

// Constant form or time-varying form ({"nodes": [...]} or one extra array level).
std::vector<Mat> matrix_path(const json* v, int rows, int cols, int K, const Mat& fallback, const std::string& path) {
    const auto nodes = static_cast<std::size_t>(K + 1);
    if (!v) return std::vector<Mat>(nodes, fallback);
    const json* list = nullptr;
    std::string lp = path;
    if (v->is_object()) {
        reject_unknown(*v, path, {"nodes"});
        list = find(*v, "nodes");
        lp = child(path, "nodes");
        if (!list || !list->is_array()) fail(lp, "expected an array of K+1 values");
    } else if (depth(*v) == 3) {
        list = v;
    }
    if (!list) return std::vector<Mat>(nodes, matrix_value(*v, rows, cols, path));
    if (list->size() != nodes)
        fail(lp, "expected K+1 = " + std::to_string(K + 1) + " nodes, got " + std::to_string(list->size()));
    std::vector<Mat> out;
    for (std::size_t k = 0; k < nodes; ++k) out.push_back(matrix_value((*list)[k], rows, cols, index(lp, k)));
    return out;
}

std::vector<Vec> vector_path(const json* v, int n, int K, const std::string& path) {
    const auto nodes = static_cast<std::size_t>(K + 1);
    if (!v) return std::vector<Vec>(nodes, Vec::Zero(n));
    const json* list = nullptr;
    std::string lp = path;
    if (v->is_object()) {
        reject_unknown(*v, path, {"nodes"});
        list = find(*v, "nodes");
        lp = child(path, "nodes");
        if (!list || !list->is_array()) fail(lp, "expected an array of K+1 values");
    } else if (depth(*v) == 2) {
        list = v;
    }
    if (!list) return std::vector<Vec>(nodes, vector_value(*v, n, path));
    if (list->size() != nodes)
        fail(lp, "expected K+1 = " + std::to_string(K + 1) + " nodes, got " + std::to_string(list->size()));
    std::vector<Vec> out;
    for (std::size_t k = 0; k < nodes; ++k) out.push_back(vector_value((*list)[k], n, index(lp, k)));
    return out;
}

const json& required(const json& obj, const std::string& key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) fail(child(path, key), "missing required field");
    return *v;
}

ConvexSet gamma_from(const json& g, int m, const std::string& path) {
    object(g, path);
    const json* type = find(g, "type");
    if (!type || !type->is_string()) fail(child(path, "type"), "expected one of full, orthant, box, ball, halfspace, singleton");
    const std::string t = type->get<std::string>();
    try {
        if (t == "full") {
            reject_unknown(g, path, {"type"});
            return ConvexSet::full(m);
        }
        if (t == "orthant") {
            reject_unknown(g, path, {"type"});
            return ConvexSet::orthant(m);
        }
        if (t == "box") {
            reject_unknown(g, path, {"type", "lower", "upper"});
            Vec lo = Vec::Constant(m, -kInf);
            Vec hi = Vec::Constant(m, kInf);
            auto read = [&](const char* key, Vec& out, double inf) {
                const json* v = find(g, key);
                if (!v) return;
                const std::string p = child(path, key);
                if (v->is_array()) {
                    if (static_cast<int>(v->size()) != m) fail(p, "expected " + std::to_string(m) + " entries");
                    for (int j = 0; j < m; ++j) out[j] = bound((*v)[static_cast<std::size_t>(j)], index(p, static_cast<std::size_t>(j)), inf);
                } else {
                    out.setConstant(bound(*v, p, inf));
                }
            };
            read("lower", lo, -kInf);
            read("upper", hi, kInf);
            return ConvexSet::box(lo, hi);
        }
        if (t == "ball") {
            reject_unknown(g, path, {"type", "center", "radius"});
            const json* c = find(g, "center");
            const Vec center = c ? vector_value(*c, m, child(path, "center")) : Vec::Zero(m);
            return ConvexSet::ball(center, number(required(g, "radius", path), child(path, "radius")));
        }
        if (t == "halfspace") {
            reject_unknown(g, path, {"type", "normal", "offset"});
            return ConvexSet::halfspace(vector_value(required(g, "normal", path), m, child(path, "normal")),
                                        number(required(g, "offset", path), child(path, "offset")));
        }
        if (t == "singleton") {
            reject_unknown(g, path, {"type", "point"});
            return ConvexSet::singleton(vector_value(required(g, "point", path), m, child(path, "point")));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        fail(path, e.what());
    }
    fail(child(path, "type"), "unknown set type '" + t + "'");
}

std::vector<int> int_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(integer(v[i], index(path, i))));
    return out;
}

} // namespace

FixedPointConfig SolverSettings::fixed_point() const {
    FixedPointConfig c;
    c.rho = rho;
    c.tol_z = tol_z;
    c.max_outer = max_outer;
    c.warm_start = warm_start;
    c.inner.theta = theta;
    c.inner.tol_u = tol_u;
    c.inner.max_iter = max_picard;
    c.inner.degree = degree;
    c.inner.paths = paths;
    return c;
}

std::vector<Deviation> ExperimentSettings::family(int m) const {
    std::vector<Vec> cs = constants;
    if (cs.empty()) cs.push_back(Vec::Zero(m));
    return deviation_family(cs, lambdas, reversed);
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    object(root, "(root)");
    reject_unknown(root, "", {"model", "gamma", "solver", "experiment", "seed", "output"});
    ExperimentConfig cfg;

    const json& model = object(required(root, "model", ""), "model");
    reject_unknown(model, "model", {"n", "m", "T", "K", "x0", "A", "F", "B", "D", "b", "sigma", "Q", "R", "G", "strict_h1", "r_min"});
    ModelSpec& spec = cfg.model;
    spec.n = static_cast<int>(integer(required(model, "n", "model"), "model.n"));
    spec.m = static_cast<int>(integer(required(model, "m", "model"), "model.m"));
    if (spec.n < 1) fail("model.n", "must be at least 1");
    if (spec.m < 1) fail("model.m", "must be at least 1");
    spec.grid.T = number(required(model, "T", "model"), "model.T");
    if (!(spec.grid.T > 0.0)) fail("model.T", "must be positive");
    if (const json* v = find(model, "K")) spec.grid.K = static_cast<int>(integer(*v, "model.K"));
    if (spec.grid.K < 2) fail("model.K", "must be at least 2");
    const int n = spec.n;
    const int m = spec.m;
    const int K = spec.grid.K;
    spec.x0 = find(model, "x0") ? vector_value(*find(model, "x0"), n, "model.x0") : Vec::Zero(n);
    Coefficients& c = spec.coeffs;
    c.A = matrix_path(find(model, "A"), n, n, K, Mat::Zero(n, n), "model.A");
    c.F = matrix_path(find(model, "F"), n, n, K, Mat::Zero(n, n), "model.F");
    c.B = matrix_path(find(model, "B"), n, m, K, Mat::Zero(n, m), "model.B");
    c.D = matrix_path(find(model, "D"), n, m, K, Mat::Zero(n, m), "model.D");
    c.b = vector_path(find(model, "b"), n, K, "model.b");
    c.sigma = vector_path(find(model, "sigma"), n, K, "model.sigma");
    c.Q = matrix_path(find(model, "Q"), n, n, K, Mat::Identity(n, n), "model.Q");
    c.R = matrix_path(find(model, "R"), m, m, K, Mat::Identity(m, m), "model.R");
    c.G = find(model, "G") ? matrix_value(*find(model, "G"), n, n, "model.G") : Mat::Zero(n, n);
    if (const json* v = find(model, "strict_h1")) cfg.strict_h1 = boolean(*v, "model.strict_h1");
    if (const json* v = find(model, "r_min")) spec.r_min = number(*v, "model.r_min");

    const json* gamma = find(root, "gamma");
    spec.gamma = gamma ? gamma_from(*gamma, m, "gamma") : ConvexSet::full(m);

    if (const json* s = find(root, "solver")) {
        object(*s, "solver");
        reject_unknown(*s, "solver", {"paths", "basis_degree", "theta", "rho", "tol_u", "tol_z", "max_picard", "max_outer", "warm_start"});
        SolverSettings& sv = cfg.solver;
        if (const json* v = find(*s, "paths")) sv.paths = integer(*v, "solver.paths");
        if (const json* v = find(*s, "basis_degree")) sv.degree = static_cast<int>(integer(*v, "solver.basis_degree"));
        if (const json* v = find(*s, "theta")) sv.theta = number(*v, "solver.theta");
        if (const json* v = find(*s, "rho")) sv.rho = number(*v, "solver.rho");
        if (const json* v = find(*s, "tol_u")) sv.tol_u = number(*v, "solver.tol_u");
        if (const json* v = find(*s, "tol_z")) sv.tol_z = v->is_null() ? 0.0 : number(*v, "solver.tol_z");
        if (const json* v = find(*s, "max_picard")) sv.max_picard = static_cast<int>(integer(*v, "solver.max_picard"));
        if (const json* v = find(*s, "max_outer")) sv.max_outer = static_cast<int>(integer(*v, "solver.max_outer"));
        if (const json* v = find(*s, "warm_start")) sv.warm_start = boolean(*v, "solver.warm_start");
    }
    try {
        cfg.solver.fixed_point().validate();
    } catch (const InvalidArgument& e) {
        fail("solver", e.what());
    }
    if (cfg.solver.tol_z < 0.0) fail("solver.tol_z", "must be positive (or null for the default)");

    if (const json* e = find(root, "experiment")) {
        object(*e, "experiment");
        reject_unknown(*e, "experiment", {"Ns", "nash_Ns", "reps", "agents", "deviations", "lattice_points"});
        ExperimentSettings& ex = cfg.experiment;
        if (const json* v = find(*e, "Ns")) ex.Ns = int_list(*v, "experiment.Ns");
        if (const json* v = find(*e, "nash_Ns")) ex.nash_Ns = int_list(*v, "experiment.nash_Ns");
        if (const json* v = find(*e, "reps")) ex.reps = static_cast<int>(integer(*v, "experiment.reps"));
        if (const json* v = find(*e, "agents")) ex.agents = static_cast<int>(integer(*v, "experiment.agents"));
        if (const json* v = find(*e, "lattice_points")) ex.lattice_points = static_cast<int>(integer(*v, "experiment.lattice_points"));
        if (const json* d = find(*e, "deviations")) {
            object(*d, "experiment.deviations");
            reject_unknown(*d, "experiment.deviations", {"constants", "lambdas", "reversed"});
            if (const json* v = find(*d, "constants")) {
                if (!v->is_array()) fail("experiment.deviations.constants", "expected an array");
                ex.constants.clear();
                for (std::size_t i = 0; i < v->size(); ++i)
                    ex.constants.push_back(vector_value((*v)[i], m, index("experiment.deviations.constants", i)));
            }
            if (const json* v = find(*d, "lambdas")) {
                if (!v->is_array()) fail("experiment.deviations.lambdas", "expected an array of numbers");
                ex.lambdas.clear();
                for (std::size_t i = 0; i < v->size(); ++i)
                    ex.lambdas.push_back(number((*v)[i], index("experiment.deviations.lambdas", i)));
            }
            if (const json* v = find(*d, "reversed")) ex.reversed = boolean(*v, "experiment.deviations.reversed");
        }
        if (ex.reps < 1) fail("experiment.reps", "must be positive");
        if (ex.agents < 1) fail("experiment.agents", "must be positive");
        if (ex.lattice_points < 3) fail("experiment.lattice_points", "must be at least 3");
    }

    if (const json* v = find(root, "seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
            fail("seed", "expected a nonnegative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(root, "output")) {
        if (!v->is_string()) fail("output", "expected a directory path");
        cfg.output = v->get<std::string>();
    }

    json canon;
    canon["model"] = model;
    canon["gamma"] = gamma ? *gamma : json{{"type", "full"}};
    cfg.model_json = canon.dump();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

ConvexSet parse_gamma(const std::string& text, int m) {
    json g;
    try {
        g = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    return gamma_from(g, m, "gamma");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace mfglab
