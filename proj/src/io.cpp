#include "mfglab/io.hpp"

#include "mfglab/config.hpp"
#include "mfglab/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace mfglab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw IoError("cannot write " + path);
    for (const auto& h : header) field(csv_field(h));
    end_row();
}

void CsvWriter::field(const std::string& text) {
    if (filled_ > 0) out_ << ',';
    out_ << text;
    ++filled_;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
    field(csv_field(s));
    return *this;
}

CsvWriter& CsvWriter::operator<<(double v) {
    field(format_double(v));
    return *this;
}

CsvWriter& CsvWriter::operator<<(int v) {
    field(std::to_string(v));
    return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
    field(std::to_string(v));
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw ShapeMismatch("CSV row in " + path_ + " has the wrong number of fields");
    out_ << '\n';
    filled_ = 0;
    if (!out_) throw IoError("write failed: " + path_);
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw IoError("write failed: " + path_);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    throw IoError("missing column " + name);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& path) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError(path + ": bad number '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& path) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError(path + ": bad integer '" + s + "'");
    return v;
}

std::vector<std::string> indexed(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int j = 1; j <= count; ++j) out.push_back(prefix + std::to_string(j));
    return out;
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + " is empty");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
        if (t.rows.back().size() != t.header.size()) throw IoError(path + ": row with the wrong number of fields");
    }
    return t;
}

void save_equilibrium(const std::string& dir, const Model& model, const Equilibrium& eq) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    {
        std::vector<std::string> h{"t"};
        for (auto& s : indexed("z", n)) h.push_back(s);
        CsvWriter w(dir + "/zstar.csv", h);
        for (int k = 0; k <= K; ++k) {
            w << model.grid().t(k);
            for (int j = 0; j < n; ++j) w << eq.z(k, j);
            w.end_row();
        }
        w.close();
    }
    {
        std::vector<std::string> h{"t"};
        for (auto& s : indexed("u", m)) h.push_back(s);
        CsvWriter w(dir + "/mean_control.csv", h);
        for (int k = 0; k < K; ++k) {
            w << model.grid().t(k);
            for (int j = 0; j < m; ++j) w << eq.mean_control(k, j);
            w.end_row();
        }
        w.close();
    }
    CsvWriter w(dir + "/policy.csv", {"k", "t", "block", "row", "col", "value"});
    for (int k = 0; k <= K; ++k) {
        const auto& nd = eq.policy.node(k);
        const double t = model.grid().t(k);
        for (int j = 0; j < n; ++j) {
            w << k << t << "shift" << j << 0 << nd.norm.shift[static_cast<std::size_t>(j)];
            w.end_row();
            w << k << t << "scale" << j << 0 << nd.norm.scale[static_cast<std::size_t>(j)];
            w.end_row();
        }
        for (const auto& [name, coef] : {std::pair<const char*, const Mat*>{"coef_p", &nd.coef_p}, {"coef_q", &nd.coef_q}}) {
            for (Eigen::Index r = 0; r < coef->rows(); ++r) {
                for (Eigen::Index c = 0; c < coef->cols(); ++c) {
                    w << k << t << name << static_cast<int>(r) << static_cast<int>(c) << (*coef)(r, c);
                    w.end_row();
                }
            }
        }
    }
    w.close();
}

Equilibrium load_equilibrium(const std::string& dir, const Model& model) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    Equilibrium eq;
    {
        const std::string path = dir + "/zstar.csv";
        const CsvTable t = read_csv(path);
        if (static_cast<int>(t.rows.size()) != K + 1 || static_cast<int>(t.header.size()) != n + 1)
            throw ShapeMismatch(path + " does not match the model grid and dimension");
        eq.z = MeanPath(K + 1, n);
        for (int k = 0; k <= K; ++k) {
            for (int j = 0; j < n; ++j) eq.z(k, j) = to_double(t.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j + 1)], path);
        }
    }
    {
        const std::string path = dir + "/mean_control.csv";
        const CsvTable t = read_csv(path);
        if (static_cast<int>(t.rows.size()) != K || static_cast<int>(t.header.size()) != m + 1)
            throw ShapeMismatch(path + " does not match the model grid and dimension");
        eq.mean_control = MeanPath(K, m);
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < m; ++j)
                eq.mean_control(k, j) = to_double(t.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j + 1)], path);
        }
    }
    const std::string path = dir + "/policy.csv";
    const CsvTable t = read_csv(path);
    const int ck = t.column("k");
    const int cb = t.column("block");
    const int cr = t.column("row");
    const int cc = t.column("col");
    const int cv = t.column("value");
    int degree = 0;
    for (const auto& row : t.rows) {
        if (row[static_cast<std::size_t>(cb)] == "coef_p") degree = std::max(degree, to_int(row[static_cast<std::size_t>(cr)], path) + 1);
    }
    // Recover the degree from the basis size.
    int d = 1;
    while (MonomialBasis(n, d).size() < degree) ++d;
    if (MonomialBasis(n, d).size() != degree) throw IoError(path + ": coefficient rows do not match a monomial basis");
    const int L = degree;
    std::vector<AdjointPolicy::Node> nodes(static_cast<std::size_t>(K + 1));
    for (auto& nd : nodes) {
        nd.norm.shift.assign(static_cast<std::size_t>(n), 0.0);
        nd.norm.scale.assign(static_cast<std::size_t>(n), 1.0);
        nd.coef_p = Mat::Zero(L, n);
        nd.coef_q = Mat::Zero(L, n);
    }
    for (const auto& row : t.rows) {
        const int k = to_int(row[static_cast<std::size_t>(ck)], path);
        const int r = to_int(row[static_cast<std::size_t>(cr)], path);
        const int c = to_int(row[static_cast<std::size_t>(cc)], path);
        const double v = to_double(row[static_cast<std::size_t>(cv)], path);
        const std::string& block = row[static_cast<std::size_t>(cb)];
        if (k < 0 || k > K) throw IoError(path + ": node index out of range");
        auto& nd = nodes[static_cast<std::size_t>(k)];
        if (block == "shift" && r < n) nd.norm.shift[static_cast<std::size_t>(r)] = v;
        else if (block == "scale" && r < n) nd.norm.scale[static_cast<std::size_t>(r)] = v;
        else if (block == "coef_p" && r < L && c < n) nd.coef_p(r, c) = v;
        else if (block == "coef_q" && r < L && c < n) nd.coef_q(r, c) = v;
        else throw IoError(path + ": unexpected entry " + block);
    }
    eq.policy = AdjointPolicy(n, d, std::move(nodes));
    return eq;
}

void write_rates_csv(const std::string& path, const RateTable& t) {
    CsvWriter w(path, {"N", "rep", "metric", "value"});
    for (const auto& r : t.rows) {
        w << r.N << r.rep << r.metric << r.value;
        w.end_row();
    }
    w.close();
}

void write_nash_csv(const std::string& path, const RateTable& t) {
    CsvWriter w(path, {"N", "rep", "deviation_id", "cost_dev", "cost_eq", "gap"});
    for (const auto& r : t.nash) {
        w << r.N << r.rep << r.deviation_id << r.cost_dev << r.cost_eq << r.gap;
        w.end_row();
    }
    w.close();
}

void write_fits_csv(const std::string& path, const RateTable& t) {
    CsvWriter w(path, {"metric", "slope", "stderr", "intercept", "C_bound"});
    for (const auto& f : t.fits) {
        w << f.metric << f.slope << f.stderr_slope << f.intercept << f.c_bound;
        w.end_row();
    }
    w.close();
}

} // namespace mfglab
