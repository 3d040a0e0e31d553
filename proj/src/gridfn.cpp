#include "hjbv/gridfn.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hjbv {

GridFunction GridFunction::make(const Box& box, std::vector<int> res, double fill) {
    GridFunction g;
    g.dim = box.dim();
    g.lo = box.lo;
    g.hi = box.hi;
    g.res = std::move(res);
    size_t n = 1;
    for (int r : g.res) n *= static_cast<size_t>(r);
    g.values.assign(n, fill);
    g.validate();
    return g;
}

size_t GridFunction::node_count() const {
    size_t n = 1;
    for (int r : res) n *= static_cast<size_t>(r);
    return n;
}

size_t GridFunction::flat_index(const std::vector<int>& idx) const {
    size_t flat = 0;
    for (int a = 0; a < dim; ++a) flat = flat * res[a] + idx[a];
    return flat;
}

std::vector<int> GridFunction::unflatten(size_t flat) const {
    std::vector<int> idx(dim);
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % res[a]);
        flat /= res[a];
    }
    return idx;
}

Vec GridFunction::node_point(const std::vector<int>& idx) const {
    Vec p(dim);
    for (int a = 0; a < dim; ++a) p[a] = lo[a] + idx[a] * step(a);
    return p;
}

Vec GridFunction::node_point(size_t flat) const { return node_point(unflatten(flat)); }

double GridFunction::interp(const Vec& x) const {
    std::vector<int> base(dim);
    Vec frac(dim);
    for (int a = 0; a < dim; ++a) {
        double h = step(a);
        double t = (x[a] - lo[a]) / h;
        if (t < -1e-9 || t > res[a] - 1 + 1e-9) return kInf;
        t = std::clamp(t, 0.0, static_cast<double>(res[a] - 1));
        int i = std::min(static_cast<int>(t), res[a] - 2);
        base[a] = std::max(i, 0);
        frac[a] = t - base[a];
    }
    const int corners = 1 << dim;
    double acc = 0;
    for (int c = 0; c < corners; ++c) {
        double w = 1;
        std::vector<int> idx(dim);
        for (int a = 0; a < dim; ++a) {
            int bit = (c >> a) & 1;
            idx[a] = base[a] + bit;
            if (idx[a] > res[a] - 1) idx[a] = res[a] - 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        double v = at(idx);
        if (!is_finite(v)) {
            if (w > 1e-12) return kInf;
            continue;  // zero-weight inf corner cannot poison the cell
        }
        acc += w * v;
    }
    return acc;
}

double GridFunction::nearest(const Vec& x) const {
    std::vector<int> idx(dim);
    for (int a = 0; a < dim; ++a) {
        double t = (x[a] - lo[a]) / step(a);
        idx[a] = std::clamp(static_cast<int>(std::lround(t)), 0, res[a] - 1);
    }
    return at(idx);
}

void GridFunction::validate(bool for_conjugation) const {
    if (dim < 1) throw std::invalid_argument("gridfn: dim must be >= 1");
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim ||
        static_cast<int>(res.size()) != dim)
        throw std::invalid_argument("gridfn: box/res arity mismatch");
    for (int a = 0; a < dim; ++a) {
        if (res[a] < 2) throw std::invalid_argument("gridfn: resolution must be >= 2 per axis");
        if (!(lo[a] < hi[a])) throw std::invalid_argument("gridfn: box lower must be < upper");
    }
    if (values.size() != node_count())
        throw std::invalid_argument("gridfn: value count mismatch");
    bool any_finite = false;
    for (double v : values) {
        if (is_finite(v)) any_finite = true;
        if (for_conjugation && v == -kInf)
            throw std::domain_error("gridfn: -inf not allowed in conjugation input");
    }
    if (!any_finite) throw std::domain_error("gridfn: function is identically infinite");
}

void GridFunction::lsc_regularize(double tol) {
    std::vector<double> out = values;
    const size_t n = node_count();
    for (size_t f = 0; f < n; ++f) {
        if (!is_finite(values[f])) continue;
        auto idx = unflatten(f);
        double mn = kInf;
        for (int a = 0; a < dim; ++a) {
            for (int d = -1; d <= 1; d += 2) {
                int j = idx[a] + d;
                if (j < 0 || j >= res[a]) continue;
                auto nb = idx;
                nb[a] = j;
                double v = at(nb);
                if (is_finite(v)) mn = std::min(mn, v);
            }
        }
        if (is_finite(mn) && values[f] > mn + tol) out[f] = mn + tol;
    }
    values = std::move(out);
}

double GridFunction::lipschitz_estimate() const {
    double lip = 0;
    const size_t n = node_count();
    for (size_t f = 0; f < n; ++f) {
        if (!is_finite(values[f])) continue;
        auto idx = unflatten(f);
        for (int a = 0; a < dim; ++a) {
            if (idx[a] + 1 >= res[a]) continue;
            auto nb = idx;
            nb[a] = idx[a] + 1;
            double v = at(nb);
            if (!is_finite(v)) continue;
            lip = std::max(lip, std::fabs(v - values[f]) / step(a));
        }
    }
    return lip;
}

double GridFunction::max_finite() const {
    double m = -kInf;
    for (double v : values)
        if (is_finite(v)) m = std::max(m, v);
    return m;
}

double GridFunction::min_finite() const {
    double m = kInf;
    for (double v : values)
        if (is_finite(v)) m = std::min(m, v);
    return m;
}

void GridFunction::save(std::ostream& os) const {
    os << "gridfn v1 dim=" << dim << " box=";
    for (int a = 0; a < dim; ++a) {
        if (a) os << ';';
        os << std::setprecision(17) << lo[a] << ',' << hi[a];
    }
    os << " res=";
    for (int a = 0; a < dim; ++a) {
        if (a) os << ',';
        os << res[a];
    }
    os << '\n';
    if (!provenance.empty()) os << "# provenance=" << provenance << '\n';
    os << std::setprecision(17);
    for (double v : values) {
        if (v == kInf) os << "inf\n";
        else if (v == -kInf) os << "-inf\n";
        else os << v << '\n';
    }
}

void GridFunction::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("gridfn: cannot write " + path);
    save(os);
}

GridFunction GridFunction::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("gridfn: empty stream");
    std::istringstream hs(header);
    std::string magic, ver;
    hs >> magic >> ver;
    if (magic != "gridfn" || ver != "v1")
        throw std::runtime_error("gridfn: bad header '" + header + "'");
    GridFunction g;
    std::string tok;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") {
            g.dim = std::stoi(val);
        } else if (key == "box") {
            std::istringstream bs(val);
            std::string axis;
            while (std::getline(bs, axis, ';')) {
                auto comma = axis.find(',');
                g.lo.push_back(std::stod(axis.substr(0, comma)));
                g.hi.push_back(std::stod(axis.substr(comma + 1)));
            }
        } else if (key == "res") {
            std::istringstream rs(val);
            std::string r;
            while (std::getline(rs, r, ',')) g.res.push_back(std::stoi(r));
        }
    }
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("provenance=");
            if (pos != std::string::npos) g.provenance = line.substr(pos + 11);
            continue;
        }
        if (line == "inf") g.values.push_back(kInf);
        else if (line == "-inf") g.values.push_back(-kInf);
        else g.values.push_back(std::stod(line));
    }
    g.validate();
    return g;
}

GridFunction GridFunction::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("gridfn: cannot read " + path);
    return load(is);
}

}  // namespace hjbv
