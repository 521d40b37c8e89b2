#include "randfield/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "randfield/errors.hpp"

namespace randfield {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fnv1a_file_hex(const std::string& path) { return fnv1a_hex(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << body;
    if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_ensemble_csv(const std::string& path, const Ensemble& ensemble, int time_stride,
                        int member_stride) {
    if (time_stride < 1 || member_stride < 1)
        throw ConfigError("write_ensemble_csv: strides must be >= 1");
    std::ostringstream out;
    const int dim = ensemble.members.empty() ? 0 : static_cast<int>(ensemble.members[0].r.size());
    out << "neuron_id";
    for (int k = 1; k <= dim; ++k) out << ",r_" << k;
    out << ",t,x\n";
    const std::size_t n = ensemble.grid.total_points();
    for (std::size_t i = 0; i < ensemble.size(); i += static_cast<std::size_t>(member_stride)) {
        const auto& m = ensemble.members[i];
        for (std::size_t k = 0; k < n; ++k) {
            if (k % static_cast<std::size_t>(time_stride) != 0 && k != n - 1) continue;
            out << i;
            for (int d = 0; d < dim; ++d) out << ',' << format_double(m.r[d]);
            out << ',' << format_double(ensemble.grid.time(k)) << ','
                << format_double(m.values[k]) << '\n';
        }
    }
    write_text_file(path, out.str());
}

namespace {

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * b)) & 0xff));
}

void put_le_double(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_le(out, bits);
}

class LeReader {
  public:
    LeReader(const std::string& data, const std::string& path, std::size_t offset)
        : data_(data), path_(path), pos_(offset) {}
    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > data_.size())
            throw ConfigError("truncated binary ensemble: " + path_);
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < sizeof(T); ++b)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    double get_double() {
        const std::uint64_t bits = get<std::uint64_t>();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

  private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_;
};

}  // namespace

void write_ensemble_bin(const std::string& path, const Ensemble& ensemble) {
    std::string out;
    out.reserve(32 + ensemble.size() * (ensemble.grid.total_points() + 2) * 8);
    out += "RFE1";
    const std::uint32_t dim =
        ensemble.members.empty() ? 0u : static_cast<std::uint32_t>(ensemble.members[0].r.size());
    put_le(out, dim);
    put_le(out, static_cast<std::uint64_t>(ensemble.size()));
    put_le(out, static_cast<std::uint64_t>(ensemble.grid.n_hist));
    put_le(out, static_cast<std::uint64_t>(ensemble.grid.n_main));
    put_le_double(out, ensemble.grid.dt);
    for (const auto& m : ensemble.members) {
        for (double c : m.r) put_le_double(out, c);
        for (double v : m.values) put_le_double(out, v);
    }
    write_text_file(path, out);
}

Ensemble read_ensemble_bin(const std::string& path) {
    const std::string data = read_text_file(path);
    if (data.size() < 4 || data.compare(0, 4, "RFE1") != 0)
        throw ConfigError("not a binary ensemble (missing RFE1 magic): " + path);
    LeReader rd(data, path, 4);
    const auto dim = rd.get<std::uint32_t>();
    const auto n_members = rd.get<std::uint64_t>();
    Ensemble ens;
    ens.grid.n_hist = rd.get<std::uint64_t>();
    ens.grid.n_main = rd.get<std::uint64_t>();
    ens.grid.dt = rd.get_double();
    if (ens.grid.dt <= 0.0) throw ConfigError("binary ensemble: invalid dt");
    ens.members.resize(n_members);
    for (auto& m : ens.members) {
        m.r.resize(dim);
        for (auto& c : m.r) c = rd.get_double();
        m.values.resize(ens.grid.total_points());
        for (auto& v : m.values) v = rd.get_double();
    }
    return ens;
}

Ensemble read_ensemble_any(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "RFE1", 4) == 0) return read_ensemble_bin(path);
    return read_ensemble_csv(path);
}

Ensemble read_ensemble_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ensemble CSV: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("empty ensemble CSV: " + path);
    int dim = 0;
    {
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("r_", 0) == 0) ++dim;
        }
    }
    Ensemble ens;
    std::string line;
    long current_id = -1;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');
        const long id = std::stol(field);
        Point r(dim);
        for (int d = 0; d < dim; ++d) {
            std::getline(ls, field, ',');
            r[d] = std::stod(field);
        }
        std::getline(ls, field, ',');
        const double t = std::stod(field);
        std::getline(ls, field, ',');
        const double x = std::stod(field);
        if (id != current_id) {
            ens.members.push_back({std::move(r), {}});
            current_id = id;
        }
        ens.members.back().values.push_back(x);
        if (ens.members.size() == 1) times.push_back(t);
    }
    if (ens.members.empty()) throw ConfigError("ensemble CSV has no rows: " + path);
    if (times.size() < 2) throw ConfigError("ensemble CSV needs at least two grid times");
    ens.grid.dt = times[1] - times[0];
    std::size_t i0 = 0;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k]) < 0.5 * ens.grid.dt) i0 = k;
    ens.grid.n_hist = i0;
    ens.grid.n_main = times.size() - 1 - i0;
    for (const auto& m : ens.members)
        if (m.values.size() != times.size())
            throw ConfigError("ensemble CSV members disagree on the grid");
    return ens;
}

}  // namespace randfield
