#include "soh/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace soh {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'O', 'H', 'S', 'N', 'A', 'P', '\0'};
constexpr const char* kTextFormat = "soh-snapshot-text 1";

class Writer {
public:
    template <class T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void raw(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}
    template <class T>
    T get(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, in_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void need(std::size_t n, const char* what) const {
        if (in_.size() - pos_ < n) throw IoError(std::string("truncated snapshot while reading ") + what);
    }
    const char* here() const { return in_.data() + pos_; }
    void skip(std::size_t n) { pos_ += n; }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    const std::string& in_;
    std::size_t pos_ = 0;
};

std::size_t field_count(SnapshotKind kind) { return Snapshot::field_names(kind).size(); }

SnapshotKind kind_from(std::uint32_t v) {
    if (v == 1) return SnapshotKind::single;
    if (v == 2) return SnapshotKind::two_fluid;
    throw IoError("unknown snapshot kind " + std::to_string(v));
}

Boundary boundary_from(std::uint32_t v) {
    if (v == 0) return Boundary::periodic;
    if (v == 1) return Boundary::transmissive;
    throw IoError("unknown boundary code " + std::to_string(v));
}

std::uint32_t boundary_code(Boundary b) { return b == Boundary::periodic ? 0u : 1u; }

void check_shape(const Snapshot& s) {
    if (s.fields.size() != field_count(s.kind)) throw IoError("snapshot has the wrong number of fields for its kind");
    for (const auto& f : s.fields)
        if (f.size() != s.grid.size()) throw IoError("snapshot field size does not match the grid dimensions");
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void dump(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + path);
}

Grid checked_grid(long long nx, long long ny, double dx, double dy, Boundary bx, Boundary by) {
    if (nx < 1 || ny < 1 || nx > 1'000'000 || ny > 1'000'000 || nx * ny > 100'000'000)
        throw IoError("snapshot grid dimensions out of range");
    try {
        return make_grid(static_cast<int>(nx), static_cast<int>(ny), dx, dy, bx, by);
    } catch (const ConfigError& e) {
        throw IoError(std::string("snapshot grid invalid: ") + e.what());
    }
}

}  // namespace

const std::vector<std::string>& Snapshot::field_names(SnapshotKind kind) {
    static const std::vector<std::string> single{"rho", "q1", "q2"};
    static const std::vector<std::string> two{"rho_p", "rho_m", "qp1", "qp2", "qm1", "qm2", "wp1", "wp2", "wm1", "wm2"};
    return kind == SnapshotKind::single ? single : two;
}

std::uint64_t params_digest(const ModelParams& p) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    };
    for (double v : {p.c, p.lambda, p.epsilon, p.beta, p.gamma, p.rho_star, p.kappa, p.dt, p.dx, p.dy, p.t_end})
        mix(std::bit_cast<std::uint64_t>(v));
    mix(p.use_background ? 1u : 0u);
    mix(p.seed);
    mix(p.half_pressure_weight_1d ? 1u : 0u);
    return h;
}

Snapshot make_snapshot(const FieldState& s, const ModelParams& params) {
    Snapshot snap;
    snap.kind = SnapshotKind::single;
    snap.grid = s.grid;
    snap.time = s.time;
    snap.params_digest = params_digest(params);
    snap.fields = {s.rho, s.q1, s.q2};
    check_shape(snap);
    return snap;
}

Snapshot make_snapshot(const TwoFluidState& s, const ModelParams& params) {
    Snapshot snap;
    snap.kind = SnapshotKind::two_fluid;
    snap.grid = s.grid;
    snap.time = s.time;
    snap.params_digest = params_digest(params);
    snap.fields = {s.rho_p, s.rho_m, s.qp1, s.qp2, s.qm1, s.qm2, s.wp1, s.wp2, s.wm1, s.wm2};
    check_shape(snap);
    return snap;
}

FieldState to_field_state(const Snapshot& snap) {
    if (snap.kind != SnapshotKind::single) throw IoError("snapshot holds a two-fluid state");
    check_shape(snap);
    FieldState s;
    s.grid = snap.grid;
    s.time = snap.time;
    s.rho = snap.fields[0];
    s.q1 = snap.fields[1];
    s.q2 = snap.fields[2];
    return s;
}

TwoFluidState to_two_fluid(const Snapshot& snap) {
    if (snap.kind != SnapshotKind::two_fluid) throw IoError("snapshot holds a single-fluid state");
    check_shape(snap);
    TwoFluidState s;
    s.grid = snap.grid;
    s.time = snap.time;
    std::vector<double>* dst[] = {&s.rho_p, &s.rho_m, &s.qp1, &s.qp2, &s.qm1, &s.qm2, &s.wp1, &s.wp2, &s.wm1, &s.wm2};
    for (std::size_t f = 0; f < 10; ++f) *dst[f] = snap.fields[f];
    return s;
}

std::string encode_snapshot(const Snapshot& snap) {
    check_shape(snap);
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kSnapshotVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(snap.kind));
    w.put<std::int32_t>(snap.grid.nx);
    w.put<std::int32_t>(snap.grid.ny);
    w.put<double>(snap.grid.dx);
    w.put<double>(snap.grid.dy);
    w.put<std::uint32_t>(boundary_code(snap.grid.bx));
    w.put<std::uint32_t>(boundary_code(snap.grid.by));
    w.put<double>(snap.time);
    w.put<std::uint64_t>(snap.params_digest);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(snap.fields.size()));
    for (const auto& f : snap.fields) w.raw(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(double));
    return w.take();
}

Snapshot decode_snapshot(const std::string& bytes) {
    Reader r(bytes);
    r.need(sizeof kMagic, "magic");
    if (std::memcmp(r.here(), kMagic, sizeof kMagic) != 0) throw IoError("not a snapshot file (bad magic)");
    r.skip(sizeof kMagic);
    const auto version = r.get<std::uint32_t>("version");
    if (version != kSnapshotVersion)
        throw IoError("unsupported snapshot version " + std::to_string(version) + " (expected " +
                      std::to_string(kSnapshotVersion) + ")");
    Snapshot snap;
    snap.kind = kind_from(r.get<std::uint32_t>("kind"));
    const auto nx = r.get<std::int32_t>("nx");
    const auto ny = r.get<std::int32_t>("ny");
    const auto dx = r.get<double>("dx");
    const auto dy = r.get<double>("dy");
    const Boundary bx = boundary_from(r.get<std::uint32_t>("bx"));
    const Boundary by = boundary_from(r.get<std::uint32_t>("by"));
    snap.grid = checked_grid(nx, ny, dx, dy, bx, by);
    snap.time = r.get<double>("time");
    snap.params_digest = r.get<std::uint64_t>("params digest");
    const auto nf = r.get<std::uint32_t>("field count");
    if (nf != field_count(snap.kind))
        throw IoError("dimension mismatch: " + std::to_string(nf) + " fields for a snapshot of this kind");
    const std::size_t n = snap.grid.size();
    snap.fields.resize(nf);
    for (auto& f : snap.fields) {
        r.need(n * sizeof(double), "field data");
        f.resize(n);
        std::memcpy(f.data(), r.here(), n * sizeof(double));
        r.skip(n * sizeof(double));
    }
    if (r.remaining() != 0) throw IoError("dimension mismatch: trailing bytes after the last field");
    return snap;
}

void write_snapshot(const Snapshot& snap, const std::string& path) { dump(path, encode_snapshot(snap)); }

Snapshot read_snapshot(const std::string& path) { return decode_snapshot(slurp(path)); }

std::string encode_text_mirror(const Snapshot& snap) {
    check_shape(snap);
    const Grid& g = snap.grid;
    std::string out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out += buf;
    };
    out += "# ";
    out += kTextFormat;
    out += "\n# kind ";
    out += snap.kind == SnapshotKind::single ? "single" : "two_fluid";
    out += "\n# grid";
    std::snprintf(buf, sizeof buf, " %d %d", g.nx, g.ny);
    out += buf;
    num(g.dx);
    num(g.dy);
    out += g.bx == Boundary::periodic ? " periodic" : " transmissive";
    out += g.by == Boundary::periodic ? " periodic" : " transmissive";
    out += "\n# time";
    num(snap.time);
    std::snprintf(buf, sizeof buf, "\n# digest %016llx\n# columns i j x y",
                  static_cast<unsigned long long>(snap.params_digest));
    out += buf;
    for (const auto& name : snap.names()) out += " " + name;
    out += '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%d %d", i, j);
            out += buf;
            num(g.x_center(i));
            num(g.y_center(j));
            const std::size_t k = g.index(i, j);
            for (const auto& f : snap.fields) num(f[k]);
            out += '\n';
        }
    }
    return out;
}

Snapshot decode_text_mirror(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto header = [&](const char* key) {
        if (!std::getline(in, line) || line.rfind(std::string("# ") + key, 0) != 0)
            throw IoError(std::string("text mirror: missing header line '") + key + "'");
        return std::istringstream(line.substr(2 + std::strlen(key)));
    };
    {
        std::getline(in, line);
        if (line != std::string("# ") + kTextFormat) throw IoError("text mirror: unsupported format line '" + line + "'");
    }
    Snapshot snap;
    {
        auto ss = header("kind");
        std::string k;
        ss >> k;
        if (k == "single") snap.kind = SnapshotKind::single;
        else if (k == "two_fluid") snap.kind = SnapshotKind::two_fluid;
        else throw IoError("text mirror: unknown kind '" + k + "'");
    }
    {
        auto ss = header("grid");
        long long nx = 0, ny = 0;
        double dx = 0, dy = 0;
        std::string bx, by;
        if (!(ss >> nx >> ny >> dx >> dy >> bx >> by)) throw IoError("text mirror: malformed grid line");
        auto b = [](const std::string& s) {
            if (s == "periodic") return Boundary::periodic;
            if (s == "transmissive") return Boundary::transmissive;
            throw IoError("text mirror: unknown boundary '" + s + "'");
        };
        snap.grid = checked_grid(nx, ny, dx, dy, b(bx), b(by));
    }
    {
        auto ss = header("time");
        if (!(ss >> snap.time)) throw IoError("text mirror: malformed time line");
    }
    {
        auto ss = header("digest");
        if (!(ss >> std::hex >> snap.params_digest)) throw IoError("text mirror: malformed digest line");
    }
    header("columns");
    const std::size_t nf = field_count(snap.kind);
    snap.fields.assign(nf, std::vector<double>(snap.grid.size()));
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int i = 0, j = 0;
        double x = 0, y = 0;
        if (!(ss >> i >> j >> x >> y) || i < 0 || j < 0 || i >= snap.grid.nx || j >= snap.grid.ny)
            throw IoError("text mirror: malformed row " + std::to_string(rows + 1));
        const std::size_t k = snap.grid.index(i, j);
        for (std::size_t f = 0; f < nf; ++f)
            if (!(ss >> snap.fields[f][k])) throw IoError("text mirror: short row " + std::to_string(rows + 1));
        ++rows;
    }
    if (rows != snap.grid.size())
        throw IoError("text mirror: " + std::to_string(rows) + " rows for " + std::to_string(snap.grid.size()) + " cells");
    return snap;
}

void write_text_mirror(const Snapshot& snap, const std::string& path) { dump(path, encode_text_mirror(snap)); }

Snapshot read_text_mirror(const std::string& path) { return decode_text_mirror(slurp(path)); }

}  // namespace soh
