#include "slabinv/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace slabinv {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'B', 'F'};
constexpr uint32_t kVersion = 1;

void write_header(std::ofstream& out, uint32_t n1, uint32_t n2, uint32_t nn, double X,
                  double L) {
    out.write(kMagic, 4);
    auto w32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto w64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    w32(kVersion);
    w32(n1);
    w32(n2);
    w32(nn);
    w64(X);
    w64(L);
}

void read_header(std::ifstream& in, uint32_t& n1, uint32_t& n2, uint32_t& nn, double& X,
                 double& L) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("field file: bad magic");
    auto r32 = [&]() {
        uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto r64 = [&]() {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const uint32_t ver = r32();
    if (ver != kVersion) throw ConfigError("field file: unsupported version");
    n1 = r32();
    n2 = r32();
    nn = r32();
    X = r64();
    L = r64();
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    const SlabGrid& g = f.grid;
    write_header(out, g.n1, g.n2, g.nn, g.X, g.L);
    out.write(reinterpret_cast<const char*>(f.v.data()),
              std::streamsize(f.v.size() * sizeof(cplx)));
}

ScalarField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    uint32_t n1, n2, nn;
    double X, L;
    read_header(in, n1, n2, nn, X, L);
    ScalarField f(SlabGrid(X, L, int(n1), int(n2), int(nn)));
    in.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(cplx)));
    if (!in) throw ConfigError("field file: truncated payload");
    return f;
}

void write_boundary_trace(const std::string& path, double X, double L, int n1, int n2,
                          const std::vector<cplx>& values) {
    if (values.size() != size_t(n1) * n2)
        throw GridMismatch("write_boundary_trace: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    write_header(out, uint32_t(n1), uint32_t(n2), 1u, X, L);
    out.write(reinterpret_cast<const char*>(values.data()),
              std::streamsize(values.size() * sizeof(cplx)));
}

std::vector<cplx> read_boundary_trace(const std::string& path, int& n1, int& n2, double& X,
                                      double& L) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    uint32_t un1, un2, unn;
    read_header(in, un1, un2, unn, X, L);
    if (unn != 1) throw ConfigError("boundary trace: expected Nn = 1");
    n1 = int(un1);
    n2 = int(un2);
    std::vector<cplx> v(size_t(n1) * n2);
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(cplx)));
    if (!in) throw ConfigError("boundary trace: truncated payload");
    return v;
}

void write_csv_slice(const std::string& path, const ScalarField& f, int m) {
    if (m < 0 || m >= f.grid.nn) throw ConfigError("write_csv_slice: slice out of range");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "x1,x2,re,im\n";
    out.precision(17);
    for (int j = 0; j < f.grid.n2; ++j)
        for (int i = 0; i < f.grid.n1; ++i) {
            const cplx z = f.at(i, j, m);
            out << f.grid.x1(i) << ',' << f.grid.x2(j) << ',' << z.real() << ','
                << z.imag() << '\n';
        }
}

}  // namespace slabinv
