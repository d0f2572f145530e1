#include "biphoton/smatrix_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "biphoton/error.hpp"

namespace biphoton {
namespace {

constexpr char kMagic[4] = {'B', 'S', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<char const*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw Error("scattering matrix dump: unexpected end of file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

} // namespace

void write_smatrix(std::ostream& os, ScatteringMatrix const& s) {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<double>(os, s.k);
    put<std::uint64_t>(os, s.rows());
    put<std::uint64_t>(os, s.cols());
    put<double>(os, s.grid.phi());
    for (double t : s.grid.thetas())
        put<double>(os, t);
    for (auto const& d : s.incident_dirs) {
        put<double>(os, d.theta());
        put<double>(os, d.phi());
    }
    put<double>(os, s.t_matrix.real());
    put<double>(os, s.t_matrix.imag());
    for (Eigen::Index r = 0; r < s.amplitudes.rows(); ++r)
        for (Eigen::Index c = 0; c < s.amplitudes.cols(); ++c) {
            put<double>(os, s.amplitudes(r, c).real());
            put<double>(os, s.amplitudes(r, c).imag());
        }
    if (!os)
        throw Error("scattering matrix dump: write failed");
}

ScatteringMatrix read_smatrix(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("scattering matrix dump: bad magic");
    if (auto v = get<std::uint32_t>(is); v != kVersion)
        throw Error("scattering matrix dump: unsupported version " + std::to_string(v));
    ScatteringMatrix s;
    s.k = get<double>(is);
    auto const rows = get<std::uint64_t>(is);
    auto const cols = get<std::uint64_t>(is);
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
        throw Error("scattering matrix dump: implausible shape");
    double const phi = get<double>(is);
    std::vector<double> thetas(rows);
    for (auto& t : thetas)
        t = get<double>(is);
    s.grid = AngularGrid(std::move(thetas), phi);
    for (std::uint64_t c = 0; c < cols; ++c) {
        double const theta = get<double>(is);
        double const dphi = get<double>(is);
        s.incident_dirs.emplace_back(theta, dphi);
    }
    double const tre = get<double>(is);
    double const tim = get<double>(is);
    s.t_matrix = {tre, tim};
    s.amplitudes.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < s.amplitudes.rows(); ++r)
        for (Eigen::Index c = 0; c < s.amplitudes.cols(); ++c) {
            double const re = get<double>(is);
            double const im = get<double>(is);
            s.amplitudes(r, c) = {re, im};
        }
    return s;
}

void save_smatrix(std::string const& path, ScatteringMatrix const& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open " + path + " for writing");
    write_smatrix(os, s);
}

ScatteringMatrix load_smatrix(std::string const& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot open " + path);
    return read_smatrix(is);
}

} // namespace biphoton
