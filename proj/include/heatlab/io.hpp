#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"

namespace heatlab {

// Flat binary layout, little-endian: int64 d, n_x, n_t; double L, T;
// then row-major node values (time slowest).

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace detail

inline void save_binary(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_binary: cannot open " + path);
    const Grid& g = f.grid();
    detail::put_le<std::int64_t>(os, g.d());
    detail::put_le<std::int64_t>(os, g.n_x());
    detail::put_le<std::int64_t>(os, g.n_t());
    detail::put_le<double>(os, g.L());
    detail::put_le<double>(os, g.T());
    for (double v : f.values()) detail::put_le<double>(os, v);
}

inline ScalarField load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_binary: cannot open " + path);
    const auto d = detail::get_le<std::int64_t>(is);
    const auto n_x = detail::get_le<std::int64_t>(is);
    const auto n_t = detail::get_le<std::int64_t>(is);
    const double L = detail::get_le<double>(is);
    const double T = detail::get_le<double>(is);
    Grid g(static_cast<int>(d), L, static_cast<int>(n_x), T, static_cast<int>(n_t));
    std::vector<double> vals(g.total_size());
    for (double& v : vals) v = detail::get_le<double>(is);
    if (!is) throw std::runtime_error("load_binary: truncated file " + path);
    return ScalarField(g, std::move(vals));
}

/// Fixed-format number rendering so identical runs give identical bytes.
inline std::string csv_num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline void save_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_csv: cannot open " + path);
    const Grid& g = f.grid();
    os << "t";
    for (int a = 0; a < g.d(); ++a) os << ",x" << a;
    os << ",value\n";
    for (int it = 0; it <= g.n_t(); ++it)
        for (std::size_t is = 0; is < g.space_size(); ++is) {
            auto x = g.point(is);
            os << csv_num(g.time(it));
            for (int a = 0; a < g.d(); ++a) os << ',' << csv_num(x[static_cast<std::size_t>(a)]);
            os << ',' << csv_num(f.at(it, is)) << '\n';
        }
}

/// Minimal CSV table writer with a header row.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path) {
        if (!os_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << '\n';
        cols_ = header.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw std::invalid_argument("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i)
            os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

  private:
    std::ofstream os_;
    std::size_t cols_;
};

}  // namespace heatlab
