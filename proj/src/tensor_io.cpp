#include "tensorreg/tensor_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace tensorreg {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxHeaderLength = 4096;

std::uint64_t byteswap64(std::uint64_t v) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) {
        out = (out << 8) | (v & 0xffU);
        v >>= 8;
    }
    return out;
}

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    else return byteswap64(v);
}

bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = first + token.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

void write_dten(std::ostream& os, const DenseTensor& t) {
    os << "DTEN 1 " << t.order();
    for (std::size_t d : t.shape()) os << ' ' << d;
    os << '\n';
    std::vector<std::uint64_t> words(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) words[i] = to_little_endian(std::bit_cast<std::uint64_t>(t[i]));
    os.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
    if (!os) throw IoError("failed writing DTEN payload");
}

DenseTensor read_dten(std::istream& is) {
    std::string header;
    char c = 0;
    while (is.get(c) && c != '\n') {
        header.push_back(c);
        if (header.size() > kMaxHeaderLength) throw IoError("DTEN header line too long");
    }
    if (c != '\n') throw IoError("truncated DTEN header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    std::size_t order = 0;
    if (!(hs >> magic >> version >> order) || magic != "DTEN") throw IoError("not a DTEN file (bad magic)");
    if (version != 1) throw IoError("unsupported DTEN version " + std::to_string(version));
    if (order == 0) throw IoError("DTEN order must be at least 1");
    Shape shape(order);
    for (auto& d : shape) {
        long long v = 0;
        if (!(hs >> v) || v <= 0) throw IoError("bad DTEN dimension in header: " + header);
        d = static_cast<std::size_t>(v);
    }
    std::string extra;
    if (hs >> extra) throw IoError("trailing tokens in DTEN header: " + header);
    const std::size_t n = shape_product(shape);
    std::vector<std::uint64_t> words(n);
    is.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(n * 8));
    if (static_cast<std::size_t>(is.gcount()) != n * 8)
        throw IoError("truncated DTEN payload: expected " + std::to_string(n) + " doubles");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(to_little_endian(words[i]));
    return DenseTensor(std::move(shape), std::move(data));
}

void write_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

Eigen::MatrixXd read_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t end = line.find_first_of(", \t", pos);
            if (end == std::string::npos) end = line.size();
            std::string_view tok(line.data() + pos, end - pos);
            if (!tok.empty()) {
                double v = 0;
                if (!parse_double(tok, v))
                    throw IoError("CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(tok) + "'");
                row.push_back(v);
            }
            pos = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("CSV line " + std::to_string(line_no) + ": expected " +
                          std::to_string(rows.front().size()) + " columns, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("CSV input is empty");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void atomic_write(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        try {
            writer(os);
            os.flush();
            if (!os) throw IoError("failed writing " + tmp.string());
        } catch (...) {
            os.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

void save_dten(const fs::path& path, const DenseTensor& t) {
    atomic_write(path, [&](std::ostream& os) { write_dten(os, t); });
}

DenseTensor load_dten(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return read_dten(is);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

DenseTensor load_tensor(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4] = {};
    is.read(magic, 4);
    is.clear();
    is.seekg(0);
    try {
        if (is.gcount() == 4 && std::memcmp(magic, "DTEN", 4) == 0) return read_dten(is);
        return DenseTensor::from_matrix(read_csv(is));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Eigen::MatrixXd load_matrix(const fs::path& path) {
    DenseTensor t = load_tensor(path);
    if (t.order() == 1) return Eigen::MatrixXd(t.vec().transpose());
    if (t.order() != 2)
        throw IoError(path.string() + ": expected a matrix, got tensor of shape " + shape_to_string(t.shape()));
    return t.to_matrix();
}

void save_csv(const fs::path& path, const Eigen::MatrixXd& m) {
    atomic_write(path, [&](std::ostream& os) { write_csv(os, m); });
}

}  // namespace tensorreg
