#ifndef RATBARY_IO_HPP
#define RATBARY_IO_HPP

// On-disk formats: binary sample matrices, JSON models, CSV tables.
//
// Matrix file, all integers and doubles little-endian:
//   "SVAA" u32 version
//   u64 count, u32 axis (0 none, 1 real, 2 imag), f64 a, f64 b, count x (f64 re, f64 im)
//   u64 rows, u64 cols, rows*cols x (f64 re, f64 im) column-major
//   u32 has_labels, then per column u32 length + bytes

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "ratbary/barycentric.hpp"
#include "ratbary/error.hpp"
#include "ratbary/grid.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

using Json = nlohmann::json;

inline constexpr std::uint32_t matrix_file_version = 1;
inline constexpr int model_file_version = 1;

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError("not a number: '" + std::string(s) + "'");
    return x;
}

/// Write to a temporary file next to `path`, then rename over it.
inline void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw InputError("write failed: " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InputError("cannot write " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace detail {

class ByteWriter {
  public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void c128(Complex z) {
        f64(z.real());
        f64(z.imag());
    }
    void raw(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }

  private:
    void put(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string out_;
};

class ByteReader {
  public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    Complex c128() {
        const double re = f64();
        const double im = f64();
        return {re, im};
    }
    std::string_view raw(std::size_t n) {
        need(n);
        std::string_view s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw FormatError("truncated file");
    }
    std::uint64_t get(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline std::uint32_t axis_tag(const SampleGrid& grid) {
    if (!grid.chart()) return 0;
    return grid.chart()->axis == ChartAxis::real ? 1 : 2;
}

} // namespace detail

struct MatrixFile {
    SampleGrid grid;
    ComplexMatrix f; // |Z| x N
    std::vector<std::string> labels;

    bool operator==(const MatrixFile& o) const { return grid == o.grid && f == o.f && labels == o.labels; }
};

inline std::string encode_matrix_file(const MatrixFile& mf) {
    if (mf.f.rows() != mf.grid.size()) throw ParameterError("matrix file: rows do not match grid size");
    if (!mf.labels.empty() && static_cast<Index>(mf.labels.size()) != mf.f.cols())
        throw ParameterError("matrix file: one label per column expected");
    detail::ByteWriter w;
    w.raw("SVAA");
    w.u32(matrix_file_version);
    w.u64(static_cast<std::uint64_t>(mf.grid.size()));
    w.u32(detail::axis_tag(mf.grid));
    w.f64(mf.grid.chart() ? mf.grid.chart()->a : 0.0);
    w.f64(mf.grid.chart() ? mf.grid.chart()->b : 0.0);
    for (Complex z : mf.grid.points()) w.c128(z);
    w.u64(static_cast<std::uint64_t>(mf.f.rows()));
    w.u64(static_cast<std::uint64_t>(mf.f.cols()));
    for (Index j = 0; j < mf.f.cols(); ++j)
        for (Index i = 0; i < mf.f.rows(); ++i) w.c128(mf.f(i, j));
    w.u32(mf.labels.empty() ? 0 : 1);
    for (const std::string& s : mf.labels) {
        w.u32(static_cast<std::uint32_t>(s.size()));
        w.raw(s);
    }
    return w.take();
}

inline MatrixFile decode_matrix_file(std::string_view bytes) {
    detail::ByteReader r(bytes);
    if (r.raw(4) != "SVAA") throw FormatError("not a matrix file (bad magic)");
    if (const auto v = r.u32(); v != matrix_file_version)
        throw FormatError("unsupported matrix file version " + std::to_string(v));
    const std::uint64_t count = r.u64();
    const std::uint32_t tag = r.u32();
    const double a = r.f64(), b = r.f64();
    if (tag > 2) throw FormatError("bad axis tag");
    if (count > r.remaining() / 16) throw FormatError("grid block longer than file");
    std::vector<Complex> pts(count);
    for (auto& z : pts) z = r.c128();
    std::optional<Chart> chart;
    if (tag != 0) chart = Chart{a, b, tag == 1 ? ChartAxis::real : ChartAxis::imag};
    MatrixFile mf;
    try {
        mf.grid = SampleGrid(std::move(pts), chart);
    } catch (const InputError& e) {
        throw FormatError(std::string("matrix file grid: ") + e.what());
    }
    const std::uint64_t rows = r.u64(), cols = r.u64();
    if (rows != count) throw FormatError("matrix rows do not match grid count");
    if (cols != 0 && rows > r.remaining() / 16 / cols) throw FormatError("matrix block longer than file");
    mf.f.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index j = 0; j < mf.f.cols(); ++j)
        for (Index i = 0; i < mf.f.rows(); ++i) mf.f(i, j) = r.c128();
    const std::uint32_t has_labels = r.u32();
    if (has_labels > 1) throw FormatError("bad label flag");
    if (has_labels)
        for (std::uint64_t j = 0; j < cols; ++j) {
            const std::uint32_t len = r.u32();
            mf.labels.emplace_back(r.raw(len));
        }
    if (r.remaining() != 0) throw FormatError("trailing bytes after matrix file");
    return mf;
}

inline void write_matrix_file(const std::filesystem::path& path, const MatrixFile& mf) {
    atomic_write(path, encode_matrix_file(mf));
}

inline MatrixFile read_matrix_file(const std::filesystem::path& path) { return decode_matrix_file(read_file(path)); }

inline std::string base64_encode(std::string_view in) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const auto v = (static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << 16) |
                       (static_cast<std::uint32_t>(static_cast<unsigned char>(in[i + 1])) << 8) |
                       static_cast<std::uint32_t>(static_cast<unsigned char>(in[i + 2]));
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
    }
    if (const std::size_t rest = in.size() - i; rest > 0) {
        std::uint32_t v = static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << 16;
        if (rest == 2) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i + 1])) << 8;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += rest == 2 ? table[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

inline std::string base64_decode(std::string_view in) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (in.size() % 4 != 0) throw FormatError("base64: length not a multiple of 4");
    std::string out;
    out.reserve(in.size() / 4 * 3);
    for (std::size_t i = 0; i < in.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = in[i + static_cast<std::size_t>(k)];
            if (c == '=' && i + 4 == in.size() && k >= 2) {
                v[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw FormatError("base64: bad padding");
                v[k] = value(c);
                if (v[k] < 0) throw FormatError("base64: invalid character");
            }
        }
        const std::uint32_t x = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                                (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
        out += static_cast<char>((x >> 16) & 0xff);
        if (pad < 2) out += static_cast<char>((x >> 8) & 0xff);
        if (pad < 1) out += static_cast<char>(x & 0xff);
    }
    return out;
}

/// One row of the history table.
struct HistoryRow {
    Index iteration = 0;
    Index m = 0;
    double res_m = 0.0;
    Index argmax_index = -1; // -1: no candidate left
    std::string stage;       // partition id, "merge:<level>:<left>", or "final"

    bool operator==(const HistoryRow&) const = default;
};

inline std::vector<HistoryRow> history_rows(const std::vector<ResidualRecord>& h, const std::string& stage) {
    std::vector<HistoryRow> out;
    out.reserve(h.size());
    for (std::size_t k = 0; k < h.size(); ++k)
        out.push_back({static_cast<Index>(k), h[k].m, h[k].residual, h[k].argmax, stage});
    return out;
}

inline std::string history_csv(const std::vector<HistoryRow>& rows) {
    std::string s = "iteration,m,res_m,argmax_index,stage\n";
    for (const HistoryRow& r : rows)
        s += std::to_string(r.iteration) + ',' + std::to_string(r.m) + ',' + format_double(r.res_m) + ',' +
             std::to_string(r.argmax_index) + ',' + r.stage + '\n';
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t k = s.find(sep, start);
        out.emplace_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
        if (k == std::string_view::npos) break;
        start = k + 1;
    }
    return out;
}

inline std::vector<HistoryRow> parse_history_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "iteration,m,res_m,argmax_index,stage")
        throw FormatError("history csv: bad header");
    std::vector<HistoryRow> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw FormatError("history csv: expected 5 fields");
        try {
            out.push_back({std::stol(f[0]), std::stol(f[1]), parse_double(f[2]), std::stol(f[3]), f[4]});
        } catch (const std::logic_error&) {
            throw FormatError("history csv: bad integer field");
        }
    }
    return out;
}

/// Everything needed to evaluate and audit an approximation; Q and R are not kept.
struct ModelFile {
    BarycentricModel model; // snapshots are rows of F
    RealVector d;           // column max-norms of F
    std::vector<Index> zero_columns;

    std::string method = "qr"; // sv | qr | pqr
    double tol = 0.0;
    double verify_tol = 0.0;
    std::string tol_mode = "practical";
    std::string p_norm = "inf";
    std::uint64_t seed = 0;
    Index partitions = 1;
    std::vector<HistoryRow> history;
    Json diagnostics = Json::object(); // method specific: rank, comm counters, node polynomial, ...
};

namespace detail {

inline Json complex_list(std::span<const Complex> v) {
    Json a = Json::array();
    for (Complex z : v) a.push_back(Json::array({z.real(), z.imag()}));
    return a;
}

inline double json_double(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw FormatError("model file: expected a number");
    return j.get<double>();
}

inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline std::vector<Complex> parse_complex_list(const Json& a, const char* what) {
    if (!a.is_array()) throw FormatError(std::string("model file: ") + what + " must be an array");
    std::vector<Complex> out;
    for (const Json& e : a) {
        if (!e.is_array() || e.size() != 2) throw FormatError(std::string("model file: ") + what + " entries are [re, im]");
        out.emplace_back(json_double(e[0]), json_double(e[1]));
    }
    return out;
}

} // namespace detail

inline Json model_to_json(const ModelFile& mf) {
    const BarycentricModel& m = mf.model;
    Json j;
    j["format"] = "ratbary-model";
    j["version"] = model_file_version;
    j["supports"] = detail::complex_list(m.supports);
    j["weights"] = detail::complex_list(std::span<const Complex>(m.weights.data(), static_cast<std::size_t>(m.weights.size())));
    j["support_indices"] = m.support_indices;
    detail::ByteWriter w;
    for (Index k = 0; k < m.snapshots.rows(); ++k)
        for (Index c = 0; c < m.snapshots.cols(); ++c) w.c128(m.snapshots(k, c));
    j["snapshots"] = {{"rows", m.snapshots.rows()},
                      {"cols", m.snapshots.cols()},
                      {"layout", "row-major complex128 little-endian"},
                      {"data", base64_encode(w.take())}};
    Json d = Json::array();
    for (Index k = 0; k < mf.d.size(); ++k) d.push_back(detail::json_number(mf.d(k)));
    j["column_scaling"] = d;
    j["zero_columns"] = mf.zero_columns;
    Json hist = Json::array();
    for (const HistoryRow& r : mf.history)
        hist.push_back({{"iteration", r.iteration},
                        {"m", r.m},
                        {"res_m", detail::json_number(r.res_m)},
                        {"argmax_index", r.argmax_index},
                        {"stage", r.stage}});
    j["metadata"] = {{"method", mf.method},
                     {"tol", mf.tol},
                     {"verify_tol", mf.verify_tol},
                     {"tol_mode", mf.tol_mode},
                     {"p_norm", mf.p_norm},
                     {"seed", mf.seed},
                     {"partitions", mf.partitions},
                     {"converged", m.converged},
                     {"exhausted", m.exhausted},
                     {"history", hist},
                     {"diagnostics", mf.diagnostics}};
    return j;
}

inline ModelFile model_from_json(const Json& j) {
    try {
        if (j.value("format", std::string()) != "ratbary-model") throw FormatError("not a model file");
        if (j.at("version").get<int>() != model_file_version) throw FormatError("unsupported model file version");
        ModelFile mf;
        BarycentricModel& m = mf.model;
        m.supports = detail::parse_complex_list(j.at("supports"), "supports");
        const std::vector<Complex> w = detail::parse_complex_list(j.at("weights"), "weights");
        m.weights = Eigen::Map<const ComplexVector>(w.data(), static_cast<Index>(w.size()));
        m.support_indices = j.at("support_indices").get<std::vector<Index>>();
        const Json& s = j.at("snapshots");
        const Index rows = s.at("rows").get<Index>(), cols = s.at("cols").get<Index>();
        if (rows < 0 || cols < 0) throw FormatError("model file: negative snapshot dimensions");
        const std::string bytes = base64_decode(s.at("data").get<std::string>());
        if (bytes.size() != static_cast<std::size_t>(rows * cols) * 16)
            throw FormatError("model file: snapshot payload length does not match its dimensions");
        detail::ByteReader r(bytes);
        m.snapshots.resize(rows, cols);
        for (Index k = 0; k < rows; ++k)
            for (Index c = 0; c < cols; ++c) m.snapshots(k, c) = r.c128();
        const Json& d = j.at("column_scaling");
        mf.d.resize(static_cast<Index>(d.size()));
        for (std::size_t k = 0; k < d.size(); ++k) mf.d(static_cast<Index>(k)) = detail::json_double(d[k]);
        mf.zero_columns = j.at("zero_columns").get<std::vector<Index>>();
        const Json& meta = j.at("metadata");
        mf.method = meta.at("method").get<std::string>();
        mf.tol = meta.at("tol").get<double>();
        mf.verify_tol = meta.at("verify_tol").get<double>();
        mf.tol_mode = meta.at("tol_mode").get<std::string>();
        mf.p_norm = meta.at("p_norm").get<std::string>();
        mf.seed = meta.at("seed").get<std::uint64_t>();
        mf.partitions = meta.at("partitions").get<Index>();
        m.converged = meta.at("converged").get<bool>();
        m.exhausted = meta.at("exhausted").get<bool>();
        for (const Json& h : meta.at("history"))
            mf.history.push_back({h.at("iteration").get<Index>(), h.at("m").get<Index>(),
                                  detail::json_double(h.at("res_m")), h.at("argmax_index").get<Index>(),
                                  h.at("stage").get<std::string>()});
        mf.diagnostics = meta.at("diagnostics");

        m.validate();
        if (mf.d.size() != m.columns()) throw FormatError("model file: column scaling length differs from snapshots");
        const double wn = m.weights.norm();
        if (!(std::abs(wn - 1.0) <= 1e-12)) throw FormatError("model file: weights do not have unit 2-norm");
        if (mf.method != "sv" && mf.method != "qr" && mf.method != "pqr")
            throw FormatError("model file: unknown method '" + mf.method + "'");
        if (mf.p_norm != "2" && mf.p_norm != "inf") throw FormatError("model file: p_norm must be 2 or inf");
        return mf;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    } catch (const InputError& e) {
        throw FormatError(std::string("model file: ") + e.what());
    } catch (const ParameterError& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
}

inline std::string encode_model_file(const ModelFile& mf) { return model_to_json(mf).dump(2) + "\n"; }

inline ModelFile decode_model_file(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file is not JSON: ") + e.what());
    }
    return model_from_json(j);
}

inline void write_model_file(const std::filesystem::path& path, const ModelFile& mf) {
    atomic_write(path, encode_model_file(mf));
}

inline ModelFile read_model_file(const std::filesystem::path& path) { return decode_model_file(read_file(path)); }

inline std::string to_string(PNorm p) { return p == PNorm::two ? "2" : "inf"; }

inline PNorm parse_p_norm(const std::string& s) {
    if (s == "2") return PNorm::two;
    if (s == "inf") return PNorm::inf;
    throw ParameterError("norm must be 2 or inf");
}

/// Points from a CSV of "re,im" lines (a header line starting with a letter is skipped).
inline std::vector<Complex> parse_points_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Complex> out;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && std::isalpha(static_cast<unsigned char>(line[0]))) {
            first = false;
            continue;
        }
        first = false;
        const auto f = split(line, ',');
        if (f.size() != 2) throw FormatError("points csv: expected 're,im' per line");
        out.emplace_back(parse_double(f[0]), parse_double(f[1]));
    }
    return out;
}

} // namespace ratbary

#endif
