#include "topoprior/field.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace topoprior {

namespace {

void check_extents(std::span<const std::size_t> extents) {
    if (extents.size() != 2 && extents.size() != 3) {
        throw DataError("field must have 2 or 3 dimensions, got " + std::to_string(extents.size()));
    }
    std::size_t total = 1;
    for (std::size_t e : extents) {
        if (e == 0) throw DataError("field extents must be positive");
        if (total > std::numeric_limits<std::uint32_t>::max() / e) {
            throw DataError("field too large for 32-bit pixel indices");
        }
        total *= e;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// --- NPY header parsing -----------------------------------------------------

struct NpyHeader {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

class HeaderCursor {
public:
    explicit HeaderCursor(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!consume(c)) throw DataError(std::string("malformed NPY header: expected '") + c + "'");
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    std::string quoted() {
        skip_ws();
        if (pos_ >= s_.size() || (s_[pos_] != '\'' && s_[pos_] != '"')) {
            throw DataError("malformed NPY header: expected string");
        }
        char q = s_[pos_++];
        auto end = s_.find(q, pos_);
        if (end == std::string_view::npos) throw DataError("malformed NPY header: unterminated string");
        std::string out(s_.substr(pos_, end - pos_));
        pos_ = end + 1;
        return out;
    }
    std::string word() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

NpyHeader parse_npy_header(std::string_view text) {
    NpyHeader h;
    bool have_descr = false, have_order = false, have_shape = false;
    HeaderCursor cur(text);
    cur.expect('{');
    while (cur.peek() != '}') {
        std::string key = cur.quoted();
        cur.expect(':');
        if (key == "descr") {
            h.descr = cur.quoted();
            have_descr = true;
        } else if (key == "fortran_order") {
            std::string w = cur.word();
            if (w == "True") h.fortran_order = true;
            else if (w == "False") h.fortran_order = false;
            else throw DataError("malformed NPY header: bad fortran_order");
            have_order = true;
        } else if (key == "shape") {
            cur.expect('(');
            while (cur.peek() != ')') {
                std::string w = cur.word();
                std::size_t v = 0;
                auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
                if (ec != std::errc() || p != w.data() + w.size() || w.empty()) {
                    throw DataError("malformed NPY header: bad shape entry");
                }
                h.shape.push_back(v);
                if (!cur.consume(',')) break;
            }
            cur.expect(')');
            have_shape = true;
        } else {
            throw DataError("malformed NPY header: unknown key '" + key + "'");
        }
        if (!cur.consume(',')) break;
    }
    cur.expect('}');
    if (!have_descr || !have_order || !have_shape) {
        throw DataError("malformed NPY header: missing descr/fortran_order/shape");
    }
    return h;
}

std::uint32_t byte_swap(std::uint32_t v) { return __builtin_bswap32(v); }
std::uint64_t byte_swap(std::uint64_t v) { return __builtin_bswap64(v); }

template <class T>
T load_scalar(const char* p, bool swap) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits;
    std::memcpy(&bits, p, sizeof(U));
    if (swap) bits = byte_swap(bits);
    return std::bit_cast<T>(bits);
}

// --- PGM token reader --------------------------------------------------------

class PgmReader {
public:
    explicit PgmReader(std::string_view s) : s_(s) {}

    unsigned long number() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw DataError("malformed PGM: expected integer");
        unsigned long v = 0;
        std::from_chars(s_.data() + start, s_.data() + pos_, v);
        return v;
    }
    // Exactly one whitespace byte separates the header from P5 raster data.
    void raster_separator() {
        if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            throw DataError("malformed PGM header");
        }
        ++pos_;
    }
    std::size_t pos() const { return pos_; }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

void require_2d(const ScalarField& field, std::string_view format) {
    if (field.ndim() != 2) {
        throw DataError(std::string(format) + " supports 2D fields only, got shape " + field.shape().to_string());
    }
}

}  // namespace

// --- Shape -------------------------------------------------------------------

Shape::Shape(std::initializer_list<std::size_t> extents)
    : Shape(std::span<const std::size_t>(extents.begin(), extents.size())) {}

Shape::Shape(std::span<const std::size_t> extents) {
    check_extents(extents);
    ndim_ = static_cast<int>(extents.size());
    std::copy(extents.begin(), extents.end(), extents_.begin());
    for (int a = ndim_; a < 3; ++a) extents_[a] = 1;
}

std::size_t Shape::size() const {
    if (ndim_ == 0) return 0;
    return extents_[0] * extents_[1] * extents_[2];
}

std::array<std::size_t, 3> Shape::coords(PixelIndex index) const {
    std::array<std::size_t, 3> c{0, 0, 0};
    std::size_t rest = index.value;
    for (int a = ndim_ - 1; a >= 0; --a) {
        c[a] = rest % extents_[a];
        rest /= extents_[a];
    }
    return c;
}

PixelIndex Shape::index(std::span<const std::size_t> coords) const {
    std::size_t linear = 0;
    for (int a = 0; a < ndim_; ++a) linear = linear * extents_[a] + coords[a];
    return PixelIndex{static_cast<std::uint32_t>(linear)};
}

std::vector<std::size_t> Shape::extents() const {
    return {extents_.begin(), extents_.begin() + ndim_};
}

std::string Shape::to_string() const {
    std::string s = "[";
    for (int a = 0; a < ndim_; ++a) {
        if (a) s += ",";
        s += std::to_string(extents_[a]);
    }
    return s + "]";
}

// --- ScalarField -----------------------------------------------------------

ScalarField::ScalarField(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_.ndim() == 0) throw DataError("field shape is empty");
    if (values_.size() != shape_.size()) {
        throw DataError("value count " + std::to_string(values_.size()) + " does not match shape " +
                        shape_.to_string());
    }
    normalized_ = true;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        double v = values_[i];
        if (!std::isfinite(v)) throw DataError("non-finite value at index " + std::to_string(i));
        if (v < 0.0 || v > 1.0) normalized_ = false;
    }
}

ScalarField ScalarField::constant(Shape shape, double value) {
    std::size_t n = shape.size();
    return ScalarField(std::move(shape), std::vector<double>(n, value));
}

double ScalarField::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

ScalarField ScalarField::with_values(std::vector<double> values) const {
    return ScalarField(shape_, std::move(values));
}

// --- formats -----------------------------------------------------------------

FieldFormat parse_format(std::string_view name) {
    if (name == "csv") return FieldFormat::csv;
    if (name == "npy") return FieldFormat::npy;
    if (name == "pgm") return FieldFormat::pgm;
    throw DataError("unknown field format '" + std::string(name) + "'");
}

std::string_view format_name(FieldFormat format) {
    switch (format) {
        case FieldFormat::csv: return "csv";
        case FieldFormat::npy: return "npy";
        case FieldFormat::pgm: return "pgm";
    }
    return "?";
}

FieldFormat format_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext.size() > 1) return parse_format(std::string_view(ext).substr(1));
    throw DataError("cannot infer format of " + path.string() + "; pass --format");
}

ScalarField parse_csv(std::string_view text) {
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::size_t line_start = 0;
    while (line_start < text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        line_start = line_end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::size_t count = 0;
        std::size_t pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            std::string_view cell = line.substr(pos, comma == std::string_view::npos ? line.size() - pos : comma - pos);
            while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty()) {
                throw DataError("malformed CSV value '" + std::string(cell) + "' on row " + std::to_string(rows + 1));
            }
            if (!std::isfinite(v)) throw DataError("non-finite CSV value on row " + std::to_string(rows + 1));
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) cols = count;
        else if (count != cols) throw DataError("ragged CSV: row " + std::to_string(rows + 1) + " has " +
                                                std::to_string(count) + " values, expected " + std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw DataError("empty CSV");
    return ScalarField(Shape{rows, cols}, std::move(values));
}

std::string format_csv(const ScalarField& field) {
    require_2d(field, "csv");
    const std::size_t rows = field.shape()[0], cols = field.shape()[1];
    std::string out;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out += ',';
            out += format_double(field.at(r * cols + c));
        }
        out += '\n';
    }
    return out;
}

ScalarField parse_npy(std::string_view bytes) {
    static constexpr std::string_view magic = "\x93NUMPY";
    if (bytes.size() < 10 || bytes.substr(0, 6) != magic) throw DataError("not an NPY file (bad magic)");
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    if (major != 1 || minor != 0) {
        throw DataError("unsupported NPY version " + std::to_string(major) + "." + std::to_string(minor));
    }
    const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    if (bytes.size() < 10 + header_len) throw DataError("truncated NPY header");
    NpyHeader h = parse_npy_header(bytes.substr(10, header_len));

    if (h.fortran_order) throw DataError("Fortran-order NPY arrays are not supported");
    if (h.descr.size() != 3 || h.descr[1] != 'f' || (h.descr[2] != '4' && h.descr[2] != '8')) {
        throw DataError("unsupported NPY dtype '" + h.descr + "' (need float32 or float64)");
    }
    const char order = h.descr[0];
    if (order != '<' && order != '>' && order != '=' && order != '|') {
        throw DataError("unsupported NPY byte order in '" + h.descr + "'");
    }
    const bool big = order == '>' || ((order == '=' || order == '|') && std::endian::native == std::endian::big);
    const bool swap = big != (std::endian::native == std::endian::big);
    Shape shape(h.shape);  // validates 2 or 3 dims

    const std::size_t width = h.descr[2] == '4' ? 4 : 8;
    const std::size_t n = shape.size();
    std::string_view payload = bytes.substr(10 + header_len);
    if (payload.size() != n * width) {
        throw DataError("NPY payload has " + std::to_string(payload.size()) + " bytes, expected " +
                        std::to_string(n * width));
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const char* p = payload.data() + i * width;
        values[i] = width == 4 ? static_cast<double>(load_scalar<float>(p, swap)) : load_scalar<double>(p, swap);
    }
    return ScalarField(std::move(shape), std::move(values));
}

std::string format_npy(const ScalarField& field) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
    for (int a = 0; a < field.ndim(); ++a) {
        dict += std::to_string(field.shape()[a]);
        dict += ", ";
    }
    if (field.ndim() > 1) dict.resize(dict.size() - 1);  // "(4, 4)" not "(4, 4, )"
    dict.back() = ')';
    dict += ", }";
    // Pad so magic + len + header is a multiple of 64, terminated by '\n'.
    std::size_t total = 10 + dict.size() + 1;
    dict.append((64 - total % 64) % 64, ' ');
    dict += '\n';

    std::string out = "\x93NUMPY";
    out += '\x01';
    out += '\x00';
    out += static_cast<char>(dict.size() & 0xff);
    out += static_cast<char>((dict.size() >> 8) & 0xff);
    out += dict;
    out.reserve(out.size() + field.size() * 8);
    for (double v : field.values()) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char buf[8];
        std::memcpy(buf, &bits, 8);
        out.append(buf, 8);
    }
    return out;
}

ScalarField parse_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw DataError("not a P2/P5 PGM file");
    }
    const bool binary = bytes[1] == '5';
    PgmReader rd(bytes.substr(2));
    const unsigned long width = rd.number();
    const unsigned long height = rd.number();
    const unsigned long maxval = rd.number();
    if (width == 0 || height == 0) throw DataError("malformed PGM header: zero extent");
    if (maxval == 0 || maxval > 65535) throw DataError("malformed PGM header: maxval out of range");

    const std::size_t n = width * height;
    std::vector<double> values(n);
    const double scale = static_cast<double>(maxval);
    if (binary) {
        rd.raster_separator();
        std::string_view raster = bytes.substr(2 + rd.pos());
        const std::size_t bpp = maxval < 256 ? 1 : 2;
        if (raster.size() < n * bpp) throw DataError("truncated PGM raster");
        for (std::size_t i = 0; i < n; ++i) {
            unsigned long v = static_cast<unsigned char>(raster[i * bpp]);
            if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(raster[i * bpp + 1]);
            if (v > maxval) throw DataError("PGM sample exceeds maxval");
            values[i] = static_cast<double>(v) / scale;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            unsigned long v = rd.number();
            if (v > maxval) throw DataError("PGM sample exceeds maxval");
            values[i] = static_cast<double>(v) / scale;
        }
    }
    return ScalarField(Shape{height, width}, std::move(values));
}

std::string format_pgm(const ScalarField& field, unsigned maxval) {
    require_2d(field, "pgm");
    if (maxval == 0 || maxval > 65535) throw DataError("PGM maxval must be in [1, 65535]");
    if (!field.normalized()) throw DataError("PGM output requires values in [0, 1]");
    std::string out = "P5\n" + std::to_string(field.shape()[1]) + " " + std::to_string(field.shape()[0]) + "\n" +
                      std::to_string(maxval) + "\n";
    for (double v : field.values()) {
        // nearbyint honours the default round-to-nearest, ties-to-even mode.
        auto q = static_cast<unsigned long>(std::nearbyint(v * maxval));
        if (maxval >= 256) out += static_cast<char>((q >> 8) & 0xff);
        out += static_cast<char>(q & 0xff);
    }
    return out;
}

ScalarField load_field(const std::filesystem::path& path, FieldFormat format) {
    std::string bytes = read_file(path);
    switch (format) {
        case FieldFormat::csv: return parse_csv(bytes);
        case FieldFormat::npy: return parse_npy(bytes);
        case FieldFormat::pgm: return parse_pgm(bytes);
    }
    throw DataError("unknown format");
}

void save_field(const ScalarField& field, const std::filesystem::path& path, FieldFormat format) {
    switch (format) {
        case FieldFormat::csv: write_file(path, format_csv(field)); return;
        case FieldFormat::npy: write_file(path, format_npy(field)); return;
        case FieldFormat::pgm: write_file(path, format_pgm(field)); return;
    }
}

ScalarField clamp_unit(const ScalarField& field) {
    std::vector<double> out(field.values().begin(), field.values().end());
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
    return field.with_values(std::move(out));
}

}  // namespace topoprior
