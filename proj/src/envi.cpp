#include "specmatch/envi.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

int parse_int_field(const std::string& key, const std::string& value, const std::string& path) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw IoError("envi: field '" + key + "' has non-numeric value '" + value + "' in " + path);
    }
}

}  // namespace

void EnviHeader::validate() const {
    if (samples < 1 || lines < 1 || bands < 1) {
        throw IoError("envi: samples, lines and bands must all be >= 1");
    }
    if (header_offset < 0) throw IoError("envi: negative header offset");
    element_size();
}

int EnviHeader::element_size() const {
    switch (data_type) {
        case 4: return 4;
        case 5: return 8;
        case 12: return 2;
        default:
            throw IoError("envi: unsupported data type code " + std::to_string(data_type) +
                          " (supported: 4, 5, 12)");
    }
}

EnviHeader parse_envi_header(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("envi: cannot open header " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        std::string t = trim(line);
        if (first) {
            first = false;
            if (t == "ENVI") continue;
        }
        if (t.empty() || t[0] == ';') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = lower(trim(t.substr(0, eq)));
        std::string value = trim(t.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            // Array-valued fields (wavelengths, map info, ...) may span lines;
            // consume and ignore them.
            while (value.find('}') == std::string::npos && std::getline(is, line)) value += line;
            continue;
        }
        kv[key] = value;
    }

    const auto require = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw IoError("envi: missing mandatory field '" + key + "' in " + path);
        }
        return it->second;
    };

    EnviHeader h;
    h.samples = parse_int_field("samples", require("samples"), path);
    h.lines = parse_int_field("lines", require("lines"), path);
    h.bands = parse_int_field("bands", require("bands"), path);
    h.data_type = parse_int_field("data type", require("data type"), path);

    const std::string il = lower(require("interleave"));
    if (il == "bsq") {
        h.interleave = Interleave::BSQ;
    } else if (il == "bil") {
        h.interleave = Interleave::BIL;
    } else if (il == "bip") {
        h.interleave = Interleave::BIP;
    } else {
        throw IoError("envi: unknown interleave '" + il + "' in " + path);
    }

    if (kv.count("byte order")) {
        h.byte_order = parse_int_field("byte order", kv["byte order"], path);
        if (h.byte_order != 0 && h.byte_order != 1) {
            throw IoError("envi: byte order must be 0 or 1 in " + path);
        }
    }
    if (kv.count("header offset")) {
        h.header_offset = parse_int_field("header offset", kv["header offset"], path);
    }
    h.validate();
    return h;
}

namespace {

double decode_element(const unsigned char* p, int data_type, int byte_order) {
    switch (data_type) {
        case 12: {
            const auto v = byte_order == 0
                               ? static_cast<std::uint16_t>(p[0] | (p[1] << 8))
                               : static_cast<std::uint16_t>(p[1] | (p[0] << 8));
            return static_cast<double>(v);
        }
        case 4: {
            std::uint32_t v = 0;
            for (int i = 0; i < 4; ++i) {
                const int shift = byte_order == 0 ? 8 * i : 8 * (3 - i);
                v |= static_cast<std::uint32_t>(p[i]) << shift;
            }
            return static_cast<double>(std::bit_cast<float>(v));
        }
        default: {
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i) {
                const int shift = byte_order == 0 ? 8 * i : 8 * (7 - i);
                v |= static_cast<std::uint64_t>(p[i]) << shift;
            }
            return std::bit_cast<double>(v);
        }
    }
}

long long file_index(const EnviHeader& h, int row, int col, int band) {
    const long long plane = static_cast<long long>(h.samples) * h.lines;
    switch (h.interleave) {
        case Interleave::BSQ:
            return band * plane + static_cast<long long>(row) * h.samples + col;
        case Interleave::BIL:
            return (static_cast<long long>(row) * h.bands + band) * h.samples + col;
        default:  // BIP
            return (static_cast<long long>(row) * h.samples + col) * h.bands + band;
    }
}

}  // namespace

SpectralCube load_envi(const std::string& header_path, const std::string& data_path) {
    const EnviHeader h = parse_envi_header(header_path);

    std::ifstream is(data_path, std::ios::binary);
    if (!is) throw IoError("envi: cannot open data file " + data_path);
    is.seekg(0, std::ios::end);
    const long long size = static_cast<long long>(is.tellg());
    const long long count = static_cast<long long>(h.samples) * h.lines * h.bands;
    const long long need = h.header_offset + count * h.element_size();
    if (size < need) {
        throw IoError("envi: data file truncated: " + data_path + " holds " +
                      std::to_string(size) + " bytes, need " + std::to_string(need));
    }
    is.seekg(h.header_offset, std::ios::beg);
    std::vector<unsigned char> buf(static_cast<std::size_t>(count) * h.element_size());
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw IoError("envi: read failed on " + data_path);

    SpectralCube cube;
    cube.width = h.samples;
    cube.height = h.lines;
    cube.data.resize(static_cast<Eigen::Index>(h.samples) * h.lines, h.bands);
    for (int row = 0; row < h.lines; ++row) {
        for (int col = 0; col < h.samples; ++col) {
            const Eigen::Index pix = static_cast<Eigen::Index>(row) * h.samples + col;
            for (int b = 0; b < h.bands; ++b) {
                const unsigned char* p = buf.data() + file_index(h, row, col, b) * h.element_size();
                cube.data(pix, b) = decode_element(p, h.data_type, h.byte_order);
            }
        }
    }
    cube.validate();
    return cube;
}

void write_envi(const SpectralCube& cube, const std::string& header_path,
                const std::string& data_path, Interleave interleave, int data_type,
                int byte_order) {
    cube.validate();
    if (data_type != 4 && data_type != 5) {
        throw InvalidArgument("envi: write supports data types 4 and 5 only");
    }
    if (byte_order != 0 && byte_order != 1) {
        throw InvalidArgument("envi: byte order must be 0 or 1");
    }

    EnviHeader h;
    h.samples = cube.width;
    h.lines = cube.height;
    h.bands = cube.bands();
    h.interleave = interleave;
    h.data_type = data_type;
    h.byte_order = byte_order;

    {
        std::ofstream os(header_path);
        if (!os) throw IoError("envi: cannot open header " + header_path + " for writing");
        const char* il = interleave == Interleave::BSQ   ? "bsq"
                         : interleave == Interleave::BIL ? "bil"
                                                         : "bip";
        os << "ENVI\n"
           << "samples = " << h.samples << "\n"
           << "lines = " << h.lines << "\n"
           << "bands = " << h.bands << "\n"
           << "header offset = 0\n"
           << "file type = ENVI Standard\n"
           << "data type = " << data_type << "\n"
           << "interleave = " << il << "\n"
           << "byte order = " << byte_order << "\n";
        os.flush();
        if (!os) throw IoError("envi: header write failed for " + header_path);
    }

    const long long count = static_cast<long long>(h.samples) * h.lines * h.bands;
    std::vector<unsigned char> buf(static_cast<std::size_t>(count) * h.element_size());
    for (int row = 0; row < h.lines; ++row) {
        for (int col = 0; col < h.samples; ++col) {
            const Eigen::Index pix = static_cast<Eigen::Index>(row) * h.samples + col;
            for (int b = 0; b < h.bands; ++b) {
                unsigned char* p = buf.data() + file_index(h, row, col, b) * h.element_size();
                const double value = cube.data(pix, b);
                if (data_type == 4) {
                    const auto v = std::bit_cast<std::uint32_t>(static_cast<float>(value));
                    for (int i = 0; i < 4; ++i) {
                        const int shift = byte_order == 0 ? 8 * i : 8 * (3 - i);
                        p[i] = static_cast<unsigned char>(v >> shift);
                    }
                } else {
                    const auto v = std::bit_cast<std::uint64_t>(value);
                    for (int i = 0; i < 8; ++i) {
                        const int shift = byte_order == 0 ? 8 * i : 8 * (7 - i);
                        p[i] = static_cast<unsigned char>(v >> shift);
                    }
                }
            }
        }
    }
    std::ofstream os(data_path, std::ios::binary);
    if (!os) throw IoError("envi: cannot open data file " + data_path + " for writing");
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    os.flush();
    if (!os) throw IoError("envi: data write failed for " + data_path);
}

}  // namespace specmatch
