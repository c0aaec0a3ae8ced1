#include "specmatch/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

std::vector<unsigned char> read_all_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

bool is_text_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ',' || c == '+' ||
           c == '-' || c == '.' || (c >= '0' && c <= '9');
}

double parse_double_token(const std::string& token, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw IoError("non-numeric value '" + token + "' in " + path);
    }
    return v;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : line) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

bool is_bare_integer(const std::string& token) {
    if (token.empty()) return false;
    for (const char c : token) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

}  // namespace

GroundTruth load_mask(const std::string& path, int width, int height) {
    if (width < 1 || height < 1) throw InvalidArgument("mask: dimensions must be >= 1");
    const std::vector<unsigned char> bytes = read_all_bytes(path);
    const std::size_t expected = static_cast<std::size_t>(width) * height;

    GroundTruth truth;
    truth.width = width;
    truth.height = height;

    bool text = true;
    for (const unsigned char c : bytes) {
        if (!is_text_byte(c)) {
            text = false;
            break;
        }
    }

    if (text) {
        const std::string content(bytes.begin(), bytes.end());
        const std::vector<std::string> tokens = split_tokens(content);
        if (tokens.size() != expected) {
            throw IoError("mask: expected " + std::to_string(expected) + " values, found " +
                          std::to_string(tokens.size()) + " in " + path);
        }
        truth.labels.reserve(expected);
        for (const std::string& token : tokens) {
            truth.labels.push_back(parse_double_token(token, path) != 0.0 ? 1 : 0);
        }
    } else {
        if (bytes.size() != expected) {
            throw IoError("mask: expected " + std::to_string(expected) + " values, found " +
                          std::to_string(bytes.size()) + " in " + path);
        }
        truth.labels.reserve(expected);
        for (const unsigned char c : bytes) truth.labels.push_back(c != 0 ? 1 : 0);
    }
    return truth;
}

void write_mask(const GroundTruth& truth, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("mask: cannot open " + path + " for writing");
    for (int row = 0; row < truth.height; ++row) {
        for (int col = 0; col < truth.width; ++col) {
            if (col) os << ' ';
            os << static_cast<int>(truth.labels[static_cast<std::size_t>(row) * truth.width + col]);
        }
        os << '\n';
    }
    os.flush();
    if (!os) throw IoError("mask: write failed for " + path);
}

void write_score_map(const ScoreMap& map, const std::string& path, ScoreMapFormat format) {
    map.validate();
    if (format == ScoreMapFormat::Csv) {
        std::ofstream os(path);
        if (!os) throw IoError("score map: cannot open " + path + " for writing");
        os << std::setprecision(17);
        for (int row = 0; row < map.height; ++row) {
            for (int col = 0; col < map.width; ++col) {
                if (col) os << ',';
                os << map.scores[static_cast<Eigen::Index>(row) * map.width + col];
            }
            os << '\n';
        }
        os.flush();
        if (!os) throw IoError("score map: write failed for " + path);
        return;
    }

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("score map: cannot open " + path + " for writing");
    os << "P5\n" << map.width << ' ' << map.height << "\n65535\n";
    const double lo = map.scores.minCoeff();
    const double hi = map.scores.maxCoeff();
    const double span = hi - lo;
    for (Eigen::Index i = 0; i < map.scores.size(); ++i) {
        long v = 0;
        if (span > 0.0) {
            v = std::lround((map.scores[i] - lo) / span * 65535.0);
            v = std::max(0L, std::min(65535L, v));
        }
        const auto u = static_cast<std::uint16_t>(v);
        const unsigned char b[2] = {static_cast<unsigned char>(u >> 8),
                                    static_cast<unsigned char>(u & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 2);
    }
    os.flush();
    if (!os) throw IoError("score map: write failed for " + path);
}

ScoreMap load_score_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("score map: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        const std::vector<std::string> tokens = split_tokens(line);
        if (tokens.empty()) continue;
        std::vector<double> row;
        row.reserve(tokens.size());
        for (const std::string& token : tokens) row.push_back(parse_double_token(token, path));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("score map: ragged rows in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("score map: no rows in " + path);

    ScoreMap map;
    map.width = static_cast<int>(rows.front().size());
    map.height = static_cast<int>(rows.size());
    map.scores.resize(static_cast<Eigen::Index>(map.width) * map.height);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            map.scores[static_cast<Eigen::Index>(r) * map.width + c] = rows[r][c];
        }
    }
    map.validate();
    return map;
}

PriorsFile load_priors_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("priors: cannot open " + path);

    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(is, line)) {
        const std::string::size_type hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::vector<std::string> tokens = split_tokens(line);
        if (!tokens.empty()) lines.push_back(std::move(tokens));
    }
    if (lines.empty()) throw IoError("priors: no entries in " + path);

    bool coords = true;
    for (const auto& tokens : lines) {
        if (tokens.size() != 2 || !is_bare_integer(tokens[0]) || !is_bare_integer(tokens[1])) {
            coords = false;
            break;
        }
    }

    PriorsFile out;
    out.is_coords = coords;
    if (coords) {
        out.coords.reserve(lines.size());
        for (const auto& tokens : lines) {
            out.coords.emplace_back(std::stoi(tokens[0]), std::stoi(tokens[1]));
        }
        return out;
    }

    const std::size_t bands = lines.front().size();
    out.spectra.resize(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(bands));
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != bands) throw IoError("priors: ragged spectra rows in " + path);
        for (std::size_t c = 0; c < bands; ++c) {
            out.spectra(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_double_token(lines[r][c], path);
        }
    }
    return out;
}

TargetPriorSet resolve_priors(const PriorsFile& file, const SpectralCube& cube) {
    cube.validate();
    TargetPriorSet priors;
    if (file.is_coords) {
        priors.spectra.resize(static_cast<Eigen::Index>(file.coords.size()), cube.bands());
        for (std::size_t i = 0; i < file.coords.size(); ++i) {
            const auto [col, row] = file.coords[i];
            if (col < 0 || col >= cube.width || row < 0 || row >= cube.height) {
                throw InvalidArgument("priors: coordinate (" + std::to_string(col) + ", " +
                                      std::to_string(row) + ") outside the cube");
            }
            priors.spectra.row(static_cast<Eigen::Index>(i)) =
                cube.data.row(static_cast<Eigen::Index>(row) * cube.width + col);
        }
    } else {
        if (file.spectra.cols() != cube.bands()) {
            throw InvalidArgument("priors: spectra have " + std::to_string(file.spectra.cols()) +
                                  " bands, cube has " + std::to_string(cube.bands()));
        }
        priors.spectra = file.spectra;
    }
    priors.validate();
    return priors;
}

void write_priors_csv(const TargetPriorSet& priors, const std::string& path) {
    priors.validate();
    std::ofstream os(path);
    if (!os) throw IoError("priors: cannot open " + path + " for writing");
    os << std::setprecision(17);
    for (int t = 0; t < priors.count(); ++t) {
        for (Eigen::Index b = 0; b < priors.spectra.cols(); ++b) {
            if (b) os << ',';
            os << priors.spectra(t, b);
        }
        os << '\n';
    }
    os.flush();
    if (!os) throw IoError("priors: write failed for " + path);
}

void write_loss_trace(const std::vector<double>& trace, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("loss trace: cannot open " + path + " for writing");
    os << "epoch,loss\n" << std::setprecision(17);
    for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
    os.flush();
    if (!os) throw IoError("loss trace: write failed for " + path);
}

}  // namespace specmatch
